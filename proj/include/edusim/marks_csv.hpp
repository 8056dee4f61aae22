#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "edusim/stats.hpp"

namespace edusim::csv {

// One row of the marks schema `cohort,student_id,mark`.
struct MarkRow {
  std::string cohort;
  std::string student_id;
  double mark = 0.0;
};

inline constexpr std::string_view kMarksHeader = "cohort,student_id,mark";
inline constexpr std::string_view kReportHeader =
    "label,n,mean,variance,stddev,coeff_variation,improvement_percent";
inline constexpr std::string_view kHistogramHeader = "bin_lower,count";

/// Parses a marks file. Errors carry the 1-based line number of the offending row.
std::vector<MarkRow> read_marks(std::istream& is);
std::vector<MarkRow> read_marks_file(const std::string& path);

/// Groups rows by cohort, in order of first appearance.
std::vector<stats::MarkSample> group_by_cohort(const std::vector<MarkRow>& rows);

void write_marks(std::ostream& os, const std::vector<MarkRow>& rows);

/// Report CSV. Numbers are written at full round-trip precision; the baseline
/// improvement cell (and an undefined coefficient of variation) is left empty.
void write_report(std::ostream& os, const stats::ComparativeReport& report);

void write_histogram(std::ostream& os, const stats::Histogram& h);

/// Reference table with header
/// `label,mean,variance,stddev,coeff_variation,improvement_percent`; empty cells allowed.
std::vector<stats::ReferenceRow> read_reference(std::istream& is);
std::vector<stats::ReferenceRow> read_reference_file(const std::string& path);

std::vector<std::string> split_fields(std::string_view line);

}  // namespace edusim::csv
