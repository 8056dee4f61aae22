#pragma once

#include <optional>
#include <string>
#include <vector>

namespace edusim::stats {

struct MarkSample {
  std::string label;
  std::vector<double> marks;  // each in [0, 100]

  void validate() const;
};

// Summary columns of a marks table. Variance is the population variance
// (divide by n); coeff_variation is absent when the mean is 0.
struct CohortStats {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double stddev = 0.0;
  std::optional<double> coeff_variation;

  bool operator==(const CohortStats&) const = default;
};

struct ReportRow {
  std::string label;
  CohortStats stats;
  std::optional<double> improvement_percent;  // absent for the baseline
};

// (index, baseline mark, other mark) for side-by-side plotting.
struct PairedPoint {
  std::size_t index;
  double baseline;
  double other;
};

struct PairedSeries {
  std::string label;
  std::vector<PairedPoint> points;
};

struct ComparativeReport {
  std::string baseline_label;
  std::vector<ReportRow> rows;  // baseline first
  std::vector<PairedSeries> paired;  // only for cohorts the same length as the baseline
};

struct Bin {
  double lower_edge;
  std::size_t count;
};

struct Histogram {
  double bin_width = 10.0;
  std::vector<Bin> bins;
};

inline constexpr int kStatsDecimals = 2;
inline constexpr int kPercentDecimals = 1;
inline constexpr double kDefaultBinWidth = 10.0;

CohortStats summarize(const MarkSample& sample);

/// Percentage gain of new_stats.mean over baseline_stats.mean.
double improvement(const CohortStats& new_stats, const CohortStats& baseline_stats);
double improvement(double new_mean, double baseline_mean);

/// Bins [0,w), [w,2w), ... up to the first bin whose upper edge reaches 100;
/// a mark of exactly 100 goes in that final bin.
Histogram histogram(const MarkSample& sample, double bin_width = kDefaultBinWidth);

ComparativeReport compare_cohorts(const MarkSample& baseline,
                                  const std::vector<MarkSample>& others);

// Published (display-precision) values for one cohort, used to check a report
// against a reference table.
struct ReferenceRow {
  std::string label;
  std::optional<double> mean;
  std::optional<double> variance;
  std::optional<double> stddev;
  std::optional<double> coeff_variation;
  std::optional<double> improvement_percent;
};

struct Discrepancy {
  std::string label;
  std::string field;
  std::string computed;   // display-formatted
  std::string reference;  // display-formatted
  std::optional<double> computed_value;  // full precision
};

/// Fields where the report's display values differ from the reference.
/// Labels missing on either side are skipped.
std::vector<Discrepancy> diagnose(const ComparativeReport& report,
                                  const std::vector<ReferenceRow>& reference);

// Display strings: 5 significant digits, then truncated to 2 decimals
// (1 for percentages). Computation always keeps full precision.
std::string display_stat(double value);
std::string display_percent(double value);

std::string ascii_chart(const Histogram& h, std::size_t max_bar = 50);

}  // namespace edusim::stats
