#include "edusim/marks_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "edusim/errors.hpp"
#include "edusim/format.hpp"

namespace edusim::csv {
namespace {

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

// Decimal with at most two fractional digits, no sign, no exponent.
double parse_mark(std::string_view text, std::size_t line) {
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  auto digits = [](std::string_view s) {
    return s.find_first_not_of("0123456789") == std::string_view::npos;
  };
  if (whole.empty() || !digits(whole) || !digits(frac) || frac.size() > 2 ||
      (dot != std::string_view::npos && frac.empty())) {
    throw ParseError(line, "mark '" + std::string(text) + "' is not a decimal with up to 2 places");
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, "mark '" + std::string(text) + "' is not a number");
  }
  if (value < 0.0 || value > 100.0) {
    throw ParseError(line, "mark " + std::string(text) + " is outside [0, 100]");
  }
  return value;
}

std::optional<double> parse_optional(std::string_view text, std::size_t line) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ParseError(line, "'" + std::string(text) + "' is not a number");
  }
  return value;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path);
  return in;
}

}  // namespace

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<MarkRow> read_marks(std::istream& is) {
  std::string raw;
  if (!std::getline(is, raw)) throw ParseError(1, "missing header; expected '" + std::string(kMarksHeader) + "'");
  if (std::string_view h = strip_cr(raw); h != kMarksHeader &&
      !(h.size() == kMarksHeader.size() + 3 && h.starts_with("\xEF\xBB\xBF") && h.substr(3) == kMarksHeader)) {
    throw ParseError(1, "bad header '" + std::string(h) + "'; expected '" + std::string(kMarksHeader) + "'");
  }
  std::vector<MarkRow> rows;
  std::size_t line = 1;
  while (std::getline(is, raw)) {
    ++line;
    const std::string_view text = strip_cr(raw);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    if (fields.size() != 3) {
      throw ParseError(line, "expected 3 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(line, "empty cohort label");
    if (fields[1].empty()) throw ParseError(line, "empty student_id");
    rows.push_back({fields[0], fields[1], parse_mark(fields[2], line)});
  }
  return rows;
}

std::vector<MarkRow> read_marks_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_marks(in);
}

std::vector<stats::MarkSample> group_by_cohort(const std::vector<MarkRow>& rows) {
  std::vector<stats::MarkSample> samples;
  for (const auto& r : rows) {
    auto it = std::find_if(samples.begin(), samples.end(),
                           [&](const stats::MarkSample& s) { return s.label == r.cohort; });
    if (it == samples.end()) {
      samples.push_back({r.cohort, {}});
      it = std::prev(samples.end());
    }
    it->marks.push_back(r.mark);
  }
  return samples;
}

void write_marks(std::ostream& os, const std::vector<MarkRow>& rows) {
  os << kMarksHeader << '\n';
  for (const auto& r : rows) {
    os << r.cohort << ',' << r.student_id << ',' << format_fixed(r.mark, 2) << '\n';
  }
}

void write_report(std::ostream& os, const stats::ComparativeReport& report) {
  os << kReportHeader << '\n';
  for (const auto& row : report.rows) {
    const auto& s = row.stats;
    os << row.label << ',' << s.n << ',' << format_exact(s.mean) << ',' << format_exact(s.variance)
       << ',' << format_exact(s.stddev) << ','
       << (s.coeff_variation ? format_exact(*s.coeff_variation) : "") << ','
       << (row.improvement_percent ? format_exact(*row.improvement_percent) : "") << '\n';
  }
}

void write_histogram(std::ostream& os, const stats::Histogram& h) {
  os << kHistogramHeader << '\n';
  for (const auto& b : h.bins) os << format_exact(b.lower_edge) << ',' << b.count << '\n';
}

std::vector<stats::ReferenceRow> read_reference(std::istream& is) {
  static constexpr std::string_view kHeader =
      "label,mean,variance,stddev,coeff_variation,improvement_percent";
  std::string raw;
  if (!std::getline(is, raw) || strip_cr(raw) != kHeader) {
    throw ParseError(1, "bad header; expected '" + std::string(kHeader) + "'");
  }
  std::vector<stats::ReferenceRow> rows;
  std::size_t line = 1;
  while (std::getline(is, raw)) {
    ++line;
    const std::string_view text = strip_cr(raw);
    if (text.empty()) continue;
    const auto f = split_fields(text);
    if (f.size() != 6) throw ParseError(line, "expected 6 fields, found " + std::to_string(f.size()));
    rows.push_back({f[0], parse_optional(f[1], line), parse_optional(f[2], line),
                    parse_optional(f[3], line), parse_optional(f[4], line),
                    parse_optional(f[5], line)});
  }
  return rows;
}

std::vector<stats::ReferenceRow> read_reference_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_reference(in);
}

}  // namespace edusim::csv
