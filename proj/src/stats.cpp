#include "edusim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "edusim/errors.hpp"
#include "edusim/format.hpp"

namespace edusim::stats {

void MarkSample::validate() const {
  if (marks.empty()) throw InvalidArgument("sample '" + label + "' has no marks");
  for (double m : marks) {
    if (!std::isfinite(m) || m < 0.0 || m > 100.0) {
      throw InvalidArgument("mark " + format_exact(m) + " in '" + label +
                            "' is outside [0, 100]");
    }
  }
}

CohortStats summarize(const MarkSample& sample) {
  sample.validate();
  // Welford accumulation; population variance at the end.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : sample.marks) {
    ++k;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  CohortStats s;
  s.n = k;
  s.mean = mean;
  s.variance = std::max(0.0, m2 / static_cast<double>(k));
  s.stddev = std::sqrt(s.variance);
  if (mean != 0.0) s.coeff_variation = s.stddev / mean;
  return s;
}

double improvement(double new_mean, double baseline_mean) {
  if (!(baseline_mean > 0.0)) throw InvalidArgument("baseline mean must be positive");
  return 100.0 * (new_mean - baseline_mean) / baseline_mean;
}

double improvement(const CohortStats& new_stats, const CohortStats& baseline_stats) {
  return improvement(new_stats.mean, baseline_stats.mean);
}

Histogram histogram(const MarkSample& sample, double bin_width) {
  if (!std::isfinite(bin_width) || bin_width <= 0.0) {
    throw InvalidArgument("bin width must be positive");
  }
  sample.validate();
  const auto nbins = static_cast<std::size_t>(std::max(1.0, std::ceil(100.0 / bin_width)));
  Histogram h{bin_width, {}};
  h.bins.reserve(nbins);
  for (std::size_t i = 0; i < nbins; ++i) h.bins.push_back({bin_width * static_cast<double>(i), 0});
  for (double m : sample.marks) {
    const auto idx = std::min(static_cast<std::size_t>(m / bin_width), nbins - 1);
    ++h.bins[idx].count;
  }
  return h;
}

ComparativeReport compare_cohorts(const MarkSample& baseline,
                                  const std::vector<MarkSample>& others) {
  std::set<std::string> seen{baseline.label};
  for (const auto& o : others) {
    if (!seen.insert(o.label).second) throw InvalidArgument("duplicate cohort label '" + o.label + "'");
  }

  ComparativeReport report;
  report.baseline_label = baseline.label;
  const CohortStats base = summarize(baseline);
  report.rows.push_back({baseline.label, base, std::nullopt});
  for (const auto& o : others) {
    const CohortStats s = summarize(o);
    report.rows.push_back({o.label, s, improvement(s, base)});
    if (o.marks.size() == baseline.marks.size()) {
      PairedSeries series{o.label, {}};
      for (std::size_t i = 0; i < o.marks.size(); ++i) {
        series.points.push_back({i, baseline.marks[i], o.marks[i]});
      }
      report.paired.push_back(std::move(series));
    }
  }
  return report;
}

std::string display_stat(double value) { return format_display(value, kStatsDecimals); }
std::string display_percent(double value) { return format_display(value, kPercentDecimals); }

std::vector<Discrepancy> diagnose(const ComparativeReport& report,
                                  const std::vector<ReferenceRow>& reference) {
  std::vector<Discrepancy> out;
  for (const auto& ref : reference) {
    auto row = std::find_if(report.rows.begin(), report.rows.end(),
                            [&](const ReportRow& r) { return r.label == ref.label; });
    if (row == report.rows.end()) continue;

    auto check = [&](const char* field, std::optional<double> computed,
                     std::optional<double> published, bool percent) {
      if (!published) return;
      auto show = [&](double v) { return percent ? display_percent(v) : display_stat(v); };
      const std::string c = computed ? show(*computed) : "";
      const std::string r = show(*published);
      if (c != r) out.push_back({ref.label, field, c, r, computed});
    };
    check("mean", row->stats.mean, ref.mean, false);
    check("variance", row->stats.variance, ref.variance, false);
    check("stddev", row->stats.stddev, ref.stddev, false);
    check("coeff_variation", row->stats.coeff_variation, ref.coeff_variation, false);
    check("improvement_percent", row->improvement_percent, ref.improvement_percent, true);
  }
  return out;
}

std::string ascii_chart(const Histogram& h, std::size_t max_bar) {
  std::size_t peak = 0;
  for (const auto& b : h.bins) peak = std::max(peak, b.count);
  std::ostringstream os;
  for (std::size_t i = 0; i < h.bins.size(); ++i) {
    const auto& b = h.bins[i];
    const bool last = i + 1 == h.bins.size();
    const std::size_t len = peak == 0 ? 0 : (b.count * max_bar + peak - 1) / peak;
    char range[64];
    std::snprintf(range, sizeof range, "[%6.1f,%6.1f%c", b.lower_edge, b.lower_edge + h.bin_width,
                  last ? ']' : ')');
    os << range << ' ' << std::string(len, '#') << ' ' << b.count << '\n';
  }
  return os.str();
}

}  // namespace edusim::stats
