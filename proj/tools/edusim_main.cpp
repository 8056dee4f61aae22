// edusim: simulations, marks analysis, long-division problem sets and the
// tutoring session service behind one command.

#include <charconv>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "edusim/cohort.hpp"
#include "edusim/config.hpp"
#include "edusim/errors.hpp"
#include "edusim/format.hpp"
#include "edusim/http_service.hpp"
#include "edusim/longdiv.hpp"
#include "edusim/marks_csv.hpp"
#include "edusim/session_store.hpp"
#include "edusim/stats.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace edusim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v, 10);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError("--seed must be a decimal unsigned 64-bit integer, got '" + text + "'");
  }
  return v;
}

const CLI::Validator kLearningRate(
    [](std::string& s) -> std::string {
      double v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v) || v <= 0.0 || v > 1.0) {
        return "learning rate must lie in (0, 1], got " + s;
      }
      return {};
    },
    "RATE in (0,1]");

// Writes through a sibling temp file so a failed run leaves no partial output.
void write_atomically(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

// Accepts the marks schema and the simulator's `label,learner_index,score` output.
std::vector<csv::MarkRow> read_any_marks(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  if (first != "label,learner_index,score") return csv::read_marks_file(path);

  std::ostringstream converted;
  converted << csv::kMarksHeader << '\n';
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = csv::split_fields(line);
    if (f.size() != 3) throw ParseError(line_no, "expected 3 fields, found " + std::to_string(f.size()));
    converted << f[0] << ",learner-" << f[1] << ',' << f[2] << '\n';
  }
  std::istringstream again(converted.str());
  try {
    return csv::read_marks(again);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
}

std::string labels_of(const std::vector<stats::MarkSample>& samples) {
  std::string out;
  for (const auto& s : samples) out += (out.empty() ? "" : ", ") + s.label;
  return out;
}

void print_report(std::ostream& os, const stats::ComparativeReport& report) {
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %5s %10s %10s %10s %8s %12s\n", "label", "n", "M", "sigma",
                "sqrt(sigma)", "rho", "improvement");
  os << line;
  for (const auto& row : report.rows) {
    const auto& s = row.stats;
    std::snprintf(line, sizeof line, "%-24s %5zu %10s %10s %10s %8s %12s\n", row.label.c_str(), s.n,
                  stats::display_stat(s.mean).c_str(), stats::display_stat(s.variance).c_str(),
                  stats::display_stat(s.stddev).c_str(),
                  s.coeff_variation ? stats::display_stat(*s.coeff_variation).c_str() : "n/a",
                  row.improvement_percent ? (stats::display_percent(*row.improvement_percent) + "%").c_str()
                                          : "-");
    os << line;
  }
}

struct ModelFlags {
  double gain = 1.0;
  int input_dim = 1;
  double weight_range = 4.0;
  double noise_sd = 0.05;
  double epsilon = 0.05;
  int n_max = 300;
  std::string paradigm = "supervised";
  unsigned threads = 1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--gain", gain, "Activation gain lambda")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--input-dim", input_dim, "Stimulus length")->check(CLI::Range(1, 1 << 20))->capture_default_str();
    cmd->add_option("--weight-range", weight_range, "Initial weights drawn from [-r, r]")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--noise-sd", noise_sd, "Std. deviation of noise on the desired output 0.9")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd->add_option("--epsilon", epsilon, "Convergence tolerance on |d - y|")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--n-max", n_max, "Iteration budget per learner")->check(CLI::Range(1, 1 << 24))->capture_default_str();
    cmd->add_option("--paradigm", paradigm, "Weight update rule")
        ->check(CLI::IsMember({"supervised", "unsupervised"}))->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (output does not depend on this)")
        ->check(CLI::Range(1u, 256u))->capture_default_str();
  }

  cohort::ModalityConfig config(std::string label, double eta) const {
    cohort::ModalityConfig c;
    c.label = std::move(label);
    c.eta = eta;
    c.gain = gain;
    c.input_dim = input_dim;
    c.weight_init_half_range = weight_range;
    c.desired_noise_sd = noise_sd;
    c.epsilon = epsilon;
    c.n_max = n_max;
    c.paradigm = paradigm == "supervised" ? ann::Paradigm::Supervised : ann::Paradigm::Unsupervised;
    return c;
  }
};

stats::ComparativeReport report_for(const std::vector<cohort::CohortResult>& results) {
  std::vector<stats::MarkSample> samples;
  for (const auto& r : results) samples.push_back({r.config.label, r.scores()});
  const auto baseline = samples.front();
  samples.erase(samples.begin());
  return stats::compare_cohorts(baseline, samples);
}

int serve(const std::optional<std::string>& config_path, const ServiceConfig& overrides,
          const std::set<std::string>& given) {
  ServiceConfig cfg = load_config(config_path);
  if (given.count("host")) cfg.host = overrides.host;
  if (given.count("port")) cfg.port = overrides.port;
  if (given.count("data-dir")) cfg.data_dir = overrides.data_dir;
  if (given.count("baseline")) cfg.baseline_label = overrides.baseline_label;
  if (given.count("admin-token")) cfg.admin_token = overrides.admin_token;

  session::SessionStore store(cfg.data_dir);
  HttpService service(store, cfg);
  const int port = service.bind();
  std::cout << "edusim serving on http://" << cfg.host << ':' << port << " (data: " << cfg.data_dir
            << ", baseline: " << cfg.baseline_label << ")" << std::endl;
  service.listen();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edusim: learner simulation, marks statistics and long-division tutoring"};
  app.require_subcommand(1);
  app.allow_extras(false);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate one cohort and write its achievement CSV");
  double sim_eta = 0.0;
  std::string sim_seed = "0", sim_label, sim_out, sim_modality;
  std::size_t sim_size = 200;
  ModelFlags sim_model;
  auto* sim_eta_opt = simulate->add_option("--eta", sim_eta, "Learning rate in (0,1]")->check(kLearningRate);
  simulate->add_option("--modality", sim_modality, "Preset: classical (0.1), cal-novoice (0.5), cal-voice (0.8)")
      ->check(CLI::IsMember({"classical", "cal-novoice", "cal-voice"}));
  simulate->add_option("--cohort-size", sim_size, "Learners in the cohort")->check(CLI::Range(std::size_t{1}, std::size_t{10'000'000}))->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Decimal unsigned 64-bit seed")->capture_default_str();
  simulate->add_option("--label", sim_label, "Cohort label (default: modality name or 'simulated')");
  simulate->add_option("--out", sim_out, "Output CSV (label,learner_index,score)")->required();
  sim_model.add_to(simulate);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Simulate one cohort per learning rate");
  std::vector<double> sweep_etas{0.1, 0.5};
  std::string sweep_seed = "0", sweep_label = "sweep", sweep_out, sweep_report;
  std::size_t sweep_size = 200;
  ModelFlags sweep_model;
  sweep_cmd->add_option("--etas", sweep_etas, "Comma-separated learning rates")->delimiter(',')->check(kLearningRate)->capture_default_str();
  sweep_cmd->add_option("--cohort-size", sweep_size, "Learners per cohort")->check(CLI::Range(std::size_t{1}, std::size_t{10'000'000}))->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_seed, "Decimal unsigned 64-bit seed, shared by all rates")->capture_default_str();
  sweep_cmd->add_option("--label", sweep_label, "Base label; each cohort gets -eta<rate> appended")->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "Output CSV (label,learner_index,score)")->required();
  sweep_cmd->add_option("--report", sweep_report, "Optional comparative report CSV");
  sweep_model.add_to(sweep_cmd);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Summary statistics and improvement over a baseline cohort");
  std::string an_input, an_baseline, an_out, an_reference;
  analyze->add_option("--input", an_input, "Marks CSV (cohort,student_id,mark) or simulator output")->required()->check(CLI::ExistingFile);
  analyze->add_option("--baseline", an_baseline, "Baseline cohort label (default: first cohort in the file)");
  analyze->add_option("--out", an_out, "Report CSV");
  analyze->add_option("--reference", an_reference, "Published summary table to diagnose against")->check(CLI::ExistingFile);

  // histogram
  auto* hist = app.add_subcommand("histogram", "Frequency distribution of marks");
  std::string h_input, h_cohort, h_out;
  double h_width = stats::kDefaultBinWidth;
  bool h_chart = false;
  hist->add_option("--input", h_input, "Marks CSV or simulator output")->required()->check(CLI::ExistingFile);
  hist->add_option("--cohort", h_cohort, "Cohort to bin (required when the file holds several)");
  hist->add_option("--bin-width", h_width, "Bin width in marks")->check(CLI::PositiveNumber)->capture_default_str();
  hist->add_option("--out", h_out, "Histogram CSV (bin_lower,count)");
  hist->add_flag("--chart", h_chart, "Print an ASCII bar chart");

  // gen-problems
  auto* gen = app.add_subcommand("gen-problems", "Generate random long-division problems as JSONL");
  int g_count = 10, g_dividend = 4, g_divisor = 2;
  std::string g_seed = "0", g_out;
  bool g_traces = false;
  gen->add_option("--count", g_count, "Number of problems")->check(CLI::Range(1, 1'000'000))->capture_default_str();
  gen->add_option("--dividend-digits", g_dividend, "Digits in the dividend")->check(CLI::Range(1, longdiv::kMaxDigits))->capture_default_str();
  gen->add_option("--divisor-digits", g_divisor, "Digits in the divisor")->check(CLI::Range(1, longdiv::kMaxDigits))->capture_default_str();
  gen->add_option("--seed", g_seed, "Decimal unsigned 64-bit seed")->capture_default_str();
  gen->add_option("--out", g_out, "Output JSONL")->required();
  gen->add_flag("--with-traces", g_traces, "Emit full step traces instead of bare problems");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the tutoring session HTTP service");
  std::string s_config;
  ServiceConfig s_over;
  serve_cmd->add_option("--config", s_config, "JSON config file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", s_over.host, "Listen address");
  serve_cmd->add_option("--port", s_over.port, "Listen port (0 picks a free port)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--data-dir", s_over.data_dir, "Event log directory");
  serve_cmd->add_option("--baseline", s_over.baseline_label, "Baseline cohort for improvement");
  serve_cmd->add_option("--admin-token", s_over.admin_token, "Token required by /admin endpoints");

  // import-fixture
  auto* imp = app.add_subcommand("import-fixture", "Load the bundled field-study marks into a CSV or a running service");
  std::string i_fixture = std::string(EDUSIM_FIXTURE_DIR) + "/field_marks.csv", i_out, i_url, i_token;
  imp->add_option("--fixture", i_fixture, "Marks CSV to load")->check(CLI::ExistingFile)->capture_default_str();
  auto* i_out_opt = imp->add_option("--out", i_out, "Write the marks to this CSV");
  auto* i_url_opt = imp->add_option("--url", i_url, "Service base URL, e.g. http://127.0.0.1:8080");
  imp->add_option("--admin-token", i_token, "Admin token for the service");
  i_out_opt->excludes(i_url_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) {
      if (!*sim_eta_opt && sim_modality.empty()) throw UsageError("simulate needs --eta or --modality");
      cohort::ModalityConfig preset;
      if (sim_modality == "classical") preset = cohort::classical();
      else if (sim_modality == "cal-novoice") preset = cohort::cal_without_voice();
      else if (sim_modality == "cal-voice") preset = cohort::cal_with_voice();
      const double eta = *sim_eta_opt ? sim_eta : preset.eta;
      std::string label = !sim_label.empty() ? sim_label : !sim_modality.empty() ? sim_modality : "simulated";
      const auto result = cohort::run_cohort(sim_model.config(std::move(label), eta), sim_size,
                                             parse_seed(sim_seed), sim_model.threads);
      std::ostringstream os;
      cohort::write_csv(os, result);
      write_atomically(sim_out, os.str());
      print_report(std::cout, stats::compare_cohorts({result.config.label, result.scores()}, {}));
    } else if (*sweep_cmd) {
      const auto results = cohort::sweep(sweep_etas, sweep_model.config(sweep_label, sweep_etas.front()),
                                         sweep_size, parse_seed(sweep_seed), sweep_model.threads);
      std::ostringstream os;
      cohort::write_csv(os, results);
      const auto report = report_for(results);
      if (!sweep_report.empty()) {
        std::ostringstream rs;
        csv::write_report(rs, report);
        write_atomically(sweep_report, rs.str());
      }
      write_atomically(sweep_out, os.str());
      print_report(std::cout, report);
    } else if (*analyze) {
      const auto samples = csv::group_by_cohort(read_any_marks(an_input));
      if (samples.empty()) throw std::runtime_error(an_input + " contains no marks");
      const std::string base_label = an_baseline.empty() ? samples.front().label : an_baseline;
      auto base = std::find_if(samples.begin(), samples.end(),
                               [&](const stats::MarkSample& s) { return s.label == base_label; });
      if (base == samples.end()) {
        throw std::runtime_error("baseline cohort '" + base_label + "' not found; available: " + labels_of(samples));
      }
      std::vector<stats::MarkSample> others;
      for (const auto& s : samples) {
        if (s.label != base_label) others.push_back(s);
      }
      const auto report = stats::compare_cohorts(*base, others);
      print_report(std::cout, report);
      if (!an_reference.empty()) {
        const auto issues = stats::diagnose(report, csv::read_reference_file(an_reference));
        std::cout << "\nreference check (" << an_reference << "): "
                  << (issues.empty() ? "all values match" : std::to_string(issues.size()) + " mismatch(es)")
                  << '\n';
        for (const auto& d : issues) {
          std::cout << "  MISMATCH " << d.label << ' ' << d.field << ": computed " << d.computed
                    << (d.computed_value ? " (" + format_fixed(*d.computed_value, 4) + ")" : "")
                    << ", reference " << d.reference << '\n';
        }
      }
      if (!an_out.empty()) {
        std::ostringstream os;
        csv::write_report(os, report);
        write_atomically(an_out, os.str());
      }
    } else if (*hist) {
      const auto samples = csv::group_by_cohort(read_any_marks(h_input));
      if (samples.empty()) throw std::runtime_error(h_input + " contains no marks");
      const stats::MarkSample* chosen = nullptr;
      if (h_cohort.empty()) {
        if (samples.size() != 1) {
          throw UsageError("file holds several cohorts; pick one with --cohort (" + labels_of(samples) + ")");
        }
        chosen = &samples.front();
      } else {
        for (const auto& s : samples) {
          if (s.label == h_cohort) chosen = &s;
        }
        if (!chosen) throw std::runtime_error("cohort '" + h_cohort + "' not found; available: " + labels_of(samples));
      }
      const auto h = stats::histogram(*chosen, h_width);
      if (!h_out.empty()) {
        std::ostringstream os;
        csv::write_histogram(os, h);
        write_atomically(h_out, os.str());
      }
      if (h_chart || h_out.empty()) std::cout << chosen->label << '\n' << stats::ascii_chart(h);
    } else if (*gen) {
      if (g_divisor > g_dividend) throw UsageError("--divisor-digits must not exceed --dividend-digits");
      Rng rng(parse_seed(g_seed));
      std::ostringstream os;
      for (int i = 0; i < g_count; ++i) {
        const auto p = longdiv::generate_problem(g_dividend, g_divisor, rng);
        os << (g_traces ? nlohmann::json(longdiv::solve_trace(p)) : nlohmann::json(p)).dump() << '\n';
      }
      write_atomically(g_out, os.str());
    } else if (*serve_cmd) {
      std::set<std::string> given;
      for (const char* name : {"host", "port", "data-dir", "baseline", "admin-token"}) {
        if (serve_cmd->count(std::string("--") + name)) given.insert(name);
      }
      return serve(s_config.empty() ? std::nullopt : std::optional(s_config), s_over, given);
    } else if (*imp) {
      const auto rows = csv::read_marks_file(i_fixture);
      if (!i_url.empty()) {
        httplib::Client client(i_url);
        std::ostringstream body;
        csv::write_marks(body, rows);
        auto res = client.Post("/admin/import-marks", {{"X-Admin-Token", i_token}}, body.str(), "text/csv");
        if (!res) throw std::runtime_error("cannot reach " + i_url);
        if (res->status != 200) throw std::runtime_error("service answered " + std::to_string(res->status) + ": " + res->body);
        std::cout << res->body << '\n';
      } else if (!i_out.empty()) {
        std::ostringstream os;
        csv::write_marks(os, rows);
        write_atomically(i_out, os.str());
        std::cout << "wrote " << rows.size() << " marks to " << i_out << '\n';
      } else {
        throw UsageError("import-fixture needs --out or --url");
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
