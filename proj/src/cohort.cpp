#include "edusim/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "edusim/errors.hpp"
#include "edusim/format.hpp"

namespace edusim::cohort {
namespace {

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void check_eta(double eta) {
  if (!std::isfinite(eta) || eta <= 0.0 || eta > 1.0) {
    throw InvalidArgument("learning rate must lie in (0, 1], got " + format_exact(eta));
  }
}

ModalityConfig preset(std::string label, double eta) {
  ModalityConfig c;
  c.label = std::move(label);
  c.eta = eta;
  return c;
}

}  // namespace

void ModalityConfig::validate() const {
  if (label.empty()) throw InvalidArgument("cohort label must not be empty");
  if (!finite_all({eta, gain, weight_init_half_range, desired_noise_sd, epsilon})) {
    throw InvalidArgument("cohort configuration values must be finite");
  }
  check_eta(eta);
  if (gain <= 0.0) throw InvalidArgument("gain must be positive");
  if (input_dim < 1) throw InvalidArgument("input_dim must be >= 1");
  if (weight_init_half_range < 0.0) throw InvalidArgument("weight_init_half_range must be >= 0");
  if (desired_noise_sd < 0.0) throw InvalidArgument("desired_noise_sd must be >= 0");
  if (epsilon <= 0.0) throw InvalidArgument("epsilon must be positive");
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
}

ModalityConfig classical() { return preset("classical", 0.1); }
ModalityConfig cal_without_voice() { return preset("cal-novoice", 0.5); }
// No rate is published for narrated CAL beyond "higher than without voice".
ModalityConfig cal_with_voice() { return preset("cal-voice", 0.8); }

std::vector<double> CohortResult::scores() const {
  std::vector<double> s;
  s.reserve(records.size());
  for (const auto& r : records) s.push_back(r.score);
  return s;
}

std::pair<ann::LearnerState, ann::Stimulus> sample_learner(Rng& rng,
                                                           const ModalityConfig& config) {
  const auto dim = static_cast<std::size_t>(config.input_dim);
  ann::LearnerState learner;
  learner.learning_rate = config.eta;
  learner.gain = config.gain;
  learner.weights.resize(dim);
  const double h = config.weight_init_half_range;
  for (auto& w : learner.weights) w = rng.uniform(-h, h);

  ann::Stimulus stimulus;
  stimulus.input.resize(dim);
  for (auto& x : stimulus.input) x = rng.sign();
  const double d = kDesiredCentre + config.desired_noise_sd * rng.gaussian();
  stimulus.desired = std::clamp(d, -kDesiredLimit, kDesiredLimit);
  return {std::move(learner), std::move(stimulus)};
}

double achievement_from_outcome(const ann::TrainingOutcome& outcome, int n_max) {
  if (n_max < 1) throw InvalidArgument("n_max must be >= 1");
  if (!outcome.converged_at) return 0.0;
  const int n = *outcome.converged_at;
  if (n < 0 || n > n_max) {
    throw InvalidArgument("outcome converged at " + std::to_string(n) +
                          ", outside [0, n_max=" + std::to_string(n_max) + "]");
  }
  const double raw = 100.0 * (1.0 - static_cast<double>(n) / n_max);
  return std::round(raw * 100.0) / 100.0;
}

CohortResult run_cohort(const ModalityConfig& config, std::size_t size, std::uint64_t seed,
                        unsigned threads) {
  config.validate();
  if (size < 1) throw InvalidArgument("cohort size must be >= 1");

  CohortResult result{config, seed, std::vector<AchievementRecord>(size)};
  const ann::EpisodeSettings settings{config.epsilon, config.n_max};

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(substream_seed(seed, i));
      auto [learner, stimulus] = sample_learner(rng, config);
      const auto outcome = ann::train_episode(learner, stimulus, config.paradigm, settings);
      result.records[i] = {i, config.label, achievement_from_outcome(outcome, config.n_max)};
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, size);
  if (workers == 1) {
    run_range(0, size);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (size + workers - 1) / workers;
    for (std::size_t begin = 0; begin < size; begin += chunk) {
      pool.emplace_back(run_range, begin, std::min(size, begin + chunk));
    }
  }
  return result;
}

std::string eta_suffix(double eta) { return "-eta" + format_exact(eta); }

std::vector<CohortResult> sweep(const std::vector<double>& etas, const ModalityConfig& base,
                                std::size_t size, std::uint64_t seed, unsigned threads) {
  if (etas.empty()) throw InvalidArgument("sweep needs at least one learning rate");
  for (double eta : etas) check_eta(eta);
  ModalityConfig probe = base;
  probe.eta = etas.front();
  probe.validate();

  std::vector<CohortResult> out;
  out.reserve(etas.size());
  for (double eta : etas) {
    ModalityConfig c = base;
    c.eta = eta;
    c.label = base.label + eta_suffix(eta);
    out.push_back(run_cohort(c, size, seed, threads));
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<CohortResult>& results) {
  os << "label,learner_index,score\n";
  for (const auto& r : results) {
    for (const auto& rec : r.records) {
      os << rec.label << ',' << rec.learner_index << ',' << format_fixed(rec.score, 2) << '\n';
    }
  }
}

void write_csv(std::ostream& os, const CohortResult& result) {
  write_csv(os, std::vector<CohortResult>{result});
}

}  // namespace edusim::cohort
