#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "edusim/ann.hpp"
#include "edusim/rng.hpp"

namespace edusim::cohort {

// One teaching-modality simulation setup.
struct ModalityConfig {
  std::string label = "cohort";
  double eta = 0.1;
  double gain = 1.0;
  int input_dim = 1;
  double weight_init_half_range = 4.0;
  double desired_noise_sd = 0.05;
  double epsilon = 0.05;
  int n_max = 300;
  ann::Paradigm paradigm = ann::Paradigm::Supervised;

  void validate() const;
};

// Modality presets: teacher-led classroom, CAL without narration, CAL with narration.
ModalityConfig classical();
ModalityConfig cal_without_voice();
ModalityConfig cal_with_voice();

inline constexpr double kDesiredCentre = 0.9;
inline constexpr double kDesiredLimit = 0.999;

struct AchievementRecord {
  std::size_t learner_index = 0;
  std::string label;
  double score = 0.0;

  bool operator==(const AchievementRecord&) const = default;
};

struct CohortResult {
  ModalityConfig config;
  std::uint64_t seed = 0;
  std::vector<AchievementRecord> records;

  std::vector<double> scores() const;
};

/// Draws one learner and its stimulus. Draw order: weights (input_dim
/// uniforms), input signs (input_dim draws), one gaussian for the desired value.
std::pair<ann::LearnerState, ann::Stimulus> sample_learner(Rng& rng, const ModalityConfig& config);

/// 100 * (1 - n / n_max) for convergence at n, 0 otherwise; rounded to 2 decimals.
double achievement_from_outcome(const ann::TrainingOutcome& outcome, int n_max);

/// Trains `size` independent learners. Learner i draws from its own substream
/// (see Rng), so results do not depend on evaluation order or thread count.
CohortResult run_cohort(const ModalityConfig& config, std::size_t size, std::uint64_t seed,
                        unsigned threads = 1);

/// One cohort per learning rate, each labelled "<base label>-eta<rate>" and run
/// with the same seed. All rates are checked before anything runs.
std::vector<CohortResult> sweep(const std::vector<double>& etas, const ModalityConfig& base,
                                std::size_t size, std::uint64_t seed, unsigned threads = 1);

std::string eta_suffix(double eta);

/// CSV with header `label,learner_index,score`, LF endings, 2-decimal scores.
void write_csv(std::ostream& os, const std::vector<CohortResult>& results);
void write_csv(std::ostream& os, const CohortResult& result);

}  // namespace edusim::cohort
