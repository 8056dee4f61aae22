#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace edusim::ann {

// Single-output neuron: weight row, learning rate and activation gain.
// A learning rate of exactly 0 is accepted and freezes the weights; the
// experiment-facing layers (cohort configs, CLI) require a rate in (0, 1].
struct LearnerState {
  std::vector<double> weights;
  double learning_rate = 0.1;
  double gain = 1.0;

  void validate() const;
  bool operator==(const LearnerState&) const = default;
};

// Input pattern paired with the response the learner should produce.
struct Stimulus {
  std::vector<double> input;
  double desired = 0.9;

  void validate() const;
  bool operator==(const Stimulus&) const = default;
};

enum class Paradigm { Supervised, Unsupervised };

struct Forward {
  double potential;  // inner product of input and weights
  double output;     // activate(potential, gain)
};

struct ErrorSignal {
  double signed_error;  // d - y, drives the weight correction
  double magnitude;     // |d - y|, monitored for convergence
};

struct EpisodeSettings {
  double tolerance = 0.05;
  int max_iterations = 300;
};

struct TrainingOutcome {
  std::optional<int> converged_at;
  double final_abs_error = 0.0;
  std::vector<double> error_trajectory;
  LearnerState final_state;
};

/// Bipolar sigmoid (1 - e^{-x}) / (1 + e^{-x}) at x = gain * v, for any
/// floating type; no argument checking. Evaluated on |x| through expm1 and
/// mirrored, so it is exactly odd, and capped just below 1 in magnitude.
template <std::floating_point T>
T bipolar_sigmoid(T v, T gain) {
  const T x = gain * v;
  const T em1 = std::expm1(-std::fabs(x));  // e^{-|x|} - 1, in (-1, 0]
  const T below_one = T(1) - std::numeric_limits<T>::epsilon() / 2;
  const T y = std::fmin(-em1 / (T(2) + em1), below_one);
  return x < T(0) ? -y : y;
}

/// Bipolar sigmoid (1 - e^{-gain*v}) / (1 + e^{-gain*v}); identical to tanh(gain*v/2).
/// The result is kept strictly inside (-1, 1) even where it saturates in double precision.
double activate(double v, double gain);

/// Analytic slope of activate: (gain/2) * (1 - activate(v, gain)^2).
double activation_slope(double v, double gain);

Forward forward(const LearnerState& learner, std::span<const double> input);

ErrorSignal error_signal(double desired, double output);

/// Supervised (delta / LMS) step: w_i += eta * signed_error * x_i.
LearnerState delta_update(const LearnerState& learner, std::span<const double> input,
                          double signed_error);

/// Unsupervised (Hebbian) step: w_i += eta * output * x_i.
LearnerState hebbian_update(const LearnerState& learner, std::span<const double> input,
                            double output);

/// Repeats forward -> error -> update until |d - y| <= tolerance or
/// max_iterations updates have been applied. The trajectory records |d - y| at
/// every evaluated iteration n = 0, 1, ..., so it never exceeds
/// max_iterations + 1 entries.
TrainingOutcome train_episode(const LearnerState& learner, const Stimulus& stimulus,
                              Paradigm paradigm, const EpisodeSettings& settings = {});

}  // namespace edusim::ann
