#include "edusim/ann.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "edusim/errors.hpp"

namespace edusim::ann {
namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be finite");
}

void require_same_length(std::size_t weights, std::size_t input) {
  if (weights != input) {
    throw DimensionError("input length " + std::to_string(input) +
                         " does not match weight length " + std::to_string(weights));
  }
}

}  // namespace

void LearnerState::validate() const {
  if (weights.empty()) throw InvalidArgument("learner needs at least one weight");
  for (double w : weights) require_finite(w, "weight");
  require_finite(learning_rate, "learning rate");
  require_finite(gain, "gain");
  if (learning_rate < 0.0 || learning_rate > 1.0) {
    throw InvalidArgument("learning rate must lie in [0, 1]");
  }
  if (gain <= 0.0) throw InvalidArgument("gain must be positive");
}

void Stimulus::validate() const {
  if (input.empty()) throw InvalidArgument("stimulus input is empty");
  for (double x : input) {
    require_finite(x, "stimulus component");
    if (x < -1.0 || x > 1.0) throw InvalidArgument("stimulus components must lie in [-1, 1]");
  }
  require_finite(desired, "desired output");
  if (std::fabs(desired) >= 1.0) throw InvalidArgument("|desired| must be < 1");
}

double activate(double v, double gain) {
  require_finite(v, "potential");
  require_finite(gain, "gain");
  if (gain <= 0.0) throw InvalidArgument("gain must be positive");
  return bipolar_sigmoid(v, gain);
}

double activation_slope(double v, double gain) {
  require_finite(v, "potential");
  require_finite(gain, "gain");
  if (gain <= 0.0) throw InvalidArgument("gain must be positive");
  // (gain/2)(1 - y^2) written as 2 gain e^(-gain|v|) / (1 + e^(-gain|v|))^2,
  // which avoids cancellation when y is close to +-1.
  const double e = std::exp(-gain * std::fabs(v));
  return 2.0 * gain * e / ((1.0 + e) * (1.0 + e));
}

Forward forward(const LearnerState& learner, std::span<const double> input) {
  require_same_length(learner.weights.size(), input.size());
  double v = 0.0;
  for (std::size_t i = 0; i < input.size(); ++i) v += input[i] * learner.weights[i];
  return {v, activate(v, learner.gain)};
}

ErrorSignal error_signal(double desired, double output) {
  require_finite(desired, "desired output");
  require_finite(output, "output");
  const double e = desired - output;
  return {e, std::fabs(e)};
}

namespace {

LearnerState scaled_step(const LearnerState& learner, std::span<const double> input,
                         double factor) {
  require_same_length(learner.weights.size(), input.size());
  LearnerState next = learner;
  const double step = learner.learning_rate * factor;
  for (std::size_t i = 0; i < input.size(); ++i) next.weights[i] += step * input[i];
  return next;
}

}  // namespace

LearnerState delta_update(const LearnerState& learner, std::span<const double> input,
                          double signed_error) {
  require_finite(signed_error, "error");
  return scaled_step(learner, input, signed_error);
}

LearnerState hebbian_update(const LearnerState& learner, std::span<const double> input,
                            double output) {
  require_finite(output, "output");
  return scaled_step(learner, input, output);
}

TrainingOutcome train_episode(const LearnerState& learner, const Stimulus& stimulus,
                              Paradigm paradigm, const EpisodeSettings& settings) {
  learner.validate();
  stimulus.validate();
  require_same_length(learner.weights.size(), stimulus.input.size());
  if (!(settings.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (settings.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");

  TrainingOutcome out;
  out.final_state = learner;
  out.error_trajectory.reserve(static_cast<std::size_t>(settings.max_iterations) + 1);

  for (int n = 0;; ++n) {
    const Forward f = forward(out.final_state, stimulus.input);
    const ErrorSignal e = error_signal(stimulus.desired, f.output);
    out.error_trajectory.push_back(e.magnitude);
    out.final_abs_error = e.magnitude;
    if (e.magnitude <= settings.tolerance) {
      out.converged_at = n;
      break;
    }
    if (n == settings.max_iterations) break;
    out.final_state = paradigm == Paradigm::Supervised
                          ? delta_update(out.final_state, stimulus.input, e.signed_error)
                          : hebbian_update(out.final_state, stimulus.input, f.output);
  }
  return out;
}

}  // namespace edusim::ann
