#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "edusim/rng.hpp"

namespace edusim::longdiv {

struct DivisionProblem {
  std::uint64_t dividend = 0;
  std::uint64_t divisor = 1;

  bool operator==(const DivisionProblem&) const = default;
};

enum class StepKind { Divide, Multiply, Subtract, BringDown };

std::string_view to_string(StepKind kind);
StepKind step_kind_from_string(std::string_view name);

// One student-facing step. What `working_value` holds depends on the kind:
//   Divide     partial dividend P        expects quotient digit q = P / divisor
//   Multiply   quotient digit q          expects q * divisor
//   Subtract   partial dividend P        expects P - q * divisor
//   BringDown  difference from Subtract  expects difference * 10 + next digit
struct DivisionStep {
  StepKind kind = StepKind::Divide;
  std::uint64_t working_value = 0;
  std::uint64_t expected_value = 0;

  bool operator==(const DivisionStep&) const = default;
};

struct DivisionTrace {
  DivisionProblem problem;
  std::vector<DivisionStep> steps;
  std::uint64_t quotient = 0;
  std::uint64_t remainder = 0;

  bool operator==(const DivisionTrace&) const = default;
};

struct StepVerdict {
  bool is_correct = false;
  std::uint64_t expected_value = 0;
};

inline constexpr int kMaxDigits = 19;  // 10^19 - 1 still fits in 64 bits

/// Schoolbook trace over every dividend digit, leading zero digits included:
/// a d-digit dividend yields d Divide/Multiply/Subtract triples and d - 1
/// BringDown steps. Throws DivisionByZero for divisor 0.
DivisionTrace solve_trace(const DivisionProblem& problem);

/// Dividend uniform over the d-digit range ([0, 9] for d = 1); divisor uniform
/// over its digit range with 0 excluded.
DivisionProblem generate_problem(int dividend_digits, int divisor_digits, Rng& rng);

/// Throws SessionError("session_complete") when cursor is past the last step.
StepVerdict validate_step(const DivisionTrace& trace, std::size_t cursor,
                          std::uint64_t student_value);

/// 100 * first_try_correct / total_steps, truncated to 2 decimals.
double score_attempts(std::size_t total_steps, std::size_t first_try_correct);

void to_json(nlohmann::json& j, const DivisionProblem& p);
void from_json(const nlohmann::json& j, DivisionProblem& p);
void to_json(nlohmann::json& j, const DivisionStep& s);
void to_json(nlohmann::json& j, const DivisionTrace& t);
void from_json(const nlohmann::json& j, DivisionTrace& t);

}  // namespace edusim::longdiv
