#include "edusim/longdiv.hpp"

#include <algorithm>
#include <string>

#include "edusim/errors.hpp"
#include "edusim/format.hpp"
#include "json.hpp"

namespace edusim::longdiv {
namespace {

constexpr std::uint64_t pow10(int e) {
  std::uint64_t p = 1;
  for (int i = 0; i < e; ++i) p *= 10;
  return p;
}

std::vector<unsigned> decimal_digits(std::uint64_t n) {
  std::vector<unsigned> digits;
  do {
    digits.push_back(static_cast<unsigned>(n % 10));
    n /= 10;
  } while (n != 0);
  std::reverse(digits.begin(), digits.end());
  return digits;
}

}  // namespace

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Divide: return "Divide";
    case StepKind::Multiply: return "Multiply";
    case StepKind::Subtract: return "Subtract";
    case StepKind::BringDown: return "BringDown";
  }
  return "?";
}

StepKind step_kind_from_string(std::string_view name) {
  for (auto k : {StepKind::Divide, StepKind::Multiply, StepKind::Subtract, StepKind::BringDown}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown step kind '" + std::string(name) + "'");
}

DivisionTrace solve_trace(const DivisionProblem& problem) {
  if (problem.divisor == 0) throw DivisionByZero("divisor must be at least 1");

  const auto digits = decimal_digits(problem.dividend);
  const std::uint64_t divisor = problem.divisor;

  DivisionTrace trace;
  trace.problem = problem;
  trace.steps.reserve(4 * digits.size());

  // partial <= the dividend prefix read so far, so nothing here can overflow.
  std::uint64_t partial = digits.front();
  std::uint64_t quotient = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const std::uint64_t q = partial / divisor;
    const std::uint64_t product = q * divisor;
    const std::uint64_t difference = partial - product;
    trace.steps.push_back({StepKind::Divide, partial, q});
    trace.steps.push_back({StepKind::Multiply, q, product});
    trace.steps.push_back({StepKind::Subtract, partial, difference});
    quotient = quotient * 10 + q;
    if (i + 1 < digits.size()) {
      const std::uint64_t next = difference * 10 + digits[i + 1];
      trace.steps.push_back({StepKind::BringDown, difference, next});
      partial = next;
    } else {
      partial = difference;
    }
  }
  trace.quotient = quotient;
  trace.remainder = partial;
  return trace;
}

DivisionProblem generate_problem(int dividend_digits, int divisor_digits, Rng& rng) {
  if (divisor_digits < 1 || dividend_digits < divisor_digits || dividend_digits > kMaxDigits) {
    throw InvalidArgument("digit counts must satisfy 1 <= divisor_digits <= dividend_digits <= " +
                          std::to_string(kMaxDigits) + " (got dividend " +
                          std::to_string(dividend_digits) + ", divisor " +
                          std::to_string(divisor_digits) + ")");
  }
  auto lower = [](int d) { return d == 1 ? std::uint64_t{0} : pow10(d - 1); };
  DivisionProblem p;
  p.dividend = rng.in_range(lower(dividend_digits), pow10(dividend_digits) - 1);
  p.divisor = rng.in_range(std::max<std::uint64_t>(1, lower(divisor_digits)), pow10(divisor_digits) - 1);
  return p;
}

StepVerdict validate_step(const DivisionTrace& trace, std::size_t cursor,
                          std::uint64_t student_value) {
  if (cursor >= trace.steps.size()) {
    throw SessionError("session_complete", 409,
                       "step " + std::to_string(cursor) + " is past the end of the trace (" +
                           std::to_string(trace.steps.size()) + " steps)");
  }
  const auto expected = trace.steps[cursor].expected_value;
  return {student_value == expected, expected};
}

double score_attempts(std::size_t total_steps, std::size_t first_try_correct) {
  if (total_steps == 0) throw InvalidArgument("total_steps must be >= 1");
  if (first_try_correct > total_steps) {
    throw InvalidArgument("first_try_correct exceeds total_steps");
  }
  return truncate_to(100.0 * static_cast<double>(first_try_correct) /
                         static_cast<double>(total_steps),
                     2);
}

void to_json(nlohmann::json& j, const DivisionProblem& p) {
  j = nlohmann::json{{"dividend", p.dividend}, {"divisor", p.divisor}};
}

void from_json(const nlohmann::json& j, DivisionProblem& p) {
  p.dividend = j.at("dividend").get<std::uint64_t>();
  p.divisor = j.at("divisor").get<std::uint64_t>();
}

void to_json(nlohmann::json& j, const DivisionStep& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)},
                     {"working_value", s.working_value},
                     {"expected_value", s.expected_value}};
}

void to_json(nlohmann::json& j, const DivisionTrace& t) {
  j = nlohmann::json{{"problem", t.problem},
                     {"steps", t.steps},
                     {"quotient", t.quotient},
                     {"remainder", t.remainder}};
}

void from_json(const nlohmann::json& j, DivisionTrace& t) {
  t.problem = j.at("problem").get<DivisionProblem>();
  t.steps.clear();
  for (const auto& s : j.at("steps")) {
    t.steps.push_back({step_kind_from_string(s.at("kind").get<std::string>()),
                       s.at("working_value").get<std::uint64_t>(),
                       s.at("expected_value").get<std::uint64_t>()});
  }
  t.quotient = j.at("quotient").get<std::uint64_t>();
  t.remainder = j.at("remainder").get<std::uint64_t>();
}

}  // namespace edusim::longdiv
