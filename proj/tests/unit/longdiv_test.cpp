#include <random>

#include "doctest.h"
#include "edusim/errors.hpp"
#include "edusim/longdiv.hpp"
#include "json.hpp"

using namespace edusim;
using namespace edusim::longdiv;

namespace {

std::size_t count_kind(const DivisionTrace& t, StepKind k) {
  return static_cast<std::size_t>(
      std::count_if(t.steps.begin(), t.steps.end(), [k](const DivisionStep& s) { return s.kind == k; }));
}

std::size_t digit_count(std::uint64_t n) { return std::to_string(n).size(); }

// Checks the structural invariants of a trace; returns false on the first violation.
bool well_formed(const DivisionTrace& t) {
  const auto& p = t.problem;
  if (t.quotient != p.dividend / p.divisor || t.remainder != p.dividend % p.divisor) return false;
  if (t.quotient * p.divisor + t.remainder != p.dividend) return false;
  const std::size_t d = digit_count(p.dividend);
  if (t.steps.size() != 4 * d - 1) return false;
  static constexpr StepKind cycle[] = {StepKind::Divide, StepKind::Multiply, StepKind::Subtract,
                                       StepKind::BringDown};
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    if (s.kind != cycle[i % 4]) return false;
    if (s.kind == StepKind::Divide && s.expected_value > 9) return false;
    if (s.kind == StepKind::Subtract && s.expected_value >= p.divisor) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("solve_trace: dividend smaller than divisor") {
  const auto t = solve_trace({7, 9});
  CHECK(t.quotient == 0);
  CHECK(t.remainder == 7);
  REQUIRE(t.steps.size() == 3);
  CHECK(t.steps[0] == DivisionStep{StepKind::Divide, 7, 0});
  CHECK(t.steps[2] == DivisionStep{StepKind::Subtract, 7, 7});
}

TEST_CASE("solve_trace: 125 / 5 step by step") {
  const auto t = solve_trace({125, 5});
  CHECK(t.quotient == 25);
  CHECK(t.remainder == 0);
  const std::vector<DivisionStep> expected{
      {StepKind::Divide, 1, 0},     {StepKind::Multiply, 0, 0},   {StepKind::Subtract, 1, 1},
      {StepKind::BringDown, 1, 12}, {StepKind::Divide, 12, 2},    {StepKind::Multiply, 2, 10},
      {StepKind::Subtract, 12, 2},  {StepKind::BringDown, 2, 25}, {StepKind::Divide, 25, 5},
      {StepKind::Multiply, 5, 25},  {StepKind::Subtract, 25, 0}};
  CHECK(t.steps == expected);
}

TEST_CASE("solve_trace: 987654 / 32") {
  const auto t = solve_trace({987654, 32});
  CHECK(t.quotient == 30864);
  CHECK(t.remainder == 6);
  CHECK(well_formed(t));
}

TEST_CASE("solve_trace: edge cases") {
  CHECK_THROWS_AS(solve_trace({10, 0}), DivisionByZero);
  const auto zero = solve_trace({0, 3});
  CHECK(zero.quotient == 0);
  CHECK(zero.steps.size() == 3);
  const auto big = solve_trace({UINT64_MAX, 1});
  CHECK(big.quotient == UINT64_MAX);
  CHECK(well_formed(big));
  const auto huge_div = solve_trace({UINT64_MAX, UINT64_MAX - 1});
  CHECK(huge_div.quotient == 1);
  CHECK(huge_div.remainder == 1);
  CHECK(well_formed(huge_div));
}

TEST_CASE("solve_trace: exhaustive oracle equivalence for 4-digit / 2-digit") {
  std::size_t failures = 0;
  for (std::uint64_t n = 0; n <= 9999; ++n) {
    for (std::uint64_t d = 1; d <= 99; ++d) {
      const auto t = solve_trace({n, d});
      if (t.quotient != n / d || t.remainder != n % d || t.quotient * d + t.remainder != n) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("solve_trace: structure over random 64-bit problems") {
  std::mt19937_64 gen(2718);
  std::size_t failures = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t n = gen() >> (gen() % 64);
    const std::uint64_t d = std::max<std::uint64_t>(1, gen() >> (gen() % 64));
    if (!well_formed(solve_trace({n, d}))) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("step counts follow the digit count") {
  for (std::uint64_t n : {0ULL, 5ULL, 10ULL, 1000ULL, 123456789ULL, 10000000000000000000ULL}) {
    const auto t = solve_trace({n, 7});
    const auto d = digit_count(n);
    CHECK(count_kind(t, StepKind::Divide) == d);
    CHECK(count_kind(t, StepKind::BringDown) == d - 1);
  }
}

TEST_CASE("replaying expected values validates every step") {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 500; ++i) {
    const auto t = solve_trace({gen() % 10'000'000, 1 + gen() % 999});
    for (std::size_t c = 0; c < t.steps.size(); ++c) {
      const auto v = validate_step(t, c, t.steps[c].expected_value);
      CHECK(v.is_correct);
    }
    CHECK_THROWS_AS(validate_step(t, t.steps.size(), 0), SessionError);
  }
}

TEST_CASE("validate_step") {
  const auto t = solve_trace({125, 5});
  CHECK(validate_step(t, 4, 2).is_correct);
  const auto wrong = validate_step(t, 5, 11);
  CHECK_FALSE(wrong.is_correct);
  CHECK(wrong.expected_value == 10);
  try {
    validate_step(t, 11, 0);
    FAIL("expected an error");
  } catch (const SessionError& e) {
    CHECK(e.code() == "session_complete");
  }
}

TEST_CASE("generate_problem") {
  Rng rng(42);
  for (int i = 0; i < 2000; ++i) {
    const auto p = generate_problem(4, 2, rng);
    CHECK(p.dividend >= 1000);
    CHECK(p.dividend <= 9999);
    CHECK(p.divisor >= 10);
    CHECK(p.divisor <= 99);
    const auto q = generate_problem(3, 1, rng);
    CHECK(q.divisor >= 1);
    CHECK(q.divisor <= 9);
    const auto r = generate_problem(1, 1, rng);
    CHECK(r.dividend <= 9);
    const auto big = generate_problem(19, 19, rng);
    CHECK(big.dividend >= 1000000000000000000ULL);
  }
  Rng a(9), b(9);
  CHECK(generate_problem(6, 3, a) == generate_problem(6, 3, b));
  CHECK_THROWS_AS(generate_problem(2, 3, rng), InvalidArgument);
  CHECK_THROWS_AS(generate_problem(3, 0, rng), InvalidArgument);
  CHECK_THROWS_AS(generate_problem(20, 2, rng), InvalidArgument);
}

TEST_CASE("score_attempts") {
  CHECK(score_attempts(11, 11) == 100.0);
  CHECK(score_attempts(10, 5) == 50.0);
  CHECK(score_attempts(7, 0) == 0.0);
  CHECK(score_attempts(11, 10) == 90.90);
  CHECK(score_attempts(3, 2) == 66.66);
  CHECK_THROWS_AS(score_attempts(0, 0), InvalidArgument);
  CHECK_THROWS_AS(score_attempts(3, 4), InvalidArgument);
}

TEST_CASE("trace json schema") {
  const auto t = solve_trace({125, 5});
  const nlohmann::json j = t;
  CHECK(j.at("problem").at("dividend") == 125);
  CHECK(j.at("problem").at("divisor") == 5);
  CHECK(j.at("quotient") == 25);
  CHECK(j.at("remainder") == 0);
  CHECK(j.at("steps").size() == 11);
  CHECK(j.at("steps")[3].at("kind") == "BringDown");
  CHECK(j.at("steps")[3].at("working_value") == 1);
  CHECK(j.at("steps")[3].at("expected_value") == 12);
  CHECK(j.get<DivisionTrace>() == t);
}
