#include <sstream>

#include "doctest.h"
#include "edusim/errors.hpp"
#include "edusim/marks_csv.hpp"

using namespace edusim;

namespace {

std::vector<csv::MarkRow> parse(const std::string& text) {
  std::istringstream in(text);
  return csv::read_marks(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("read marks") {
  const auto rows = parse("cohort,student_id,mark\na,s1,35\na,s2,42.5\nb,s1,99.99\n\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].mark == 42.5);
  CHECK(rows[2].cohort == "b");
  const auto samples = csv::group_by_cohort(rows);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].marks.size() == 2);

  CHECK(parse("cohort,student_id,mark\r\na,s1,7\r\n").size() == 1);
}

TEST_CASE("schema violations name the line") {
  CHECK(error_line("cohort,mark\n") == 1);
  CHECK(error_line("") == 1);
  CHECK(error_line("cohort,student_id,mark\na,s1,35\na,s2\n") == 3);
  CHECK(error_line("cohort,student_id,mark\na,s1,101\n") == 2);
  CHECK(error_line("cohort,student_id,mark\na,s1,35.123\n") == 2);
  CHECK(error_line("cohort,student_id,mark\na,s1,-3\n") == 2);
  CHECK(error_line("cohort,student_id,mark\na,s1,abc\n") == 2);
  CHECK(error_line("cohort,student_id,mark\na,s1,1e2\n") == 2);
  CHECK(error_line("cohort,student_id,mark\n,s1,5\n") == 2);
  CHECK(error_line("cohort,student_id,mark\na,s1,5.\n") == 2);
}

TEST_CASE("marks and report writers") {
  std::ostringstream os;
  csv::write_marks(os, {{"a", "s1", 35}, {"b", "s2", 90.9}});
  CHECK(os.str() == "cohort,student_id,mark\na,s1,35.00\nb,s2,90.90\n");
  CHECK(parse(os.str())[1].mark == 90.9);

  const auto report = stats::compare_cohorts({"base", {10, 20}}, {{"other", {20, 30}}});
  std::ostringstream rs;
  csv::write_report(rs, report);
  CHECK(rs.str() ==
        "label,n,mean,variance,stddev,coeff_variation,improvement_percent\n"
        "base,2,15,25,5,0.3333333333333333,\n"
        "other,2,25,25,5,0.2,66.66666666666667\n");

  std::ostringstream hs;
  csv::write_histogram(hs, stats::histogram({"a", {5, 100}}, 50));
  CHECK(hs.str() == "bin_lower,count\n0,1\n50,1\n");
}

TEST_CASE("reference table") {
  std::istringstream in(
      "label,mean,variance,stddev,coeff_variation,improvement_percent\n"
      "classical,32.46,265.32,16.28,0.50,\n");
  const auto rows = csv::read_reference(in);
  REQUIRE(rows.size() == 1);
  CHECK(*rows[0].mean == 32.46);
  CHECK_FALSE(rows[0].improvement_percent);

  std::istringstream bad("label,mean\n");
  CHECK_THROWS_AS(csv::read_reference(bad), ParseError);
}

TEST_CASE("bundled classroom fixture") {
  const auto rows = csv::read_marks_file(std::string(EDUSIM_FIXTURE_DIR) + "/field_marks.csv");
  CHECK(rows.size() == 45);
  const auto samples = csv::group_by_cohort(rows);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].label == "classical");
  CHECK(samples[1].label == "cal-novoice");
  CHECK(samples[2].label == "cal-voice");
}
