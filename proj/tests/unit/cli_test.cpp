#include <filesystem>
#include <sstream>

#include "cli_support.hpp"
#include "doctest.h"
#include "edusim/http_service.hpp"
#include "edusim/longdiv.hpp"
#include "edusim/marks_csv.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace edusim;
using edusim::testing::run_cli;
using edusim::testing::slurp;
using edusim::testing::TempDir;

namespace {

const std::string kFixture = std::string(EDUSIM_FIXTURE_DIR) + "/field_marks.csv";
const std::string kReference = std::string(EDUSIM_FIXTURE_DIR) + "/reference_summary.csv";

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("help and usage errors") {
  TempDir dir;
  auto r = run_cli("--help", dir.str());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("simulate") != std::string::npos);
  CHECK(run_cli("simulate --help", dir.str()).exit_code == 0);

  CHECK(run_cli("", dir.str()).exit_code == 2);
  CHECK(run_cli("frobnicate", dir.str()).exit_code == 2);
  CHECK(run_cli("simulate --eta 0.1 --out x.csv --bogus", dir.str()).exit_code == 2);
  CHECK(run_cli("simulate --eta 0 --out '" + dir.str("a.csv") + "'", dir.str()).exit_code == 2);
  CHECK(run_cli("simulate --eta 1.5 --out '" + dir.str("a.csv") + "'", dir.str()).exit_code == 2);
  CHECK(run_cli("simulate --eta 0.1 --seed -1 --out '" + dir.str("a.csv") + "'", dir.str()).exit_code == 2);
  CHECK(run_cli("simulate --eta 0.1 --seed 1e3 --out '" + dir.str("a.csv") + "'", dir.str()).exit_code == 2);
  CHECK(run_cli("simulate --cohort-size 3 --out '" + dir.str("a.csv") + "'", dir.str()).exit_code == 2);
  CHECK(run_cli("gen-problems --dividend-digits 2 --divisor-digits 3 --out '" + dir.str("g.jsonl") + "'", dir.str())
            .exit_code == 2);
  CHECK(run_cli("analyze --input '" + dir.str("missing.csv") + "'", dir.str()).exit_code == 2);
  CHECK_FALSE(std::filesystem::exists(dir.path() / "a.csv"));
  CHECK_FALSE(std::filesystem::exists(dir.path() / "g.jsonl"));
}

TEST_CASE("runtime errors exit 1 without partial output") {
  TempDir dir;
  const auto bad = dir.str("bad.csv");
  std::ofstream(bad) << "cohort,student_id,mark\nc,s1,50\nc,s2,abc\n";
  auto r = run_cli("analyze --input '" + bad + "' --out '" + dir.str("report.csv") + "'", dir.str());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir.path() / "report.csv"));

  r = run_cli("analyze --input '" + kFixture + "' --baseline nope", dir.str());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("classical") != std::string::npos);

  r = run_cli("histogram --input '" + kFixture + "' --cohort nope", dir.str());
  CHECK(r.exit_code == 1);
  CHECK(run_cli("histogram --input '" + kFixture + "'", dir.str()).exit_code == 2);

  r = run_cli("simulate --eta 0.1 --out '" + dir.str("no/such/dir/x.csv") + "'", dir.str());
  CHECK(r.exit_code == 1);
}

TEST_CASE("simulate is byte-for-byte reproducible") {
  TempDir dir;
  const std::string common = "simulate --eta 0.1 --cohort-size 200 --seed 42 --out ";
  REQUIRE(run_cli(common + "'" + dir.str("a.csv") + "'", dir.str()).exit_code == 0);
  REQUIRE(run_cli(common + "'" + dir.str("b.csv") + "' --threads 4", dir.str()).exit_code == 0);
  const auto a = slurp(dir.str("a.csv"));
  CHECK(a == slurp(dir.str("b.csv")));
  const auto lines = lines_of(a);
  REQUIRE(lines.size() == 201);
  CHECK(lines[0] == "label,learner_index,score");
  CHECK(lines[1].rfind("simulated,0,", 0) == 0);

  REQUIRE(run_cli("simulate --modality cal-voice --cohort-size 20 --seed 1 --out '" + dir.str("c.csv") + "'",
                  dir.str()).exit_code == 0);
  CHECK(lines_of(slurp(dir.str("c.csv")))[1].rfind("cal-voice,0,", 0) == 0);

  // An explicit rate overrides the preset's but keeps its label.
  REQUIRE(run_cli("simulate --modality cal-voice --eta 0.1 --cohort-size 200 --seed 42 --out '" + dir.str("e.csv") + "'",
                  dir.str()).exit_code == 0);
  const auto e = slurp(dir.str("e.csv"));
  CHECK(e.rfind("label,learner_index,score\ncal-voice,0,", 0) == 0);
  std::string relabelled = a;
  for (std::size_t pos = 0; (pos = relabelled.find("simulated,", pos)) != std::string::npos;)
    relabelled.replace(pos, 10, "cal-voice,");
  CHECK(e == relabelled);

  REQUIRE(run_cli("simulate --eta 0.1 --cohort-size 200 --seed 43 --out '" + dir.str("d.csv") + "'", dir.str())
              .exit_code == 0);
  CHECK(a != slurp(dir.str("d.csv")));
}

TEST_CASE("sweep writes cohorts and a report that analyze agrees with") {
  TempDir dir;
  auto r = run_cli("sweep --etas 0.1,0.5 --cohort-size 50 --seed 3 --label s --out '" + dir.str("sw.csv") +
                       "' --report '" + dir.str("rep.csv") + "'",
                   dir.str());
  REQUIRE(r.exit_code == 0);
  const auto report = lines_of(slurp(dir.str("rep.csv")));
  REQUIRE(report.size() == 3);
  CHECK(report[0] == "label,n,mean,variance,stddev,coeff_variation,improvement_percent");
  CHECK(report[1].rfind("s-eta0.1,50,", 0) == 0);
  CHECK(report[2].rfind("s-eta0.5,50,", 0) == 0);

  REQUIRE(run_cli("analyze --input '" + dir.str("sw.csv") + "' --out '" + dir.str("an.csv") + "'", dir.str())
              .exit_code == 0);
  CHECK(slurp(dir.str("an.csv")) == slurp(dir.str("rep.csv")));
}

TEST_CASE("analyze reproduces the classical summary row") {
  TempDir dir;
  auto r = run_cli("analyze --input '" + kFixture + "' --out '" + dir.str("rep.csv") + "'", dir.str());
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() >= 2);
  std::istringstream row(lines[1]);
  std::string label, n, mean, var, sd, rho, imp;
  row >> label >> n >> mean >> var >> sd >> rho >> imp;
  CHECK(label == "classical");
  CHECK(n == "15");
  CHECK(mean == "32.46");
  CHECK(var == "265.32");
  CHECK(sd == "16.28");
  CHECK(rho == "0.50");
  CHECK(imp == "-");

  const auto rep = lines_of(slurp(dir.str("rep.csv")));
  REQUIRE(rep.size() == 4);
  const auto fields = csv::split_fields(rep[1]);
  REQUIRE(fields.size() == 7);
  CHECK(fields[0] == "classical");
  CHECK(std::stod(fields[2]) == doctest::Approx(487.0 / 15.0).epsilon(1e-14));
  CHECK(std::stod(fields[3]) == doctest::Approx(59696.0 / 225.0).epsilon(1e-14));
  CHECK(fields[6].empty());
}

TEST_CASE("analyze diagnoses reference mismatches") {
  TempDir dir;
  auto r = run_cli("analyze --input '" + kFixture + "' --reference '" + kReference + "'", dir.str());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("MISMATCH classical") == std::string::npos);
  CHECK(r.out.find("MISMATCH cal-novoice mean: computed 47.06 (47.0667), reference 46.80") != std::string::npos);
  CHECK(r.out.find("MISMATCH cal-voice mean: computed 65.66 (65.6667), reference 64.33") != std::string::npos);
}

TEST_CASE("histogram") {
  TempDir dir;
  auto r = run_cli("histogram --input '" + kFixture + "' --cohort classical --out '" + dir.str("h.csv") + "' --chart",
                   dir.str());
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(slurp(dir.str("h.csv")));
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] == "bin_lower,count");
  int total = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) total += std::stoi(lines[i].substr(lines[i].find(',') + 1));
  CHECK(total == 15);
  CHECK(r.out.find('#') != std::string::npos);
}

TEST_CASE("gen-problems is reproducible and traces are sound") {
  TempDir dir;
  const std::string base = "gen-problems --count 25 --dividend-digits 6 --divisor-digits 2 --seed 9 ";
  REQUIRE(run_cli(base + "--out '" + dir.str("a.jsonl") + "'", dir.str()).exit_code == 0);
  REQUIRE(run_cli(base + "--out '" + dir.str("b.jsonl") + "'", dir.str()).exit_code == 0);
  CHECK(slurp(dir.str("a.jsonl")) == slurp(dir.str("b.jsonl")));
  REQUIRE(run_cli(base + "--with-traces --out '" + dir.str("t.jsonl") + "'", dir.str()).exit_code == 0);

  const auto plain = lines_of(slurp(dir.str("a.jsonl")));
  const auto traced = lines_of(slurp(dir.str("t.jsonl")));
  REQUIRE(plain.size() == 25);
  REQUIRE(traced.size() == 25);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    const auto p = nlohmann::json::parse(plain[i]).get<longdiv::DivisionProblem>();
    const auto t = nlohmann::json::parse(traced[i]).get<longdiv::DivisionTrace>();
    CHECK(t.problem == p);
    CHECK(p.dividend >= 100000);
    CHECK(p.dividend <= 999999);
    CHECK(p.divisor >= 10);
    CHECK(p.divisor <= 99);
    CHECK(t.quotient * p.divisor + t.remainder == p.dividend);
    CHECK(t.remainder < p.divisor);
    CHECK(t.steps.size() == 4 * 6 - 1);
  }
}

TEST_CASE("import-fixture to a file and to a running service") {
  TempDir dir;
  REQUIRE(run_cli("import-fixture --out '" + dir.str("m.csv") + "'", dir.str()).exit_code == 0);
  const auto written = csv::read_marks_file(dir.str("m.csv"));
  const auto original = csv::read_marks_file(kFixture);
  REQUIRE(written.size() == original.size());
  for (std::size_t i = 0; i < written.size(); ++i) {
    CHECK(written[i].cohort == original[i].cohort);
    CHECK(written[i].mark == original[i].mark);
  }

  session::SessionStore store;
  ServiceConfig config;
  config.port = 0;
  config.admin_token = "tok";
  HttpService service(store, config);
  const int port = service.start_background();
  const std::string url = "http://127.0.0.1:" + std::to_string(port);

  CHECK(run_cli("import-fixture --url " + url + " --admin-token wrong", dir.str()).exit_code == 1);
  CHECK(store.finalized_marks().empty());
  auto r = run_cli("import-fixture --url " + url + " --admin-token tok", dir.str());
  CHECK(r.exit_code == 0);
  CHECK(store.finalized_marks().size() == 45);
  service.stop();
}
