#include <fstream>
#include <map>

#include "doctest.h"
#include "edusim/config.hpp"
#include "edusim/errors.hpp"
#include "test_support.hpp"

using namespace edusim;
using edusim::testing::TempDir;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const std::string& name) -> std::optional<std::string> {
    const auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

std::string write_file(const TempDir& dir, const std::string& text) {
  const auto path = dir.str("config.json");
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("config defaults") {
  const auto c = load_config(std::nullopt, env_of({}));
  CHECK(c.host == "127.0.0.1");
  CHECK(c.port == 8080);
  CHECK(c.data_dir == "edusim-data");
  CHECK(c.baseline_label == "classical");
  CHECK(c.admin_token.empty());
}

TEST_CASE("config file then environment") {
  TempDir dir;
  const auto path = write_file(dir, R"({"host":"0.0.0.0","port":9000,"admin_token":"file"})");
  auto c = load_config(path, env_of({}));
  CHECK(c.host == "0.0.0.0");
  CHECK(c.port == 9000);
  CHECK(c.admin_token == "file");

  c = load_config(path, env_of({{"EDUSIM_PORT", "9100"}, {"EDUSIM_ADMIN_TOKEN", "env"},
                                {"EDUSIM_DATA_DIR", "/srv/x"}, {"EDUSIM_BASELINE_LABEL", "cal"}}));
  CHECK(c.port == 9100);
  CHECK(c.admin_token == "env");
  CHECK(c.data_dir == "/srv/x");
  CHECK(c.baseline_label == "cal");
  CHECK(c.host == "0.0.0.0");
}

TEST_CASE("config rejects bad input") {
  TempDir dir;
  CHECK_THROWS_AS(load_config(write_file(dir, R"({"prot":1})"), env_of({})), InvalidArgument);
  CHECK_THROWS_AS(load_config(write_file(dir, R"({"port":"x"})"), env_of({})), InvalidArgument);
  CHECK_THROWS_AS(load_config(write_file(dir, R"({"port":70000})"), env_of({})), InvalidArgument);
  CHECK_THROWS_AS(load_config(write_file(dir, "{"), env_of({})), InvalidArgument);
  CHECK_THROWS_AS(load_config(write_file(dir, "[]"), env_of({})), InvalidArgument);
  CHECK_THROWS_AS(load_config(dir.str("missing.json"), env_of({})), InvalidArgument);
  CHECK_THROWS_AS(load_config(std::nullopt, env_of({{"EDUSIM_PORT", "80a"}})), InvalidArgument);
  CHECK_THROWS_AS(load_config(std::nullopt, env_of({{"EDUSIM_PORT", "-1"}})), InvalidArgument);
}
