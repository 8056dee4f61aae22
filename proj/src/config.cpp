#include "edusim/config.hpp"

#include <cstdlib>
#include <fstream>

#include "edusim/errors.hpp"
#include "json.hpp"

namespace edusim {
namespace {

int parse_port(const std::string& text) {
  std::size_t used = 0;
  int port = -1;
  try {
    port = std::stoi(text, &used);
  } catch (const std::exception&) {
  }
  if (used != text.size() || port < 0 || port > 65535) {
    throw InvalidArgument("invalid port '" + text + "'");
  }
  return port;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env) {
  ServiceConfig c;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw InvalidArgument("cannot open config file " + *path);
    try {
      const auto j = nlohmann::json::parse(in);
      if (!j.is_object()) throw InvalidArgument("config file " + *path + ": expected a JSON object");
      for (const auto& [key, value] : j.items()) {
        if (key == "host") c.host = value.get<std::string>();
        else if (key == "port") c.port = value.get<int>();
        else if (key == "data_dir") c.data_dir = value.get<std::string>();
        else if (key == "baseline_label") c.baseline_label = value.get<std::string>();
        else if (key == "admin_token") c.admin_token = value.get<std::string>();
        else throw InvalidArgument("unknown config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("config file " + *path + ": " + e.what());
    }
    if (c.port < 0 || c.port > 65535) throw InvalidArgument("invalid port in config file");
  }
  if (auto v = env("EDUSIM_HOST")) c.host = *v;
  if (auto v = env("EDUSIM_PORT")) c.port = parse_port(*v);
  if (auto v = env("EDUSIM_DATA_DIR")) c.data_dir = *v;
  if (auto v = env("EDUSIM_BASELINE_LABEL")) c.baseline_label = *v;
  if (auto v = env("EDUSIM_ADMIN_TOKEN")) c.admin_token = *v;
  return c;
}

}  // namespace edusim
