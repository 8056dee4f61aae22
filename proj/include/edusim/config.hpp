#pragma once

#include <functional>
#include <optional>
#include <string>

namespace edusim {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "edusim-data";
  std::string baseline_label = "classical";
  std::string admin_token;  // empty disables /admin endpoints
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

/// Defaults, then the JSON config file (if a path is given), then environment
/// overrides: EDUSIM_HOST, EDUSIM_PORT, EDUSIM_DATA_DIR, EDUSIM_BASELINE_LABEL,
/// EDUSIM_ADMIN_TOKEN.
ServiceConfig load_config(const std::optional<std::string>& path, const EnvLookup& env = process_env);

}  // namespace edusim
