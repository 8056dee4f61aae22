#include "edusim/http_service.hpp"

#include <sstream>

#include "edusim/errors.hpp"
#include "httplib.h"

namespace edusim {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  try {
    json body = json::parse(req.body);
    if (!body.is_object()) throw SessionError("bad_request", 400, "request body must be a JSON object");
    return body;
  } catch (const json::parse_error& e) {
    throw SessionError("bad_request", 400, std::string("malformed JSON: ") + e.what());
  }
}

std::uint64_t as_unsigned(const json& v, const char* field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw SessionError("invalid_value", 400, std::string(field) + " must be a non-negative integer");
}

// Seeds may arrive as decimal strings so that 64-bit values survive JavaScript clients.
std::uint64_t parse_seed(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
      x = std::stoull(s, &used, 10);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size() || s.front() == '-') {
      throw SessionError("invalid_spec", 400, "seed must be a decimal unsigned 64-bit integer");
    }
    return x;
  }
  return as_unsigned(v, "seed");
}

int as_int(const json& obj, const char* field, int fallback) {
  if (!obj.contains(field)) return fallback;
  const auto& v = obj.at(field);
  if (!v.is_number_integer()) {
    throw SessionError("invalid_spec", 400, std::string(field) + " must be an integer");
  }
  const auto x = v.get<std::int64_t>();
  if (x < -1'000'000 || x > 1'000'000) throw SessionError("invalid_spec", 400, std::string(field) + " out of range");
  return static_cast<int>(x);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const SessionError& e) {
      send_error(res, e.status(), e.code(), e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, "invalid_csv", e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, "invalid_argument", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

HttpService::HttpService(session::SessionStore& store, ServiceConfig config)
    : store_(store), config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  register_routes();
}

HttpService::~HttpService() { stop(); }

void HttpService::register_routes() {
  auto& srv = *server_;

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    session::CreateRequest r;
    if (!body.contains("cohort_label") || !body.at("cohort_label").is_string()) {
      throw SessionError("invalid_spec", 400, "cohort_label (string) is required");
    }
    r.cohort_label = body.at("cohort_label").get<std::string>();
    if (body.contains("student_id") && !body.at("student_id").is_null()) {
      r.student_id = body.at("student_id").get<std::string>();
    }
    if (body.contains("audio_enabled")) {
      if (!body.at("audio_enabled").is_boolean()) {
        throw SessionError("invalid_spec", 400, "audio_enabled must be a boolean");
      }
      r.audio_enabled = body.at("audio_enabled").get<bool>();
    }
    const json spec = body.value("problem_spec", json::object());
    if (!spec.is_object()) throw SessionError("invalid_spec", 400, "problem_spec must be an object");
    r.spec = {as_int(spec, "count", 1), as_int(spec, "dividend_digits", 4),
              as_int(spec, "divisor_digits", 2)};
    if (body.contains("seed") && !body.at("seed").is_null()) r.seed = parse_seed(body.at("seed"));
    send_json(res, 201, session::client_view(store_.create_session(r)));
  }));

  srv.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, session::client_view(store_.get(req.matches[1])));
  }));

  srv.Post(R"(/sessions/([^/]+)/steps)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.contains("value")) throw SessionError("invalid_value", 400, "value is required");
    const std::uint64_t value = as_unsigned(body.at("value"), "value");
    std::optional<session::Cursor> cursor;
    if (body.contains("problem_index") || body.contains("step_index")) {
      if (!body.contains("problem_index") || !body.contains("step_index")) {
        throw SessionError("bad_request", 400, "problem_index and step_index go together");
      }
      cursor = session::Cursor{as_unsigned(body.at("problem_index"), "problem_index"),
                               as_unsigned(body.at("step_index"), "step_index")};
    }
    const std::string id = req.matches[1];
    const auto result = store_.submit_step(id, value, cursor);
    const auto s = store_.get(id);
    json verdict = {{"is_correct", result.verdict.is_correct},
                    {"expected_value", result.verdict.expected_value}};
    send_json(res, 200,
              {{"verdict", verdict},
               {"advanced", result.advanced},
               {"session_complete", result.session_complete},
               {"cursor", {{"problem_index", result.cursor.problem_index},
                           {"step_index", result.cursor.step_index}}},
               {"next_prompt", session::step_prompt(s)}});
  }));

  srv.Post(R"(/sessions/([^/]+)/finalize)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, session::to_json(store_.finalize_session(req.matches[1])));
  }));

  srv.Get(R"(/cohorts/([^/]+)/stats)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string label = req.matches[1];
    std::optional<std::string> baseline;
    if (!config_.baseline_label.empty()) baseline = config_.baseline_label;
    send_json(res, 200, session::to_json(store_.cohort_stats(label, baseline)));
  }));

  srv.Get("/export/marks.csv", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> cohort;
    if (req.has_param("cohort")) cohort = req.get_param_value("cohort");
    res.status = 200;
    res.set_content(store_.export_marks_csv(cohort), "text/csv");
  }));

  srv.Post("/admin/import-marks", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (config_.admin_token.empty()) {
      throw SessionError("admin_disabled", 403, "no admin token configured");
    }
    if (req.get_header_value("X-Admin-Token") != config_.admin_token) {
      throw SessionError("unauthorized", 401, "missing or wrong X-Admin-Token");
    }
    std::istringstream in(req.body);
    const auto rows = csv::read_marks(in);
    send_json(res, 200, {{"imported", store_.import_marks(rows)}});
  }));
}

int HttpService::bind() {
  const int port = config_.port == 0 ? server_->bind_to_any_port(config_.host)
                                     : (server_->bind_to_port(config_.host, config_.port) ? config_.port : -1);
  if (port < 0) throw std::runtime_error("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  return port;
}

void HttpService::listen() { server_->listen_after_bind(); }

int HttpService::start_background() {
  const int port = bind();
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return port;
}

void HttpService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace edusim
