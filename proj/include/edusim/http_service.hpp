#pragma once

#include <memory>
#include <thread>

#include "edusim/config.hpp"
#include "edusim/session_store.hpp"

namespace httplib {
class Server;
}

namespace edusim {

// HTTP/JSON front end of the tutoring session store.
//
//   POST /sessions                  create a session, returns the client view
//   GET  /sessions/{id}             client view
//   POST /sessions/{id}/steps       {value, problem_index?, step_index?}
//   POST /sessions/{id}/finalize    score
//   GET  /cohorts/{label}/stats     summary + improvement vs the baseline
//   GET  /export/marks.csv          `cohort,student_id,mark`, optional ?cohort=
//   POST /admin/import-marks        marks CSV body, X-Admin-Token header
//
// Errors are JSON {code, message}.
class HttpService {
 public:
  HttpService(session::SessionStore& store, ServiceConfig config);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind();
  /// Serves until stop(); call after bind().
  void listen();
  /// bind() + listen() on a background thread; returns the bound port.
  int start_background();
  void stop();

  httplib::Server& server() { return *server_; }

 private:
  void register_routes();

  session::SessionStore& store_;
  ServiceConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace edusim
