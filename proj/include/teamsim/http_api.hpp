#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "teamsim/scenario.hpp"
#include "teamsim/service.hpp"

namespace teamsim {

nlohmann::json diagnostic_to_json(const Diagnostic& d);

// Route table (JSON bodies unless noted):
//   GET    /health
//   GET    /sessions                      -> {"sessions": [id...]}
//   POST   /sessions                      scenario document (YAML), or {"document", "policy"}
//   GET    /sessions/{id}
//   DELETE /sessions/{id}
//   PUT    /sessions/{id}/agents          [{name, ...profile fields}]
//   POST   /sessions/{id}/start           {"steps_per_second"} optional
//   POST   /sessions/{id}/pause | resume | abort
//   GET    /sessions/{id}/stream          text/event-stream of stream messages
//   POST   /sessions/{id}/interview       {"agent", "question"}
//   GET    /sessions/{id}/results
//   GET    /sessions/{id}/log             canonical run-log document
class HttpApi {
 public:
  explicit HttpApi(SessionManager& manager);
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port, or -1.
  int start(const std::string& host, int port);
  // Blocks serving on the calling thread.
  bool serve(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace teamsim
