#include "teamsim/http_api.hpp"

#include <thread>

#include <httplib.h>

#include "teamsim/error.hpp"

namespace teamsim {

using json = nlohmann::json;

json diagnostic_to_json(const Diagnostic& d) {
  return {{"severity", d.severity == Diagnostic::Severity::Error ? "error" : "warning"},
          {"path", d.path},
          {"message", d.message}};
}

namespace {

json diagnostics_json(const std::vector<Diagnostic>& diags) {
  json out = json::array();
  for (const auto& d : diags) out.push_back(diagnostic_to_json(d));
  return out;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(1) + "\n", "application/json");
}

void fail(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  reply(res, status, {{"error", kind}, {"message", message}});
}

// Runs a handler and maps library errors to status codes.
template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const NotFound& e) {
    fail(res, 404, "not_found", e.what());
  } catch (const UnknownAgent& e) {
    fail(res, 404, "unknown_agent", e.what());
  } catch (const InvalidState& e) {
    fail(res, 409, "invalid_state", e.what());
  } catch (const json::exception& e) {
    fail(res, 400, "bad_request", e.what());
  } catch (const std::invalid_argument& e) {
    fail(res, 400, "bad_request", e.what());
  } catch (const PolicyFailure& e) {
    fail(res, 502, "backend_failure", e.what());
  } catch (const std::exception& e) {
    fail(res, 500, "internal", e.what());
  }
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

std::string sse_frame(const StreamMessage& m) {
  return "id: " + std::to_string(m.seq) + "\nevent: " + m.type + "\ndata: " + stream_message_to_json(m).dump() + "\n\n";
}

}  // namespace

struct HttpApi::Impl {
  SessionManager& manager;
  httplib::Server server;
  std::thread thread;

  explicit Impl(SessionManager& m) : manager(m) { routes(); }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"ok", true}}); });

    server.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, {{"sessions", manager.list()}}); });
    });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::string document = req.body;
        SessionOptions options;
        if (req.get_header_value("Content-Type").find("application/json") != std::string::npos) {
          const auto j = body_json(req);
          document = j.at("document").get<std::string>();
          options.policy = j.value("policy", std::string("scripted"));
        }
        const auto r = manager.create_session(document, options);
        if (!r.id) {
          reply(res, 422, {{"error", "invalid_scenario"}, {"diagnostics", diagnostics_json(r.diagnostics)}});
          return;
        }
        reply(res, 201, {{"id", *r.id}, {"diagnostics", diagnostics_json(r.diagnostics)}});
      });
    });

    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, manager.describe(req.matches[1])); });
    });

    server.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        manager.remove(req.matches[1]);
        reply(res, 200, {{"removed", req.matches[1].str()}});
      });
    });

    server.Put(R"(/sessions/([^/]+)/agents)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto diags = manager.update_agents(req.matches[1], body_json(req));
        reply(res, has_errors(diags) ? 422 : 200, {{"diagnostics", diagnostics_json(diags)}});
      });
    });

    server.Post(R"(/sessions/([^/]+)/(start|pause|resume|abort))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] {
                    const std::string id = req.matches[1];
                    const std::string verb = req.matches[2];
                    if (verb == "start") {
                      Pacing p;
                      p.steps_per_second = body_json(req).value("steps_per_second", 0.0);
                      manager.start(id, p);
                    } else if (verb == "pause") {
                      manager.pause(id);
                    } else if (verb == "resume") {
                      manager.resume(id);
                    } else {
                      manager.abort(id);
                    }
                    reply(res, 200, manager.describe(id));
                  });
                });

    server.Get(R"(/sessions/([^/]+)/stream)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto sub = manager.subscribe(req.matches[1]);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream",
            [sub](std::size_t, httplib::DataSink& sink) {
              if (auto m = sub->next(std::chrono::milliseconds(250))) {
                const auto frame = sse_frame(*m);
                return sink.write(frame.data(), frame.size());
              }
              if (sub->closed()) {
                sink.done();
                return true;
              }
              static const std::string keepalive = ": keepalive\n\n";
              return sink.write(keepalive.data(), keepalive.size());
            },
            [sub](bool) { sub->cancel(); });
      });
    });

    server.Post(R"(/sessions/([^/]+)/interview)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto j = body_json(req);
        const auto a = manager.interview(req.matches[1], j.at("agent").get<std::string>(), j.at("question").get<std::string>());
        reply(res, 200, {{"answer", a.text}, {"retrieved", a.retrieved}, {"cited", a.cited}});
      });
    });

    server.Get(R"(/sessions/([^/]+)/results)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { reply(res, 200, manager.results(req.matches[1])); });
    });

    server.Get(R"(/sessions/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        res.status = 200;
        res.set_header("Content-Disposition", "attachment; filename=\"" + req.matches[1].str() + ".log.json\"");
        res.set_content(manager.log_document(req.matches[1]), "application/json");
      });
    });
  }
};

HttpApi::HttpApi(SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {}

HttpApi::~HttpApi() { stop(); }

int HttpApi::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) return -1;
  } else if (!impl_->server.bind_to_port(host, port)) {
    return -1;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

bool HttpApi::serve(const std::string& host, int port) { return impl_->server.listen(host, port); }

void HttpApi::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace teamsim
