#include "econlab/service/server.hpp"

#include <httplib.h>

#include <atomic>

#include "econlab/error.hpp"

namespace econlab::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& category, const std::string& message,
                const std::vector<std::string>& fields = {}) {
  send_json(res, {{"error", {{"category", category}, {"message", message}, {"fields", fields}}}}, status);
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("request body is not valid JSON: ") + e.what(), {"body"});
  }
  if (!body.is_object()) throw ValidationError("request body must be a JSON object", {"body"});
  return body;
}

std::optional<std::string> request_id(const httplib::Request& req, const json& body) {
  if (body.contains("request_id")) {
    if (!body["request_id"].is_string() || body["request_id"].get<std::string>().empty())
      throw ValidationError("request_id must be a non-empty string", {"request_id"});
    return body["request_id"].get<std::string>();
  }
  if (req.has_header("Idempotency-Key")) return req.get_header_value("Idempotency-Key");
  return std::nullopt;
}

// Runs a handler and maps library errors onto HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ValidationError& e) {
      send_error(res, 400, "invalid_args", e.what(), e.fields());
    } catch (const NotFoundError& e) {
      send_error(res, 404, "not_found", e.what(), {e.id()});
    } catch (const StateError& e) {
      send_error(res, 409, "conflict", e.what());
    } catch (const toolbox::ToolError& e) {
      const int status = e.category() == toolbox::ErrorCategory::unknown_job ? 404
                         : e.category() == toolbox::ErrorCategory::execution_failure ? 409
                                                                                     : 400;
      send_error(res, status, toolbox::to_string(e.category()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

bool terminal(toolbox::JobState s) { return s == toolbox::JobState::succeeded || s == toolbox::JobState::failed; }

std::string sse(const std::string& event, const json& data) { return "event: " + event + "\ndata: " + data.dump() + "\n\n"; }

}  // namespace

struct Server::Impl {
  ServiceDeps deps;
  httplib::Server http;
  bool bound = false;
  // httplib ignores stop() until listen has started; these close that window.
  std::atomic<bool> listening{false};
  std::atomic<bool> stop_requested{false};

  void routes();
};

Server::Server(ServiceDeps deps) : impl_(std::make_unique<Impl>()) {
  if (deps.workflow == nullptr || deps.toolbox == nullptr) throw ServiceError("service needs a workflow and a toolbox");
  impl_->deps = std::move(deps);
  // httplib's default also sets SO_REUSEPORT, which lets a second server share a taken port.
  impl_->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw ServiceError("could not bind any port on " + host);
  } else if (!impl_->http.bind_to_port(host, port)) {
    throw ServiceError("port " + std::to_string(port) + " on " + host + " is already in use or not bindable");
  }
  impl_->bound = true;
  return bound;
}

void Server::listen() {
  if (!impl_->bound) throw ServiceError("listen() before bind()");
  impl_->listening = true;
  if (!impl_->stop_requested) impl_->http.listen_after_bind();
  impl_->listening = false;
}

void Server::stop() {
  impl_->stop_requested = true;
  if (impl_->listening) {
    impl_->http.wait_until_ready();
    impl_->http.stop();
  }
}

void Server::Impl::routes() {
  auto& wf = *deps.workflow;
  auto& tb = *deps.toolbox;

  http.Get("/health", guarded([this, &wf](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"},
                    {"sessions", wf.list_sessions().size()},
                    {"index_chunks", deps.index ? deps.index->size() : 0}});
  }));

  http.Get("/registry", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, deps.registry->to_json());
  }));

  http.Get("/sessions", guarded([&wf](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"sessions", wf.list_sessions()}});
  }));

  http.Post("/sessions", guarded([&wf](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    send_json(res, wf.create_session(request_id(req, body)), 201);
  }));

  http.Post(R"(/sessions/([^/]+)/intuition)", guarded([&wf](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    if (!body.contains("text") || !body["text"].is_string()) throw ValidationError("text must be a string", {"text"});
    send_json(res, wf.submit_intuition(req.matches[1], body["text"], request_id(req, body)));
  }));

  http.Post(R"(/sessions/([^/]+)/confirm-hypothesis)",
            guarded([&wf](const httplib::Request& req, httplib::Response& res) {
              const auto body = body_of(req);
              send_json(res, wf.confirm_hypothesis(req.matches[1], body, request_id(req, body)));
            }));

  http.Post(R"(/sessions/([^/]+)/confirm-design)", guarded([&wf](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    send_json(res, wf.confirm_design(req.matches[1], request_id(req, body)));
  }));

  http.Post(R"(/sessions/([^/]+)/execute)", guarded([&wf](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    send_json(res, wf.execute(req.matches[1], request_id(req, body)));
  }));

  http.Post(R"(/sessions/([^/]+)/iterate)", guarded([&wf](const httplib::Request& req, httplib::Response& res) {
    const auto body = body_of(req);
    if (!body.contains("accept") || !body["accept"].is_boolean())
      throw ValidationError("accept must be true or false", {"accept"});
    std::optional<std::string> text;
    if (body.contains("text")) {
      if (!body["text"].is_string()) throw ValidationError("text must be a string", {"text"});
      text = body["text"].get<std::string>();
    }
    send_json(res, wf.iterate(req.matches[1], body["accept"], text, request_id(req, body)));
  }));

  http.Get(R"(/sessions/([^/]+))", guarded([&wf](const httplib::Request& req, httplib::Response& res) {
    send_json(res, wf.session(req.matches[1]));
  }));
  http.Get(R"(/sessions/([^/]+)/memory)", guarded([&wf](const httplib::Request& req, httplib::Response& res) {
    send_json(res, wf.memory(req.matches[1]));
  }));
  http.Get(R"(/sessions/([^/]+)/results)", guarded([&wf](const httplib::Request& req, httplib::Response& res) {
    send_json(res, wf.results(req.matches[1]));
  }));

  http.Get(R"(/jobs/([^/]+))", guarded([&tb](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto out = toolbox::to_json(tb.poll_status(id));
    out["logs"] = json::array();
    for (const auto& e : tb.collect_logs(id)) out["logs"].push_back(toolbox::to_json(e));
    send_json(res, out);
  }));

  // Server-sent events: a "status" event per observable change, "log" events as lines
  // arrive, and a final "end" event once the job has finished.
  http.Get(R"(/jobs/([^/]+)/events)", guarded([&tb](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    tb.poll_status(id);  // unknown ids fail here as a plain 404
    struct Cursor {
      std::uint64_t version = 0;
      std::size_t logs = 0;
      bool first = true;
    };
    auto cursor = std::make_shared<Cursor>();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [&tb, id, cursor](std::size_t, httplib::DataSink& sink) {
      const auto status = cursor->first ? tb.poll_status(id)
                                        : tb.wait(id, cursor->version, std::chrono::milliseconds(1000));
      std::string out;
      if (cursor->first || status.version != cursor->version) out += sse("status", toolbox::to_json(status));
      cursor->first = false;
      cursor->version = status.version;
      const auto logs = tb.collect_logs(id);
      for (; cursor->logs < logs.size(); ++cursor->logs) out += sse("log", toolbox::to_json(logs[cursor->logs]));
      if (terminal(status.state)) out += sse("end", {{"state", toolbox::to_string(status.state)}});
      if (!out.empty() && !sink.write(out.data(), out.size())) return false;
      if (terminal(status.state)) {
        sink.done();
        return true;
      }
      return sink.is_writable();
    });
  }));

  // The NDJSON tool protocol, one request per POST.
  http.Post("/toolbox", [&tb](const httplib::Request& req, httplib::Response& res) {
    send_json(res, json::parse(tb.handle_line(req.body)));
  });
}

}  // namespace econlab::service
