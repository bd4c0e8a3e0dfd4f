#include "tailor/error.hpp"
#include "tailor/service.hpp"

#include <httplib.h>

#include <charconv>

namespace tailor {

using nlohmann::json;

namespace {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Version: return "version";
    case ErrorCode::State: return "state";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::BudgetExhausted: return "budget_exhausted";
    case ErrorCode::NoObject: return "no_object";
    case ErrorCode::NoPlane: return "no_plane";
    case ErrorCode::Internal: return "internal";
  }
  return "internal";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Parse:
    case ErrorCode::Version: return 400;
    case ErrorCode::NotFound:
    case ErrorCode::Io: return 404;
    case ErrorCode::State: return 409;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

// Runs a handler, mapping library errors and malformed JSON to error bodies.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    send_error(res, http_status(e.code()), error_name(e.code()), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "parse", std::string("malformed JSON body: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body);
  if (!body.is_object()) fail(ErrorCode::Parse, "request body must be a JSON object");
  return body;
}

std::uint64_t parse_count(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    fail(ErrorCode::InvalidArgument, what + " must be a nonnegative integer");
  return v;
}

std::string sse_record(const WireEvent& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.type + "\ndata: " + e.to_json().dump() + "\n\n";
}

}  // namespace

struct HttpServer::Impl {
  ServiceCore& core;
  httplib::Server server;
  explicit Impl(ServiceCore& c) : core(c) {}
};

HttpServer::HttpServer(ServiceCore& core) : impl_(std::make_unique<Impl>(core)) {
  auto& svr = impl_->server;
  ServiceCore* core_ptr = &core;

  svr.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"schema", kWireSchemaVersion}, {"status", "ok"}});
  });

  svr.Post("/v1/sessions", [core_ptr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      std::optional<Config> config;
      if (body.contains("config_text")) config = parse_config(body.at("config_text").get<std::string>());
      else if (body.contains("config")) config = load_config(body.at("config").get<std::string>());
      const std::string scene = body.value("scene", std::string());
      auto s = core_ptr->create_session(scene, config);
      send_json(res, 201, {{"schema", kWireSchemaVersion}, {"id", s->id()}, {"state", s->state()}});
    });
  });

  svr.Get("/v1/sessions", [core_ptr](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"schema", kWireSchemaVersion}, {"sessions", core_ptr->session_ids()}});
  });

  svr.Post(R"(/v1/sessions/([^/]+)/commands)", [core_ptr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = core_ptr->session(req.matches[1]);
      const json body = parse_body(req);
      if (!body.contains("utterance") || !body.at("utterance").is_string())
        fail(ErrorCode::Parse, "body needs a string field 'utterance'");
      const CommandReply r = s->submit(body.at("utterance").get<std::string>());
      json out = {{"schema", kWireSchemaVersion}, {"ok", r.ok},     {"text", r.text},
                  {"phase", r.phase},             {"seq", r.seq},   {"ticket", r.ticket}};
      out["detection"] = r.detection ? detection_json(*r.detection) : json();
      out["pointing"] = r.pointing ? vec_json(*r.pointing) : json();
      send_json(res, 200, out);
    });
  });

  svr.Get(R"(/v1/sessions/([^/]+)/state)", [core_ptr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, core_ptr->session(req.matches[1])->state()); });
  });

  svr.Get(R"(/v1/sessions/([^/]+)/frames/([^/]+))", [core_ptr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = core_ptr->session(req.matches[1]);
      const std::string which = req.matches[2];
      int view = -1;
      if (which != "current") {
        std::size_t used = 0;
        try {
          view = std::stoi(which, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != which.size() || view < 0) fail(ErrorCode::InvalidArgument, "view must be 'current' or an index");
      }
      send_json(res, 200, frame_json(s->frame(view)));
    });
  });

  svr.Get(R"(/v1/sessions/([^/]+)/events)", [core_ptr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = core_ptr->session(req.matches[1]);
      std::uint64_t after = 0;
      if (req.has_header("Last-Event-ID")) after = parse_count(req.get_header_value("Last-Event-ID"), "Last-Event-ID");
      if (req.has_param("after")) after = parse_count(req.get_param_value("after"), "after");
      const std::size_t limit = req.has_param("limit") ? parse_count(req.get_param_value("limit"), "limit") : 0;
      if (req.has_param("format") && req.get_param_value("format") == "json") {
        json events = json::array();
        for (const auto& e : s->events().read_after(after)) events.push_back(e.to_json());
        send_json(res, 200, {{"schema", kWireSchemaVersion}, {"events", events}});
        return;
      }
      auto cursor = std::make_shared<std::uint64_t>(after);
      auto sent = std::make_shared<std::size_t>(0);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [s, cursor, sent, limit](std::size_t, httplib::DataSink& sink) {
        auto events = s->events().read_after(*cursor, 500);
        if (events.empty()) {
          if (s->events().closed()) {
            sink.done();
            return true;
          }
          const std::string ping = ": keepalive\n\n";
          return sink.write(ping.data(), ping.size());
        }
        for (const auto& e : events) {
          const std::string rec = sse_record(e);
          if (!sink.write(rec.data(), rec.size())) return false;
          *cursor = e.seq;
          if (limit && ++*sent >= limit) {
            sink.done();
            return true;
          }
        }
        return true;
      });
    });
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) fail(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace tailor
