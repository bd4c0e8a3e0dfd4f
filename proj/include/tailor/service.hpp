#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tailor/session.hpp"

namespace tailor {

inline constexpr int kWireSchemaVersion = 1;

struct WireEvent {
  std::uint64_t seq = 0;
  std::string type;  // state_changed | view_evaluated | detection | protocol_reply
  nlohmann::json payload;

  nlohmann::json to_json() const;
};

// Append-only, sequence-numbered event log with blocking readers.
class EventHub {
public:
  std::uint64_t publish(std::string type, nlohmann::json payload);
  // Events with seq > after, waiting up to `timeout_ms` for at least one.
  std::vector<WireEvent> read_after(std::uint64_t after, int timeout_ms = 0) const;
  std::uint64_t last_seq() const;
  void close();
  bool closed() const;

private:
  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;
  std::vector<WireEvent> events_;
  bool closed_ = false;
};

struct CommandReply {
  bool ok = false;
  std::string text;
  std::string phase;
  std::uint64_t seq = 0;  // sequence number of the protocol_reply event
  std::uint64_t ticket = 0;  // position in the session's command order, from 1
  std::optional<Detection> detection;
  std::optional<Vec3> pointing;
};

struct FrameSnapshot {
  int view = -1;
  ColorImage color;
  std::vector<Detection> detections;
  std::optional<Vec3> pointing;
};

// One session plus its command applier thread and read-side caches.
class ServiceSession {
public:
  ServiceSession(std::string id, Config config, SceneSpec scene);
  ~ServiceSession();
  ServiceSession(const ServiceSession&) = delete;
  ServiceSession& operator=(const ServiceSession&) = delete;

  const std::string& id() const { return id_; }
  // Queues the utterance and blocks until it has been applied. Throws State once closed.
  CommandReply submit(const std::string& utterance);
  nlohmann::json state() const;
  // view < 0 selects the current view. Throws NotFound when not cached.
  FrameSnapshot frame(int view) const;
  EventHub& events() { return hub_; }
  const EventHub& events() const { return hub_; }
  void close();

private:
  struct Job {
    std::string utterance;
    std::uint64_t ticket = 0;
    CommandReply reply;
    bool done = false;
  };

  void worker();
  nlohmann::json snapshot_locked_session() const;  // called on the worker thread only
  void publish_state();

  std::string id_;
  Session session_;
  EventHub hub_;

  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::condition_variable done_cv_;
  std::deque<std::shared_ptr<Job>> queue_;
  std::uint64_t next_ticket_ = 1;
  bool closing_ = false;

  mutable std::mutex cache_mutex_;
  nlohmann::json state_;
  std::map<int, FrameSnapshot> frames_;
  std::optional<int> current_view_;

  std::thread thread_;
};

// In-memory registry of sessions; the HTTP layer is a thin wrapper around it.
class ServiceCore {
public:
  explicit ServiceCore(Config defaults = {}, std::string default_scene_path = {});
  ~ServiceCore();

  // Empty scene_path uses the default path, or the built-in sample gear scene.
  std::shared_ptr<ServiceSession> create_session(const std::string& scene_path = {},
                                                 const std::optional<Config>& config = std::nullopt);
  std::shared_ptr<ServiceSession> create_session(SceneSpec scene, const std::optional<Config>& config = std::nullopt);
  // Throws NotFound for unknown ids.
  std::shared_ptr<ServiceSession> session(const std::string& id) const;
  std::vector<std::string> session_ids() const;
  const Config& defaults() const { return defaults_; }

private:
  Config defaults_;
  std::string default_scene_path_;
  mutable std::mutex mutex_;
  std::uint64_t next_id_ = 1;
  std::map<std::string, std::shared_ptr<ServiceSession>> sessions_;
};

nlohmann::json detection_json(const Detection& d);
nlohmann::json vec_json(const Vec3& v);
nlohmann::json frame_json(const FrameSnapshot& frame);
std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

// Blocking HTTP server over a ServiceCore.
class HttpServer {
public:
  HttpServer(ServiceCore& core);
  ~HttpServer();
  // Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tailor
