#include "tailor/service.hpp"

#include <chrono>

#include "tailor/error.hpp"
#include "tailor/scenes.hpp"

namespace tailor {

using nlohmann::json;

json WireEvent::to_json() const { return {{"seq", seq}, {"type", type}, {"payload", payload}}; }

std::uint64_t EventHub::publish(std::string type, json payload) {
  std::uint64_t seq;
  {
    std::lock_guard lock(mutex_);
    seq = events_.size() + 1;
    events_.push_back({seq, std::move(type), std::move(payload)});
  }
  cv_.notify_all();
  return seq;
}

std::vector<WireEvent> EventHub::read_after(std::uint64_t after, int timeout_ms) const {
  std::unique_lock lock(mutex_);
  if (timeout_ms > 0)
    cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms), [&] { return closed_ || events_.size() > after; });
  if (after >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(after), events_.end()};
}

std::uint64_t EventHub::last_seq() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

void EventHub::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool EventHub::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json score_json(const GovScore& s) {
  return {{"silhouette", s.silhouette},
          {"depth_entropy", s.depth_entropy},
          {"curvature_entropy", s.curvature_entropy},
          {"color_entropy", s.color_entropy},
          {"combined", s.combined}};
}

json box_json(const BoundingBox& b) { return {{"x", b.x}, {"y", b.y}, {"width", b.width}, {"height", b.height}}; }

json detection_json(const Detection& d) {
  return {{"label", d.label}, {"bbox", box_json(d.bbox)}, {"score", d.score}, {"distance", d.distance},
          {"pixels", d.mask.pixel_count}};
}

namespace {

// Mask pixels with a 4-neighbor outside the mask, in row-major order.
json mask_outline(const ObjectMask& mask) {
  json out = json::array();
  const int w = mask.bits.width, h = mask.bits.height;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (!mask.test(u, v)) continue;
      const bool edge = u == 0 || v == 0 || u == w - 1 || v == h - 1 || !mask.test(u - 1, v) ||
                        !mask.test(u + 1, v) || !mask.test(u, v - 1) || !mask.test(u, v + 1);
      if (edge) out.push_back({u, v});
    }
  return out;
}

}  // namespace

json frame_json(const FrameSnapshot& f) {
  json boxes = json::array();
  json outline = json::array();
  for (const auto& d : f.detections) {
    json b = box_json(d.bbox);
    b["label"] = d.label;
    b["score"] = d.score;
    boxes.push_back(b);
    for (auto& p : mask_outline(d.mask)) outline.push_back(p);
  }
  return {{"schema", kWireSchemaVersion},
          {"view", f.view},
          {"width", f.color.width},
          {"height", f.color.height},
          {"encoding", "ppm"},
          {"image_base64", base64_encode(encode_ppm(f.color))},
          {"overlay",
           {{"boxes", boxes}, {"mask_outline", outline}, {"pointing", f.pointing ? vec_json(*f.pointing) : json()}}}};
}

std::string base64_encode(const std::string& bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned n = (static_cast<unsigned char>(bytes[i]) << 16) | (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (i < bytes.size()) {
    unsigned n = static_cast<unsigned char>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) n |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(const std::string& text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  unsigned buf = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = value(c);
    if (v < 0) fail(ErrorCode::Parse, "invalid base64 character");
    buf = (buf << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((buf >> bits) & 0xff);
    }
  }
  return out;
}

ServiceSession::ServiceSession(std::string id, Config config, SceneSpec scene)
    : id_(std::move(id)), session_(std::move(config), std::move(scene)) {
  session_.set_view_observer([this](const TrajectoryStep& s, const ViewEvaluation& ev) {
    if (ev.frame) {
      std::lock_guard lock(cache_mutex_);
      frames_[s.view] = FrameSnapshot{s.view, ev.frame->color, {}, std::nullopt};
      current_view_ = s.view;
    }
    hub_.publish("view_evaluated", {{"view", s.view},
                                    {"step", s.step},
                                    {"kind", step_kind_name(s.kind)},
                                    {"object", session_.current_object()},
                                    {"score", score_json(s.score)},
                                    {"thumbnail", "/v1/sessions/" + id_ + "/frames/" + std::to_string(s.view)}});
  });
  session_.set_phase_observer([this](Phase) { publish_state(); });
  publish_state();
  thread_ = std::thread([this] { worker(); });
}

ServiceSession::~ServiceSession() { close(); }

void ServiceSession::close() {
  {
    std::lock_guard lock(queue_mutex_);
    if (closing_ && !thread_.joinable()) return;
    closing_ = true;
  }
  queue_cv_.notify_all();
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
  hub_.close();
}

json ServiceSession::snapshot_locked_session() const {
  json objects = json::array();
  for (const auto& m : session_.registry().models())
    objects.push_back({{"name", m.name}, {"ordinal", m.ordinal}, {"exemplars", m.exemplars.size()}});
  json trajectory = json::array();
  for (const auto& s : session_.last_trajectory())
    trajectory.push_back({{"step", s.step}, {"view", s.view}, {"kind", step_kind_name(s.kind)}, {"combined", s.score.combined}});
  return {{"schema", kWireSchemaVersion},
          {"id", id_},
          {"phase", phase_name(session_.phase())},
          {"object", session_.current_object()},
          {"progress", session_.progress()},
          {"budget", session_.config().explorer.budget},
          {"objects", objects},
          {"current_view", session_.current_view() ? json(*session_.current_view()) : json()},
          {"trajectory", trajectory},
          {"canonical", session_.last_canonical()}};
}

void ServiceSession::publish_state() {
  json snap = snapshot_locked_session();
  {
    std::lock_guard lock(cache_mutex_);
    state_ = snap;
  }
  hub_.publish("state_changed", std::move(snap));
}

json ServiceSession::state() const {
  json s;
  {
    std::lock_guard lock(cache_mutex_);
    s = state_;
  }
  s["last_seq"] = hub_.last_seq();
  return s;
}

FrameSnapshot ServiceSession::frame(int view) const {
  std::lock_guard lock(cache_mutex_);
  if (view < 0) {
    if (!current_view_) fail(ErrorCode::NotFound, "no frame captured yet");
    view = *current_view_;
  }
  auto it = frames_.find(view);
  if (it == frames_.end()) fail(ErrorCode::NotFound, "no cached frame for view " + std::to_string(view));
  return it->second;
}

CommandReply ServiceSession::submit(const std::string& utterance) {
  auto job = std::make_shared<Job>();
  job->utterance = utterance;
  {
    std::unique_lock lock(queue_mutex_);
    if (closing_) fail(ErrorCode::State, "session " + id_ + " is closed");
    job->ticket = next_ticket_++;
    queue_.push_back(job);
  }
  queue_cv_.notify_all();
  std::unique_lock lock(queue_mutex_);
  done_cv_.wait(lock, [&] { return job->done; });
  return job->reply;
}

void ServiceSession::worker() {
  for (;;) {
    std::shared_ptr<Job> job;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [&] { return closing_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = queue_.front();
      queue_.pop_front();
    }
    CommandReply reply;
    Response r;
    try {
      r = session_.submit(job->utterance);
    } catch (const std::exception& e) {
      r = Response{false, std::string("internal error: ") + e.what(), std::nullopt, std::nullopt, -1};
    }
    if (r.view >= 0) {
      auto it = session_.frames().find(r.view);
      if (it != session_.frames().end()) {
        FrameSnapshot f{r.view, it->second.color, {}, r.pointing};
        if (r.detection) f.detections.push_back(*r.detection);
        std::lock_guard lock(cache_mutex_);
        frames_[r.view] = std::move(f);
        current_view_ = r.view;
      }
    }
    if (r.detection) {
      hub_.publish("detection", {{"view", r.view},
                                 {"detections", json::array({detection_json(*r.detection)})},
                                 {"pointing", r.pointing ? vec_json(*r.pointing) : json()}});
    }
    reply.ok = r.ok;
    reply.text = r.text;
    reply.phase = phase_name(session_.phase());
    reply.ticket = job->ticket;
    reply.detection = r.detection;
    reply.pointing = r.pointing;
    reply.seq = hub_.publish("protocol_reply", {{"ticket", job->ticket},
                                                {"utterance", job->utterance},
                                                {"ok", r.ok},
                                                {"text", r.text},
                                                {"phase", reply.phase}});
    publish_state();
    {
      std::lock_guard lock(queue_mutex_);
      job->reply = std::move(reply);
      job->done = true;
    }
    done_cv_.notify_all();
  }
}

ServiceCore::ServiceCore(Config defaults, std::string default_scene_path)
    : defaults_(std::move(defaults)), default_scene_path_(std::move(default_scene_path)) {
  defaults_.validate();
}

ServiceCore::~ServiceCore() {
  std::lock_guard lock(mutex_);
  for (auto& [id, s] : sessions_) s->close();
}

std::shared_ptr<ServiceSession> ServiceCore::create_session(const std::string& scene_path,
                                                            const std::optional<Config>& config) {
  const std::string path = scene_path.empty() ? default_scene_path_ : scene_path;
  return create_session(path.empty() ? sample_gear_scene() : load_scene(path), config);
}

std::shared_ptr<ServiceSession> ServiceCore::create_session(SceneSpec scene, const std::optional<Config>& config) {
  const Config cfg = config ? *config : defaults_;
  cfg.validate();
  std::lock_guard lock(mutex_);
  const std::string id = "s" + std::to_string(next_id_++);
  auto s = std::make_shared<ServiceSession>(id, cfg, std::move(scene));
  sessions_[id] = s;
  return s;
}

std::shared_ptr<ServiceSession> ServiceCore::session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::NotFound, "unknown session '" + id + "'");
  return it->second;
}

std::vector<std::string> ServiceCore::session_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

}  // namespace tailor
