#include "tailor/tailor.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "tailor/bench.hpp"
#include "tailor/error.hpp"
#include "tailor/scenes.hpp"
#include "tailor/service.hpp"
#include "tailor/session.hpp"
#include "tailor/store.hpp"

using namespace tailor;

struct tailor_config {
  Config value;
};
struct tailor_scene {
  SceneSpec value;
};
struct tailor_sphere {
  ViewSphere value;
};
struct tailor_frame {
  RgbdFrame value;
};
struct tailor_exploration {
  std::vector<TrajectoryStep> trajectory;
  std::vector<std::pair<int, GovScore>> visited;
};
struct tailor_session {
  std::unique_ptr<Session> value;
  std::string reply;
  std::string phase;
  bool quit = false;
};
struct tailor_server {
  std::unique_ptr<ServiceCore> core;
  std::unique_ptr<HttpServer> http;
  int port = 0;
};

namespace {

thread_local std::string g_last_error;

tailor_status set_error(tailor_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
tailor_status guard(F&& f) {
  try {
    f();
    return TAILOR_OK;
  } catch (const Error& e) {
    return set_error(static_cast<tailor_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(TAILOR_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(TAILOR_E_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(name) + " must not be null");
}

tailor_gov to_c(const GovScore& s) {
  return {s.silhouette, s.depth_entropy, s.curvature_entropy, s.color_entropy, s.combined};
}

void write_binary(const char* path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, std::string("cannot open ") + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, std::string("cannot write ") + path);
}

}  // namespace

extern "C" {

const char* tailor_version(void) { return "0.1.0"; }

const char* tailor_status_name(tailor_status status) {
  switch (status) {
    case TAILOR_OK: return "ok";
    case TAILOR_E_INVALID_ARGUMENT: return "invalid argument";
    case TAILOR_E_IO: return "i/o error";
    case TAILOR_E_PARSE: return "parse error";
    case TAILOR_E_VERSION: return "unsupported version";
    case TAILOR_E_STATE: return "invalid state";
    case TAILOR_E_NOT_FOUND: return "not found";
    case TAILOR_E_BUDGET_EXHAUSTED: return "budget exhausted";
    case TAILOR_E_NO_OBJECT: return "no object";
    case TAILOR_E_NO_PLANE: return "no plane";
    case TAILOR_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* tailor_last_error(void) { return g_last_error.c_str(); }

tailor_status tailor_config_default(tailor_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new tailor_config{};
  });
}

tailor_status tailor_config_load(const char* path, tailor_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new tailor_config{load_config(path)};
  });
}

tailor_status tailor_config_save(const tailor_config* config, const char* path) {
  return guard([&] {
    need(config, "config");
    need(path, "path");
    save_config(config->value, path);
  });
}

tailor_status tailor_config_set(tailor_config* config, const char* key, const char* value) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->value = set_config_value(config->value, key, value);
  });
}

void tailor_config_free(tailor_config* config) { delete config; }

tailor_status tailor_scene_load(const char* path, tailor_scene** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new tailor_scene{load_scene(path)};
  });
}

tailor_status tailor_scene_builtin(const char* name, tailor_scene** out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    const std::string n = name;
    if (n == "gear") *out = new tailor_scene{sample_gear_scene()};
    else if (n == "cube") *out = new tailor_scene{sample_cube_scene()};
    else fail(ErrorCode::NotFound, "unknown built-in scene '" + n + "': expected gear or cube");
  });
}

tailor_status tailor_scene_save(const tailor_scene* scene, const char* path) {
  return guard([&] {
    need(scene, "scene");
    need(path, "path");
    save_scene(scene->value, path);
  });
}

size_t tailor_scene_object_count(const tailor_scene* scene) { return scene ? scene->value.objects.size() : 0; }

size_t tailor_scene_triangle_count(const tailor_scene* scene) {
  if (!scene) return 0;
  size_t n = 0;
  for (const auto& o : scene->value.objects) n += o.mesh.triangle_count();
  return n;
}

void tailor_scene_free(tailor_scene* scene) { delete scene; }

tailor_status tailor_sphere_create(const tailor_config* config, tailor_sphere** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = new tailor_sphere{config->value.make_sphere()};
  });
}

size_t tailor_sphere_size(const tailor_sphere* sphere) { return sphere ? sphere->value.size() : 0; }

tailor_status tailor_sphere_direction(const tailor_sphere* sphere, int view, double out_xyz[3]) {
  return guard([&] {
    need(sphere, "sphere");
    need(out_xyz, "out_xyz");
    const Vec3 d = sphere->value.direction(view);
    out_xyz[0] = d.x();
    out_xyz[1] = d.y();
    out_xyz[2] = d.z();
  });
}

tailor_status tailor_sphere_neighbors(const tailor_sphere* sphere, int view, int* out, size_t capacity, size_t* count) {
  return guard([&] {
    need(sphere, "sphere");
    need(count, "count");
    const auto& n = sphere->value.neighbors(view);
    *count = n.size();
    if (capacity > 0) need(out, "out");
    for (size_t i = 0; i < n.size() && i < capacity; ++i) out[i] = n[i];
  });
}

void tailor_sphere_free(tailor_sphere* sphere) { delete sphere; }

tailor_status tailor_render_view(const tailor_scene* scene, const tailor_config* config, int view, tailor_frame** out) {
  return guard([&] {
    need(scene, "scene");
    need(config, "config");
    need(out, "out");
    const ViewSphere sphere = config->value.make_sphere();
    const CameraPose pose = camera_pose_for(sphere, view, scene->value.object_center());
    *out = new tailor_frame{render(scene->value, pose, config->value.render)};
  });
}

int tailor_frame_width(const tailor_frame* frame) { return frame ? frame->value.width : 0; }
int tailor_frame_height(const tailor_frame* frame) { return frame ? frame->value.height : 0; }

const uint8_t* tailor_frame_rgb(const tailor_frame* frame) {
  static_assert(sizeof(Rgb) == 3, "Rgb must be tightly packed");
  return frame ? reinterpret_cast<const uint8_t*>(frame->value.color.data.data()) : nullptr;
}

const double* tailor_frame_depth(const tailor_frame* frame) {
  return frame ? frame->value.depth.data.data() : nullptr;
}

tailor_status tailor_frame_evaluate(const tailor_frame* frame, const tailor_config* config, tailor_gov* out) {
  return guard([&] {
    need(frame, "frame");
    need(config, "config");
    need(out, "out");
    const Config& c = config->value;
    const PlaneModel plane = fit_dominant_plane(back_project(frame->value), c.plane);
    const ObjectMask mask = primary_mask(extract_object_masks(frame->value, plane, c.segment));
    *out = to_c(evaluate_gov(frame->value, mask, c.weights, c.gov));
  });
}

tailor_status tailor_frame_write_ppm(const tailor_frame* frame, const char* path) {
  return guard([&] {
    need(frame, "frame");
    need(path, "path");
    write_binary(path, encode_ppm(frame->value.color));
  });
}

tailor_status tailor_frame_write_pgm(const tailor_frame* frame, const char* path) {
  return guard([&] {
    need(frame, "frame");
    need(path, "path");
    write_binary(path, encode_pgm16(frame->value.depth));
  });
}

void tailor_frame_free(tailor_frame* frame) { delete frame; }

tailor_status tailor_explore(const tailor_scene* scene, const tailor_config* config, int budget, int start_view,
                             tailor_exploration** out) {
  return guard([&] {
    need(scene, "scene");
    need(config, "config");
    need(out, "out");
    const Config& c = config->value;
    const ViewSphere sphere = c.make_sphere();
    SceneEvaluator evaluator(scene->value, sphere, c.perception());
    Exploration e(sphere, evaluator, budget > 0 ? budget : c.explorer.budget);
    e.run(start_view);
    auto result = std::make_unique<tailor_exploration>();
    result->trajectory = e.trajectory();
    for (const auto& s : e.trajectory()) result->visited.emplace_back(s.view, s.score);
    *out = result.release();
  });
}

size_t tailor_exploration_step_count(const tailor_exploration* exploration) {
  return exploration ? exploration->trajectory.size() : 0;
}

tailor_status tailor_exploration_step(const tailor_exploration* exploration, size_t i, tailor_step* out) {
  return guard([&] {
    need(exploration, "exploration");
    need(out, "out");
    if (i >= exploration->trajectory.size()) fail(ErrorCode::InvalidArgument, "step index out of range");
    const TrajectoryStep& s = exploration->trajectory[i];
    *out = {s.step, s.view, static_cast<tailor_step_kind>(s.kind), to_c(s.score)};
  });
}

tailor_status tailor_exploration_canonical(const tailor_exploration* exploration, int k, int* out, size_t capacity,
                                           size_t* count) {
  return guard([&] {
    need(exploration, "exploration");
    need(count, "count");
    if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
    auto v = exploration->visited;
    std::stable_sort(v.begin(), v.end(),
                     [](const auto& a, const auto& b) { return ranks_above(a.second, a.first, b.second, b.first); });
    if (v.size() > static_cast<size_t>(k)) v.resize(k);
    *count = v.size();
    if (capacity > 0) need(out, "out");
    for (size_t i = 0; i < v.size() && i < capacity; ++i) out[i] = v[i].first;
  });
}

tailor_status tailor_exploration_write_csv(const tailor_exploration* exploration, const char* path) {
  return guard([&] {
    need(exploration, "exploration");
    need(path, "path");
    std::ostringstream out;
    write_trajectory_csv(out, exploration->trajectory);
    write_text_file(path, out.str());
  });
}

void tailor_exploration_free(tailor_exploration* exploration) { delete exploration; }

tailor_status tailor_session_create(const tailor_config* config, const tailor_scene* scene, tailor_session** out) {
  return guard([&] {
    need(config, "config");
    need(scene, "scene");
    need(out, "out");
    auto s = std::make_unique<tailor_session>();
    s->value = std::make_unique<Session>(config->value, scene->value);
    s->phase = phase_name(s->value->phase());
    *out = s.release();
  });
}

tailor_status tailor_session_submit(tailor_session* session, const char* utterance, int* accepted) {
  return guard([&] {
    need(session, "session");
    need(utterance, "utterance");
    const Response r = session->value->submit(utterance);
    session->reply = r.text;
    session->phase = phase_name(session->value->phase());
    try {
      if (parse_command(utterance).kind == CommandKind::Quit) session->quit = true;
    } catch (const Error&) {
    }
    if (accepted) *accepted = r.ok ? 1 : 0;
  });
}

const char* tailor_session_reply(const tailor_session* session) { return session ? session->reply.c_str() : ""; }
const char* tailor_session_phase(const tailor_session* session) { return session ? session->phase.c_str() : ""; }
int tailor_session_quit_requested(const tailor_session* session) { return session && session->quit ? 1 : 0; }

const char* tailor_session_event_log(const tailor_session* session) {
  return session ? session->value->event_log().c_str() : "";
}

size_t tailor_session_object_count(const tailor_session* session) {
  return session ? session->value->registry().size() : 0;
}

tailor_status tailor_session_save_registry(const tailor_session* session, const char* path) {
  return guard([&] {
    need(session, "session");
    need(path, "path");
    save_registry(session->value->registry(), path);
  });
}

tailor_status tailor_session_replay(const tailor_config* config, const tailor_scene* scene, const char* event_log,
                                    tailor_session** out) {
  return guard([&] {
    need(config, "config");
    need(scene, "scene");
    need(event_log, "event_log");
    need(out, "out");
    auto s = std::make_unique<tailor_session>();
    s->value = std::make_unique<Session>(replay(event_log, config->value, scene->value));
    s->phase = phase_name(s->value->phase());
    *out = s.release();
  });
}

void tailor_session_free(tailor_session* session) { delete session; }

tailor_status tailor_bench_run(const tailor_config* config, int corpus_size, uint64_t corpus_seed, const int* budgets,
                               size_t budget_count, const uint64_t* seeds, size_t seed_count, const char* strategies,
                               int test_views, const char* raw_csv_path, const char* aggregate_csv_path,
                               tailor_progress_fn progress, void* user) {
  return guard([&] {
    need(config, "config");
    need(budgets, "budgets");
    need(seeds, "seeds");
    need(strategies, "strategies");
    BenchOptions opt;
    opt.config = config->value;
    opt.budgets.assign(budgets, budgets + budget_count);
    opt.seeds.assign(seeds, seeds + seed_count);
    opt.strategies.clear();
    std::stringstream list(strategies);
    std::string name;
    while (std::getline(list, name, ','))
      if (!name.empty()) opt.strategies.push_back(parse_strategy(name));
    if (test_views > 0) opt.test_views = test_views;
    if (progress) opt.progress = [&](const std::string& m) { progress(m.c_str(), user); };
    const BenchResult r = run_benchmark(generate_corpus(corpus_size, corpus_seed), opt);
    if (raw_csv_path) write_text_file(raw_csv_path, raw_csv(r));
    if (aggregate_csv_path) write_text_file(aggregate_csv_path, aggregate_csv(r));
  });
}

tailor_status tailor_server_create(const tailor_config* config, const char* host, int port,
                                   const char* default_scene_path, tailor_server** out) {
  return guard([&] {
    need(config, "config");
    need(host, "host");
    need(out, "out");
    if (port < 0 || port > 65535) fail(ErrorCode::InvalidArgument, "port out of range: must be 0..65535");
    auto s = std::make_unique<tailor_server>();
    const std::string scene = default_scene_path ? default_scene_path : "";
    if (!scene.empty()) load_scene(scene);
    s->core = std::make_unique<ServiceCore>(config->value, scene);
    s->http = std::make_unique<HttpServer>(*s->core);
    s->port = s->http->bind(host, port);
    *out = s.release();
  });
}

int tailor_server_port(const tailor_server* server) { return server ? server->port : 0; }

tailor_status tailor_server_run(tailor_server* server) {
  return guard([&] {
    need(server, "server");
    server->http->listen();
  });
}

void tailor_server_stop(tailor_server* server) {
  if (server) server->http->stop();
}

void tailor_server_free(tailor_server* server) {
  if (!server) return;
  server->http.reset();
  server->core.reset();
  delete server;
}

}  // extern "C"
