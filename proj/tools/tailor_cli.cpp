#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailor/tailor.h"

namespace {

struct Failure {
  int code;
};

void check(tailor_status status, const std::string& what) {
  if (status == TAILOR_OK) return;
  std::cerr << "error: " << what << ": " << tailor_last_error() << " (" << tailor_status_name(status) << ")\n";
  throw Failure{1};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Config = Handle<tailor_config, tailor_config_free>;
using Scene = Handle<tailor_scene, tailor_scene_free>;
using Sphere = Handle<tailor_sphere, tailor_sphere_free>;
using Frame = Handle<tailor_frame, tailor_frame_free>;
using ExplorationH = Handle<tailor_exploration, tailor_exploration_free>;
using SessionH = Handle<tailor_session, tailor_session_free>;
using Server = Handle<tailor_server, tailor_server_free>;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> settings;
};

struct SceneOptions {
  std::string path;
  std::string builtin = "gear";
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("-c,--config", o.config_path, "Config file")->check(CLI::ExistingFile);
  app->add_option("--set", o.settings, "Override a config key, e.g. --set explorer.budget=20");
}

void add_scene(CLI::App* app, SceneOptions& o) {
  auto* path = app->add_option("-s,--scene", o.path, "Scene file")->check(CLI::ExistingFile);
  app->add_option("--builtin", o.builtin, "Built-in scene (gear, cube)")->excludes(path);
}

void load_config(const CommonOptions& o, Config& cfg) {
  if (o.config_path.empty()) check(tailor_config_default(cfg.out()), "default config");
  else check(tailor_config_load(o.config_path.c_str(), cfg.out()), "loading " + o.config_path);
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got '" << s << "'\n";
      throw Failure{1};
    }
    check(tailor_config_set(cfg.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()), "--set " + s);
  }
}

void load_scene(const SceneOptions& o, Scene& scene) {
  if (!o.path.empty()) check(tailor_scene_load(o.path.c_str(), scene.out()), "loading " + o.path);
  else check(tailor_scene_builtin(o.builtin.c_str(), scene.out()), "built-in scene");
}

void print_gov(const tailor_gov& g) {
  std::printf("silhouette=%.6f depth_entropy=%.6f curvature_entropy=%.6f color_entropy=%.6f combined=%.6f\n",
              g.silhouette, g.depth_entropy, g.curvature_entropy, g.color_entropy, g.combined);
}

const char* kind_name(tailor_step_kind k) {
  switch (k) {
    case TAILOR_STEP_START: return "start";
    case TAILOR_STEP_CLIMB: return "climb";
    case TAILOR_STEP_JUMP: return "jump";
  }
  return "?";
}

int run_session(tailor_session* session, std::istream& in, bool script, bool echo) {
  std::string line;
  int line_no = 0;
  if (!script) std::cout << "tailor> " << std::flush;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      if (!script) std::cout << "tailor> " << std::flush;
      continue;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (echo) std::cout << "> " << line << "\n";
    int accepted = 0;
    check(tailor_session_submit(session, line.c_str(), &accepted), "command");
    std::cout << tailor_session_reply(session) << "\n";
    if (script && !accepted) {
      std::cerr << "error: line " << line_no << ": command rejected in phase " << tailor_session_phase(session) << "\n";
      return 2;
    }
    if (tailor_session_quit_requested(session)) return 0;
    if (!script) std::cout << "tailor> " << std::flush;
  }
  return 0;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        const long long lo = std::stoll(item.substr(0, dash)), hi = std::stoll(item.substr(dash + 1));
        for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<T>(v));
      } else {
        out.push_back(static_cast<T>(std::stoll(item)));
      }
    } catch (const std::exception&) {
      std::cerr << "error: invalid " << what << " list '" << text << "'\n";
      throw Failure{1};
    }
  }
  return out;
}

tailor_server* g_server = nullptr;

void on_signal(int) {
  if (g_server) tailor_server_stop(g_server);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive object registration with active view selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tailor_version()));

  CommonOptions common;

  auto* sphere_cmd = app.add_subcommand("sphere", "List the viewpoints of the view sphere");
  add_common(sphere_cmd, common);

  SceneOptions scene_opt;
  int view = 0;
  std::string color_out, depth_out;
  bool show_gov = false;
  auto* render_cmd = app.add_subcommand("render", "Render one viewpoint of a scene");
  add_common(render_cmd, common);
  add_scene(render_cmd, scene_opt);
  render_cmd->add_option("-v,--view", view, "View index")->check(CLI::NonNegativeNumber);
  render_cmd->add_option("-o,--out", color_out, "Color image output (PPM)")->required();
  render_cmd->add_option("--depth", depth_out, "Depth image output (16-bit PGM, mm)");
  render_cmd->add_flag("--gov", show_gov, "Print the view's GOV metrics");

  int budget = 0, start = 0, k = 5;
  std::string csv_out;
  auto* explore_cmd = app.add_subcommand("explore", "Run online viewpoint exploration on a scene");
  add_common(explore_cmd, common);
  add_scene(explore_cmd, scene_opt);
  explore_cmd->add_option("-b,--budget", budget, "View budget (default: explorer.budget)");
  explore_cmd->add_option("--start", start, "Start view")->check(CLI::NonNegativeNumber);
  explore_cmd->add_option("-k,--canonical", k, "Canonical views to report")->check(CLI::PositiveNumber);
  explore_cmd->add_option("--csv", csv_out, "Trajectory CSV output");

  std::string script_path, log_out, registry_out;
  bool echo = false;
  auto* session_cmd = app.add_subcommand("session", "Teaching session (interactive, or batch with --script)");
  add_common(session_cmd, common);
  add_scene(session_cmd, scene_opt);
  session_cmd->add_option("--script", script_path, "Run commands from a file, one per line")->check(CLI::ExistingFile);
  session_cmd->add_flag("--echo", echo, "Echo each command before its reply");
  session_cmd->add_option("--log", log_out, "Write the event log here on exit");
  session_cmd->add_option("--registry", registry_out, "Write the registry here on exit");

  int objects = 20, test_views = 10;
  std::uint64_t corpus_seed = 2024;
  std::string budgets_text = "1,2,3,5,8", seeds_text = "0-9", strategies = "random,olive,oracle_greedy";
  std::string raw_out = "bench_raw.csv", agg_out = "bench_aggregate.csv";
  bool quiet = false;
  auto* bench_cmd = app.add_subcommand("bench", "Compare view-selection strategies under view budgets");
  add_common(bench_cmd, common);
  bench_cmd->add_option("-n,--objects", objects, "Corpus size")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--corpus-seed", corpus_seed, "Corpus generator seed");
  bench_cmd->add_option("--budgets", budgets_text, "Comma-separated budgets");
  bench_cmd->add_option("--seeds", seeds_text, "Seeds, e.g. 0-9 or 1,4,7");
  bench_cmd->add_option("--strategies", strategies, "Comma-separated: random, olive, oracle_greedy");
  bench_cmd->add_option("--test-views", test_views, "Held-out views per object")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--raw", raw_out, "Per-cell CSV output");
  bench_cmd->add_option("--aggregate", agg_out, "Aggregate CSV output");
  bench_cmd->add_flag("-q,--quiet", quiet, "No progress output");

  std::string scene_out;
  auto* scene_cmd = app.add_subcommand("scene", "Write a scene file, e.g. a built-in sample scene");
  add_scene(scene_cmd, scene_opt);
  scene_cmd->add_option("-o,--out", scene_out, "Scene file output")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string serve_scene;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service for the teaching console");
  add_common(serve_cmd, common);
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("-p,--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("-s,--scene", serve_scene, "Default scene for new sessions")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg;
    load_config(common, cfg);

    if (*scene_cmd) {
      Scene scene;
      load_scene(scene_opt, scene);
      check(tailor_scene_save(scene.get(), scene_out.c_str()), "writing " + scene_out);
      std::printf("%zu object(s), %zu triangles\n", tailor_scene_object_count(scene.get()),
                  tailor_scene_triangle_count(scene.get()));
      return 0;
    }

    if (*sphere_cmd) {
      Sphere sphere;
      check(tailor_sphere_create(cfg.get(), sphere.out()), "sphere");
      const size_t n = tailor_sphere_size(sphere.get());
      std::printf("%zu viewpoints\n", n);
      for (size_t i = 0; i < n; ++i) {
        double d[3];
        check(tailor_sphere_direction(sphere.get(), static_cast<int>(i), d), "direction");
        int nb[16];
        size_t count = 0;
        check(tailor_sphere_neighbors(sphere.get(), static_cast<int>(i), nb, 16, &count), "neighbors");
        std::printf("%zu %.9f %.9f %.9f", i, d[0], d[1], d[2]);
        for (size_t j = 0; j < count && j < 16; ++j) std::printf("%s%d", j ? " " : " [", nb[j]);
        std::printf("]\n");
      }
      return 0;
    }

    if (*render_cmd) {
      Scene scene;
      load_scene(scene_opt, scene);
      Frame frame;
      check(tailor_render_view(scene.get(), cfg.get(), view, frame.out()), "render");
      check(tailor_frame_write_ppm(frame.get(), color_out.c_str()), "writing " + color_out);
      if (!depth_out.empty()) check(tailor_frame_write_pgm(frame.get(), depth_out.c_str()), "writing " + depth_out);
      if (show_gov) {
        tailor_gov g;
        check(tailor_frame_evaluate(frame.get(), cfg.get(), &g), "GOV");
        print_gov(g);
      }
      return 0;
    }

    if (*explore_cmd) {
      Scene scene;
      load_scene(scene_opt, scene);
      ExplorationH e;
      check(tailor_explore(scene.get(), cfg.get(), budget, start, e.out()), "exploration");
      std::printf("step view kind combined\n");
      for (size_t i = 0; i < tailor_exploration_step_count(e.get()); ++i) {
        tailor_step s;
        check(tailor_exploration_step(e.get(), i, &s), "step");
        std::printf("%d %d %s %.6f\n", s.step, s.view, kind_name(s.kind), s.score.combined);
      }
      std::vector<int> canon(static_cast<size_t>(k));
      size_t count = 0;
      check(tailor_exploration_canonical(e.get(), k, canon.data(), canon.size(), &count), "canonical views");
      std::printf("canonical:");
      for (size_t i = 0; i < count; ++i) std::printf(" %d", canon[i]);
      std::printf("\n");
      if (!csv_out.empty()) check(tailor_exploration_write_csv(e.get(), csv_out.c_str()), "writing " + csv_out);
      return 0;
    }

    if (*session_cmd) {
      Scene scene;
      load_scene(scene_opt, scene);
      SessionH session;
      check(tailor_session_create(cfg.get(), scene.get(), session.out()), "session");
      int rc;
      if (!script_path.empty()) {
        std::ifstream in(script_path);
        rc = run_session(session.get(), in, true, echo);
      } else {
        rc = run_session(session.get(), std::cin, false, echo);
      }
      if (!log_out.empty()) {
        std::ofstream out(log_out, std::ios::binary);
        out << tailor_session_event_log(session.get());
        if (!out) {
          std::cerr << "error: cannot write " << log_out << "\n";
          return 1;
        }
      }
      if (!registry_out.empty()) check(tailor_session_save_registry(session.get(), registry_out.c_str()), "registry");
      return rc;
    }

    if (*bench_cmd) {
      const auto budgets = parse_list<int>(budgets_text, "budget");
      const auto seeds = parse_list<std::uint64_t>(seeds_text, "seed");
      auto progress = [](const char* msg, void*) { std::fprintf(stderr, "%s\n", msg); };
      check(tailor_bench_run(cfg.get(), objects, corpus_seed, budgets.data(), budgets.size(), seeds.data(), seeds.size(),
                             strategies.c_str(), test_views, raw_out.c_str(), agg_out.c_str(),
                             quiet ? nullptr : +progress, nullptr),
            "benchmark");
      std::ifstream agg(agg_out);
      std::cout << agg.rdbuf();
      return 0;
    }

    if (*serve_cmd) {
      Server server;
      check(tailor_server_create(cfg.get(), host.c_str(), port, serve_scene.empty() ? nullptr : serve_scene.c_str(),
                                 server.out()),
            "server");
      g_server = server.get();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("listening on http://%s:%d/v1\n", host.c_str(), tailor_server_port(server.get()));
      std::fflush(stdout);
      check(tailor_server_run(server.get()), "server");
      g_server = nullptr;
      return 0;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
