#ifndef TAILOR_TAILOR_H
#define TAILOR_TAILOR_H

#include <stddef.h>
#include <stdint.h>

#if defined(TAILOR_BUILDING_LIBRARY)
#define TAILOR_API __attribute__((visibility("default")))
#else
#define TAILOR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tailor_status {
  TAILOR_OK = 0,
  TAILOR_E_INVALID_ARGUMENT = 1,
  TAILOR_E_IO = 2,
  TAILOR_E_PARSE = 3,
  TAILOR_E_VERSION = 4,
  TAILOR_E_STATE = 5,
  TAILOR_E_NOT_FOUND = 6,
  TAILOR_E_BUDGET_EXHAUSTED = 7,
  TAILOR_E_NO_OBJECT = 8,
  TAILOR_E_NO_PLANE = 9,
  TAILOR_E_INTERNAL = 10
} tailor_status;

typedef struct tailor_config tailor_config;
typedef struct tailor_scene tailor_scene;
typedef struct tailor_sphere tailor_sphere;
typedef struct tailor_frame tailor_frame;
typedef struct tailor_exploration tailor_exploration;
typedef struct tailor_session tailor_session;
typedef struct tailor_server tailor_server;

typedef struct tailor_gov {
  double silhouette;
  double depth_entropy;
  double curvature_entropy;
  double color_entropy;
  double combined;
} tailor_gov;

typedef enum tailor_step_kind { TAILOR_STEP_START = 0, TAILOR_STEP_CLIMB = 1, TAILOR_STEP_JUMP = 2 } tailor_step_kind;

typedef struct tailor_step {
  int step;
  int view;
  tailor_step_kind kind;
  tailor_gov score;
} tailor_step;

typedef void (*tailor_progress_fn)(const char* message, void* user);

/* Library info and errors. The last error message is thread-local and valid
   until the next failing call on the same thread. */
TAILOR_API const char* tailor_version(void);
TAILOR_API const char* tailor_status_name(tailor_status status);
TAILOR_API const char* tailor_last_error(void);

/* Configuration. Keys and values use the config file syntax, e.g.
   tailor_config_set(cfg, "explorer.budget", "20"). */
TAILOR_API tailor_status tailor_config_default(tailor_config** out);
TAILOR_API tailor_status tailor_config_load(const char* path, tailor_config** out);
TAILOR_API tailor_status tailor_config_save(const tailor_config* config, const char* path);
TAILOR_API tailor_status tailor_config_set(tailor_config* config, const char* key, const char* value);
TAILOR_API void tailor_config_free(tailor_config* config);

/* Scenes. Built-in names: "gear", "cube". */
TAILOR_API tailor_status tailor_scene_load(const char* path, tailor_scene** out);
TAILOR_API tailor_status tailor_scene_builtin(const char* name, tailor_scene** out);
TAILOR_API tailor_status tailor_scene_save(const tailor_scene* scene, const char* path);
TAILOR_API size_t tailor_scene_object_count(const tailor_scene* scene);
TAILOR_API size_t tailor_scene_triangle_count(const tailor_scene* scene);
TAILOR_API void tailor_scene_free(tailor_scene* scene);

/* View sphere built from the config's sphere section. */
TAILOR_API tailor_status tailor_sphere_create(const tailor_config* config, tailor_sphere** out);
TAILOR_API size_t tailor_sphere_size(const tailor_sphere* sphere);
TAILOR_API tailor_status tailor_sphere_direction(const tailor_sphere* sphere, int view, double out_xyz[3]);
/* Writes up to `capacity` neighbor indices; `count` receives the full count. */
TAILOR_API tailor_status tailor_sphere_neighbors(const tailor_sphere* sphere, int view, int* out, size_t capacity,
                                                 size_t* count);
TAILOR_API void tailor_sphere_free(tailor_sphere* sphere);

/* Rendering one sphere view aimed at the scene's object center. */
TAILOR_API tailor_status tailor_render_view(const tailor_scene* scene, const tailor_config* config, int view,
                                            tailor_frame** out);
TAILOR_API int tailor_frame_width(const tailor_frame* frame);
TAILOR_API int tailor_frame_height(const tailor_frame* frame);
/* Row-major RGB triplets, width * height * 3 bytes. */
TAILOR_API const uint8_t* tailor_frame_rgb(const tailor_frame* frame);
/* Row-major depth in millimetres, 0 where nothing was hit. */
TAILOR_API const double* tailor_frame_depth(const tailor_frame* frame);
TAILOR_API tailor_status tailor_frame_evaluate(const tailor_frame* frame, const tailor_config* config, tailor_gov* out);
TAILOR_API tailor_status tailor_frame_write_ppm(const tailor_frame* frame, const char* path);
TAILOR_API tailor_status tailor_frame_write_pgm(const tailor_frame* frame, const char* path);
TAILOR_API void tailor_frame_free(tailor_frame* frame);

/* Exploration. budget <= 0 uses the config's explorer.budget. */
TAILOR_API tailor_status tailor_explore(const tailor_scene* scene, const tailor_config* config, int budget,
                                        int start_view, tailor_exploration** out);
TAILOR_API size_t tailor_exploration_step_count(const tailor_exploration* exploration);
TAILOR_API tailor_status tailor_exploration_step(const tailor_exploration* exploration, size_t i, tailor_step* out);
/* Top-k visited views by combined GOV. */
TAILOR_API tailor_status tailor_exploration_canonical(const tailor_exploration* exploration, int k, int* out,
                                                     size_t capacity, size_t* count);
TAILOR_API tailor_status tailor_exploration_write_csv(const tailor_exploration* exploration, const char* path);
TAILOR_API void tailor_exploration_free(tailor_exploration* exploration);

/* Teaching session. */
TAILOR_API tailor_status tailor_session_create(const tailor_config* config, const tailor_scene* scene,
                                               tailor_session** out);
/* Applies one utterance. Protocol failures are not errors: `accepted` is set to
   0 and the reply explains. */
TAILOR_API tailor_status tailor_session_submit(tailor_session* session, const char* utterance, int* accepted);
/* Reply to the latest submit; valid until the next submit. */
TAILOR_API const char* tailor_session_reply(const tailor_session* session);
TAILOR_API const char* tailor_session_phase(const tailor_session* session);
TAILOR_API int tailor_session_quit_requested(const tailor_session* session);
TAILOR_API const char* tailor_session_event_log(const tailor_session* session);
TAILOR_API size_t tailor_session_object_count(const tailor_session* session);
TAILOR_API tailor_status tailor_session_save_registry(const tailor_session* session, const char* path);
/* Rebuilds a session from an event log. */
TAILOR_API tailor_status tailor_session_replay(const tailor_config* config, const tailor_scene* scene,
                                               const char* event_log, tailor_session** out);
TAILOR_API void tailor_session_free(tailor_session* session);

/* Benchmark over a generated corpus. `strategies` is a comma-separated list of
   random, olive, oracle_greedy. Either CSV path may be NULL. */
TAILOR_API tailor_status tailor_bench_run(const tailor_config* config, int corpus_size, uint64_t corpus_seed,
                                          const int* budgets, size_t budget_count, const uint64_t* seeds,
                                          size_t seed_count, const char* strategies, int test_views,
                                          const char* raw_csv_path, const char* aggregate_csv_path,
                                          tailor_progress_fn progress, void* user);

/* HTTP service. Port 0 binds a free port. run() blocks until stop(). */
TAILOR_API tailor_status tailor_server_create(const tailor_config* config, const char* host, int port,
                                              const char* default_scene_path, tailor_server** out);
TAILOR_API int tailor_server_port(const tailor_server* server);
TAILOR_API tailor_status tailor_server_run(tailor_server* server);
TAILOR_API void tailor_server_stop(tailor_server* server);
TAILOR_API void tailor_server_free(tailor_server* server);

#ifdef __cplusplus
}
#endif

#endif
