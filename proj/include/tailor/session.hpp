#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailor/detector.hpp"
#include "tailor/explorer.hpp"
#include "tailor/store.hpp"

namespace tailor {

enum class CommandKind { StartRegistration, Label, Flip, FinishRegistration, Query, ListObjects, LoadScene, Quit };

struct Command {
  CommandKind kind = CommandKind::ListObjects;
  std::string argument;  // object name (lowercase, articles stripped) or scene path
  friend bool operator==(const Command&, const Command&) = default;
};

// Keyword matching over typed utterances. Throws Parse with
// "I did not understand" for anything else.
Command parse_command(std::string_view utterance);

// Lowercases, strips trailing punctuation and a leading article, collapses whitespace.
std::string normalize_name(std::string_view raw);

enum class Phase { Idle, AwaitingLabel, Exploring, Ready };
const char* phase_name(Phase phase);

struct Response {
  bool ok = true;
  std::string text;
  std::optional<Detection> detection;
  std::optional<Vec3> pointing;  // world-frame unit vector from the camera towards the detected object
  int view = -1;                 // view the detection was made from
};

// Called for every evaluated view while the session explores.
using ViewObserver = std::function<void(const TrajectoryStep&, const ViewEvaluation&)>;

// The teaching protocol. A session is single-writer; callers serialize step().
class Session {
public:
  Session(Config config, SceneSpec scene);

  // Parses and applies one utterance; unparseable input becomes a failed
  // Response and leaves the state untouched. Never throws for protocol errors.
  Response submit(std::string_view utterance);
  Response step(const Command& command);

  Phase phase() const { return phase_; }
  const std::string& current_object() const { return object_; }
  int progress() const { return progress_; }
  const Registry& registry() const { return registry_; }
  const SceneSpec& scene() const { return scene_; }
  const Config& config() const { return config_; }
  const ViewSphere& sphere() const { return sphere_; }

  // Append-only log of applied commands, one "cmd\t<utterance>" record per line.
  const std::string& event_log() const { return log_; }

  // Frames captured in the latest exploration or query, by view index.
  const std::map<int, RgbdFrame>& frames() const { return frames_; }
  std::optional<int> current_view() const { return current_view_; }
  const std::optional<Detection>& last_detection() const { return last_detection_; }
  const std::vector<TrajectoryStep>& last_trajectory() const { return trajectory_; }
  const std::vector<int>& last_canonical() const { return canonical_; }

  void set_view_observer(ViewObserver observer) { observer_ = std::move(observer); }
  void set_phase_observer(std::function<void(Phase)> observer) { phase_observer_ = std::move(observer); }

private:
  Response start_registration();
  Response label(const std::string& name);
  Response flip();
  Response finish();
  Response query(const std::string& name);
  Response list_objects() const;
  Response load_scene_file(const std::string& path);

  // Explores `scene`, returns the training samples from its canonical views.
  std::vector<TrainingSample> explore_and_expand(const SceneSpec& scene, const std::string& name);
  void set_phase(Phase phase);

  Config config_;
  SceneSpec scene_;
  ViewSphere sphere_;
  Registry registry_;
  Phase phase_ = Phase::Idle;
  std::string object_;
  int progress_ = 0;
  bool flipped_ = false;
  std::string log_;

  std::map<int, RgbdFrame> frames_;
  std::optional<int> current_view_;
  std::optional<Detection> last_detection_;
  std::vector<TrajectoryStep> trajectory_;
  std::vector<int> canonical_;
  ViewObserver observer_;
  std::function<void(Phase)> phase_observer_;
};

// Rebuilds a session by re-applying every complete record of `log` to a fresh
// session over (config, scene). A trailing record without its newline is a
// truncation and is ignored; any malformed complete record is a Parse error.
Session replay(const std::string& log, const Config& config, const SceneSpec& scene);

}  // namespace tailor
