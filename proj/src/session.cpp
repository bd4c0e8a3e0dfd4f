#include "tailor/session.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "tailor/error.hpp"

namespace tailor {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string strip_punct(std::string s) {
  while (!s.empty() && std::string_view(".?!,;:").find(s.back()) != std::string_view::npos) s.pop_back();
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

std::string box_text(const BoundingBox& b) {
  return "[" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " + std::to_string(b.width) + ", " +
         std::to_string(b.height) + "]";
}

Response reject(std::string text) { return {false, std::move(text), std::nullopt, std::nullopt, -1}; }

}  // namespace

std::string normalize_name(std::string_view raw) {
  std::string s = strip_punct(collapse_ws(lower(raw)));
  for (std::string_view article : {"the ", "a ", "an "}) {
    if (starts_with(s, article)) {
      s = s.substr(article.size());
      break;
    }
  }
  return collapse_ws(s);
}

Command parse_command(std::string_view utterance) {
  const std::string u = strip_punct(collapse_ws(lower(utterance)));
  auto named = [&](CommandKind kind, std::string_view prefix) -> Command {
    const std::string name = normalize_name(u.substr(prefix.size()));
    if (name.empty() || name == "the" || name == "a" || name == "an")
      fail(ErrorCode::Parse, "I did not understand: missing object name");
    return {kind, name};
  };
  if (u == "start object registration" || u == "start registration") return {CommandKind::StartRegistration, ""};
  if (starts_with(u, "this is ")) return named(CommandKind::Label, "this is ");
  if (starts_with(u, "where is ")) return named(CommandKind::Query, "where is ");
  if (u == "flip" || u == "flipped" || u == "i flipped it" || u == "flip it") return {CommandKind::Flip, ""};
  if (u == "done" || u == "finish" || u == "finish registration" || u == "finished") return {CommandKind::FinishRegistration, ""};
  if (u == "list" || u == "list objects") return {CommandKind::ListObjects, ""};
  if (u == "quit" || u == "exit") return {CommandKind::Quit, ""};
  if (starts_with(u, "load scene ") || starts_with(u, "load ")) {
    // Paths keep their original case.
    std::string raw = collapse_ws(utterance);
    const std::size_t cut = starts_with(u, "load scene ") ? 11 : 5;
    std::string path = raw.substr(std::min(cut, raw.size()));
    if (path.empty()) fail(ErrorCode::Parse, "I did not understand: missing scene path");
    return {CommandKind::LoadScene, path};
  }
  fail(ErrorCode::Parse, "I did not understand");
}

const char* phase_name(Phase phase) {
  switch (phase) {
    case Phase::Idle: return "idle";
    case Phase::AwaitingLabel: return "awaiting_label";
    case Phase::Exploring: return "exploring";
    case Phase::Ready: return "ready";
  }
  return "?";
}

Session::Session(Config config, SceneSpec scene)
    : config_(std::move(config)),
      scene_(std::move(scene)),
      sphere_(config_.make_sphere()),
      registry_(config_.detector_threshold) {
  config_.validate();
}

void Session::set_phase(Phase phase) {
  phase_ = phase;
  if (phase_observer_) phase_observer_(phase);
}

Response Session::submit(std::string_view utterance) {
  Command cmd;
  try {
    cmd = parse_command(utterance);
  } catch (const Error& e) {
    return reject(e.what());
  }
  log_ += "cmd\t" + collapse_ws(utterance) + "\n";
  return step(cmd);
}

Response Session::step(const Command& command) {
  switch (command.kind) {
    case CommandKind::StartRegistration: return start_registration();
    case CommandKind::Label: return label(command.argument);
    case CommandKind::Flip: return flip();
    case CommandKind::FinishRegistration: return finish();
    case CommandKind::Query: return query(command.argument);
    case CommandKind::ListObjects: return list_objects();
    case CommandKind::LoadScene: return load_scene_file(command.argument);
    case CommandKind::Quit: return {true, "Goodbye.", std::nullopt, std::nullopt, -1};
  }
  return reject("unsupported command");
}

Response Session::start_registration() {
  if (phase_ == Phase::AwaitingLabel) return reject("Registration already started. Say 'This is <name>'.");
  if (phase_ == Phase::Exploring) return reject("Still exploring the current object.");
  object_.clear();
  set_phase(Phase::AwaitingLabel);
  return {true, "Registration started. Put the object on the table and say 'This is <name>'.", std::nullopt, std::nullopt, -1};
}

std::vector<TrainingSample> Session::explore_and_expand(const SceneSpec& scene, const std::string& name) {
  SceneEvaluator evaluator(scene, sphere_, config_.perception());
  Exploration exploration(sphere_, evaluator, config_.explorer.budget);
  frames_.clear();
  progress_ = 0;
  exploration.set_observer([&](const TrajectoryStep& s) {
    const ViewEvaluation& ev = exploration.evaluation(s.view);
    if (ev.frame) frames_[s.view] = *ev.frame;
    current_view_ = s.view;
    ++progress_;
    if (observer_) observer_(s, ev);
  });
  exploration.run(0);
  trajectory_ = exploration.trajectory();
  auto canonical = select_canonical(exploration, config_.explorer.k);
  std::erase_if(canonical, [](const CanonicalView& v) { return !v.mask || v.mask->pixel_count == 0; });
  canonical_.clear();
  for (const auto& v : canonical) canonical_.push_back(v.index);
  if (canonical.empty()) return {};
  return expand_views(scene, sphere_, canonical, name, config_.augment2d, config_.augment3d, config_.perception());
}

Response Session::label(const std::string& name) {
  if (phase_ != Phase::AwaitingLabel) return reject("Say 'Start object registration' before naming an object.");
  if (registry_.contains(name)) return reject("I already know the " + name + ". Please use a new name.");
  object_ = name;
  set_phase(Phase::Exploring);
  std::vector<TrainingSample> samples;
  try {
    samples = explore_and_expand(scene_, name);
  } catch (const Error& e) {
    object_.clear();
    set_phase(Phase::Idle);
    return reject(std::string("Registration failed: ") + e.what());
  }
  if (samples.empty()) {
    object_.clear();
    set_phase(Phase::Idle);
    return reject("No object found on the table. Registration cancelled.");
  }
  register_object(registry_, name, samples);
  flipped_ = false;
  set_phase(Phase::Ready);
  std::ostringstream os;
  os << "Registered the " << name << " from " << canonical_.size() << " canonical views (" << samples.size()
     << " training samples, " << trajectory_.size() << " views explored).";
  return {true, os.str(), std::nullopt, std::nullopt, -1};
}

Response Session::flip() {
  if (phase_ != Phase::Ready && phase_ != Phase::Exploring) return reject("Flip only applies right after registering an object.");
  if (flipped_) return reject("The " + object_ + " has already been flipped.");
  const std::string name = object_;
  set_phase(Phase::Exploring);
  std::vector<TrainingSample> samples;
  try {
    samples = explore_and_expand(flip_objects(scene_), name);
  } catch (const Error& e) {
    set_phase(Phase::Ready);
    return reject(std::string("Flip pass failed: ") + e.what());
  }
  set_phase(Phase::Ready);
  if (samples.empty()) return reject("No object found after flipping.");
  std::vector<FeatureVector> features;
  for (const auto& s : samples) features.push_back(extract_features(s.image, s.mask));
  registry_.append_exemplars(name, features);
  flipped_ = true;
  return {true, "Added " + std::to_string(samples.size()) + " samples of the other side of the " + name + ".",
          std::nullopt, std::nullopt, -1};
}

Response Session::finish() {
  if (phase_ == Phase::AwaitingLabel) {
    set_phase(Phase::Idle);
    return {true, "Registration cancelled.", std::nullopt, std::nullopt, -1};
  }
  if (phase_ != Phase::Ready) return reject("No registration in progress.");
  const std::string name = object_;
  object_.clear();
  set_phase(Phase::Idle);
  return {true, "Registration of the " + name + " finished.", std::nullopt, std::nullopt, -1};
}

Response Session::query(const std::string& name) {
  if (phase_ == Phase::AwaitingLabel || phase_ == Phase::Exploring)
    return reject("Finish the current registration before asking where objects are.");
  if (registry_.empty()) return reject("No objects registered yet.");
  if (!registry_.contains(name)) return reject("I don't know the " + name + ".");

  const int view = 0;
  const Vec3 target = scene_.object_center();
  const CameraPose pose = camera_pose_for(sphere_, view, target);
  RgbdFrame frame = render(scene_, pose, config_.render);
  frames_[view] = frame;
  current_view_ = view;
  PlaneModel plane;
  try {
    plane = fit_dominant_plane(back_project(frame), config_.plane);
  } catch (const Error&) {
    last_detection_.reset();
    return reject("I cannot find the table.");
  }
  auto det = tailor::query(registry_, frame, plane, name, config_.segment);
  last_detection_ = det;
  if (!det) return {true, "I cannot see the " + name + ".", std::nullopt, std::nullopt, view};

  // Pointing direction: camera ray through the mask centroid, in world frame.
  double su = 0, sv = 0;
  for (int v = 0; v < frame.height; ++v)
    for (int u = 0; u < frame.width; ++u)
      if (det->mask.test(u, v)) {
        su += u;
        sv += v;
      }
  const double n = static_cast<double>(det->mask.pixel_count);
  const Vec3 ray((su / n - frame.intrinsics.cx) / frame.intrinsics.fx, (sv / n - frame.intrinsics.cy) / frame.intrinsics.fy, 1.0);
  const Vec3 pointing = (pose.rotation * ray).normalized();

  std::ostringstream os;
  os << "The " << name << " is here: box " << box_text(det->bbox) << ", score " << format_double(det->score) << ".";
  return {true, os.str(), det, pointing, view};
}

Response Session::list_objects() const {
  if (registry_.empty()) return {true, "I don't know any objects yet.", std::nullopt, std::nullopt, -1};
  std::string s = "I know " + std::to_string(registry_.size()) + " object(s):";
  for (const auto& m : registry_.models()) s += " " + m.name + ";";
  s.pop_back();
  return {true, s + ".", std::nullopt, std::nullopt, -1};
}

Response Session::load_scene_file(const std::string& path) {
  if (phase_ == Phase::AwaitingLabel || phase_ == Phase::Exploring)
    return reject("Cannot change the scene during a registration.");
  try {
    scene_ = load_scene(path);
  } catch (const Error& e) {
    return reject(std::string("Cannot load scene: ") + e.what());
  }
  frames_.clear();
  current_view_.reset();
  last_detection_.reset();
  return {true, "Loaded scene " + path + " with " + std::to_string(scene_.objects.size()) + " object(s).", std::nullopt,
          std::nullopt, -1};
}

Session replay(const std::string& log, const Config& config, const SceneSpec& scene) {
  Session s(config, scene);
  std::size_t pos = 0;
  int line = 0;
  while (pos < log.size()) {
    const std::size_t nl = log.find('\n', pos);
    if (nl == std::string::npos) break;  // truncated trailing record
    ++line;
    const std::string record = log.substr(pos, nl - pos);
    pos = nl + 1;
    if (!starts_with(record, "cmd\t"))
      fail(ErrorCode::Parse, "corrupt event log at line " + std::to_string(line) + ": unknown record");
    const std::string utterance = record.substr(4);
    try {
      parse_command(utterance);
    } catch (const Error&) {
      fail(ErrorCode::Parse, "corrupt event log at line " + std::to_string(line) + ": unparseable command");
    }
    s.submit(utterance);
  }
  return s;
}

}  // namespace tailor
