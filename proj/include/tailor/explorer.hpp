#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "tailor/gov.hpp"
#include "tailor/renderer.hpp"
#include "tailor/segmenter.hpp"
#include "tailor/viewsphere.hpp"

namespace tailor {

// One captured view: its score plus, for rendered views, the frame and the
// primary object mask (all-zero when no object was found).
struct ViewEvaluation {
  int index = -1;
  GovScore score;
  std::optional<RgbdFrame> frame;
  std::optional<ObjectMask> mask;
};

// Source of view evaluations. Implementations are expected to be deterministic.
class ViewEvaluator {
public:
  virtual ~ViewEvaluator() = default;
  virtual ViewEvaluation evaluate(int index) = 0;
};

struct PerceptionConfig {
  RenderOptions render;
  PlaneFitParams plane;
  SegmentParams segment;
  GovWeights weights;
  GovConfig gov;
};

// Result of rendering and segmenting one camera pose.
struct Capture {
  RgbdFrame frame;
  std::optional<ObjectMask> mask;
};

Capture capture_view(const SceneSpec& scene, const CameraPose& pose, const PerceptionConfig& config);

// Renders the scene from sphere viewpoints aimed at the object center.
class SceneEvaluator : public ViewEvaluator {
public:
  SceneEvaluator(const SceneSpec& scene, const ViewSphere& sphere, PerceptionConfig config);
  ViewEvaluation evaluate(int index) override;

private:
  const SceneSpec& scene_;
  const ViewSphere& sphere_;
  PerceptionConfig config_;
  Vec3 target_;
};

// Serves precomputed evaluations; used for synthetic GOV fields and caches.
class TableEvaluator : public ViewEvaluator {
public:
  explicit TableEvaluator(std::vector<ViewEvaluation> table) : table_(std::move(table)) {}
  // Synthetic field: every component and the combined score equal field[i].
  static TableEvaluator from_field(const std::vector<double>& field);
  ViewEvaluation evaluate(int index) override;

private:
  std::vector<ViewEvaluation> table_;
};

enum class StepKind { Start, Climb, Jump };
const char* step_kind_name(StepKind kind);

struct TrajectoryStep {
  int step = 0;
  int view = -1;
  StepKind kind = StepKind::Start;
  GovScore score;
};

// Online viewpoint exploration state: alternates GOV hill-climbing over
// sphere adjacency with jumps to the geodesically farthest unvisited view.
// Every evaluation consumes one unit of budget; no view is evaluated twice.
class Exploration {
public:
  Exploration(const ViewSphere& sphere, ViewEvaluator& evaluator, int budget);

  const GovScore& evaluate_view(int index, StepKind kind = StepKind::Climb);
  int hill_climb(int start);
  std::optional<int> farthest_jump() const;
  // Runs climb/jump rounds from `start_index` until the budget or the sphere is exhausted.
  void run(int start_index = 0);

  bool budget_exhausted() const { return static_cast<int>(trajectory_.size()) >= budget_; }
  bool all_visited() const { return evaluations_.size() >= sphere_.size(); }
  bool visited(int index) const { return evaluations_.count(index) != 0; }
  int budget() const { return budget_; }
  std::optional<int> current() const { return current_; }
  const ViewSphere& sphere() const { return sphere_; }

  const std::vector<TrajectoryStep>& trajectory() const { return trajectory_; }
  // Accepted view sequence of each hill climb, in order.
  const std::vector<std::vector<int>>& climbs() const { return climbs_; }
  const ViewEvaluation& evaluation(int index) const;
  std::vector<int> visited_views() const;

  void set_observer(std::function<void(const TrajectoryStep&)> observer) { observer_ = std::move(observer); }

private:
  const GovScore& score_of(int index) const { return evaluation(index).score; }

  const ViewSphere& sphere_;
  ViewEvaluator& evaluator_;
  int budget_;
  std::optional<int> current_;
  std::map<int, ViewEvaluation> evaluations_;
  std::vector<TrajectoryStep> trajectory_;
  std::vector<std::vector<int>> climbs_;
  std::function<void(const TrajectoryStep&)> observer_;
};

struct CanonicalView {
  int index = -1;
  GovScore score;
  std::optional<RgbdFrame> frame;
  std::optional<ObjectMask> mask;
};

// Top-k visited views by (combined GOV desc, view index asc).
std::vector<CanonicalView> select_canonical(const Exploration& state, int k);

// True when a's combined GOV ranks above b's, ties going to the lower index.
bool ranks_above(const GovScore& a, int ia, const GovScore& b, int ib);

}  // namespace tailor
