#include "tailor/explorer.hpp"

#include <algorithm>

#include "tailor/error.hpp"

namespace tailor {

Capture capture_view(const SceneSpec& scene, const CameraPose& pose, const PerceptionConfig& config) {
  Capture c;
  c.frame = render(scene, pose, config.render);
  const PointCloud cloud = back_project(c.frame);
  try {
    const PlaneModel plane = fit_dominant_plane(cloud, config.plane);
    const auto masks = extract_object_masks(c.frame, plane, config.segment);
    if (!masks.empty()) c.mask = primary_mask(masks);
  } catch (const Error& e) {
    // Views without a table or object simply yield no mask.
    if (e.code() != ErrorCode::NoPlane && e.code() != ErrorCode::InvalidArgument) throw;
  }
  return c;
}

SceneEvaluator::SceneEvaluator(const SceneSpec& scene, const ViewSphere& sphere, PerceptionConfig config)
    : scene_(scene), sphere_(sphere), config_(std::move(config)), target_(scene.object_center()) {}

ViewEvaluation SceneEvaluator::evaluate(int index) {
  ViewEvaluation ev;
  ev.index = index;
  Capture c = capture_view(scene_, camera_pose_for(sphere_, index, target_), config_);
  ObjectMask mask = c.mask ? std::move(*c.mask) : make_mask(MaskImage(c.frame.width, c.frame.height, 0));
  ev.score = evaluate_gov(c.frame, mask, config_.weights, config_.gov);
  ev.frame = std::move(c.frame);
  ev.mask = std::move(mask);
  return ev;
}

TableEvaluator TableEvaluator::from_field(const std::vector<double>& field) {
  std::vector<ViewEvaluation> table;
  for (std::size_t i = 0; i < field.size(); ++i) {
    ViewEvaluation ev;
    ev.index = static_cast<int>(i);
    ev.score = {field[i], field[i], field[i], field[i], field[i]};
    table.push_back(std::move(ev));
  }
  return TableEvaluator(std::move(table));
}

ViewEvaluation TableEvaluator::evaluate(int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= table_.size()) fail(ErrorCode::InvalidArgument, "view index out of range");
  return table_[index];
}

const char* step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::Start: return "start";
    case StepKind::Climb: return "climb";
    case StepKind::Jump: return "jump";
  }
  return "?";
}

bool ranks_above(const GovScore& a, int ia, const GovScore& b, int ib) {
  if (a.combined != b.combined) return a.combined > b.combined;
  return ia < ib;
}

Exploration::Exploration(const ViewSphere& sphere, ViewEvaluator& evaluator, int budget)
    : sphere_(sphere), evaluator_(evaluator), budget_(budget) {
  require(budget >= 1, "exploration budget must be >= 1");
  if (sphere.empty()) fail(ErrorCode::InvalidArgument, "view sphere is empty");
}

const ViewEvaluation& Exploration::evaluation(int index) const {
  auto it = evaluations_.find(index);
  if (it == evaluations_.end()) fail(ErrorCode::NotFound, "view " + std::to_string(index) + " has not been evaluated");
  return it->second;
}

std::vector<int> Exploration::visited_views() const {
  std::vector<int> out;
  for (const auto& s : trajectory_) out.push_back(s.view);
  return out;
}

const GovScore& Exploration::evaluate_view(int index, StepKind kind) {
  if (index < 0 || static_cast<std::size_t>(index) >= sphere_.size()) fail(ErrorCode::InvalidArgument, "view index out of range");
  if (visited(index)) fail(ErrorCode::State, "view " + std::to_string(index) + " already evaluated");
  if (budget_exhausted()) fail(ErrorCode::BudgetExhausted, "view budget exhausted");
  ViewEvaluation ev = evaluator_.evaluate(index);
  ev.index = index;
  auto [it, inserted] = evaluations_.emplace(index, std::move(ev));
  TrajectoryStep step{static_cast<int>(trajectory_.size()), index, kind, it->second.score};
  trajectory_.push_back(step);
  if (!current_) current_ = index;
  if (observer_) observer_(step);
  return it->second.score;
}

int Exploration::hill_climb(int start) {
  if (!visited(start)) fail(ErrorCode::State, "hill climb must start from an evaluated view");
  int here = start;
  std::vector<int> accepted{here};
  for (;;) {
    for (int n : sphere_.neighbors(here)) {
      if (budget_exhausted()) break;
      if (!visited(n)) evaluate_view(n, StepKind::Climb);
    }
    int best = -1;
    for (int n : sphere_.neighbors(here)) {
      if (!visited(n)) continue;
      if (best < 0 || ranks_above(score_of(n), n, score_of(best), best)) best = n;
    }
    if (best < 0 || !(score_of(best).combined > score_of(here).combined)) break;
    here = best;
    accepted.push_back(here);
    if (budget_exhausted()) break;
  }
  climbs_.push_back(std::move(accepted));
  current_ = here;
  return here;
}

std::optional<int> Exploration::farthest_jump() const {
  if (!current_) fail(ErrorCode::State, "exploration has not started");
  if (budget_exhausted() || all_visited()) return std::nullopt;
  const Vec3& from = sphere_.direction(*current_);
  std::optional<int> best;
  double best_d = -1.0;
  for (int i = 0; i < static_cast<int>(sphere_.size()); ++i) {
    if (visited(i)) continue;
    const double d = geodesic_distance(from, sphere_.direction(i));
    // Distances within 1e-12 rad count as ties, resolved to the lower index.
    if (d > best_d + 1e-12) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void Exploration::run(int start_index) {
  if (!current_) evaluate_view(start_index, StepKind::Start);
  int here = *current_;
  for (;;) {
    here = hill_climb(here);
    if (budget_exhausted() || all_visited()) break;
    const auto next = farthest_jump();
    if (!next) break;
    evaluate_view(*next, StepKind::Jump);
    current_ = *next;
    here = *next;
  }
}

std::vector<CanonicalView> select_canonical(const Exploration& state, int k) {
  const std::vector<int> visited = state.visited_views();
  if (visited.empty()) fail(ErrorCode::State, "no views have been evaluated");
  require(k >= 1, "canonical view count must be >= 1");
  std::vector<int> order = visited;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return ranks_above(state.evaluation(a).score, a, state.evaluation(b).score, b);
  });
  if (static_cast<int>(order.size()) > k) order.resize(k);
  std::vector<CanonicalView> out;
  for (int i : order) {
    const ViewEvaluation& ev = state.evaluation(i);
    out.push_back({i, ev.score, ev.frame, ev.mask});
  }
  return out;
}

}  // namespace tailor
