#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "tailor/bench.hpp"
#include "tailor/error.hpp"
#include "tailor/explorer.hpp"
#include "tailor/scenes.hpp"
#include "tailor/store.hpp"

using namespace tailor;

namespace {

double angle(const Vec3& a, const Vec3& b) { return std::acos(std::clamp(a.dot(b), -1.0, 1.0)); }

// Field peaking at `peak` and falling off with angular distance.
std::vector<double> single_peak(const ViewSphere& s, int peak) {
  std::vector<double> f;
  for (std::size_t i = 0; i < s.size(); ++i) f.push_back(1.0 - angle(s.direction(i), s.direction(peak)) / M_PI);
  return f;
}

int brute_farthest(const ViewSphere& s, int from, const std::set<int>& visited) {
  int best = -1;
  double best_d = -1.0;
  for (int i = 0; i < static_cast<int>(s.size()); ++i) {
    if (visited.count(i)) continue;
    const double d = angle(s.direction(from), s.direction(i));
    if (d > best_d + 1e-9) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Replays a finished exploration and checks every contract clause.
void check_contract(const ViewSphere& s, const Exploration& ex, const std::vector<double>& field) {
  const auto& steps = ex.trajectory();
  REQUIRE(static_cast<int>(steps.size()) <= ex.budget());
  if (static_cast<int>(steps.size()) < ex.budget()) CHECK(steps.size() == s.size());

  std::set<int> seen;
  for (const auto& st : steps) {
    CHECK(seen.insert(st.view).second);
    CHECK(st.score.combined == field[st.view]);
  }

  for (const auto& climb : ex.climbs()) {
    for (std::size_t i = 1; i < climb.size(); ++i) {
      CHECK(field[climb[i]] > field[climb[i - 1]]);
      const auto& nb = s.neighbors(climb[i - 1]);
      CHECK(std::binary_search(nb.begin(), nb.end(), climb[i]));
    }
  }

  // Each jump leaves from the end of the preceding climb.
  std::set<int> before;
  std::size_t climb_index = 0;
  for (const auto& st : steps) {
    if (st.kind == StepKind::Jump) {
      REQUIRE(climb_index < ex.climbs().size());
      const int from = ex.climbs()[climb_index].back();
      const int expect = brute_farthest(s, from, before);
      CHECK(angle(s.direction(from), s.direction(st.view)) ==
            doctest::Approx(angle(s.direction(from), s.direction(expect))).epsilon(1e-9));
      ++climb_index;
    }
    before.insert(st.view);
  }
}

}  // namespace

TEST_CASE("hill climb on a single-peak field reaches the peak") {
  const ViewSphere s(4, 350.0, -0.1);
  for (int peak : {0, 17, 45, 90}) {
    const auto field = single_peak(s, peak);
    auto ev = TableEvaluator::from_field(field);
    Exploration ex(s, ev, static_cast<int>(s.size()));
    ex.evaluate_view(0, StepKind::Start);
    CHECK(ex.hill_climb(0) == peak);
    CHECK(ex.climbs().front().back() == peak);
  }
}

TEST_CASE("hill climb stops at a local maximum") {
  const ViewSphere s(4, 350.0, -0.1);
  std::vector<double> field(s.size(), 0.1);
  // Chain 0 -> a -> b with b a strict local max.
  const int a = s.neighbors(0).front();
  int b = -1;
  for (int n : s.neighbors(a))
    if (n != 0 && !std::binary_search(s.neighbors(0).begin(), s.neighbors(0).end(), n)) b = n;
  REQUIRE(b >= 0);
  field[a] = 0.5;
  field[b] = 0.8;
  auto ev = TableEvaluator::from_field(field);
  Exploration ex(s, ev, 91);
  ex.evaluate_view(0, StepKind::Start);
  CHECK(ex.hill_climb(0) == b);
  CHECK(ex.climbs().front() == std::vector<int>{0, a, b});
}

TEST_CASE("flat field: the climb does not move on ties") {
  const ViewSphere s(4, 350.0, -0.1);
  auto ev = TableEvaluator::from_field(std::vector<double>(s.size(), 0.5));
  Exploration ex(s, ev, 91);
  ex.evaluate_view(0, StepKind::Start);
  CHECK(ex.hill_climb(0) == 0);
  CHECK(ex.climbs().front() == std::vector<int>{0});
}

TEST_CASE("two peaks: the jump lets the second climb find the other peak") {
  const ViewSphere s(4, 350.0, -0.1);
  const int far_view = brute_farthest(s, 0, {});
  std::vector<double> field(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double da = angle(s.direction(i), s.direction(0));
    const double db = angle(s.direction(i), s.direction(far_view));
    field[i] = std::max(0.6 - da / 4.0, 0.9 - db / 4.0);
  }
  auto ev = TableEvaluator::from_field(field);
  Exploration ex(s, ev, 40);
  ex.run(0);
  REQUIRE(ex.climbs().size() >= 2);
  CHECK(ex.climbs()[0].back() == 0);
  CHECK(ex.climbs()[1].back() == far_view);
  check_contract(s, ex, field);
}

TEST_CASE("farthest jump equals the brute-force argmax") {
  const ViewSphere s(4, 350.0, -0.1);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(s.size()) - 1);
  for (int trial = 0; trial < 50; ++trial) {
    auto ev = TableEvaluator::from_field(std::vector<double>(s.size(), 0.0));
    Exploration ex(s, ev, 91);
    std::set<int> visited;
    const int n = 1 + trial % 20;
    while (static_cast<int>(visited.size()) < n) {
      const int v = pick(rng);
      if (visited.insert(v).second) ex.evaluate_view(v);
    }
    const int from = *ex.current();
    const auto jump = ex.farthest_jump();
    REQUIRE(jump);
    CHECK(!visited.count(*jump));
    const int expect = brute_farthest(s, from, visited);
    CHECK(angle(s.direction(from), s.direction(*jump)) ==
          doctest::Approx(angle(s.direction(from), s.direction(expect))).epsilon(1e-9));
  }
}

TEST_CASE("random fields: contract holds for every budget") {
  const ViewSphere s(4, 350.0, -0.1);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> field(s.size());
    for (double& f : field) f = u(rng);
    for (int budget : {1, 2, 3, 5, 8, 12, 30, 91, 200}) {
      auto ev = TableEvaluator::from_field(field);
      Exploration ex(s, ev, budget);
      ex.run(trial % static_cast<int>(s.size()));
      CHECK(ex.trajectory().size() == std::min<std::size_t>(budget, s.size()));
      CHECK(ex.trajectory().front().kind == StepKind::Start);
      check_contract(s, ex, field);
    }
  }
}

TEST_CASE("exploration rejects revisits, overspending and bad budgets") {
  const ViewSphere s(1, 350.0, -1.0);
  auto ev = TableEvaluator::from_field(std::vector<double>(s.size(), 0.2));
  Exploration ex(s, ev, 2);
  ex.evaluate_view(0);
  CHECK_THROWS_AS(ex.evaluate_view(0), Error);
  ex.evaluate_view(1);
  try {
    ex.evaluate_view(2);
    FAIL("expected BudgetExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BudgetExhausted);
  }
  CHECK_THROWS_AS(Exploration(s, ev, 0), Error);
  CHECK_THROWS_AS(ex.evaluate_view(99), Error);
}

TEST_CASE("canonical selection ranks by GOV with ties to the lower index") {
  const ViewSphere s(4, 350.0, -0.1);
  std::vector<double> field(s.size(), 0.0);
  field[0] = 0.5;
  field[3] = 0.9;
  field[7] = 0.9;
  auto ev = TableEvaluator::from_field(field);
  Exploration ex(s, ev, 10);
  ex.evaluate_view(0);
  ex.evaluate_view(7);
  ex.evaluate_view(3);
  const auto top = select_canonical(ex, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].index == 3);
  CHECK(top[1].index == 7);
  CHECK(select_canonical(ex, 10).size() == 3);
  CHECK_THROWS_AS(select_canonical(ex, 0), Error);
}

TEST_CASE("real scenes: identical inputs give byte-identical trajectories") {
  const Config cfg;
  const ViewSphere s = cfg.make_sphere();
  auto trajectory_bytes = [&](const SceneSpec& scene) {
    SceneEvaluator ev(scene, s, cfg.perception());
    Exploration ex(s, ev, cfg.explorer.budget);
    ex.run(0);
    std::ostringstream out;
    write_trajectory_csv(out, ex.trajectory());
    return out.str();
  };
  const auto a = generate_corpus(2, 99);
  const auto b = generate_corpus(2, 99);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string first = trajectory_bytes(a[i]);
    CHECK(first == trajectory_bytes(b[i]));
    CHECK(first.size() > 0);
  }
  CHECK(trajectory_bytes(sample_gear_scene()) == trajectory_bytes(sample_gear_scene()));
}
