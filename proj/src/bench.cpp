#include "tailor/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include "tailor/error.hpp"
#include "tailor/scenes.hpp"

namespace tailor {
namespace {

std::string join_views(const std::vector<int>& views) {
  std::string s;
  for (int v : views) {
    if (!s.empty()) s += ' ';
    s += std::to_string(v);
  }
  return s;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-object cache of every view's evaluation and proposal features.
struct ObjectCache {
  std::vector<ViewEvaluation> scores;                  // frames and masks dropped
  std::vector<std::vector<FeatureVector>> proposals;  // per view
  std::map<int, std::vector<FeatureVector>> features_2d;
  std::map<std::pair<int, std::uint64_t>, std::vector<FeatureVector>> features_3d;
};

}  // namespace

const char* strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::Random: return "random";
    case Strategy::Olive: return "olive";
    case Strategy::OracleGreedy: return "oracle_greedy";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::Random, Strategy::Olive, Strategy::OracleGreedy})
    if (name == strategy_name(s)) return s;
  fail(ErrorCode::InvalidArgument, "unknown strategy '" + name + "': expected random, olive or oracle_greedy");
}

std::vector<SceneSpec> generate_corpus(int n_objects, std::uint64_t seed) {
  require(n_objects >= 1, "corpus size must be at least 1");
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::vector<SceneSpec> corpus;
  for (int i = 0; i < n_objects; ++i) {
    const std::uint64_t color_seed = rng();
    const double yaw = uni(0.0, 2.0 * std::numbers::pi);
    Mesh mesh;
    std::string kind;
    switch (i % 4) {
      case 0: {
        kind = "gear";
        const double root = uni(35.0, 55.0);
        mesh = make_gear_like(pick(8, 16), root, root + uni(8.0, 15.0), uni(12.0, 30.0), color_seed);
        break;
      }
      case 1: {
        kind = "shaft";
        const int n = pick(2, 4);
        double r = uni(24.0, 34.0);
        std::vector<std::pair<double, double>> sections;
        for (int s = 0; s < n; ++s) {
          sections.emplace_back(r, uni(20.0, 45.0));
          r *= uni(0.6, 0.85);
        }
        mesh = make_shaft(sections, 24, color_seed);
        break;
      }
      case 2:
        kind = "box";
        mesh = make_box(uni(40.0, 110.0), uni(40.0, 110.0), uni(30.0, 100.0), color_seed);
        break;
      default:
        kind = "cylinder";
        mesh = make_cylinder(uni(25.0, 50.0), uni(30.0, 110.0), 24, color_seed);
        break;
    }
    char name[32];
    std::snprintf(name, sizeof name, "%s_%02d", kind.c_str(), i);
    corpus.push_back(tabletop_scene({place_object(name, std::move(mesh), 0.0, 0.0, yaw)}));
  }
  return corpus;
}

std::vector<int> select_views(Strategy strategy, ViewEvaluator& evaluator, const ViewSphere& sphere, int budget,
                              std::uint64_t seed) {
  require(budget >= 1, "budget must be at least 1");
  const int n = static_cast<int>(sphere.size());
  const int take = std::min(budget, n);
  switch (strategy) {
    case Strategy::Random: {
      // Fisher-Yates prefix: budgets nest for a fixed seed.
      std::vector<int> order(n);
      for (int i = 0; i < n; ++i) order[i] = i;
      std::mt19937_64 rng(seed);
      for (int i = 0; i < take; ++i) {
        const int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n - i));
        std::swap(order[i], order[j]);
      }
      order.resize(take);
      return order;
    }
    case Strategy::Olive: {
      Exploration e(sphere, evaluator, take);
      e.run(0);
      std::vector<int> out;
      for (const auto& s : e.trajectory()) out.push_back(s.view);
      return out;
    }
    case Strategy::OracleGreedy: {
      std::vector<GovScore> scores(n);
      for (int i = 0; i < n; ++i) scores[i] = evaluator.evaluate(i).score;
      std::vector<int> order(n);
      for (int i = 0; i < n; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ranks_above(scores[a], a, scores[b], b); });
      order.resize(take);
      return order;
    }
  }
  return {};
}

std::vector<int> select_views(Strategy strategy, const SceneSpec& scene, const ViewSphere& sphere, int budget,
                              const PerceptionConfig& perception, std::uint64_t seed) {
  SceneEvaluator evaluator(scene, sphere, perception);
  return select_views(strategy, evaluator, sphere, budget, seed);
}

std::vector<int> farthest_views(const ViewSphere& sphere, const std::vector<int>& train, int count) {
  const int n = static_cast<int>(sphere.size());
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<bool> is_train(n, false);
  for (int t : train) {
    require(t >= 0 && t < n, "training view out of range");
    is_train[t] = true;
  }
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i) {
    if (is_train[i]) continue;
    for (int t : train) dist[i] = std::min(dist[i], geodesic_distance(sphere.direction(i), sphere.direction(t)));
    candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    if (std::abs(dist[a] - dist[b]) > 1e-12) return dist[a] > dist[b];
    return a < b;
  });
  if (static_cast<int>(candidates.size()) > count) candidates.resize(std::max(count, 0));
  return candidates;
}

const BenchAggregate* BenchResult::find(Strategy strategy, int budget) const {
  for (const auto& a : aggregates)
    if (a.strategy == strategy && a.budget == budget) return &a;
  return nullptr;
}

std::vector<BenchAggregate> aggregate(const std::vector<BenchRow>& rows) {
  std::map<std::pair<int, int>, std::vector<double>> cells;
  for (const auto& r : rows) cells[{static_cast<int>(r.strategy), r.budget}].push_back(r.accuracy);
  std::vector<BenchAggregate> out;
  for (const auto& [key, values] : cells) {
    BenchAggregate a;
    a.strategy = static_cast<Strategy>(key.first);
    a.budget = key.second;
    a.rows = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    a.mean = sum / a.rows;
    if (a.rows > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - a.mean) * (v - a.mean);
      a.stddev = std::sqrt(ss / (a.rows - 1));
    }
    out.push_back(a);
  }
  return out;
}

BenchResult run_benchmark(const std::vector<SceneSpec>& corpus, const BenchOptions& options) {
  require(!corpus.empty(), "benchmark corpus is empty");
  require(!options.budgets.empty(), "benchmark budgets are empty");
  require(!options.strategies.empty(), "benchmark strategies are empty");
  require(!options.seeds.empty(), "benchmark seeds are empty");
  for (const auto& scene : corpus) require(scene.objects.size() == 1, "benchmark scenes hold exactly one object");
  options.config.validate();

  const Config& cfg = options.config;
  const PerceptionConfig perception = cfg.perception();
  const ViewSphere sphere = cfg.make_sphere();
  const int n_views = static_cast<int>(sphere.size());
  auto note = [&](const std::string& s) {
    if (options.progress) options.progress(s);
  };

  // Every view of every object is rendered once; all strategies, test sets
  // and training sets draw on this cache.
  std::vector<ObjectCache> caches(corpus.size());
  for (std::size_t o = 0; o < corpus.size(); ++o) {
    const SceneSpec& scene = corpus[o];
    SceneEvaluator evaluator(scene, sphere, perception);
    ObjectCache& c = caches[o];
    c.scores.resize(n_views);
    c.proposals.resize(n_views);
    for (int v = 0; v < n_views; ++v) {
      ViewEvaluation ev = evaluator.evaluate(v);
      try {
        const PlaneModel plane = fit_dominant_plane(back_project(*ev.frame), cfg.plane);
        for (const auto& m : extract_object_masks(*ev.frame, plane, cfg.segment))
          c.proposals[v].push_back(extract_features(ev.frame->color, m));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoPlane) throw;
      }
      ev.frame.reset();
      ev.mask.reset();
      c.scores[v] = std::move(ev);
    }
    note("rendered " + scene.objects[0].name);
  }

  auto train_features = [&](std::size_t o, int view, std::uint64_t seed) {
    ObjectCache& c = caches[o];
    const SceneSpec& scene = corpus[o];
    const std::string& name = scene.objects[0].name;
    std::vector<FeatureVector> out;
    auto it2 = c.features_2d.find(view);
    if (it2 == c.features_2d.end()) {
      std::vector<FeatureVector> f;
      const Capture cap = capture_view(scene, camera_pose_for(sphere, view, scene.object_center()), perception);
      if (cap.mask && cap.mask->pixel_count > 0) {
        TrainingSample s{cap.frame.color, *cap.mask, name, view, "original"};
        for (const auto& a : augment_2d(s, cfg.augment2d)) f.push_back(extract_features(a.image, a.mask));
      }
      it2 = c.features_2d.emplace(view, std::move(f)).first;
    }
    if (it2->second.empty()) return out;
    out = it2->second;
    const auto key = std::make_pair(view, seed);
    auto it3 = c.features_3d.find(key);
    if (it3 == c.features_3d.end()) {
      Augment3dParams p3 = cfg.augment3d;
      p3.seed = view_seed(mix(cfg.augment3d.seed, seed), view);
      std::vector<FeatureVector> f;
      for (const auto& s : augment_3d(scene, sphere, view, p3, perception, name).samples)
        f.push_back(extract_features(s.image, s.mask));
      it3 = c.features_3d.emplace(key, std::move(f)).first;
    }
    out.insert(out.end(), it3->second.begin(), it3->second.end());
    return out;
  };

  BenchResult result;
  for (Strategy strategy : options.strategies) {
    for (int budget : options.budgets) {
      require(budget >= 1, "budget must be at least 1");
      for (std::uint64_t seed : options.seeds) {
        Registry registry(cfg.detector_threshold);
        std::vector<BenchRow> cell;
        for (std::size_t o = 0; o < corpus.size(); ++o) {
          TableEvaluator table(caches[o].scores);
          BenchRow row;
          row.object = corpus[o].objects[0].name;
          row.strategy = strategy;
          row.budget = budget;
          row.seed = seed;
          row.train_views = select_views(strategy, table, sphere, budget, mix(seed, o));
          row.test_views = farthest_views(sphere, row.train_views, options.test_views);
          std::vector<FeatureVector> features;
          for (int v : row.train_views) {
            auto f = train_features(o, v, seed);
            features.insert(features.end(), f.begin(), f.end());
          }
          row.training_samples = static_cast<int>(features.size());
          // Objects never seen in their training views stay unregistered.
          if (!features.empty()) registry.register_object(row.object, std::move(features));
          cell.push_back(std::move(row));
        }
        for (std::size_t o = 0; o < corpus.size(); ++o) {
          BenchRow& row = cell[o];
          for (int v : row.test_views) {
            const auto& props = caches[o].proposals[v];
            if (props.empty()) {
              ++row.proposals;
              continue;
            }
            for (const auto& f : props) {
              ++row.proposals;
              if (classify_proposal(registry, f).label == row.object) ++row.correct;
            }
          }
          row.accuracy = row.proposals ? static_cast<double>(row.correct) / row.proposals : 0.0;
          result.rows.push_back(std::move(row));
        }
      }
      note(std::string(strategy_name(strategy)) + " budget " + std::to_string(budget) + " done");
    }
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.strategy, a.budget, a.seed) < std::tie(b.strategy, b.budget, b.seed);
  });
  result.aggregates = aggregate(result.rows);
  return result;
}

std::string raw_csv(const BenchResult& result) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"object", "strategy", "budget", "seed", "train_views", "test_views", "training_samples", "proposals",
         "correct", "accuracy"});
  for (const auto& r : result.rows)
    w.row({r.object, strategy_name(r.strategy), std::to_string(r.budget), std::to_string(r.seed),
           join_views(r.train_views), join_views(r.test_views), std::to_string(r.training_samples),
           std::to_string(r.proposals), std::to_string(r.correct), format_double(r.accuracy)});
  return out.str();
}

std::string aggregate_csv(const BenchResult& result) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"strategy", "budget", "rows", "mean_accuracy", "stddev_accuracy"});
  for (const auto& a : result.aggregates)
    w.row({strategy_name(a.strategy), std::to_string(a.budget), std::to_string(a.rows), format_double(a.mean),
           format_double(a.stddev)});
  return out.str();
}

}  // namespace tailor
