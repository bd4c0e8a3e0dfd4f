#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tailor/explorer.hpp"
#include "tailor/store.hpp"

namespace tailor {

// OracleGreedy scores every view and keeps the global top-k; it is an
// upper-bound reference, not a practical strategy.
enum class Strategy { Random, Olive, OracleGreedy };
const char* strategy_name(Strategy strategy);
Strategy parse_strategy(const std::string& name);

// Seeded single-object tabletop scenes cycling through gear, shaft, box and
// cylinder shapes, each with its own color scheme. Object names are unique.
std::vector<SceneSpec> generate_corpus(int n_objects, std::uint64_t seed);

// Exactly min(budget, sphere size) distinct views.
std::vector<int> select_views(Strategy strategy, ViewEvaluator& evaluator, const ViewSphere& sphere, int budget,
                              std::uint64_t seed);
std::vector<int> select_views(Strategy strategy, const SceneSpec& scene, const ViewSphere& sphere, int budget,
                              const PerceptionConfig& perception, std::uint64_t seed);

// The `count` views farthest from `train` (largest minimum geodesic
// distance, ties to the lower index), never including a training view.
std::vector<int> farthest_views(const ViewSphere& sphere, const std::vector<int>& train, int count);

struct BenchOptions {
  std::vector<Strategy> strategies{Strategy::Random, Strategy::Olive, Strategy::OracleGreedy};
  std::vector<int> budgets{1, 2, 3, 5, 8};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int test_views = 10;
  Config config;
  std::function<void(const std::string&)> progress;
};

struct BenchRow {
  std::string object;
  Strategy strategy = Strategy::Random;
  int budget = 0;
  std::uint64_t seed = 0;
  std::vector<int> train_views;
  std::vector<int> test_views;
  int training_samples = 0;
  int proposals = 0;  // empty test views count as one proposal each
  int correct = 0;
  double accuracy = 0.0;
};

struct BenchAggregate {
  Strategy strategy = Strategy::Random;
  int budget = 0;
  int rows = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single row
};

struct BenchResult {
  std::vector<BenchRow> rows;            // sorted by (strategy, budget, seed, object order)
  std::vector<BenchAggregate> aggregates;  // sorted by (strategy, budget)

  const BenchAggregate* find(Strategy strategy, int budget) const;
};

BenchResult run_benchmark(const std::vector<SceneSpec>& corpus, const BenchOptions& options);

std::vector<BenchAggregate> aggregate(const std::vector<BenchRow>& rows);

// CSV schemas:
//   raw:       object,strategy,budget,seed,train_views,test_views,training_samples,proposals,correct,accuracy
//   aggregate: strategy,budget,rows,mean_accuracy,stddev_accuracy
// View lists are space-separated indices.
std::string raw_csv(const BenchResult& result);
std::string aggregate_csv(const BenchResult& result);

}  // namespace tailor
