#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "optimizer.hpp"
#include "sim.hpp"

namespace riskgraph {

struct EvalMetrics {
  double overall_generalization_pct = 0.0;
  double collision_generalization_pct = 0.0;
  long tp = 0, fp = 0, tn = 0, fn = 0;
  double threshold = 0.5;

  nlohmann::json to_json() const;
};

// prediction = 1 iff root output >= threshold; target class likewise.
EvalMetrics evaluate(const PatternSet& set, const NetworkParams& params,
                     double threshold);

// Seeded shuffle, train size = floor(fraction * n) clamped to [1, n-1].
std::pair<PatternSet, PatternSet> split(const PatternSet& set,
                                        double train_fraction,
                                        std::uint64_t seed);

Dataset to_dataset(const PatternSet& set);

struct TrainConfig {
  std::string optimizer = "qnts";  // qnts | bpts
  int state_dim = 10;
  int hidden_dim = 40;
  int max_epochs = 200;
  double tolerance = 1e-3;
  double learning_rate = 0.01;
  double c_armijo = 1e-4;
  double rho = 0.5;
  int max_backtracks = 30;
  std::uint64_t seed = 1;
  bool deterministic_reduction = false;

  static TrainConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  TrainOptions options() const;
};

std::pair<Checkpoint, TrainReport> train(const PatternSet& set,
                                         const TrainConfig& config);

// The scenario configuration shipped with the toolkit: left turn across
// path plus a red-light crossing, on the default cross intersection.
const std::string& default_scenario_json();

// One-shot pipeline: generate -> split -> train -> eval, reporting the
// result next to the published reference rows for comparison.
nlohmann::json repro_table3(std::uint64_t seed, int pattern_count = 1000,
                            int max_epochs = 200);

}  // namespace riskgraph
