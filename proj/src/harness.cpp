#include "harness.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace riskgraph {

nlohmann::json EvalMetrics::to_json() const {
  return {{"overall_generalization_pct", overall_generalization_pct},
          {"collision_generalization_pct", collision_generalization_pct},
          {"tp", tp},
          {"fp", fp},
          {"tn", tn},
          {"fn", fn},
          {"threshold", threshold}};
}

Dataset to_dataset(const PatternSet& set) {
  Dataset dataset;
  dataset.reserve(set.records.size());
  for (const auto& rec : set.records) {
    SupervisedPattern p;
    p.graph = rec.graph;
    p.labels = node_label_vectors(rec.graph, set.geometry);
    p.target = rec.target;
    dataset.push_back(std::move(p));
  }
  return dataset;
}

EvalMetrics evaluate(const PatternSet& set, const NetworkParams& params,
                     double threshold) {
  if (set.records.empty()) throw ConfigError("EmptySet: nothing to evaluate");
  EvalMetrics m;
  m.threshold = threshold;
  for (const auto& rec : set.records) {
    auto labels = node_label_vectors(rec.graph, set.geometry);
    double y = forward(rec.graph, labels, params).root_output;
    bool pred = y >= threshold;
    bool truth = rec.target >= threshold;
    if (pred && truth) ++m.tp;
    if (pred && !truth) ++m.fp;
    if (!pred && !truth) ++m.tn;
    if (!pred && truth) ++m.fn;
  }
  long total = m.tp + m.fp + m.tn + m.fn;
  m.overall_generalization_pct = 100.0 * (m.tp + m.tn) / total;
  long positives = m.tp + m.fn;
  m.collision_generalization_pct =
      positives == 0 ? 100.0 : 100.0 * m.tp / positives;
  return m;
}

std::pair<PatternSet, PatternSet> split(const PatternSet& set,
                                        double train_fraction,
                                        std::uint64_t seed) {
  const long n = static_cast<long>(set.records.size());
  if (n < 2) throw ConfigError("EmptySet: need at least 2 patterns to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must be in (0, 1)");
  }
  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  long train_size = std::clamp(
      static_cast<long>(std::floor(train_fraction * n)), 1L, n - 1);
  PatternSet train, validation;
  train.geometry = validation.geometry = set.geometry;
  train.seed = validation.seed = set.seed;
  for (long j = 0; j < n; ++j) {
    (j < train_size ? train : validation).records.push_back(set.records[idx[j]]);
  }
  return {std::move(train), std::move(validation)};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.optimizer = j.value("optimizer", c.optimizer);
  if (c.optimizer != "qnts" && c.optimizer != "bpts") {
    throw ConfigError("optimizer must be qnts or bpts");
  }
  c.state_dim = j.value("m", c.state_dim);
  c.hidden_dim = j.value("h", c.hidden_dim);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.c_armijo = j.value("c_armijo", c.c_armijo);
  c.rho = j.value("rho", c.rho);
  c.max_backtracks = j.value("max_backtracks", c.max_backtracks);
  c.seed = j.value("seed", c.seed);
  c.deterministic_reduction =
      j.value("deterministic_reduction", c.deterministic_reduction);
  return c;
}

nlohmann::json TrainConfig::to_json() const {
  return {{"optimizer", optimizer},
          {"m", state_dim},
          {"h", hidden_dim},
          {"max_epochs", max_epochs},
          {"tolerance", tolerance},
          {"learning_rate", learning_rate},
          {"c_armijo", c_armijo},
          {"rho", rho},
          {"max_backtracks", max_backtracks},
          {"seed", seed},
          {"deterministic_reduction", deterministic_reduction}};
}

TrainOptions TrainConfig::options() const {
  TrainOptions opts;
  opts.max_epochs = max_epochs;
  opts.tolerance = tolerance;
  opts.learning_rate = learning_rate;
  opts.line_search.c_armijo = c_armijo;
  opts.line_search.shrink = rho;
  opts.line_search.max_backtracks = max_backtracks;
  opts.single_thread_gradients = deterministic_reduction;
  return opts;
}

std::pair<Checkpoint, TrainReport> train(const PatternSet& set,
                                         const TrainConfig& config) {
  Architecture arch{config.state_dim, kLabelDim, 2, config.hidden_dim};
  NetworkParams params = init_params(arch, config.seed);
  Dataset dataset = to_dataset(set);
  auto [trained, report] =
      config.optimizer == "qnts"
          ? qnts_train(dataset, std::move(params), config.options())
          : bpts_train(dataset, std::move(params), config.options());
  Checkpoint ckpt;
  ckpt.params = std::move(trained);
  ckpt.seed = config.seed;
  ckpt.epoch = static_cast<int>(report.epochs.size());
  return {std::move(ckpt), std::move(report)};
}

const std::string& default_scenario_json() {
  static const std::string config = R"json({
  "format_version": 1,
  "geometry": {
    "center": [0.0, 0.0],
    "heading_rad": 0.0,
    "danger_half_width": 5.0,
    "zone_b_radius": 25.0,
    "zone_a_radius": 60.0,
    "lane_width": 3.0,
    "road_half_width": 6.0,
    "speed_limit_mps": 22.222222222222221,
    "signals": {"west": "green", "east": "green", "south": "green", "north": "green"}
  },
  "teacher": {
    "w_collision": 1.0,
    "w_knowledge": [0.35, 0.7, 0.25],
    "collision_horizon_s": 1.5
  },
  "risk_window_s": 1.5,
  "shift_range_s": [-2.0, 2.0],
  "collision_focus_prob": 0.5,
  "vehicle_half_extents_m": [0.95, 2.25],
  "templates": [
    {
      "name": "left_turn_across_path",
      "host": {
        "object_type": "vehicle",
        "duration_s": 7.2,
        "checkpoints": [
          {"position": [-48.0, -3.0], "speed": 13.0, "direction": [1.0, 0.0], "position_spread": 1.5, "speed_shape": 9.0, "direction_sigma": 0.05},
          {"position": [-10.0, -3.0], "speed": 10.0, "direction": [1.0, 0.0], "position_spread": 0.8, "speed_shape": 9.0, "direction_sigma": 0.05},
          {"position": [1.0, 0.0], "speed": 9.0, "direction": [0.7, 0.7], "position_spread": 0.8, "speed_shape": 9.0, "direction_sigma": 0.05},
          {"position": [3.0, 12.0], "speed": 10.0, "direction": [0.0, 1.0], "position_spread": 0.8, "speed_shape": 9.0, "direction_sigma": 0.05},
          {"position": [3.0, 48.0], "speed": 13.0, "direction": [0.0, 1.0], "position_spread": 1.5, "speed_shape": 9.0, "direction_sigma": 0.05}
        ]
      },
      "remote": {
        "object_type": "vehicle",
        "duration_s": 7.0,
        "checkpoints": [
          {"position": [52.0, 3.0], "speed": 15.0, "direction": [-1.0, 0.0], "position_spread": 1.5, "speed_shape": 9.0, "direction_sigma": 0.03},
          {"position": [0.0, 3.0], "speed": 15.0, "direction": [-1.0, 0.0], "position_spread": 1.0, "speed_shape": 9.0, "direction_sigma": 0.03},
          {"position": [-52.0, 3.0], "speed": 15.0, "direction": [-1.0, 0.0], "position_spread": 1.5, "speed_shape": 9.0, "direction_sigma": 0.03}
        ]
      }
    },
    {
      "name": "signal_crossing",
      "signals": {"west": "green", "east": "green", "south": "red", "north": "red"},
      "host": {
        "object_type": "vehicle",
        "duration_s": 7.4,
        "checkpoints": [
          {"position": [-52.0, -3.0], "speed": 14.0, "direction": [1.0, 0.0], "position_spread": 1.5, "speed_shape": 9.0, "direction_sigma": 0.03},
          {"position": [0.0, -3.0], "speed": 14.0, "direction": [1.0, 0.0], "position_spread": 1.0, "speed_shape": 9.0, "direction_sigma": 0.03},
          {"position": [52.0, -3.0], "speed": 14.0, "direction": [1.0, 0.0], "position_spread": 1.5, "speed_shape": 9.0, "direction_sigma": 0.03}
        ]
      },
      "remote": {
        "object_type": "vehicle",
        "duration_s": 7.0,
        "checkpoints": [
          {"position": [3.0, -52.0], "speed": 16.0, "direction": [0.0, 1.0], "position_spread": 1.5, "speed_shape": 9.0, "direction_sigma": 0.03},
          {"position": [3.0, 0.0], "speed": 16.0, "direction": [0.0, 1.0], "position_spread": 1.0, "speed_shape": 9.0, "direction_sigma": 0.03},
          {"position": [3.0, 52.0], "speed": 16.0, "direction": [0.0, 1.0], "position_spread": 1.5, "speed_shape": 9.0, "direction_sigma": 0.03}
        ]
      }
    }
  ]
})json";
  return config;
}

nlohmann::json repro_table3(std::uint64_t seed, int pattern_count,
                            int max_epochs) {
  auto config = ScenarioConfig::from_json(
      nlohmann::json::parse(default_scenario_json()));
  PatternSet patterns = generate_pattern_set(config, pattern_count, seed);
  auto [train_set, validation_set] = split(patterns, 0.5, seed);

  TrainConfig tc;
  tc.optimizer = "qnts";
  tc.state_dim = 10;
  tc.hidden_dim = 40;
  tc.max_epochs = max_epochs;
  tc.tolerance = 1e-3;
  tc.seed = seed;
  auto [ckpt, report] = train(train_set, tc);

  EvalMetrics val = evaluate(validation_set, ckpt.params, 0.5);
  EvalMetrics trn = evaluate(train_set, ckpt.params, 0.5);

  nlohmann::json rows = nlohmann::json::array();
  rows.push_back({{"architecture", "10x40x1"},
                  {"epochs", report.epochs.size()},
                  {"collision_generalization_pct",
                   val.collision_generalization_pct},
                  {"overall_generalization_pct",
                   val.overall_generalization_pct},
                  {"source", "this run"}});
  rows.push_back({{"architecture", "23x160x1"},
                  {"epochs", 500},
                  {"collision_generalization_pct", 99.4},
                  {"overall_generalization_pct", 97.9},
                  {"source", "published reference"}});
  rows.push_back({{"architecture", "20x150x1"},
                  {"epochs", 500},
                  {"collision_generalization_pct", 100.0},
                  {"overall_generalization_pct", 94.2},
                  {"source", "published reference"}});

  return {{"seed", seed},
          {"pattern_count", pattern_count},
          {"collision_fraction", patterns.collision_fraction()},
          {"train_metrics", trn.to_json()},
          {"validation_metrics", val.to_json()},
          {"stop_reason", report.stop_reason},
          {"final_error",
           report.epochs.empty() ? 0.0 : report.epochs.back().error},
          {"table", rows}};
}

}  // namespace riskgraph
