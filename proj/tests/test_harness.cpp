#include <algorithm>
#include <random>

#include "doctest.h"
#include "harness.hpp"

using namespace riskgraph;

namespace {

PatternRecord tiny_record(double target, double x) {
  PatternRecord rec;
  std::vector<NodeLabel> labels(1);
  labels[0].position_m = {x, -3.0};
  labels[0].speed_mps = 10.0;
  labels[0].color = ColorState::yellow;
  rec.graph = Dpag::build(std::move(labels), {}, 2, 1);
  rec.target = target;
  rec.collision = target >= 1.0;
  return rec;
}

PatternSet tiny_set(const std::vector<double>& targets) {
  PatternSet set;
  set.geometry = IntersectionGeometry::defaults();
  set.seed = 1;
  double x = -50.0;
  for (double t : targets) set.records.push_back(tiny_record(t, x += 1.0));
  return set;
}

}  // namespace

TEST_CASE("evaluate with the zero model (every output is exactly 0.5)") {
  // 0.5 >= threshold counts as class 1, for predictions and targets alike
  PatternSet set = tiny_set({0.0, 0.0, 0.0, 0.5, 1.0, 1.0});
  Architecture arch{4, kLabelDim, 2, 5};
  NetworkParams zero(arch);
  EvalMetrics m = evaluate(set, zero, 0.5);
  CHECK(m.tp == 3);  // 0.5 and the two 1.0 targets
  CHECK(m.fp == 3);
  CHECK(m.tn == 0);
  CHECK(m.fn == 0);
  CHECK(m.collision_generalization_pct == doctest::Approx(100.0));
  CHECK(m.overall_generalization_pct == doctest::Approx(50.0));

  SUBCASE("no positive targets defines collision generalization as 100") {
    PatternSet negatives = tiny_set({0.0, 0.3});
    EvalMetrics n = evaluate(negatives, zero, 0.7);
    CHECK(n.tp + n.fn == 0);
    CHECK(n.collision_generalization_pct == 100.0);
  }
  SUBCASE("empty set is a config error") {
    PatternSet empty;
    CHECK_THROWS_AS(evaluate(empty, zero, 0.5), ConfigError);
  }
  SUBCASE("metrics serialize") {
    auto j = m.to_json();
    CHECK(j["tp"] == 3);
    CHECK(j["overall_generalization_pct"] == doctest::Approx(50.0));
  }
}

TEST_CASE("evaluate is invariant to record order") {
  PatternSet set = tiny_set({0.0, 0.2, 0.5, 0.8, 1.0, 0.0, 1.0});
  Architecture arch{3, kLabelDim, 2, 4};
  NetworkParams params = init_params(arch, 77);
  EvalMetrics before = evaluate(set, params, 0.5);
  std::mt19937_64 rng(5);
  std::shuffle(set.records.begin(), set.records.end(), rng);
  EvalMetrics after = evaluate(set, params, 0.5);
  CHECK(before.tp == after.tp);
  CHECK(before.fp == after.fp);
  CHECK(before.tn == after.tn);
  CHECK(before.fn == after.fn);
}

TEST_CASE("split sizes, determinism, and content") {
  PatternSet set = tiny_set(std::vector<double>(10, 0.0));
  for (size_t j = 0; j < set.records.size(); ++j) {
    set.records[j].target = 0.1 * static_cast<double>(j);
  }
  SUBCASE("even split") {
    auto [train, val] = split(set, 0.5, 3);
    CHECK(train.records.size() == 5);
    CHECK(val.records.size() == 5);
    // the union of both halves is the original multiset of targets
    std::vector<double> all;
    for (const auto& r : train.records) all.push_back(r.target);
    for (const auto& r : val.records) all.push_back(r.target);
    std::sort(all.begin(), all.end());
    for (size_t j = 0; j < all.size(); ++j) {
      CHECK(all[j] == doctest::Approx(0.1 * static_cast<double>(j)));
    }
  }
  SUBCASE("nine to one") {
    auto [train, val] = split(set, 0.9, 3);
    CHECK(train.records.size() == 9);
    CHECK(val.records.size() == 1);
  }
  SUBCASE("fraction clamps keep both sides non-empty") {
    auto [train, val] = split(set, 0.001, 3);
    CHECK(train.records.size() == 1);
    CHECK(val.records.size() == 9);
  }
  SUBCASE("same seed, same partition; different seed, different partition") {
    auto [a_train, a_val] = split(set, 0.5, 3);
    auto [b_train, b_val] = split(set, 0.5, 3);
    auto [c_train, c_val] = split(set, 0.5, 4);
    for (size_t j = 0; j < a_train.records.size(); ++j) {
      CHECK(a_train.records[j].target == b_train.records[j].target);
    }
    bool differs = false;
    for (size_t j = 0; j < a_train.records.size(); ++j) {
      differs |= a_train.records[j].target != c_train.records[j].target;
    }
    CHECK(differs);
  }
  SUBCASE("bad inputs") {
    PatternSet one = tiny_set({0.0});
    CHECK_THROWS_AS(split(one, 0.5, 1), ConfigError);
    CHECK_THROWS_AS(split(set, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split(set, 1.0, 1), ConfigError);
  }
}

TEST_CASE("train config json") {
  TrainConfig c;
  c.optimizer = "bpts";
  c.state_dim = 7;
  c.max_epochs = 33;
  c.seed = 99;
  TrainConfig back = TrainConfig::from_json(c.to_json());
  CHECK(back.optimizer == "bpts");
  CHECK(back.state_dim == 7);
  CHECK(back.max_epochs == 33);
  CHECK(back.seed == 99);
  CHECK_THROWS_AS(TrainConfig::from_json({{"optimizer", "adam"}}), ConfigError);
}

TEST_CASE("training on a generated set moves the error down") {
  auto config = ScenarioConfig::from_json(
      nlohmann::json::parse(default_scenario_json()));
  PatternSet set = generate_pattern_set(config, 40, 8);
  TrainConfig tc;
  tc.state_dim = 4;
  tc.hidden_dim = 8;
  tc.max_epochs = 20;
  tc.tolerance = 0.0;
  tc.seed = 8;
  auto [ckpt, report] = train(set, tc);
  CHECK(ckpt.params.arch.state_dim == 4);
  CHECK(ckpt.params.arch.label_dim == kLabelDim);
  REQUIRE_FALSE(report.epochs.empty());
  CHECK(report.epochs.back().error < report.epochs.front().error);
  // the trained model evaluates without blowing up
  EvalMetrics m = evaluate(set, ckpt.params, 0.5);
  CHECK(m.tp + m.fp + m.tn + m.fn == 40);
}

TEST_CASE("default scenario config parses and is self-consistent") {
  auto j = nlohmann::json::parse(default_scenario_json());
  auto config = ScenarioConfig::from_json(j);
  CHECK(config.templates.size() == 2);
  CHECK(config.risk_window_s == 1.5);
  // the second template overrides the north-south signals to red
  REQUIRE(config.templates[1].signal_override.has_value());
  CHECK((*config.templates[1].signal_override)[2] == SignalState::red);
  CHECK((*config.templates[1].signal_override)[3] == SignalState::red);
}
