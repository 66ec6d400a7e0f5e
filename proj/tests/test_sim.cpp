#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "harness.hpp"
#include "sim.hpp"

using namespace riskgraph;

namespace {

// 1 ms brute-force reference for collision detection.
std::optional<double> collision_oracle(const Trajectory& a, const Trajectory& b,
                                       const VehicleExtents& ext) {
  auto at = [](const Trajectory& t, double time) -> std::optional<ObjectSnapshot> {
    double rel = (time - t.t0) / kSamplingPeriodS;
    int i = static_cast<int>(std::floor(rel));
    if (i < 0 || i + 1 >= static_cast<int>(t.samples.size())) return std::nullopt;
    double frac = rel - i;
    ObjectSnapshot s;
    s.position = t.samples[i].position * (1.0 - frac) +
                 t.samples[i + 1].position * frac;
    Vec2 d = t.samples[i].direction * (1.0 - frac) +
             t.samples[i + 1].direction * frac;
    s.direction = d.norm() > 1e-12 ? d.normalized() : t.samples[i].direction;
    return s;
  };
  double t_begin = std::max(a.t0, b.t0);
  double t_end = std::min(a.timestamp(static_cast<int>(a.samples.size()) - 1),
                          b.timestamp(static_cast<int>(b.samples.size()) - 1));
  for (double t = t_begin; t <= t_end + 1e-12; t += 0.001) {
    auto sa = at(a, t);
    auto sb = at(b, t);
    if (!sa || !sb) continue;
    if (rectangles_overlap(sa->position, sa->direction, ext, sb->position,
                           sb->direction, ext)) {
      return t;
    }
  }
  return std::nullopt;
}

Trajectory straight_line(Vec2 from, Vec2 to, double duration, double t0 = 0.0) {
  std::vector<CheckPoint> cps(2);
  cps[0].mean_position = from;
  cps[1].mean_position = to;
  Trajectory t = bezier_trajectory(cps, duration);
  t.t0 = t0;
  for (auto& s : t.samples) s.timestamp += t0;
  return t;
}

}  // namespace

TEST_CASE("triangular sampling statistics") {
  std::mt19937_64 rng(42);
  const double half = 2.0;
  double sum = 0.0, sum_sq = 0.0, lo = 1e9, hi = -1e9;
  const int n = 10000;
  for (int j = 0; j < n; ++j) {
    double x = sample_triangular(rng, half);
    sum += x;
    sum_sq += x * x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo >= -half);
  CHECK(hi <= half);
  CHECK(std::abs(sum / n) < 0.05);
  // variance of a symmetric triangular on [-h, h] is h^2 / 6
  CHECK(sum_sq / n == doctest::Approx(half * half / 6.0).epsilon(0.1));
  CHECK(sample_triangular(rng, 0.0) == 0.0);
}

TEST_CASE("bezier curves") {
  SUBCASE("two points reduce to constant-velocity motion") {
    Trajectory t = straight_line({0.0, 0.0}, {10.0, 0.0}, 2.0);
    REQUIRE(t.samples.size() == 11);
    CHECK(t.samples.front().position.x == doctest::Approx(0.0));
    CHECK(t.samples.back().position.x == doctest::Approx(10.0));
    CHECK(t.samples[5].position.x == doctest::Approx(5.0));
    for (const auto& s : t.samples) {
      CHECK(s.speed == doctest::Approx(5.0));
      CHECK(s.direction.x == doctest::Approx(1.0));
    }
  }
  SUBCASE("quadratic midpoint") {
    std::vector<CheckPoint> cps(3);
    cps[0].mean_position = {0.0, 0.0};
    cps[1].mean_position = {5.0, 5.0};
    cps[2].mean_position = {10.0, 0.0};
    Trajectory t = bezier_trajectory(cps, 2.0);
    // B(1/2) = (P0 + 2 P1 + P2) / 4
    CHECK(t.samples[5].position.x == doctest::Approx(5.0));
    CHECK(t.samples[5].position.y == doctest::Approx(2.5));
    CHECK(t.samples[5].direction.y == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(bezier_trajectory({}, 1.0), ConfigError);
    std::vector<CheckPoint> cps(2);
    CHECK_THROWS_AS(bezier_trajectory(cps, 0.0), ConfigError);
  }
}

TEST_CASE("oriented rectangle overlap") {
  VehicleExtents ext;  // 0.95 x 2.25 half extents
  CHECK(rectangles_overlap({0, 0}, {1, 0}, ext, {0, 0}, {0, 1}, ext));
  CHECK(rectangles_overlap({0, 0}, {1, 0}, ext, {4.0, 0}, {1, 0}, ext));
  CHECK_FALSE(rectangles_overlap({0, 0}, {1, 0}, ext, {4.6, 0}, {1, 0}, ext));
  // side by side: width axis governs
  CHECK_FALSE(rectangles_overlap({0, 0}, {1, 0}, ext, {0, 2.0}, {1, 0}, ext));
  CHECK(rectangles_overlap({0, 0}, {1, 0}, ext, {0, 1.8}, {1, 0}, ext));
  // rotated second car: diagonal reach grows
  CHECK(rectangles_overlap({0, 0}, {1, 0}, ext, {0, 2.0}, {0.7, 0.7}, ext));
}

TEST_CASE("collision detection basics") {
  VehicleExtents ext;
  SUBCASE("head-on meeting in the middle") {
    Trajectory a = straight_line({-20.0, 0.0}, {20.0, 0.0}, 4.0);
    Trajectory b = straight_line({20.0, 0.0}, {-20.0, 0.0}, 4.0);
    auto hit = detect_collision(a, b, ext);
    REQUIRE(hit.has_value());
    // closing speed 20 m/s, first contact when gap = 2 * 2.25 m
    CHECK(*hit == doctest::Approx((40.0 - 4.5) / 20.0).epsilon(0.02));
  }
  SUBCASE("parallel lanes never touch") {
    Trajectory a = straight_line({-20.0, -3.0}, {20.0, -3.0}, 4.0);
    Trajectory b = straight_line({20.0, 3.0}, {-20.0, 3.0}, 4.0);
    CHECK_FALSE(detect_collision(a, b, ext).has_value());
  }
  SUBCASE("disjoint time ranges") {
    Trajectory a = straight_line({-20.0, 0.0}, {20.0, 0.0}, 4.0);
    Trajectory b = straight_line({20.0, 0.0}, {-20.0, 0.0}, 4.0, 100.0);
    CHECK_FALSE(detect_collision(a, b, ext).has_value());
  }
  SUBCASE("symmetry") {
    Trajectory a = straight_line({-20.0, 0.5}, {20.0, -0.5}, 4.0);
    Trajectory b = straight_line({0.0, -15.0}, {0.0, 15.0}, 4.0);
    auto ab = detect_collision(a, b, ext);
    auto ba = detect_collision(b, a, ext);
    REQUIRE(ab.has_value() == ba.has_value());
    if (ab) CHECK(*ab == doctest::Approx(*ba).epsilon(1e-9));
  }
}

TEST_CASE("collision detection agrees with a 1 ms brute-force sampler") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-25.0, 25.0);
  std::uniform_real_distribution<double> dur(2.0, 6.0);
  VehicleExtents ext;
  int agreements = 0;
  const int trials = 40;
  for (int trial = 0; trial < trials; ++trial) {
    Trajectory a = straight_line({pos(rng), pos(rng)}, {pos(rng), pos(rng)},
                                 dur(rng));
    Trajectory b = straight_line({pos(rng), pos(rng)}, {pos(rng), pos(rng)},
                                 dur(rng));
    auto fast = detect_collision(a, b, ext);
    auto slow = collision_oracle(a, b, ext);
    if (fast.has_value() == slow.has_value()) {
      ++agreements;
      if (fast) CHECK(std::abs(*fast - *slow) <= 0.02);
    }
  }
  CHECK(agreements >= trials - 1);
}

TEST_CASE("teacher function") {
  auto geom = IntersectionGeometry::defaults();
  TeacherConfig config;  // weights (0.4, 0.5, 0.3), horizon 1.5
  SceneFrame frame;
  frame.timestamp = 10.0;
  frame.host.position = {-30.0, -3.0};
  frame.host.speed = 15.0;
  frame.host.direction = {1.0, 0.0};
  std::vector<SceneFrame> frames{frame};

  SUBCASE("clean driving rates zero") {
    CHECK(teacher_rate(frames, std::nullopt, geom, config) == 0.0);
  }
  SUBCASE("imminent collision rates one") {
    CHECK(teacher_rate(frames, 11.0, geom, config) == 1.0);
  }
  SUBCASE("collision beyond the horizon does not count") {
    CHECK(teacher_rate(frames, 13.0, geom, config) == 0.0);
    CHECK(teacher_rate(frames, 9.0, geom, config) == 0.0);  // in the past
  }
  SUBCASE("speed violation alone rates the speed weight") {
    frames[0].host.speed = 25.0;
    CHECK(teacher_rate(frames, std::nullopt, geom, config) ==
          doctest::Approx(0.3));
  }
  SUBCASE("violations take the max, collision saturates") {
    frames[0].host.speed = 25.0;
    SceneFrame f2 = frame;
    f2.timestamp = 10.2;
    f2.detected.push_back(frame.host);
    f2.detected[0].position = {10.0, 3.0};  // wrong way eastbound
    f2.detected[0].speed = 10.0;
    frames.push_back(f2);
    CHECK(teacher_rate(frames, std::nullopt, geom, config) ==
          doctest::Approx(0.4));  // max(0.3, 0.4), not the sum
    CHECK(teacher_rate(frames, 10.5, geom, config) == 1.0);  // clamped
  }
  SUBCASE("empty scene is a config error") {
    CHECK_THROWS_AS(teacher_rate({}, std::nullopt, geom, config), ConfigError);
  }
}

TEST_CASE("checkpoint sampling") {
  TrajectorySpec spec;
  spec.checkpoints.resize(1);
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(sample_checkpoints(spec, rng), ConfigError);

  spec.checkpoints.resize(2);
  spec.checkpoints[0].mean_position = {0.0, 0.0};
  spec.checkpoints[0].position_spread = 1.0;
  spec.checkpoints[0].mean_speed = 10.0;
  spec.checkpoints[0].direction_sigma = 0.1;
  spec.checkpoints[1].mean_position = {50.0, 0.0};
  auto realized = sample_checkpoints(spec, rng);
  REQUIRE(realized.size() == 2);
  CHECK(std::abs(realized[0].mean_position.x) <= 1.0);
  CHECK(realized[0].mean_speed > 0.0);
  CHECK(realized[0].mean_direction.norm() == doctest::Approx(1.0));
  // noise parameters are consumed, not propagated
  CHECK(realized[0].position_spread == 0.0);
}

TEST_CASE("pattern generation is deterministic and balanced") {
  auto config = ScenarioConfig::from_json(
      nlohmann::json::parse(default_scenario_json()));
  PatternSet a = generate_pattern_set(config, 60, 5);
  PatternSet b = generate_pattern_set(config, 60, 5);
  REQUIRE(a.records.size() == 60);
  CHECK(a.collision_fraction() == b.collision_fraction());
  CHECK(a.collision_fraction() > 0.15);
  CHECK(a.collision_fraction() < 0.85);
  for (size_t j = 0; j < a.records.size(); ++j) {
    CHECK(a.records[j].target == b.records[j].target);
    CHECK(a.records[j].graph.to_json() == b.records[j].graph.to_json());
  }
  PatternSet c = generate_pattern_set(config, 60, 6);
  bool any_difference = false;
  for (size_t j = 0; j < a.records.size(); ++j) {
    any_difference |= (a.records[j].target != c.records[j].target) ||
                      (a.records[j].graph.to_json() != c.records[j].graph.to_json());
  }
  CHECK(any_difference);
}

TEST_CASE("pattern set persistence round trip") {
  auto config = ScenarioConfig::from_json(
      nlohmann::json::parse(default_scenario_json()));
  PatternSet set = generate_pattern_set(config, 10, 9);
  std::string path =
      (std::filesystem::temp_directory_path() / "rg_test_patterns.jsonl")
          .string();
  save_pattern_set(set, path);
  PatternSet back = load_pattern_set(path);
  std::remove(path.c_str());
  REQUIRE(back.records.size() == set.records.size());
  CHECK(back.seed == set.seed);
  for (size_t j = 0; j < set.records.size(); ++j) {
    CHECK(back.records[j].target == set.records[j].target);
    CHECK(back.records[j].collision == set.records[j].collision);
    CHECK(back.records[j].graph.to_json() == set.records[j].graph.to_json());
  }
  CHECK_THROWS_AS(load_pattern_set("/nonexistent/patterns.jsonl"), IoError);
}

TEST_CASE("scenario config json round trip") {
  auto j = nlohmann::json::parse(default_scenario_json());
  auto config = ScenarioConfig::from_json(j);
  CHECK(config.templates.size() == 2);
  CHECK(config.teacher.w_collision == 1.0);
  auto back = ScenarioConfig::from_json(config.to_json());
  CHECK(back.templates.size() == config.templates.size());
  CHECK(back.teacher.w_knowledge == config.teacher.w_knowledge);
  CHECK(back.shift_min_s == config.shift_min_s);
  CHECK(back.collision_focus_prob == config.collision_focus_prob);

  CHECK_THROWS_AS(
      ScenarioConfig::from_json({{"templates", nlohmann::json::array()}}),
      ConfigError);
}
