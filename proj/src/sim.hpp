#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "scene.hpp"

namespace riskgraph {

struct CheckPoint {
  Vec2 mean_position;
  double mean_speed = 0.0;
  Vec2 mean_direction{1.0, 0.0};
  double position_spread = 0.0;   // triangular half-width, per axis
  double speed_shape = 9.0;       // gamma shape; <= 0 means degenerate
  double speed_scale = 0.0;       // <= 0 derives mean_speed / shape
  double direction_sigma = 0.0;   // radians
};

struct TrajectorySpec {
  ObjectType object_type = ObjectType::vehicle;
  std::vector<CheckPoint> checkpoints;
  double duration_s = 1.0;
};

struct Trajectory {
  ObjectType object_type = ObjectType::vehicle;
  int object_id = 0;
  double t0 = 0.0;  // timestamp of the first sample
  std::vector<ObjectSnapshot> samples;  // spaced kSamplingPeriodS

  double timestamp(int idx) const { return t0 + idx * kSamplingPeriodS; }
};

struct TeacherConfig {
  double w_collision = 1.0;
  // (driving way, traffic light, speed limit) violation weights
  std::array<double, 3> w_knowledge{0.4, 0.5, 0.3};
  double collision_horizon_s = 1.5;
};

double sample_triangular(std::mt19937_64& rng, double half_width);

std::vector<CheckPoint> sample_checkpoints(const TrajectorySpec& spec,
                                           std::mt19937_64& rng);

// Single Bezier curve over the realized control positions, sampled on the
// 200 ms grid. Sample speed is the curve derivative magnitude.
Trajectory bezier_trajectory(const std::vector<CheckPoint>& control_points,
                             double duration_s);

struct VehicleExtents {
  double half_width = 0.95;
  double half_length = 2.25;
};

// Oriented-rectangle overlap at one instant (separating axis test).
bool rectangles_overlap(const Vec2& pos_a, const Vec2& dir_a,
                        const VehicleExtents& ext_a, const Vec2& pos_b,
                        const Vec2& dir_b, const VehicleExtents& ext_b);

// First overlap time of the two footprints; positions are interpolated at
// `refine_s` (default 10 ms) between grid samples.
std::optional<double> detect_collision(const Trajectory& a,
                                       const Trajectory& b,
                                       const VehicleExtents& extents,
                                       double refine_s = 0.01);

// Weighted teacher: collision term plus max knowledge-violation term,
// clamped to [0, 1].
double teacher_rate(const std::vector<SceneFrame>& frames,
                    std::optional<double> collision_time,
                    const IntersectionGeometry& geom,
                    const TeacherConfig& config);

struct ScenarioTemplate {
  std::string name;
  TrajectorySpec host;
  TrajectorySpec remote;
  std::optional<std::array<SignalState, 4>> signal_override;
};

struct ScenarioConfig {
  IntersectionGeometry geometry;
  std::vector<ScenarioTemplate> templates;
  TeacherConfig teacher;
  double risk_window_s = 1.5;
  double shift_min_s = -2.0;
  double shift_max_s = 2.0;
  VehicleExtents extents;
  // Probability of re-centering the risk window on a collision when one
  // exists, to balance the classes.
  double collision_focus_prob = 0.5;

  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct PatternRecord {
  Dpag graph;
  double target = 0.0;
  bool collision = false;
  double shift_s = 0.0;
};

struct PatternSet {
  IntersectionGeometry geometry;
  std::uint64_t seed = 0;
  std::vector<PatternRecord> records;

  double collision_fraction() const;
};

PatternSet generate_pattern_set(const ScenarioConfig& config, int count,
                                std::uint64_t seed);

void save_pattern_set(const PatternSet& set, const std::string& path);
PatternSet load_pattern_set(const std::string& path);

}  // namespace riskgraph
