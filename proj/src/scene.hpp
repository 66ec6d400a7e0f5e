#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "dpag.hpp"
#include "vec2.hpp"

namespace riskgraph {

enum class ZoneCode { a, b, c, out };
enum class RadialTrend { decreasing, increasing, unchanged };
enum class SignalState { green, amber, red };
// Approach arm, named for the side the vehicle comes from.
enum class Arm : int { west = 0, east = 1, south = 2, north = 3 };

struct RoadRect {
  double min_x, min_y, max_x, max_y;  // intersection-local frame
  bool contains(const Vec2& p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

// Cross intersection: one road along local x, one along local y.
// `center`/`heading_rad` place the local frame in world coordinates, so a
// rigid transform of the scene is expressed by composing the pose.
struct IntersectionGeometry {
  Vec2 center;
  double heading_rad = 0.0;

  double danger_half_width = 5.0;
  double zone_b_radius = 25.0;
  double zone_a_radius = 60.0;  // also the sensor range
  double lane_width = 3.0;
  double road_half_width = 6.0;  // two 3 m lanes per driving way
  double speed_limit_mps = 80.0 / 3.6;
  double brake_decel_mps2 = 6.0;
  std::array<SignalState, 4> signals{SignalState::green, SignalState::green,
                                     SignalState::green, SignalState::green};
  std::vector<RoadRect> driving_area;  // local frame; default from roads

  static IntersectionGeometry defaults();

  Vec2 to_local(const Vec2& world) const {
    return (world - center).rotated(-heading_rad);
  }
  Vec2 dir_to_local(const Vec2& world_dir) const {
    return world_dir.rotated(-heading_rad);
  }
  SignalState signal(Arm a) const { return signals[static_cast<int>(a)]; }
  bool in_driving_area_local(const Vec2& local) const;

  // Apply a rigid transform (rotate about the origin by angle, then shift).
  IntersectionGeometry transformed(double angle, const Vec2& shift) const;

  nlohmann::json to_json() const;
  static IntersectionGeometry from_json(const nlohmann::json& j);
};

struct ObjectSnapshot {
  int object_id = 0;
  ObjectType object_type = ObjectType::vehicle;
  Vec2 position;
  double speed = 0.0;
  Vec2 direction{1.0, 0.0};
  double timestamp = 0.0;
};

struct SceneFrame {
  double timestamp = 0.0;
  ObjectSnapshot host;
  std::vector<ObjectSnapshot> detected;
};

constexpr double kSamplingPeriodS = 0.2;

ZoneCode classify_zone(const Vec2& position, const IntersectionGeometry& geom);

// Compares distances to the intersection center between consecutive samples.
RadialTrend radial_trend(const Vec2& current, const Vec2& previous,
                         const IntersectionGeometry& geom,
                         double eps_dist = 0.05);

ColorState assign_color(ZoneCode zone, RadialTrend trend,
                        ColorState previous_color);

std::uint8_t knowledge_flags(const ObjectSnapshot& snapshot,
                             const IntersectionGeometry& geom);

// Builds the scene DPAG: one host node per retained frame chained at slot k,
// detected objects hanging off the host node of their frame by type slot.
Dpag encode_scene(const std::vector<SceneFrame>& frames, double risk_window_s,
                  const IntersectionGeometry& geom, int max_out_degree = 2);

// Fixed 14-entry numeric feature vector for one node label.
Eigen::VectorXd label_vector(const NodeLabel& label,
                             const IntersectionGeometry& geom);

constexpr int kLabelDim = 14;

std::vector<Eigen::VectorXd> node_label_vectors(
    const Dpag& graph, const IntersectionGeometry& geom);

// Scene-file (JSON) parsing for the `encode` CLI path.
std::vector<SceneFrame> frames_from_json(const nlohmann::json& j);
nlohmann::json frames_to_json(const std::vector<SceneFrame>& frames);

std::string to_string(SignalState s);
SignalState signal_from_string(const std::string& s);

}  // namespace riskgraph
