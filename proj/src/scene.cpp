#include "scene.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace riskgraph {

IntersectionGeometry IntersectionGeometry::defaults() {
  IntersectionGeometry g;
  g.driving_area = {
      {-g.zone_a_radius, -g.road_half_width, g.zone_a_radius, g.road_half_width},
      {-g.road_half_width, -g.zone_a_radius, g.road_half_width, g.zone_a_radius},
      {-g.danger_half_width, -g.danger_half_width, g.danger_half_width,
       g.danger_half_width},
  };
  return g;
}

bool IntersectionGeometry::in_driving_area_local(const Vec2& local) const {
  for (const auto& r : driving_area) {
    if (r.contains(local)) return true;
  }
  return false;
}

IntersectionGeometry IntersectionGeometry::transformed(double angle,
                                                       const Vec2& shift) const {
  IntersectionGeometry g = *this;
  g.center = center.rotated(angle) + shift;
  g.heading_rad = heading_rad + angle;
  return g;
}

std::string to_string(SignalState s) {
  switch (s) {
    case SignalState::green:
      return "green";
    case SignalState::amber:
      return "amber";
    case SignalState::red:
      return "red";
  }
  throw ConfigError("bad signal state");
}

SignalState signal_from_string(const std::string& s) {
  if (s == "green") return SignalState::green;
  if (s == "amber") return SignalState::amber;
  if (s == "red") return SignalState::red;
  throw ConfigError("unknown signal state: " + s);
}

nlohmann::json IntersectionGeometry::to_json() const {
  nlohmann::json rects = nlohmann::json::array();
  for (const auto& r : driving_area) {
    rects.push_back({r.min_x, r.min_y, r.max_x, r.max_y});
  }
  return {{"center", {center.x, center.y}},
          {"heading_rad", heading_rad},
          {"danger_half_width", danger_half_width},
          {"zone_b_radius", zone_b_radius},
          {"zone_a_radius", zone_a_radius},
          {"lane_width", lane_width},
          {"road_half_width", road_half_width},
          {"speed_limit_mps", speed_limit_mps},
          {"brake_decel_mps2", brake_decel_mps2},
          {"signals",
           {{"west", to_string(signals[0])},
            {"east", to_string(signals[1])},
            {"south", to_string(signals[2])},
            {"north", to_string(signals[3])}}},
          {"driving_area", rects}};
}

IntersectionGeometry IntersectionGeometry::from_json(const nlohmann::json& j) {
  IntersectionGeometry g;
  if (j.contains("center"))
    g.center = {j["center"][0].get<double>(), j["center"][1].get<double>()};
  g.heading_rad = j.value("heading_rad", 0.0);
  g.danger_half_width = j.value("danger_half_width", g.danger_half_width);
  g.zone_b_radius = j.value("zone_b_radius", g.zone_b_radius);
  g.zone_a_radius = j.value("zone_a_radius", g.zone_a_radius);
  g.lane_width = j.value("lane_width", g.lane_width);
  g.road_half_width = j.value("road_half_width", g.road_half_width);
  g.speed_limit_mps = j.value("speed_limit_mps", g.speed_limit_mps);
  g.brake_decel_mps2 = j.value("brake_decel_mps2", g.brake_decel_mps2);
  if (!(g.danger_half_width > 0 && g.danger_half_width < g.zone_b_radius &&
        g.zone_b_radius < g.zone_a_radius)) {
    throw ConfigError("geometry requires 0 < danger < zone_b < zone_a radii");
  }
  if (j.contains("signals")) {
    const auto& s = j["signals"];
    g.signals[0] = signal_from_string(s.value("west", "green"));
    g.signals[1] = signal_from_string(s.value("east", "green"));
    g.signals[2] = signal_from_string(s.value("south", "green"));
    g.signals[3] = signal_from_string(s.value("north", "green"));
  }
  if (j.contains("driving_area")) {
    for (const auto& r : j["driving_area"]) {
      g.driving_area.push_back({r[0].get<double>(), r[1].get<double>(),
                                r[2].get<double>(), r[3].get<double>()});
    }
  } else {
    g.driving_area = {
        {-g.zone_a_radius, -g.road_half_width, g.zone_a_radius,
         g.road_half_width},
        {-g.road_half_width, -g.zone_a_radius, g.road_half_width,
         g.zone_a_radius},
        {-g.danger_half_width, -g.danger_half_width, g.danger_half_width,
         g.danger_half_width},
    };
  }
  return g;
}

ZoneCode classify_zone(const Vec2& position, const IntersectionGeometry& geom) {
  Vec2 p = geom.to_local(position);
  if (std::max(std::abs(p.x), std::abs(p.y)) <= geom.danger_half_width) {
    return ZoneCode::c;
  }
  double r = p.norm();
  bool on_road = geom.in_driving_area_local(p);
  if (r <= geom.zone_b_radius && on_road) return ZoneCode::b;
  if (r <= geom.zone_a_radius && on_road) return ZoneCode::a;
  return ZoneCode::out;
}

RadialTrend radial_trend(const Vec2& current, const Vec2& previous,
                         const IntersectionGeometry& geom, double eps_dist) {
  double d_cur = (current - geom.center).norm();
  double d_prev = (previous - geom.center).norm();
  double delta = d_cur - d_prev;
  if (std::abs(delta) <= eps_dist) return RadialTrend::unchanged;
  return delta < 0 ? RadialTrend::decreasing : RadialTrend::increasing;
}

ColorState assign_color(ZoneCode zone, RadialTrend trend,
                        ColorState previous_color) {
  if (zone == ZoneCode::c) return ColorState::red;
  if (zone == ZoneCode::out) return ColorState::white;
  if (trend == RadialTrend::unchanged) return previous_color;
  if (zone == ZoneCode::a) {
    return trend == RadialTrend::decreasing ? ColorState::yellow
                                            : ColorState::blue;
  }
  return trend == RadialTrend::decreasing ? ColorState::orange
                                          : ColorState::cyan;
}

std::uint8_t knowledge_flags(const ObjectSnapshot& snapshot,
                             const IntersectionGeometry& geom) {
  std::uint8_t flags = 0;
  const Vec2 p = geom.to_local(snapshot.position);
  const Vec2 d = geom.dir_to_local(snapshot.direction);
  const double half = geom.road_half_width;
  const double box = geom.danger_half_width;
  const bool inside_box = std::max(std::abs(p.x), std::abs(p.y)) <= box;
  const bool on_ew = std::abs(p.y) <= half;
  const bool on_ns = std::abs(p.x) <= half;

  // Driving way violation: heading mostly against the permitted direction of
  // the occupied lane (right-hand traffic). Skipped inside the central box
  // where turning manoeuvres make the lane direction ambiguous.
  if (!inside_box && snapshot.speed > 0.1) {
    if (on_ew && (!on_ns || std::abs(p.x) > std::abs(p.y))) {
      double permitted = p.y < 0 ? 1.0 : -1.0;
      if (d.x * permitted < 0 && std::abs(d.x) >= 0.5) flags |= kKnowWrongWay;
    } else if (on_ns) {
      double permitted = p.x > 0 ? 1.0 : -1.0;
      if (d.y * permitted < 0 && std::abs(d.y) >= 0.5) flags |= kKnowWrongWay;
    }
  }

  // Traffic light potential violation: approaching a non-green arm faster
  // than the braking distance allows.
  if (!inside_box && snapshot.speed > 0.1) {
    std::optional<Arm> arm;
    double dist = 0.0;
    if (on_ew && p.x < -box && d.x > 0.5) {
      arm = Arm::west;
      dist = -box - p.x;
    } else if (on_ew && p.x > box && d.x < -0.5) {
      arm = Arm::east;
      dist = p.x - box;
    } else if (on_ns && p.y < -box && d.y > 0.5) {
      arm = Arm::south;
      dist = -box - p.y;
    } else if (on_ns && p.y > box && d.y < -0.5) {
      arm = Arm::north;
      dist = p.y - box;
    }
    if (arm && geom.signal(*arm) != SignalState::green) {
      double braking = snapshot.speed * snapshot.speed /
                       (2.0 * geom.brake_decel_mps2);
      if (dist < braking) flags |= kKnowTrafficLight;
    }
  }

  if (snapshot.speed > geom.speed_limit_mps) flags |= kKnowSpeeding;
  return flags;
}

namespace {

int remote_slot(ObjectType type, int k) {
  int slot = type == ObjectType::vehicle ? 1 : 2;
  return std::min(slot, k - 1);
}

struct ObjectHistory {
  bool seen = false;
  Vec2 prev_position;
  ColorState prev_color = ColorState::white;
};

NodeLabel make_label(const ObjectSnapshot& snap, ObjectHistory& hist,
                     const IntersectionGeometry& geom, int frame_index) {
  ZoneCode zone = classify_zone(snap.position, geom);
  RadialTrend trend;
  if (hist.seen) {
    trend = radial_trend(snap.position, hist.prev_position, geom);
  } else {
    // First observation: fall back to the sign of the radial velocity.
    Vec2 radial = snap.position - geom.center;
    double v_r = radial.dot(snap.direction) * snap.speed;
    trend = v_r < 0 ? RadialTrend::decreasing : RadialTrend::increasing;
  }
  ColorState color = assign_color(zone, trend, hist.prev_color);
  hist.seen = true;
  hist.prev_position = snap.position;
  hist.prev_color = color;

  NodeLabel label;
  label.object_type = snap.object_type;
  label.position_m = snap.position;
  label.speed_mps = snap.speed;
  label.direction = snap.direction;
  label.color = color;
  label.knowledge = knowledge_flags(snap, geom);
  label.frame_index = frame_index;
  return label;
}

}  // namespace

Dpag encode_scene(const std::vector<SceneFrame>& frames, double risk_window_s,
                  const IntersectionGeometry& geom, int max_out_degree) {
  if (frames.empty()) throw ConfigError("EmptyScene: no frames to encode");
  const int k = max_out_degree;
  if (k < 2) throw ConfigError("max_out_degree must be at least 2");
  for (size_t f = 1; f < frames.size(); ++f) {
    double dt = frames[f].timestamp - frames[f - 1].timestamp;
    if (std::abs(dt - kSamplingPeriodS) > 1e-6) {
      throw ConfigError("frames must be spaced by the 200 ms sampling period");
    }
  }

  const int depth_cap =
      static_cast<int>(std::ceil(risk_window_s / kSamplingPeriodS));
  const int total = static_cast<int>(frames.size());
  const int first = std::max(0, total - depth_cap);
  const int depth = total - first;

  // Color assignment needs per-object history from the full sequence,
  // including frames older than the retained window.
  std::map<int, ObjectHistory> history;
  // labels[f] = {host label, detected labels...} for retained frame f.
  std::vector<std::vector<NodeLabel>> frame_labels(depth);
  std::vector<std::vector<int>> frame_slots(depth);
  for (int f = 0; f < total; ++f) {
    const auto& frame = frames[f];
    int retained = f - first;  // negative while still in the dropped prefix
    NodeLabel host_label = make_label(frame.host, history[frame.host.object_id],
                                      geom, std::max(retained, 0));
    if (retained >= 0) frame_labels[retained].push_back(host_label);
    std::vector<int> used_slots;
    for (const auto& obj : frame.detected) {
      NodeLabel l = make_label(obj, history[obj.object_id], geom,
                               std::max(retained, 0));
      if (retained < 0) continue;
      int slot = remote_slot(obj.object_type, k);
      if (std::find(used_slots.begin(), used_slots.end(), slot) !=
          used_slots.end()) {
        throw ConfigError("TooManyObjects: child slot " +
                          std::to_string(slot) + " already occupied");
      }
      used_slots.push_back(slot);
      frame_labels[retained].push_back(l);
      frame_slots[retained].push_back(slot);
    }
  }

  // Node ids: newest frame first, host before its detected objects.
  std::vector<NodeLabel> labels;
  std::vector<PositionedEdge> edges;
  std::vector<int> host_id(depth);
  for (int f = depth - 1; f >= 0; --f) {
    int host = static_cast<int>(labels.size());
    host_id[f] = host;
    labels.push_back(frame_labels[f][0]);
    for (size_t d = 1; d < frame_labels[f].size(); ++d) {
      int child = static_cast<int>(labels.size());
      labels.push_back(frame_labels[f][d]);
      edges.push_back({host, child, frame_slots[f][d - 1]});
    }
  }
  for (int f = depth - 1; f > 0; --f) {
    edges.push_back({host_id[f], host_id[f - 1], k});
  }
  return Dpag::build(std::move(labels), edges, k, 1);
}

Eigen::VectorXd label_vector(const NodeLabel& label,
                             const IntersectionGeometry& geom) {
  Eigen::VectorXd v(kLabelDim);
  Vec2 rel = label.position_m - geom.center;
  double r = rel.norm();
  if (r > geom.zone_a_radius) rel = rel * (geom.zone_a_radius / r);
  v[0] = rel.x / geom.zone_a_radius;
  v[1] = rel.y / geom.zone_a_radius;
  v[2] = label.speed_mps / (2.0 * geom.speed_limit_mps);
  v[3] = label.direction.x;
  v[4] = label.direction.y;
  auto c = static_cast<std::uint8_t>(label.color);
  v[5] = (c & 0b100) ? 1.0 : 0.0;
  v[6] = (c & 0b010) ? 1.0 : 0.0;
  v[7] = (c & 0b001) ? 1.0 : 0.0;
  v[8] = (label.knowledge & kKnowWrongWay) ? 1.0 : 0.0;
  v[9] = (label.knowledge & kKnowTrafficLight) ? 1.0 : 0.0;
  v[10] = (label.knowledge & kKnowSpeeding) ? 1.0 : 0.0;
  v[11] = label.object_type == ObjectType::vehicle ? 1.0 : 0.0;
  v[12] = label.object_type == ObjectType::pedestrian ? 1.0 : 0.0;
  v[13] = label.object_type == ObjectType::bicycle ? 1.0 : 0.0;
  return v;
}

std::vector<Eigen::VectorXd> node_label_vectors(
    const Dpag& graph, const IntersectionGeometry& geom) {
  std::vector<Eigen::VectorXd> out(graph.node_count());
  for (int v = 0; v < graph.node_count(); ++v) {
    out[v] = label_vector(graph.label(v), geom);
  }
  return out;
}

namespace {

nlohmann::json snapshot_to_json(const ObjectSnapshot& s) {
  return {{"id", s.object_id},
          {"object_type", to_string(s.object_type)},
          {"position", {s.position.x, s.position.y}},
          {"speed", s.speed},
          {"direction", {s.direction.x, s.direction.y}}};
}

ObjectSnapshot snapshot_from_json(const nlohmann::json& j, double timestamp) {
  ObjectSnapshot s;
  s.object_id = j.at("id").get<int>();
  s.object_type = object_type_from_string(j.at("object_type").get<std::string>());
  s.position = {j.at("position")[0].get<double>(),
                j.at("position")[1].get<double>()};
  s.speed = j.at("speed").get<double>();
  s.direction = {j.at("direction")[0].get<double>(),
                 j.at("direction")[1].get<double>()};
  s.timestamp = timestamp;
  return s;
}

}  // namespace

nlohmann::json frames_to_json(const std::vector<SceneFrame>& frames) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : frames) {
    nlohmann::json detected = nlohmann::json::array();
    for (const auto& d : f.detected) detected.push_back(snapshot_to_json(d));
    out.push_back({{"timestamp", f.timestamp},
                   {"host", snapshot_to_json(f.host)},
                   {"detected", detected}});
  }
  return out;
}

std::vector<SceneFrame> frames_from_json(const nlohmann::json& j) {
  std::vector<SceneFrame> frames;
  for (const auto& jf : j) {
    SceneFrame f;
    f.timestamp = jf.at("timestamp").get<double>();
    f.host = snapshot_from_json(jf.at("host"), f.timestamp);
    if (jf.contains("detected")) {
      for (const auto& jd : jf["detected"]) {
        f.detected.push_back(snapshot_from_json(jd, f.timestamp));
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace riskgraph
