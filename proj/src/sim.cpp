#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ioutil.hpp"

namespace riskgraph {

double sample_triangular(std::mt19937_64& rng, double half_width) {
  if (half_width <= 0) return 0.0;
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < 0.5) return half_width * (std::sqrt(2.0 * u) - 1.0);
  return half_width * (1.0 - std::sqrt(2.0 * (1.0 - u)));
}

std::vector<CheckPoint> sample_checkpoints(const TrajectorySpec& spec,
                                           std::mt19937_64& rng) {
  if (spec.checkpoints.size() < 2) {
    throw ConfigError("trajectory spec needs at least 2 checkpoints");
  }
  std::vector<CheckPoint> realized = spec.checkpoints;
  for (auto& cp : realized) {
    cp.mean_position.x += sample_triangular(rng, cp.position_spread);
    cp.mean_position.y += sample_triangular(rng, cp.position_spread);
    if (cp.speed_shape > 0 && cp.mean_speed > 0) {
      double scale = cp.speed_scale > 0 ? cp.speed_scale
                                        : cp.mean_speed / cp.speed_shape;
      cp.mean_speed =
          std::gamma_distribution<double>(cp.speed_shape, scale)(rng);
    }
    if (cp.direction_sigma > 0) {
      double angle =
          std::normal_distribution<double>(0.0, cp.direction_sigma)(rng);
      cp.mean_direction = cp.mean_direction.rotated(angle);
    }
    cp.mean_direction = cp.mean_direction.normalized();
    cp.position_spread = 0.0;
    cp.direction_sigma = 0.0;
    cp.speed_shape = 0.0;
  }
  return realized;
}

namespace {

Vec2 de_casteljau(std::vector<Vec2> pts, double u) {
  for (size_t level = pts.size() - 1; level >= 1; --level) {
    for (size_t j = 0; j < level; ++j) {
      pts[j] = pts[j] * (1.0 - u) + pts[j + 1] * u;
    }
  }
  return pts[0];
}

}  // namespace

Trajectory bezier_trajectory(const std::vector<CheckPoint>& control_points,
                             double duration_s) {
  if (control_points.size() < 2) {
    throw ConfigError("Bezier curve needs at least 2 control points");
  }
  if (duration_s <= 0) throw ConfigError("duration must be positive");
  std::vector<Vec2> pts;
  for (const auto& cp : control_points) pts.push_back(cp.mean_position);
  const int degree = static_cast<int>(pts.size()) - 1;
  std::vector<Vec2> deriv_pts;
  for (int j = 0; j < degree; ++j) {
    deriv_pts.push_back((pts[j + 1] - pts[j]) * static_cast<double>(degree));
  }

  Trajectory traj;
  const int samples =
      static_cast<int>(std::lround(duration_s / kSamplingPeriodS)) + 1;
  Vec2 last_dir{1.0, 0.0};
  for (int i = 0; i < samples; ++i) {
    double t = i * kSamplingPeriodS;
    double u = std::min(t / duration_s, 1.0);
    ObjectSnapshot s;
    s.timestamp = t;
    s.position = de_casteljau(pts, u);
    Vec2 velocity =
        degree >= 1 ? de_casteljau(deriv_pts, u) / duration_s : Vec2{};
    s.speed = velocity.norm();
    if (s.speed > 1e-12) {
      last_dir = velocity.normalized();
    }
    s.direction = last_dir;
    traj.samples.push_back(s);
  }
  return traj;
}

bool rectangles_overlap(const Vec2& pos_a, const Vec2& dir_a,
                        const VehicleExtents& ext_a, const Vec2& pos_b,
                        const Vec2& dir_b, const VehicleExtents& ext_b) {
  Vec2 da = dir_a.norm() > 0 ? dir_a.normalized() : Vec2{1.0, 0.0};
  Vec2 db = dir_b.norm() > 0 ? dir_b.normalized() : Vec2{1.0, 0.0};
  const Vec2 axes[4] = {da, da.perp(), db, db.perp()};
  const Vec2 t = pos_b - pos_a;
  for (const Vec2& axis : axes) {
    double ra = ext_a.half_length * std::abs(da.dot(axis)) +
                ext_a.half_width * std::abs(da.perp().dot(axis));
    double rb = ext_b.half_length * std::abs(db.dot(axis)) +
                ext_b.half_width * std::abs(db.perp().dot(axis));
    if (std::abs(t.dot(axis)) > ra + rb) return false;
  }
  return true;
}

namespace {

ObjectSnapshot lerp_snapshot(const ObjectSnapshot& a, const ObjectSnapshot& b,
                             double frac) {
  ObjectSnapshot s;
  s.position = a.position * (1.0 - frac) + b.position * frac;
  Vec2 d = a.direction * (1.0 - frac) + b.direction * frac;
  s.direction = d.norm() > 1e-12 ? d.normalized() : a.direction;
  s.speed = a.speed * (1.0 - frac) + b.speed * frac;
  return s;
}

}  // namespace

std::optional<double> detect_collision(const Trajectory& a,
                                       const Trajectory& b,
                                       const VehicleExtents& extents,
                                       double refine_s) {
  if (a.samples.empty() || b.samples.empty()) return std::nullopt;
  const int shift =
      static_cast<int>(std::lround((b.t0 - a.t0) / kSamplingPeriodS));
  const int na = static_cast<int>(a.samples.size());
  const int nb = static_cast<int>(b.samples.size());
  const int i_begin = std::max(0, shift);
  const int i_end = std::min(na - 1, shift + nb - 1);  // inclusive
  if (i_begin > i_end) return std::nullopt;

  const int substeps =
      std::max(1, static_cast<int>(std::lround(kSamplingPeriodS / refine_s)));
  for (int i = i_begin; i <= i_end; ++i) {
    const int j = i - shift;
    const bool has_next = i + 1 <= i_end;
    const int steps = has_next ? substeps : 1;
    for (int s = 0; s < steps; ++s) {
      double frac = static_cast<double>(s) / substeps;
      ObjectSnapshot sa =
          has_next ? lerp_snapshot(a.samples[i], a.samples[i + 1], frac)
                   : a.samples[i];
      ObjectSnapshot sb =
          has_next ? lerp_snapshot(b.samples[j], b.samples[j + 1], frac)
                   : b.samples[j];
      if (rectangles_overlap(sa.position, sa.direction, extents, sb.position,
                             sb.direction, extents)) {
        return a.timestamp(i) + frac * kSamplingPeriodS;
      }
    }
  }
  return std::nullopt;
}

double teacher_rate(const std::vector<SceneFrame>& frames,
                    std::optional<double> collision_time,
                    const IntersectionGeometry& geom,
                    const TeacherConfig& config) {
  if (frames.empty()) throw ConfigError("EmptyScene: teacher needs frames");
  double knowledge_term = 0.0;
  auto score = [&](const ObjectSnapshot& snap) {
    std::uint8_t bits = knowledge_flags(snap, geom);
    double s = 0.0;
    if (bits & kKnowWrongWay) s += config.w_knowledge[0];
    if (bits & kKnowTrafficLight) s += config.w_knowledge[1];
    if (bits & kKnowSpeeding) s += config.w_knowledge[2];
    knowledge_term = std::max(knowledge_term, s);
  };
  for (const auto& f : frames) {
    score(f.host);
    for (const auto& d : f.detected) score(d);
  }
  double t_newest = frames.back().timestamp;
  bool collision_in_window =
      collision_time && *collision_time >= t_newest - 1e-9 &&
      *collision_time <= t_newest + config.collision_horizon_s + 1e-9;
  double risk =
      config.w_collision * (collision_in_window ? 1.0 : 0.0) + knowledge_term;
  return std::clamp(risk, 0.0, 1.0);
}

namespace {

// Duration rescaling carries the sampled checkpoint speeds into the actual
// trajectory speed profile.
double effective_duration(const TrajectorySpec& spec,
                          const std::vector<CheckPoint>& realized) {
  double spec_mean = 0.0, real_mean = 0.0;
  int n = 0;
  for (size_t j = 0; j < realized.size(); ++j) {
    if (spec.checkpoints[j].mean_speed > 0) {
      spec_mean += spec.checkpoints[j].mean_speed;
      real_mean += std::max(realized[j].mean_speed, 0.1);
      ++n;
    }
  }
  double duration = spec.duration_s;
  if (n > 0 && real_mean > 0) duration *= (spec_mean / real_mean);
  double snapped =
      std::max(2.0, std::round(duration / kSamplingPeriodS)) *
      kSamplingPeriodS;
  return snapped;
}

Trajectory realize_trajectory(const TrajectorySpec& spec,
                              std::mt19937_64& rng, int object_id) {
  auto realized = sample_checkpoints(spec, rng);
  Trajectory traj = bezier_trajectory(realized, effective_duration(spec, realized));
  traj.object_type = spec.object_type;
  traj.object_id = object_id;
  for (auto& s : traj.samples) {
    s.object_id = object_id;
    s.object_type = spec.object_type;
  }
  return traj;
}

}  // namespace

double PatternSet::collision_fraction() const {
  if (records.empty()) return 0.0;
  int c = 0;
  for (const auto& r : records) c += r.collision ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(records.size());
}

PatternSet generate_pattern_set(const ScenarioConfig& config, int count,
                                std::uint64_t seed) {
  if (config.templates.empty()) {
    throw ConfigError("ConfigInvalid: no scenario templates");
  }
  if (count <= 0) throw ConfigError("ConfigInvalid: count must be positive");
  const int depth_cap = static_cast<int>(
      std::ceil(config.risk_window_s / kSamplingPeriodS));

  PatternSet set;
  set.geometry = config.geometry;
  set.seed = seed;
  set.records.reserve(count);

  for (int idx = 0; idx < count; ++idx) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(idx));
    const auto& tpl = config.templates[idx % config.templates.size()];
    IntersectionGeometry geom = config.geometry;
    if (tpl.signal_override) geom.signals = *tpl.signal_override;

    Trajectory host = realize_trajectory(tpl.host, rng, 0);
    Trajectory remote = realize_trajectory(tpl.remote, rng, 1);
    double shift_raw = std::uniform_real_distribution<double>(
        config.shift_min_s, config.shift_max_s)(rng);
    const int shift_frames =
        static_cast<int>(std::lround(shift_raw / kSamplingPeriodS));
    const double shift_s = shift_frames * kSamplingPeriodS;
    remote.t0 = shift_s;
    for (auto& s : remote.samples) s.timestamp += shift_s;

    auto collision = detect_collision(host, remote, config.extents);

    // Pick the newest frame of the risk window.
    const int na = static_cast<int>(host.samples.size());
    int i_min = std::min(depth_cap - 1, na - 1);
    int i_max = na - 1;
    if (collision) {
      // Never look past the crash itself.
      int i_col = static_cast<int>(std::floor(*collision / kSamplingPeriodS));
      i_max = std::clamp(i_col, i_min, na - 1);
    }
    int i_ref;
    double focus = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (collision && focus < config.collision_focus_prob) {
      int back = std::uniform_int_distribution<int>(0, depth_cap - 1)(rng);
      i_ref = std::clamp(i_max - back, i_min, i_max);
    } else {
      i_ref = std::uniform_int_distribution<int>(i_min, i_max)(rng);
    }
    if (collision) {
      // Keep the crash clearly inside or clearly outside the rating horizon;
      // windows where it sits right at the boundary would get labels that
      // flip on sub-frame noise.
      const double h = config.teacher.collision_horizon_s;
      const double rel = *collision - host.t0;
      const double gap = rel - kSamplingPeriodS * i_ref;
      if (gap > h - 0.3 && gap < h + 1.2) {
        int snap_in = static_cast<int>(
            std::ceil((rel - (h - 0.3)) / kSamplingPeriodS - 1e-9));
        int snap_out = static_cast<int>(
            std::floor((rel - (h + 1.2)) / kSamplingPeriodS + 1e-9));
        i_ref = (gap < h + 0.45 || snap_out < i_min)
                    ? std::clamp(snap_in, i_min, i_max)
                    : std::clamp(snap_out, i_min, i_max);
      }
    }

    std::vector<SceneFrame> frames;
    for (int i = std::max(0, i_ref - depth_cap + 1); i <= i_ref; ++i) {
      SceneFrame frame;
      frame.timestamp = host.timestamp(i);
      frame.host = host.samples[i];
      frame.host.timestamp = frame.timestamp;
      int j = i - shift_frames;
      if (j >= 0 && j < static_cast<int>(remote.samples.size())) {
        const auto& rs = remote.samples[j];
        if ((rs.position - frame.host.position).norm() <=
            geom.zone_a_radius) {
          frame.detected.push_back(rs);
        }
      }
      frames.push_back(std::move(frame));
    }

    PatternRecord rec;
    rec.graph = encode_scene(frames, config.risk_window_s, geom, 2);
    rec.target = teacher_rate(frames, collision, geom, config.teacher);
    double t_newest = frames.back().timestamp;
    rec.collision = collision && *collision >= t_newest - 1e-9 &&
                    *collision <=
                        t_newest + config.teacher.collision_horizon_s + 1e-9;
    rec.shift_s = shift_s;
    set.records.push_back(std::move(rec));
  }
  return set;
}

void save_pattern_set(const PatternSet& set, const std::string& path) {
  std::ostringstream out;
  nlohmann::json header = {{"format_version", 1},
                           {"kind", "pattern_set"},
                           {"count", set.records.size()},
                           {"seed", set.seed},
                           {"geometry", set.geometry.to_json()}};
  out << header.dump() << "\n";
  for (const auto& rec : set.records) {
    nlohmann::json j = {{"graph", rec.graph.to_json()},
                        {"target", rec.target},
                        {"collision", rec.collision},
                        {"shift_s", rec.shift_s}};
    out << j.dump() << "\n";
  }
  write_file_atomic(path, out.str());
}

PatternSet load_pattern_set(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty pattern set: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad pattern set header: " + std::string(e.what()));
  }
  if (header.value("format_version", 0) != 1) {
    throw IoError("unsupported pattern set format version");
  }
  PatternSet set;
  set.geometry = IntersectionGeometry::from_json(header.at("geometry"));
  set.seed = header.value("seed", 0ULL);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("bad pattern record: " + std::string(e.what()));
    }
    PatternRecord rec;
    rec.graph = Dpag::from_json(j.at("graph"));
    rec.target = j.at("target").get<double>();
    rec.collision = j.at("collision").get<bool>();
    rec.shift_s = j.at("shift_s").get<double>();
    set.records.push_back(std::move(rec));
  }
  if (set.records.size() != header.at("count").get<size_t>()) {
    throw IoError("pattern set record count mismatch");
  }
  return set;
}

namespace {

nlohmann::json spec_to_json(const TrajectorySpec& spec) {
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& cp : spec.checkpoints) {
    cps.push_back({{"position", {cp.mean_position.x, cp.mean_position.y}},
                   {"speed", cp.mean_speed},
                   {"direction", {cp.mean_direction.x, cp.mean_direction.y}},
                   {"position_spread", cp.position_spread},
                   {"speed_shape", cp.speed_shape},
                   {"speed_scale", cp.speed_scale},
                   {"direction_sigma", cp.direction_sigma}});
  }
  return {{"object_type", to_string(spec.object_type)},
          {"duration_s", spec.duration_s},
          {"checkpoints", cps}};
}

TrajectorySpec spec_from_json(const nlohmann::json& j) {
  TrajectorySpec spec;
  spec.object_type =
      object_type_from_string(j.value("object_type", std::string("vehicle")));
  spec.duration_s = j.at("duration_s").get<double>();
  for (const auto& jc : j.at("checkpoints")) {
    CheckPoint cp;
    cp.mean_position = {jc.at("position")[0].get<double>(),
                        jc.at("position")[1].get<double>()};
    cp.mean_speed = jc.value("speed", 0.0);
    if (jc.contains("direction")) {
      cp.mean_direction = {jc["direction"][0].get<double>(),
                           jc["direction"][1].get<double>()};
    }
    cp.position_spread = jc.value("position_spread", 0.0);
    cp.speed_shape = jc.value("speed_shape", 9.0);
    cp.speed_scale = jc.value("speed_scale", 0.0);
    cp.direction_sigma = jc.value("direction_sigma", 0.0);
    spec.checkpoints.push_back(cp);
  }
  return spec;
}

}  // namespace

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json tpls = nlohmann::json::array();
  for (const auto& t : templates) {
    nlohmann::json jt = {{"name", t.name},
                         {"host", spec_to_json(t.host)},
                         {"remote", spec_to_json(t.remote)}};
    if (t.signal_override) {
      jt["signals"] = {{"west", to_string((*t.signal_override)[0])},
                       {"east", to_string((*t.signal_override)[1])},
                       {"south", to_string((*t.signal_override)[2])},
                       {"north", to_string((*t.signal_override)[3])}};
    }
    tpls.push_back(jt);
  }
  return {{"format_version", 1},
          {"geometry", geometry.to_json()},
          {"templates", tpls},
          {"teacher",
           {{"w_collision", teacher.w_collision},
            {"w_knowledge",
             {teacher.w_knowledge[0], teacher.w_knowledge[1],
              teacher.w_knowledge[2]}},
            {"collision_horizon_s", teacher.collision_horizon_s}}},
          {"risk_window_s", risk_window_s},
          {"shift_range_s", {shift_min_s, shift_max_s}},
          {"collision_focus_prob", collision_focus_prob},
          {"vehicle_half_extents_m", {extents.half_width, extents.half_length}}};
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  if (j.value("format_version", 0) != 1) {
    throw ConfigError("unsupported scenario config format version");
  }
  ScenarioConfig c;
  c.geometry = j.contains("geometry")
                   ? IntersectionGeometry::from_json(j["geometry"])
                   : IntersectionGeometry::defaults();
  for (const auto& jt : j.at("templates")) {
    ScenarioTemplate t;
    t.name = jt.value("name", "unnamed");
    t.host = spec_from_json(jt.at("host"));
    t.remote = spec_from_json(jt.at("remote"));
    if (jt.contains("signals")) {
      const auto& s = jt["signals"];
      t.signal_override = {{signal_from_string(s.value("west", "green")),
                            signal_from_string(s.value("east", "green")),
                            signal_from_string(s.value("south", "green")),
                            signal_from_string(s.value("north", "green"))}};
    }
    c.templates.push_back(std::move(t));
  }
  if (j.contains("teacher")) {
    const auto& jt = j["teacher"];
    c.teacher.w_collision = jt.value("w_collision", 1.0);
    if (jt.contains("w_knowledge")) {
      for (int b = 0; b < 3; ++b) {
        c.teacher.w_knowledge[b] = jt["w_knowledge"][b].get<double>();
      }
    }
    c.teacher.collision_horizon_s = jt.value("collision_horizon_s", 1.5);
  }
  c.risk_window_s = j.value("risk_window_s", 1.5);
  if (j.contains("shift_range_s")) {
    c.shift_min_s = j["shift_range_s"][0].get<double>();
    c.shift_max_s = j["shift_range_s"][1].get<double>();
  }
  c.collision_focus_prob = j.value("collision_focus_prob", 0.5);
  if (j.contains("vehicle_half_extents_m")) {
    c.extents.half_width = j["vehicle_half_extents_m"][0].get<double>();
    c.extents.half_length = j["vehicle_half_extents_m"][1].get<double>();
  }
  if (c.shift_max_s < c.shift_min_s) {
    throw ConfigError("ConfigInvalid: shift range is empty");
  }
  return c;
}

}  // namespace riskgraph
