#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "vec2.hpp"
#include "json.hpp"

namespace riskgraph {

enum class ObjectType : int { vehicle = 0, pedestrian = 1, bicycle = 2 };

// Per-object state colors with their 3-bit codes.
enum class ColorState : std::uint8_t {
  yellow = 0b001,  // entering the intersection
  orange = 0b011,  // approaching the danger zone
  red = 0b010,     // inside the danger zone
  cyan = 0b110,    // leaving the danger zone
  blue = 0b111,    // leaving the intersection
  white = 0b100,   // out of the driving area
};

// A-priori knowledge flags, one bit each.
constexpr std::uint8_t kKnowWrongWay = 0b100;
constexpr std::uint8_t kKnowTrafficLight = 0b010;
constexpr std::uint8_t kKnowSpeeding = 0b001;

struct NodeLabel {
  ObjectType object_type = ObjectType::vehicle;
  Vec2 position_m;
  double speed_mps = 0.0;
  Vec2 direction{1.0, 0.0};
  ColorState color = ColorState::white;
  std::uint8_t knowledge = 0;
  int frame_index = 0;
};

struct PositionedEdge {
  int parent = 0;
  int child = 0;
  int pos = 1;  // 1-based child slot
};

class DpagError : public ConfigError {
 public:
  enum class Code {
    cycle_detected,
    duplicate_position,
    multiple_roots,
    degree_exceeded,
    no_such_edge,
  };
  DpagError(Code code, std::string msg)
      : ConfigError(std::move(msg)), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// Directed positional acyclic labeled graph. Immutable after build().
// Node ids are dense 0..n-1; the root is the unique node with in-degree 0.
class Dpag {
 public:
  Dpag() = default;  // empty placeholder; populate via build()/from_json()

  struct ChildSlot {
    int pos;  // slot in [1, k]
    int child;
  };

  // Validates and constructs. Throws DpagError on any violation.
  static Dpag build(std::vector<NodeLabel> labels,
                    const std::vector<PositionedEdge>& edges, int max_out,
                    int max_in);

  int node_count() const { return static_cast<int>(labels_.size()); }
  const NodeLabel& label(int id) const { return labels_.at(id); }
  const std::vector<ChildSlot>& children(int id) const {
    return children_.at(id);
  }
  int root() const { return root_; }
  int max_out_degree() const { return max_out_; }
  int max_in_degree() const { return max_in_; }

  // Position of an existing parent->child edge; throws no_such_edge otherwise.
  int ord(int parent, int child) const;

  // Parents precede children; ties broken by ascending node id.
  const std::vector<int>& topological_order() const { return topo_; }
  std::vector<int> reverse_topological_order() const {
    return {topo_.rbegin(), topo_.rend()};
  }

  nlohmann::json to_json() const;
  static Dpag from_json(const nlohmann::json& j);

 private:
  std::vector<NodeLabel> labels_;
  std::vector<std::vector<ChildSlot>> children_;  // sorted by pos
  std::vector<int> topo_;
  int root_ = 0;
  int max_out_ = 1;
  int max_in_ = 1;
};

std::string to_string(ObjectType t);
ObjectType object_type_from_string(const std::string& s);
std::string color_bits(ColorState c);
ColorState color_from_bits(const std::string& bits);
std::string knowledge_bits(std::uint8_t k);
std::uint8_t knowledge_from_bits(const std::string& bits);

}  // namespace riskgraph
