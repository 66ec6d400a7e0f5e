#include "dpag.hpp"

#include <algorithm>
#include <queue>

namespace riskgraph {

Dpag Dpag::build(std::vector<NodeLabel> labels,
                 const std::vector<PositionedEdge>& edges, int max_out,
                 int max_in) {
  if (max_out < 1 || max_in < 1) {
    throw ConfigError("max_out_degree and max_in_degree must be positive");
  }
  const int n = static_cast<int>(labels.size());
  if (n == 0) throw ConfigError("graph has no nodes");

  std::vector<std::vector<ChildSlot>> children(n);
  std::vector<int> in_degree(n, 0);
  for (const auto& e : edges) {
    if (e.parent < 0 || e.parent >= n || e.child < 0 || e.child >= n) {
      throw ConfigError("edge references unknown node id");
    }
    if (e.pos < 1 || e.pos > max_out) {
      throw DpagError(DpagError::Code::degree_exceeded,
                      "edge position " + std::to_string(e.pos) +
                          " outside [1, " + std::to_string(max_out) + "]");
    }
    for (const auto& slot : children[e.parent]) {
      if (slot.pos == e.pos) {
        throw DpagError(DpagError::Code::duplicate_position,
                        "two children at position " + std::to_string(e.pos) +
                            " of node " + std::to_string(e.parent));
      }
    }
    children[e.parent].push_back({e.pos, e.child});
    if (++in_degree[e.child] > max_in) {
      throw DpagError(DpagError::Code::degree_exceeded,
                      "in-degree of node " + std::to_string(e.child) +
                          " exceeds " + std::to_string(max_in));
    }
  }
  for (auto& cs : children) {
    std::sort(cs.begin(), cs.end(),
              [](const ChildSlot& a, const ChildSlot& b) { return a.pos < b.pos; });
  }

  std::vector<int> roots;
  for (int v = 0; v < n; ++v) {
    if (in_degree[v] == 0) roots.push_back(v);
  }
  if (roots.empty()) {
    throw DpagError(DpagError::Code::cycle_detected,
                    "no in-degree-0 node: graph contains a cycle");
  }
  if (roots.size() > 1) {
    throw DpagError(DpagError::Code::multiple_roots,
                    std::to_string(roots.size()) + " nodes have in-degree 0");
  }

  // Kahn's algorithm, min-id first for a deterministic order.
  std::vector<int> remaining = in_degree;
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  ready.push(roots[0]);
  std::vector<int> topo;
  topo.reserve(n);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    topo.push_back(v);
    for (const auto& slot : children[v]) {
      if (--remaining[slot.child] == 0) ready.push(slot.child);
    }
  }
  if (static_cast<int>(topo.size()) != n) {
    throw DpagError(DpagError::Code::cycle_detected,
                    "graph contains a directed cycle");
  }

  Dpag g;
  g.labels_ = std::move(labels);
  g.children_ = std::move(children);
  g.topo_ = std::move(topo);
  g.root_ = roots[0];
  g.max_out_ = max_out;
  g.max_in_ = max_in;
  return g;
}

int Dpag::ord(int parent, int child) const {
  for (const auto& slot : children_.at(parent)) {
    if (slot.child == child) return slot.pos;
  }
  throw DpagError(DpagError::Code::no_such_edge,
                  "no edge " + std::to_string(parent) + " -> " +
                      std::to_string(child));
}

std::string to_string(ObjectType t) {
  switch (t) {
    case ObjectType::vehicle:
      return "vehicle";
    case ObjectType::pedestrian:
      return "pedestrian";
    case ObjectType::bicycle:
      return "bicycle";
  }
  throw ConfigError("bad object type");
}

ObjectType object_type_from_string(const std::string& s) {
  if (s == "vehicle") return ObjectType::vehicle;
  if (s == "pedestrian") return ObjectType::pedestrian;
  if (s == "bicycle") return ObjectType::bicycle;
  throw ConfigError("unknown object type: " + s);
}

static std::string bits3(std::uint8_t v) {
  std::string s(3, '0');
  for (int b = 0; b < 3; ++b) {
    if (v & (1u << (2 - b))) s[b] = '1';
  }
  return s;
}

static std::uint8_t from_bits3(const std::string& bits) {
  if (bits.size() != 3) throw ConfigError("expected 3-bit string: " + bits);
  std::uint8_t v = 0;
  for (int b = 0; b < 3; ++b) {
    if (bits[b] == '1') {
      v |= (1u << (2 - b));
    } else if (bits[b] != '0') {
      throw ConfigError("expected 3-bit string: " + bits);
    }
  }
  return v;
}

std::string color_bits(ColorState c) {
  return bits3(static_cast<std::uint8_t>(c));
}

ColorState color_from_bits(const std::string& bits) {
  auto v = from_bits3(bits);
  switch (v) {
    case 0b001:
    case 0b011:
    case 0b010:
    case 0b110:
    case 0b111:
    case 0b100:
      return static_cast<ColorState>(v);
  }
  throw ConfigError("not a valid color code: " + bits);
}

std::string knowledge_bits(std::uint8_t k) { return bits3(k); }

std::uint8_t knowledge_from_bits(const std::string& bits) {
  return from_bits3(bits);
}

nlohmann::json Dpag::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (int v = 0; v < node_count(); ++v) {
    const auto& l = labels_[v];
    nodes.push_back({{"id", v},
                     {"object_type", to_string(l.object_type)},
                     {"frame", l.frame_index},
                     {"position_m", {l.position_m.x, l.position_m.y}},
                     {"speed_mps", l.speed_mps},
                     {"direction", {l.direction.x, l.direction.y}},
                     {"color_bits", color_bits(l.color)},
                     {"knowledge_bits", knowledge_bits(l.knowledge)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (int v = 0; v < node_count(); ++v) {
    for (const auto& slot : children_[v]) {
      edges.push_back({{"parent", v}, {"child", slot.child}, {"pos", slot.pos}});
    }
  }
  return {{"k", max_out_}, {"i", max_in_}, {"nodes", nodes}, {"edges", edges}};
}

Dpag Dpag::from_json(const nlohmann::json& j) {
  const auto& jnodes = j.at("nodes");
  std::vector<NodeLabel> labels(jnodes.size());
  for (const auto& jn : jnodes) {
    int id = jn.at("id").get<int>();
    if (id < 0 || id >= static_cast<int>(labels.size())) {
      throw ConfigError("node ids must be dense 0..n-1");
    }
    NodeLabel l;
    l.object_type = object_type_from_string(jn.at("object_type").get<std::string>());
    l.frame_index = jn.at("frame").get<int>();
    l.position_m = {jn.at("position_m")[0].get<double>(),
                    jn.at("position_m")[1].get<double>()};
    l.speed_mps = jn.at("speed_mps").get<double>();
    l.direction = {jn.at("direction")[0].get<double>(),
                   jn.at("direction")[1].get<double>()};
    l.color = color_from_bits(jn.at("color_bits").get<std::string>());
    l.knowledge = knowledge_from_bits(jn.at("knowledge_bits").get<std::string>());
    labels[id] = l;
  }
  std::vector<PositionedEdge> edges;
  for (const auto& je : j.at("edges")) {
    edges.push_back({je.at("parent").get<int>(), je.at("child").get<int>(),
                     je.at("pos").get<int>()});
  }
  return build(std::move(labels), edges, j.at("k").get<int>(),
               j.at("i").get<int>());
}

}  // namespace riskgraph
