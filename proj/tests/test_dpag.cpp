#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "dpag.hpp"

using namespace riskgraph;

namespace {

std::vector<NodeLabel> blank_labels(int n) {
  return std::vector<NodeLabel>(static_cast<size_t>(n));
}

// Brute-force check of the topological invariant: parents before children.
bool is_topological(const Dpag& g, const std::vector<int>& order) {
  std::vector<int> rank(g.node_count());
  for (int j = 0; j < g.node_count(); ++j) rank[order[j]] = j;
  for (int v = 0; v < g.node_count(); ++v) {
    for (const auto& slot : g.children(v)) {
      if (rank[v] >= rank[slot.child]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("build validates structure") {
  SUBCASE("simple chain") {
    Dpag g = Dpag::build(blank_labels(3), {{0, 1, 1}, {1, 2, 1}}, 2, 1);
    CHECK(g.root() == 0);
    CHECK(g.node_count() == 3);
    CHECK(g.ord(0, 1) == 1);
  }
  SUBCASE("two-node cycle") {
    try {
      Dpag::build(blank_labels(2), {{0, 1, 1}, {1, 0, 1}}, 2, 1);
      FAIL("expected DpagError");
    } catch (const DpagError& e) {
      CHECK(e.code() == DpagError::Code::cycle_detected);
    }
  }
  SUBCASE("duplicate child position") {
    try {
      Dpag::build(blank_labels(3), {{0, 1, 1}, {0, 2, 1}}, 2, 1);
      FAIL("expected DpagError");
    } catch (const DpagError& e) {
      CHECK(e.code() == DpagError::Code::duplicate_position);
    }
  }
  SUBCASE("two roots") {
    try {
      Dpag::build(blank_labels(3), {{0, 2, 1}}, 2, 2);  // node 1 also in-degree 0
      FAIL("expected DpagError");
    } catch (const DpagError& e) {
      CHECK(e.code() == DpagError::Code::multiple_roots);
    }
  }
  SUBCASE("position outside [1, k]") {
    try {
      Dpag::build(blank_labels(2), {{0, 1, 3}}, 2, 1);
      FAIL("expected DpagError");
    } catch (const DpagError& e) {
      CHECK(e.code() == DpagError::Code::degree_exceeded);
    }
  }
  SUBCASE("in-degree over the cap") {
    try {
      Dpag::build(blank_labels(3), {{0, 1, 1}, {0, 2, 2}, {1, 2, 1}}, 2, 1);
      FAIL("expected DpagError");
    } catch (const DpagError& e) {
      CHECK(e.code() == DpagError::Code::degree_exceeded);
    }
  }
}

TEST_CASE("ord reports edge slots and missing edges") {
  Dpag g = Dpag::build(blank_labels(3), {{0, 1, 2}, {0, 2, 1}}, 2, 1);
  CHECK(g.ord(0, 1) == 2);
  CHECK(g.ord(0, 2) == 1);
  try {
    g.ord(1, 2);
    FAIL("expected DpagError");
  } catch (const DpagError& e) {
    CHECK(e.code() == DpagError::Code::no_such_edge);
  }
}

TEST_CASE("ord is injective per parent") {
  // diamond with shared child: 0 -> {1, 2}, 1 -> 3, 2 -> 3
  Dpag g = Dpag::build(blank_labels(4),
                       {{0, 1, 1}, {0, 2, 2}, {1, 3, 1}, {2, 3, 1}}, 2, 2);
  for (int v = 0; v < g.node_count(); ++v) {
    std::set<int> seen;
    for (const auto& slot : g.children(v)) {
      CHECK(seen.insert(slot.pos).second);
      CHECK(slot.pos >= 1);
      CHECK(slot.pos <= g.max_out_degree());
    }
  }
}

TEST_CASE("topological order: diamond") {
  Dpag g = Dpag::build(blank_labels(4),
                       {{0, 1, 1}, {0, 2, 2}, {1, 3, 1}, {2, 3, 1}}, 2, 2);
  const auto& order = g.topological_order();
  CHECK(order == std::vector<int>{0, 1, 2, 3});  // ties by ascending id
  CHECK(is_topological(g, order));
  auto rev = g.reverse_topological_order();
  std::reverse(rev.begin(), rev.end());
  CHECK(rev == order);
}

TEST_CASE("topological order property on enumerated small graphs") {
  // All DAGs on 4 nodes where edges only go low id -> high id, out-degree
  // <= 2, exactly one root. Every such graph must produce a valid order.
  const int n = 4;
  std::vector<std::pair<int, int>> all_edges;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) all_edges.emplace_back(a, b);
  int checked = 0;
  for (unsigned mask = 0; mask < (1u << all_edges.size()); ++mask) {
    std::vector<PositionedEdge> edges;
    std::vector<int> out(n, 0), in(n, 0);
    bool ok = true;
    for (size_t j = 0; j < all_edges.size() && ok; ++j) {
      if (!(mask & (1u << j))) continue;
      auto [a, b] = all_edges[j];
      if (out[a] >= 2) { ok = false; break; }
      edges.push_back({a, b, ++out[a]});
      ++in[b];
    }
    if (!ok) continue;
    int roots = 0;
    int max_in = 1;
    for (int v = 0; v < n; ++v) {
      roots += (in[v] == 0) ? 1 : 0;
      max_in = std::max(max_in, in[v]);
    }
    if (roots != 1) continue;
    Dpag g = Dpag::build(blank_labels(n), edges, 2, max_in);
    CHECK(is_topological(g, g.topological_order()));
    ++checked;
  }
  CHECK(checked > 10);  // the enumeration really covered multiple shapes
}

TEST_CASE("json round trip preserves everything") {
  std::vector<NodeLabel> labels(3);
  labels[0].object_type = ObjectType::vehicle;
  labels[0].position_m = {1.5, -2.25};
  labels[0].speed_mps = 13.75;
  labels[0].direction = {0.6, 0.8};
  labels[0].color = ColorState::orange;
  labels[0].knowledge = kKnowSpeeding | kKnowTrafficLight;
  labels[0].frame_index = 7;
  labels[1].object_type = ObjectType::pedestrian;
  labels[1].color = ColorState::red;
  labels[2].object_type = ObjectType::bicycle;
  labels[2].color = ColorState::cyan;

  Dpag g = Dpag::build(labels, {{0, 1, 1}, {0, 2, 2}}, 2, 1);
  Dpag h = Dpag::from_json(g.to_json());
  CHECK(h.node_count() == g.node_count());
  CHECK(h.root() == g.root());
  CHECK(h.ord(0, 1) == 1);
  CHECK(h.ord(0, 2) == 2);
  for (int v = 0; v < 3; ++v) {
    CHECK(h.label(v).object_type == g.label(v).object_type);
    CHECK(h.label(v).position_m.x == g.label(v).position_m.x);
    CHECK(h.label(v).position_m.y == g.label(v).position_m.y);
    CHECK(h.label(v).speed_mps == g.label(v).speed_mps);
    CHECK(h.label(v).direction.x == g.label(v).direction.x);
    CHECK(h.label(v).color == g.label(v).color);
    CHECK(h.label(v).knowledge == g.label(v).knowledge);
    CHECK(h.label(v).frame_index == g.label(v).frame_index);
  }
}

TEST_CASE("bit string helpers") {
  CHECK(color_bits(ColorState::yellow) == "001");
  CHECK(color_from_bits("001") == ColorState::yellow);
  CHECK(knowledge_bits(kKnowWrongWay | kKnowSpeeding) == "101");
  CHECK(knowledge_from_bits("101") ==
        static_cast<std::uint8_t>(kKnowWrongWay | kKnowSpeeding));
  CHECK(object_type_from_string(to_string(ObjectType::bicycle)) ==
        ObjectType::bicycle);
}
