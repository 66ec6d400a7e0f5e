#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>

#include "doctest.h"
#include "network.hpp"

using namespace riskgraph;

namespace {

std::vector<NodeLabel> blank_labels(int n) {
  return std::vector<NodeLabel>(static_cast<size_t>(n));
}

// Reference implementation: plain recursion with memoization left out on
// purpose -- shared subgraphs are just recomputed.
Eigen::VectorXd naive_state(const Dpag& g,
                            const std::vector<Eigen::VectorXd>& labels,
                            const NetworkParams& params, int v) {
  const auto& arch = params.arch;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(arch.transition_input_dim());
  for (const auto& slot : g.children(v)) {
    x.segment((slot.pos - 1) * arch.state_dim, arch.state_dim) =
        naive_state(g, labels, params, slot.child);
  }
  x.tail(arch.label_dim) = labels[v];
  return ((params.w_f() * x) + params.b_f()).array().tanh();
}

}  // namespace

TEST_CASE("scalar activation values") {
  CHECK(std::tanh(0.4) == doctest::Approx(0.379949).epsilon(1e-5));
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid(10.0) == doctest::Approx(0.9999546).epsilon(1e-6));
  CHECK(sigmoid(-10.0) == doctest::Approx(1.0 - 0.9999546).epsilon(1e-3));
}

TEST_CASE("parameter layout accounting") {
  Architecture arch{23, 14, 2, 160};
  CHECK(arch.transition_input_dim() == 2 * 23 + 14);
  CHECK(arch.param_count() ==
        23 * 60 + 23 + 160 * 23 + 160 + 160 + 1);  // 5404
  CHECK(arch.param_count() == 5404);
  // the blocks tile the flat vector exactly
  CHECK(arch.bo_offset() + 1 == arch.param_count());
}

TEST_CASE("zero parameters give output one half at any depth") {
  Architecture arch{4, 3, 2, 5};
  NetworkParams params(arch);
  for (int depth : {1, 3, 8}) {
    std::vector<PositionedEdge> edges;
    for (int v = 0; v + 1 < depth; ++v) edges.push_back({v, v + 1, 2});
    Dpag g = Dpag::build(blank_labels(depth), edges, 2, 1);
    std::vector<Eigen::VectorXd> labels(depth, Eigen::VectorXd::Ones(3));
    CHECK(forward(g, labels, params).root_output == doctest::Approx(0.5));
  }
}

TEST_CASE("forward pass matches the recursive-descent oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-0.8, 0.8);
  Architecture arch{3, 2, 2, 4};
  // diamond with a shared child, so memoized and naive evaluation differ
  // in work but must agree in value
  Dpag g = Dpag::build(blank_labels(4),
                       {{0, 1, 1}, {0, 2, 2}, {1, 3, 1}, {2, 3, 1}}, 2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    NetworkParams params(arch);
    for (int j = 0; j < params.flat.size(); ++j) params.flat[j] = unif(rng);
    std::vector<Eigen::VectorXd> labels;
    for (int v = 0; v < 4; ++v) {
      Eigen::VectorXd l(2);
      l << unif(rng), unif(rng);
      labels.push_back(l);
    }
    auto result = forward(g, labels, params);
    Eigen::VectorXd root_state = naive_state(g, labels, params, g.root());
    CHECK((result.states[g.root()] - root_state).cwiseAbs().maxCoeff() <
          1e-14);
    CHECK(result.root_output ==
          doctest::Approx(output(root_state, params)).epsilon(1e-14));
  }
}

TEST_CASE("transition places children by slot and zero-fills gaps") {
  Architecture arch{2, 1, 3, 2};
  NetworkParams params(arch);
  // W_f = identity-ish picking out slot 2's block
  auto wf = Eigen::Map<RowMajorMatrix>(params.flat.data(), 2,
                                       arch.transition_input_dim());
  wf(0, 2) = 1.0;  // slot 2, first component
  wf(1, 3) = 1.0;  // slot 2, second component
  Eigen::VectorXd child(2);
  child << 0.25, -0.5;
  Eigen::VectorXd label(1);
  label << 0.0;
  Eigen::VectorXd state = transition({child}, {2}, label, params);
  CHECK(state[0] == doctest::Approx(std::tanh(0.25)));
  CHECK(state[1] == doctest::Approx(std::tanh(-0.5)));
  // same child at slot 1 no longer hits those weights
  state = transition({child}, {1}, label, params);
  CHECK(state[0] == doctest::Approx(0.0));
}

TEST_CASE("initialization is deterministic and range-bounded") {
  Architecture arch{23, 14, 2, 160};
  NetworkParams a = init_params(arch, 42);
  NetworkParams b = init_params(arch, 42);
  NetworkParams c = init_params(arch, 43);
  CHECK((a.flat - b.flat).norm() == 0.0);
  CHECK((a.flat - c.flat).norm() != 0.0);
  double wf_bound = 1.0 / std::sqrt(arch.transition_input_dim());
  CHECK(a.w_f().cwiseAbs().maxCoeff() <= wf_bound);
  double wh_bound = 1.0 / std::sqrt(arch.state_dim);
  CHECK(a.w_h().cwiseAbs().maxCoeff() <= wh_bound);
  CHECK(a.b_f().cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.b_h().cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.b_out() == 0.0);
}

TEST_CASE("checkpoint round trip is exact") {
  Architecture arch{5, 3, 2, 7};
  Checkpoint ckpt;
  ckpt.params = init_params(arch, 11);
  ckpt.params.flat[0] = 0.1 + 0.2;  // a value with no short decimal form
  ckpt.seed = 987654321;
  ckpt.epoch = 42;
  std::string path =
      (std::filesystem::temp_directory_path() / "rg_test_ckpt.txt").string();
  save_checkpoint(ckpt, path);
  Checkpoint back = load_checkpoint(path);
  std::remove(path.c_str());
  CHECK(back.seed == ckpt.seed);
  CHECK(back.epoch == ckpt.epoch);
  CHECK(back.params.arch == arch);
  REQUIRE(back.params.flat.size() == ckpt.params.flat.size());
  for (int j = 0; j < back.params.flat.size(); ++j) {
    CHECK(back.params.flat[j] == ckpt.params.flat[j]);  // bit-exact
  }
}

TEST_CASE("loading a missing checkpoint is an io error") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/dir/ckpt.txt"), IoError);
}
