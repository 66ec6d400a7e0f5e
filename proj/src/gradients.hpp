#pragma once

#include <functional>
#include <random>
#include <vector>

#include "network.hpp"

namespace riskgraph {

// A training pattern: graph, per-node numeric labels, and the root target.
struct SupervisedPattern {
  Dpag graph;
  std::vector<Eigen::VectorXd> labels;
  double target = 0.0;
};

using Dataset = std::vector<SupervisedPattern>;

// 1/2 (y(root) - t)^2
double pattern_error(const SupervisedPattern& pattern,
                     const NetworkParams& params);

double dataset_error(const Dataset& dataset, const NetworkParams& params);

// Exact gradient of pattern_error by backpropagation through structure,
// flat and aligned with NetworkParams::flat.
Eigen::VectorXd s_gradients(const SupervisedPattern& pattern,
                            const NetworkParams& params);

// Batch gradient: sum of s_gradients over the whole dataset. Patterns are
// fanned out across worker threads in contiguous chunks and the chunk
// partials are reduced in index order, so the result is reproducible for a
// fixed thread count. single_thread forces one chunk.
Eigen::VectorXd p_gradients(const Dataset& dataset,
                            const NetworkParams& params,
                            bool single_thread = false);

// Worker cap: RISKGRAPH_THREADS, else hardware concurrency.
int worker_thread_count();

// Central-difference oracle: (f(w + h e_j) - f(w - h e_j)) / 2h.
Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& w, double step);

Eigen::VectorXd finite_difference_gradient(const Dataset& dataset,
                                           const NetworkParams& params,
                                           double step);

// Random small DPAG (possibly with shared children) with uniform labels,
// for gradient verification.
struct GradcheckDraw {
  SupervisedPattern pattern;
  NetworkParams params;
};

GradcheckDraw random_gradcheck_draw(std::mt19937_64& rng, int max_nodes = 6,
                                    int max_k = 3, int max_state_dim = 6,
                                    int max_label_dim = 5);

// Max over `trials` draws of the scaled component error between s_gradients
// and central finite differences (h = 1e-5).
double gradient_check_max_rel_error(std::uint64_t seed, int trials);

}  // namespace riskgraph
