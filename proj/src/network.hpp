#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpag.hpp"
#include "errors.hpp"

namespace riskgraph {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Architecture {
  int state_dim = 1;      // m
  int label_dim = 1;      // n
  int max_out_degree = 2; // k
  int hidden_dim = 1;     // h

  int transition_input_dim() const {
    return max_out_degree * state_dim + label_dim;
  }
  int wf_size() const { return state_dim * transition_input_dim(); }
  int bf_size() const { return state_dim; }
  int wh_size() const { return hidden_dim * state_dim; }
  int bh_size() const { return hidden_dim; }
  int wo_size() const { return hidden_dim; }
  int param_count() const {
    return wf_size() + bf_size() + wh_size() + bh_size() + wo_size() + 1;
  }
  int f_param_count() const { return wf_size() + bf_size(); }

  int wf_offset() const { return 0; }
  int bf_offset() const { return wf_size(); }
  int wh_offset() const { return bf_offset() + bf_size(); }
  int bh_offset() const { return wh_offset() + wh_size(); }
  int wo_offset() const { return bh_offset() + bh_size(); }
  int bo_offset() const { return wo_offset() + wo_size(); }

  bool operator==(const Architecture&) const = default;
};

// Shared transition weights w^f and output weights w^g, stored flat so the
// optimizer can treat the whole model as one parameter vector.
struct NetworkParams {
  Architecture arch;
  Eigen::VectorXd flat;

  NetworkParams() = default;
  explicit NetworkParams(Architecture a)
      : arch(a), flat(Eigen::VectorXd::Zero(a.param_count())) {}

  Eigen::Map<const RowMajorMatrix> w_f() const {
    return {flat.data() + arch.wf_offset(), arch.state_dim,
            arch.transition_input_dim()};
  }
  Eigen::Map<const Eigen::VectorXd> b_f() const {
    return {flat.data() + arch.bf_offset(), arch.bf_size()};
  }
  Eigen::Map<const RowMajorMatrix> w_h() const {
    return {flat.data() + arch.wh_offset(), arch.hidden_dim, arch.state_dim};
  }
  Eigen::Map<const Eigen::VectorXd> b_h() const {
    return {flat.data() + arch.bh_offset(), arch.bh_size()};
  }
  Eigen::Map<const Eigen::VectorXd> w_out() const {
    return {flat.data() + arch.wo_offset(), arch.wo_size()};
  }
  double b_out() const { return flat[arch.bo_offset()]; }
};

// tanh(W_f . concat(child states, label) + b_f); absent children are the
// zero (nil) state.
Eigen::VectorXd transition(const std::vector<Eigen::VectorXd>& child_states,
                           const std::vector<int>& child_slots,
                           const Eigen::VectorXd& label_vec,
                           const NetworkParams& params);

// sigmoid(w_out . tanh(W_h state + b_h) + b_out), strictly in (0, 1).
double output(const Eigen::VectorXd& state, const NetworkParams& params);

struct ForwardResult {
  std::vector<Eigen::VectorXd> states;  // per node id
  double root_output = 0.0;
};

ForwardResult forward(const Dpag& graph,
                      const std::vector<Eigen::VectorXd>& node_labels,
                      const NetworkParams& params);

// Uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
NetworkParams init_params(const Architecture& arch, std::uint64_t seed);

struct Checkpoint {
  NetworkParams params;
  std::uint64_t seed = 0;
  int epoch = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace riskgraph
