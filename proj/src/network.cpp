#include "network.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ioutil.hpp"
#include "json.hpp"

namespace riskgraph {

Eigen::VectorXd transition(const std::vector<Eigen::VectorXd>& child_states,
                           const std::vector<int>& child_slots,
                           const Eigen::VectorXd& label_vec,
                           const NetworkParams& params) {
  const auto& a = params.arch;
  if (label_vec.size() != a.label_dim) {
    throw NumericError("label vector length does not match architecture");
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(a.transition_input_dim());
  for (size_t c = 0; c < child_states.size(); ++c) {
    int slot = child_slots[c];
    if (slot < 1 || slot > a.max_out_degree) {
      throw NumericError("child slot outside [1, k]");
    }
    if (child_states[c].size() != a.state_dim) {
      throw NumericError("child state length does not match architecture");
    }
    x.segment((slot - 1) * a.state_dim, a.state_dim) = child_states[c];
  }
  x.tail(a.label_dim) = label_vec;
  return ((params.w_f() * x) + params.b_f()).array().tanh();
}

double output(const Eigen::VectorXd& state, const NetworkParams& params) {
  const auto& a = params.arch;
  if (state.size() != a.state_dim) {
    throw NumericError("state length does not match architecture");
  }
  Eigen::VectorXd hidden =
      ((params.w_h() * state) + params.b_h()).array().tanh();
  return sigmoid(params.w_out().dot(hidden) + params.b_out());
}

ForwardResult forward(const Dpag& graph,
                      const std::vector<Eigen::VectorXd>& node_labels,
                      const NetworkParams& params) {
  const auto& a = params.arch;
  if (graph.max_out_degree() > a.max_out_degree) {
    throw NumericError("graph out-degree exceeds architecture k");
  }
  if (static_cast<int>(node_labels.size()) != graph.node_count()) {
    throw NumericError("one label vector per node required");
  }
  ForwardResult result;
  result.states.resize(graph.node_count());
  for (int v : graph.reverse_topological_order()) {
    std::vector<Eigen::VectorXd> child_states;
    std::vector<int> slots;
    for (const auto& slot : graph.children(v)) {
      child_states.push_back(result.states[slot.child]);
      slots.push_back(slot.pos);
    }
    result.states[v] = transition(child_states, slots, node_labels[v], params);
  }
  result.root_output = output(result.states[graph.root()], params);
  return result;
}

NetworkParams init_params(const Architecture& arch, std::uint64_t seed) {
  NetworkParams p(arch);
  std::mt19937_64 rng(seed);
  auto fill = [&](int offset, int count, int fan_in) {
    double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-r, r);
    for (int j = 0; j < count; ++j) p.flat[offset + j] = dist(rng);
  };
  fill(arch.wf_offset(), arch.wf_size(), arch.transition_input_dim());
  fill(arch.wh_offset(), arch.wh_size(), arch.state_dim);
  fill(arch.wo_offset(), arch.wo_size(), arch.hidden_dim);
  // biases stay zero
  return p;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const auto& a = ckpt.params.arch;
  nlohmann::json header = {
      {"format_version", 1}, {"m", a.state_dim},    {"n", a.label_dim},
      {"k", a.max_out_degree}, {"h", a.hidden_dim}, {"seed", ckpt.seed},
      {"epoch", ckpt.epoch}};
  std::ostringstream out;
  out << header.dump() << "\n";
  for (int j = 0; j < ckpt.params.flat.size(); ++j) {
    out << format_double(ckpt.params.flat[j]) << "\n";
  }
  write_file_atomic(path, out.str());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty checkpoint: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint header: " + std::string(e.what()));
  }
  if (header.value("format_version", 0) != 1) {
    throw IoError("unsupported checkpoint format version");
  }
  Architecture arch;
  arch.state_dim = header.at("m").get<int>();
  arch.label_dim = header.at("n").get<int>();
  arch.max_out_degree = header.at("k").get<int>();
  arch.hidden_dim = header.at("h").get<int>();
  Checkpoint ckpt;
  ckpt.params = NetworkParams(arch);
  ckpt.seed = header.at("seed").get<std::uint64_t>();
  ckpt.epoch = header.at("epoch").get<int>();
  for (int j = 0; j < arch.param_count(); ++j) {
    if (!std::getline(in, line)) {
      throw IoError("truncated checkpoint: " + path);
    }
    ckpt.params.flat[j] = std::stod(line);
  }
  return ckpt;
}

}  // namespace riskgraph
