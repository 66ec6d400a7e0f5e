#include "gradients.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>

namespace riskgraph {

double pattern_error(const SupervisedPattern& pattern,
                     const NetworkParams& params) {
  double y = forward(pattern.graph, pattern.labels, params).root_output;
  double e = y - pattern.target;
  return 0.5 * e * e;
}

double dataset_error(const Dataset& dataset, const NetworkParams& params) {
  double total = 0.0;
  for (const auto& p : dataset) total += pattern_error(p, params);
  return total;
}

Eigen::VectorXd s_gradients(const SupervisedPattern& pattern,
                            const NetworkParams& params) {
  const auto& arch = params.arch;
  const Dpag& graph = pattern.graph;
  const int m = arch.state_dim;
  const int tin = arch.transition_input_dim();

  // Forward pass, keeping the concatenated transition inputs per node.
  std::vector<Eigen::VectorXd> states(graph.node_count());
  std::vector<Eigen::VectorXd> inputs(graph.node_count());
  for (int v : graph.reverse_topological_order()) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(tin);
    for (const auto& slot : graph.children(v)) {
      x.segment((slot.pos - 1) * m, m) = states[slot.child];
    }
    x.tail(arch.label_dim) = pattern.labels[v];
    inputs[v] = x;
    states[v] = ((params.w_f() * x) + params.b_f()).array().tanh();
  }

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(arch.param_count());
  auto g_wf = Eigen::Map<RowMajorMatrix>(grad.data() + arch.wf_offset(), m, tin);
  auto g_bf = grad.segment(arch.bf_offset(), arch.bf_size());
  auto g_wh = Eigen::Map<RowMajorMatrix>(grad.data() + arch.wh_offset(),
                                         arch.hidden_dim, m);
  auto g_bh = grad.segment(arch.bh_offset(), arch.bh_size());
  auto g_wo = grad.segment(arch.wo_offset(), arch.wo_size());

  // delta_a[v] accumulates dE/da(v); the root gets the output-network term,
  // everything else only inflow from its parent.
  std::vector<Eigen::VectorXd> delta_a(graph.node_count(),
                                       Eigen::VectorXd::Zero(m));
  {
    const int root = graph.root();
    const Eigen::VectorXd& a_root = states[root];
    Eigen::VectorXd hidden_act =
        ((params.w_h() * a_root) + params.b_h()).array().tanh();
    double y = sigmoid(params.w_out().dot(hidden_act) + params.b_out());
    double d_out = (y - pattern.target) * y * (1.0 - y);
    grad[arch.bo_offset()] += d_out;
    g_wo += d_out * hidden_act;
    Eigen::VectorXd d_hidden =
        (d_out * params.w_out().array() *
         (1.0 - hidden_act.array().square()))
            .matrix();
    g_bh += d_hidden;
    g_wh += d_hidden * a_root.transpose();
    delta_a[root] += params.w_h().transpose() * d_hidden;
  }

  // Root-to-leaves sweep: parents are finalized before their children.
  for (int v : graph.topological_order()) {
    Eigen::VectorXd d_z =
        (delta_a[v].array() * (1.0 - states[v].array().square())).matrix();
    g_wf += d_z * inputs[v].transpose();
    g_bf += d_z;
    for (const auto& slot : graph.children(v)) {
      delta_a[slot.child] +=
          params.w_f().middleCols((slot.pos - 1) * m, m).transpose() * d_z;
    }
  }
  return grad;
}

int worker_thread_count() {
  if (const char* env = std::getenv("RISKGRAPH_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Eigen::VectorXd p_gradients(const Dataset& dataset,
                            const NetworkParams& params, bool single_thread) {
  if (dataset.empty()) throw ConfigError("EmptyDataset: no patterns");
  const int n = static_cast<int>(dataset.size());
  int workers = single_thread ? 1 : std::min(worker_thread_count(), n);
  if (workers <= 1) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(params.arch.param_count());
    for (const auto& p : dataset) total += s_gradients(p, params);
    return total;
  }
  std::vector<Eigen::VectorXd> partials(
      workers, Eigen::VectorXd::Zero(params.arch.param_count()));
  std::vector<std::thread> threads;
  int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      int begin = w * chunk;
      int end = std::min(n, begin + chunk);
      for (int j = begin; j < end; ++j) {
        partials[w] += s_gradients(dataset[j], params);
      }
    });
  }
  for (auto& t : threads) t.join();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(params.arch.param_count());
  for (const auto& part : partials) total += part;
  return total;
}

Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& w, double step) {
  if (step <= 0) throw ConfigError("finite-difference step must be positive");
  Eigen::VectorXd grad(w.size());
  Eigen::VectorXd probe = w;
  for (int j = 0; j < w.size(); ++j) {
    probe[j] = w[j] + step;
    double plus = f(probe);
    probe[j] = w[j] - step;
    double minus = f(probe);
    probe[j] = w[j];
    grad[j] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

GradcheckDraw random_gradcheck_draw(std::mt19937_64& rng, int max_nodes,
                                    int max_k, int max_state_dim,
                                    int max_label_dim) {
  auto rand_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto rand_real = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  const int n = rand_int(1, max_nodes);
  const int k = rand_int(2, std::max(2, max_k));

  std::vector<int> out_degree(n, 0), in_degree(n, 0);
  std::vector<std::vector<int>> used_pos(n);
  std::vector<PositionedEdge> edges;
  auto attach = [&](int parent, int child) {
    std::vector<int> free_pos;
    for (int pos = 1; pos <= k; ++pos) {
      bool used = false;
      for (int u : used_pos[parent]) used |= (u == pos);
      if (!used) free_pos.push_back(pos);
    }
    int pos = free_pos[rand_int(0, static_cast<int>(free_pos.size()) - 1)];
    used_pos[parent].push_back(pos);
    edges.push_back({parent, child, pos});
    ++out_degree[parent];
    ++in_degree[child];
  };
  for (int v = 1; v < n; ++v) {
    std::vector<int> candidates;
    for (int p = 0; p < v; ++p) {
      if (out_degree[p] < k) candidates.push_back(p);
    }
    attach(candidates[rand_int(0, static_cast<int>(candidates.size()) - 1)], v);
    // Occasionally add a second parent to exercise shared subgraphs.
    if (rand_real(0, 1) < 0.3) {
      std::vector<int> extras;
      for (int p = 0; p < v; ++p) {
        bool already = false;
        for (const auto& e : edges) already |= (e.parent == p && e.child == v);
        if (!already && out_degree[p] < k) extras.push_back(p);
      }
      if (!extras.empty()) {
        attach(extras[rand_int(0, static_cast<int>(extras.size()) - 1)], v);
      }
    }
  }
  int max_in = 1;
  for (int v = 0; v < n; ++v) max_in = std::max(max_in, in_degree[v]);

  Architecture arch;
  arch.state_dim = rand_int(1, max_state_dim);
  arch.label_dim = rand_int(1, max_label_dim);
  arch.max_out_degree = k;
  arch.hidden_dim = rand_int(1, 4);

  GradcheckDraw draw;
  std::vector<NodeLabel> labels(n);
  draw.pattern.graph = Dpag::build(std::move(labels), edges, k, max_in);
  for (int v = 0; v < n; ++v) {
    Eigen::VectorXd l(arch.label_dim);
    for (int j = 0; j < arch.label_dim; ++j) l[j] = rand_real(-1, 1);
    draw.pattern.labels.push_back(l);
  }
  draw.pattern.target = rand_real(0, 1);
  draw.params = NetworkParams(arch);
  for (int j = 0; j < arch.param_count(); ++j) {
    draw.params.flat[j] = rand_real(-0.7, 0.7);
  }
  return draw;
}

double gradient_check_max_rel_error(std::uint64_t seed, int trials) {
  if (trials <= 0) throw ConfigError("gradcheck needs at least one trial");
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    GradcheckDraw draw = random_gradcheck_draw(rng);
    Eigen::VectorXd analytic = s_gradients(draw.pattern, draw.params);
    Eigen::VectorXd numeric =
        finite_difference_gradient({draw.pattern}, draw.params, 1e-5);
    for (int j = 0; j < analytic.size(); ++j) {
      double scale = std::max({1.0, std::abs(analytic[j]), std::abs(numeric[j])});
      worst = std::max(worst, std::abs(analytic[j] - numeric[j]) / scale);
    }
  }
  return worst;
}

Eigen::VectorXd finite_difference_gradient(const Dataset& dataset,
                                           const NetworkParams& params,
                                           double step) {
  NetworkParams probe = params;
  return finite_difference_gradient(
      [&](const Eigen::VectorXd& w) {
        probe.flat = w;
        return dataset_error(dataset, probe);
      },
      params.flat, step);
}

}  // namespace riskgraph
