#include "optimizer.hpp"

#include <sstream>

#include "ioutil.hpp"
#include "json.hpp"

namespace riskgraph {

std::string TrainReport::to_jsonl() const {
  std::ostringstream out;
  for (const auto& e : epochs) {
    nlohmann::json j = {{"epoch", e.epoch},
                        {"error", e.error},
                        {"step", e.step},
                        {"gradient_norm", e.gradient_norm},
                        {"update_accepted", e.update_accepted}};
    out << j.dump() << "\n";
  }
  out << nlohmann::json({{"stop_reason", stop_reason}}).dump() << "\n";
  return out.str();
}

bool bfgs_update(Eigen::MatrixXd& h_inv, const Eigen::VectorXd& delta_w,
                 const Eigen::VectorXd& delta_g) {
  double curvature = delta_w.dot(delta_g);
  double eps = 1e-10 * delta_w.norm() * delta_g.norm();
  if (curvature <= eps) return false;

  double rho = 1.0 / curvature;
  Eigen::VectorXd h_dg = h_inv * delta_g;
  double dg_h_dg = delta_g.dot(h_dg);
  // (I - rho s y^T) H (I - rho y s^T) + rho s s^T expanded to rank-2 form.
  h_inv += (rho * rho * dg_h_dg + rho) * (delta_w * delta_w.transpose()) -
           rho * (h_dg * delta_w.transpose() + delta_w * h_dg.transpose());
  // Re-symmetrize to suppress round-off drift.
  h_inv = 0.5 * (h_inv + h_inv.transpose()).eval();
  return true;
}

LineSearchResult backtracking_search(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& w, const Eigen::VectorXd& direction, double f_at_w,
    const Eigen::VectorXd& gradient, const LineSearchConfig& config) {
  double slope = gradient.dot(direction);
  if (slope >= 0) {
    throw NumericError("NotDescentDirection: g.d = " + std::to_string(slope));
  }
  double eta = config.initial_step;
  for (int j = 0; j <= config.max_backtracks; ++j) {
    double f_trial = objective(w + eta * direction);
    if (f_trial <= f_at_w + config.c_armijo * eta * slope) {
      return {eta, false};
    }
    eta *= config.shrink;
  }
  return {0.0, true};
}

TrainResult qnts_minimize(const Objective& objective, Eigen::VectorXd w,
                          const TrainOptions& opts) {
  const auto n = w.size();
  TrainReport report;
  double error = objective.value(w);
  if (error <= opts.tolerance) {
    report.stop_reason = "tolerance";
    return {std::move(w), std::move(report)};
  }
  Eigen::VectorXd grad = objective.gradient(w);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd w_prev, grad_prev;

  for (int t = 0; t < opts.max_epochs; ++t) {
    bool accepted = true;
    Eigen::VectorXd direction;
    if (t == 0) {
      direction = -grad;
    } else {
      accepted = bfgs_update(h_inv, w - w_prev, grad - grad_prev);
      direction = -(h_inv * grad);
      if (grad.dot(direction) >= 0) {
        // H lost positive definiteness numerically; fall back to descent.
        h_inv.setIdentity();
        direction = -grad;
      }
    }
    auto ls = backtracking_search(objective.value, w, direction, error, grad,
                                  opts.line_search);
    w_prev = w;
    grad_prev = grad;
    if (ls.exhausted) {
      report.epochs.push_back({t, error, 0.0, grad.norm(), accepted});
      report.stop_reason = "line_search_exhausted";
      return {std::move(w), std::move(report)};
    }
    w += ls.step * direction;
    error = objective.value(w);
    grad = objective.gradient(w);
    report.epochs.push_back({t, error, ls.step, grad.norm(), accepted});
    if (error <= opts.tolerance) {
      report.stop_reason = "tolerance";
      return {std::move(w), std::move(report)};
    }
  }
  report.stop_reason = "max_epochs";
  return {std::move(w), std::move(report)};
}

TrainResult gradient_descent_minimize(const Objective& objective,
                                      Eigen::VectorXd w,
                                      const TrainOptions& opts) {
  if (opts.learning_rate <= 0) {
    throw ConfigError("learning_rate must be positive");
  }
  TrainReport report;
  double error = objective.value(w);
  if (error <= opts.tolerance) {
    report.stop_reason = "tolerance";
    return {std::move(w), std::move(report)};
  }
  for (int t = 0; t < opts.max_epochs; ++t) {
    Eigen::VectorXd grad = objective.gradient(w);
    w -= opts.learning_rate * grad;
    error = objective.value(w);
    if (error > 1e6 || !std::isfinite(error)) {
      throw NumericError("DivergenceDetected: error " + std::to_string(error));
    }
    report.epochs.push_back(
        {t, error, opts.learning_rate, objective.gradient(w).norm(), true});
    if (error <= opts.tolerance) {
      report.stop_reason = "tolerance";
      return {std::move(w), std::move(report)};
    }
  }
  report.stop_reason = "max_epochs";
  return {std::move(w), std::move(report)};
}

Objective dataset_objective(const Dataset& dataset, Architecture arch,
                            bool single_thread) {
  return {
      [&dataset, arch](const Eigen::VectorXd& w) {
        NetworkParams p(arch);
        p.flat = w;
        return dataset_error(dataset, p);
      },
      [&dataset, arch, single_thread](const Eigen::VectorXd& w) {
        NetworkParams p(arch);
        p.flat = w;
        return p_gradients(dataset, p, single_thread);
      },
  };
}

std::pair<NetworkParams, TrainReport> qnts_train(const Dataset& dataset,
                                                 NetworkParams params,
                                                 const TrainOptions& opts) {
  auto objective =
      dataset_objective(dataset, params.arch, opts.single_thread_gradients);
  auto result = qnts_minimize(objective, params.flat, opts);
  params.flat = result.w;
  return {std::move(params), std::move(result.report)};
}

std::pair<NetworkParams, TrainReport> bpts_train(const Dataset& dataset,
                                                 NetworkParams params,
                                                 const TrainOptions& opts) {
  auto objective =
      dataset_objective(dataset, params.arch, opts.single_thread_gradients);
  auto result = gradient_descent_minimize(objective, params.flat, opts);
  params.flat = result.w;
  return {std::move(params), std::move(result.report)};
}

}  // namespace riskgraph
