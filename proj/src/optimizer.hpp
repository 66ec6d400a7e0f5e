#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gradients.hpp"

namespace riskgraph {

struct LineSearchConfig {
  double c_armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 30;
  double initial_step = 1.0;
};

struct LineSearchResult {
  double step = 0.0;
  bool exhausted = false;
};

struct EpochRecord {
  int epoch = 0;
  double error = 0.0;
  double step = 0.0;
  double gradient_norm = 0.0;
  bool update_accepted = true;  // BFGS curvature check outcome
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::string stop_reason;

  std::string to_jsonl() const;
};

struct TrainOptions {
  int max_epochs = 200;
  double tolerance = 1e-3;
  double learning_rate = 0.01;  // bpts only
  LineSearchConfig line_search;
  bool single_thread_gradients = false;
};

// Generic differentiable objective so the same drivers run over datasets
// and over test functions.
struct Objective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

// BFGS inverse-Hessian update in place. Returns false (H untouched) when
// the curvature condition dW.dG > eps fails.
bool bfgs_update(Eigen::MatrixXd& h_inv, const Eigen::VectorXd& delta_w,
                 const Eigen::VectorXd& delta_g);

// Armijo backtracking from initial_step, shrinking geometrically. Throws
// NumericError when d is not a descent direction.
LineSearchResult backtracking_search(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& w, const Eigen::VectorXd& direction,
    double f_at_w, const Eigen::VectorXd& gradient,
    const LineSearchConfig& config);

struct TrainResult {
  Eigen::VectorXd w;
  TrainReport report;
};

TrainResult qnts_minimize(const Objective& objective, Eigen::VectorXd w0,
                          const TrainOptions& opts);

TrainResult gradient_descent_minimize(const Objective& objective,
                                      Eigen::VectorXd w0,
                                      const TrainOptions& opts);

Objective dataset_objective(const Dataset& dataset, Architecture arch,
                            bool single_thread = false);

// Dataset-level drivers matching the report/stopping contract above.
std::pair<NetworkParams, TrainReport> qnts_train(const Dataset& dataset,
                                                 NetworkParams params,
                                                 const TrainOptions& opts);

std::pair<NetworkParams, TrainReport> bpts_train(const Dataset& dataset,
                                                 NetworkParams params,
                                                 const TrainOptions& opts);

}  // namespace riskgraph
