#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace michell::optim {

struct LbfgsOptions {
  int memory = 10;
  // Converged when ||g|| <= gradient_tolerance * (1 + |f|).
  double gradient_tolerance = 1e-6;
  int max_iterations = 500;
  double c1 = 1e-4; // sufficient decrease
  double c2 = 0.9;  // curvature (strong Wolfe)
  int max_line_search = 40;
  // Line-search failures are retried with the initial step halved this many
  // times before giving up.
  int line_search_retries = 8;
};

enum class LbfgsStatus { Converged, MaxIterations, LineSearchFailed };

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
};

// Objective returns f(x) and writes the gradient into `grad` (already sized).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Limited-memory BFGS with a strong-Wolfe line search (bracketing + zoom with
// safeguarded cubic interpolation).
LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {});

const char* to_string(LbfgsStatus status);

} // namespace michell::optim
