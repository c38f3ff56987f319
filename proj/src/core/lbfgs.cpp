#include "core/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace michell::optim {

const char* to_string(LbfgsStatus status) {
  switch (status) {
  case LbfgsStatus::Converged: return "converged";
  case LbfgsStatus::MaxIterations: return "max iterations";
  case LbfgsStatus::LineSearchFailed: return "line search failed";
  }
  return "unknown";
}

namespace {

struct Probe {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0; // directional derivative
};

// Minimizer of the cubic interpolating (a, fa, da), (b, fb, db), clamped to
// the interior of [a, b] (either order).
double cubic_step(const Probe& a, const Probe& b) {
  const double lo = std::min(a.step, b.step), hi = std::max(a.step, b.step);
  const double d1 = a.slope + b.slope - 3 * (a.value - b.value) / (a.step - b.step);
  const double disc = d1 * d1 - a.slope * b.slope;
  double t = 0.5 * (lo + hi);
  if (disc >= 0) {
    const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
    const double denom = b.slope - a.slope + 2 * d2;
    if (denom != 0)
      t = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin)
    t = 0.5 * (lo + hi);
  return t;
}

class LineSearch {
public:
  LineSearch(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& dir,
             double f0, double g0, const LbfgsOptions& opt, int& evals)
      : f_(f), x_(x), dir_(dir), opt_(opt), evals_(evals) {
    origin_ = {0.0, f0, g0};
    grad_.resize(x.size());
  }

  // Returns true on a strong-Wolfe point; xnew/fnew/gnew hold it.
  bool run(double step, Eigen::VectorXd& xnew, double& fnew, Eigen::VectorXd& gnew) {
    Probe prev = origin_;
    for (int i = 0; i < opt_.max_line_search; ++i) {
      Probe cur = eval(step);
      if (!std::isfinite(cur.value)) {
        step *= 0.5;
        continue;
      }
      if (cur.value > origin_.value + opt_.c1 * step * origin_.slope ||
          (i > 0 && cur.value >= prev.value))
        return zoom(prev, cur, xnew, fnew, gnew);
      if (std::abs(cur.slope) <= -opt_.c2 * origin_.slope)
        return accept(cur, xnew, fnew, gnew);
      if (cur.slope >= 0)
        return zoom(cur, prev, xnew, fnew, gnew);
      prev = cur;
      step *= 2.0;
    }
    return false;
  }

private:
  Probe eval(double step) {
    trial_ = x_ + step * dir_;
    ++evals_;
    double v = f_(trial_, grad_);
    return {step, v, grad_.dot(dir_)};
  }

  bool accept(const Probe& p, Eigen::VectorXd& xnew, double& fnew, Eigen::VectorXd& gnew) {
    // grad_ and trial_ belong to the last evaluation; re-evaluate if needed.
    if (trial_ != x_ + p.step * dir_)
      eval(p.step);
    xnew = trial_;
    fnew = p.value;
    gnew = grad_;
    return true;
  }

  bool zoom(Probe lo, Probe hi, Eigen::VectorXd& xnew, double& fnew, Eigen::VectorXd& gnew) {
    for (int i = 0; i < opt_.max_line_search; ++i) {
      if (std::abs(hi.step - lo.step) <= 1e-16 * std::max(1.0, std::abs(lo.step)))
        break;
      const double step = cubic_step(lo, hi);
      Probe cur = eval(step);
      if (!std::isfinite(cur.value) || cur.value > origin_.value + opt_.c1 * step * origin_.slope ||
          cur.value >= lo.value) {
        hi = cur;
        continue;
      }
      if (std::abs(cur.slope) <= -opt_.c2 * origin_.slope)
        return accept(cur, xnew, fnew, gnew);
      if (cur.slope * (hi.step - lo.step) >= 0)
        hi = lo;
      lo = cur;
    }
    // No strong-Wolfe point found; accept the best sufficient-decrease point.
    if (lo.step > 0 && lo.value < origin_.value) {
      eval(lo.step);
      xnew = trial_;
      fnew = lo.value;
      gnew = grad_;
      return true;
    }
    return false;
  }

  const Objective& f_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& dir_;
  const LbfgsOptions& opt_;
  int& evals_;
  Probe origin_;
  Eigen::VectorXd trial_, grad_;
};

} // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& opt) {
  LbfgsResult res;
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(n);
  double fx = objective(x, g);
  res.evaluations = 1;

  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;
  Eigen::VectorXd dir(n), xnew(n), gnew(n);
  std::vector<double> alpha(opt.memory);

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    if (g.norm() <= opt.gradient_tolerance * (1.0 + std::abs(fx))) {
      res.status = LbfgsStatus::Converged;
      break;
    }

    // Two-loop recursion.
    dir = -g;
    const int m = static_cast<int>(S.size());
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho[i] * S[i].dot(dir);
      dir -= alpha[i] * Y[i];
    }
    if (m > 0)
      dir *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const double beta = rho[i] * Y[i].dot(dir);
      dir += (alpha[i] - beta) * S[i];
    }
    double slope = g.dot(dir);
    if (!(slope < 0)) {
      S.clear();
      Y.clear();
      rho.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }

    double step = (m == 0) ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    double fnew = fx;
    bool ok = false;
    for (int attempt = 0; attempt <= opt.line_search_retries && !ok; ++attempt) {
      LineSearch ls(objective, x, dir, fx, slope, opt, res.evaluations);
      ok = ls.run(step, xnew, fnew, gnew);
      step *= 0.5;
      if (!ok && attempt == opt.line_search_retries / 2 && !S.empty()) {
        // Drop curvature history and continue along steepest descent.
        S.clear();
        Y.clear();
        rho.clear();
        dir = -g;
        slope = -g.squaredNorm();
        step = std::min(1.0, 1.0 / g.norm());
      }
    }
    if (!ok) {
      res.status = LbfgsStatus::LineSearchFailed;
      break;
    }

    Eigen::VectorXd s = xnew - x, y = gnew - g;
    const double sy = s.dot(y);
    x.swap(xnew);
    g.swap(gnew);
    fx = fnew;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(S.size()) == opt.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
    }
  }
  if (res.iterations >= opt.max_iterations && g.norm() <= opt.gradient_tolerance * (1.0 + std::abs(fx)))
    res.status = LbfgsStatus::Converged;
  res.x = std::move(x);
  res.value = fx;
  res.gradient_norm = g.norm();
  return res;
}

} // namespace michell::optim
