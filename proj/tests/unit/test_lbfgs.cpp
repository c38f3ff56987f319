#include <doctest.h>

#include <Eigen/Cholesky>

#include "core/lbfgs.hpp"

using namespace michell::optim;

TEST_CASE("minimizes a convex quadratic") {
  Eigen::MatrixXd A(3, 3);
  A << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(3, 1, 3);
  auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  };
  const auto r = minimize_lbfgs(f, Eigen::VectorXd::Zero(3));
  CHECK(r.status == LbfgsStatus::Converged);
  const Eigen::VectorXd want = A.ldlt().solve(b);
  CHECK((r.x - want).norm() < 1e-5);
}

TEST_CASE("minimizes the Rosenbrock function") {
  auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    double v = 0.0;
    g.setZero(x.size());
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double a = x[i + 1] - x[i] * x[i], b = 1 - x[i];
      v += 100 * a * a + b * b;
      g[i] += -400 * a * x[i] - 2 * b;
      g[i + 1] += 200 * a;
    }
    return v;
  };
  LbfgsOptions opt;
  opt.gradient_tolerance = 1e-10;
  opt.max_iterations = 2000;
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(6, -1.2);
  const auto r = minimize_lbfgs(f, x0, opt);
  CHECK(r.status == LbfgsStatus::Converged);
  CHECK((r.x - Eigen::VectorXd::Ones(6)).norm() < 1e-6);
}

TEST_CASE("stops at the iteration limit") {
  auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2 * x;
    g[0] = 4 * x[0] * x[0] * x[0];
    return x.squaredNorm() - x[0] * x[0] + x[0] * x[0] * x[0] * x[0];
  };
  LbfgsOptions opt;
  opt.max_iterations = 2;
  opt.gradient_tolerance = 1e-14;
  const auto r = minimize_lbfgs(f, Eigen::VectorXd::Constant(4, 3.0), opt);
  CHECK(r.iterations == 2);
  CHECK(r.status == LbfgsStatus::MaxIterations);
}
