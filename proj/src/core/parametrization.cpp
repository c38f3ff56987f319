#include "core/parametrization.hpp"

#include <string>

#include <Eigen/SparseLU>

#include "core/error.hpp"
#include "core/log.hpp"

namespace michell {

SparseMatrix directional_gradient(const DiscreteOperators& ops, std::span<const Vec3> directions) {
  const Eigen::Index nt = ops.gx.rows();
  if (static_cast<Eigen::Index>(directions.size()) != nt)
    fail(ErrorCode::InvalidArgument, "one direction per tet is required");
  Eigen::VectorXd vx(nt), vy(nt), vz(nt);
  for (Eigen::Index t = 0; t < nt; ++t) {
    vx[t] = directions[t].x();
    vy[t] = directions[t].y();
    vz[t] = directions[t].z();
  }
  SparseMatrix G = vx.asDiagonal() * ops.gx;
  G += vy.asDiagonal() * ops.gy;
  G += vz.asDiagonal() * ops.gz;
  return G;
}

namespace {

std::array<SparseMatrix, 3> frame_operators(const DiscreteOperators& ops,
                                            std::span<const Mat3> frames) {
  std::array<SparseMatrix, 3> G;
  std::vector<Vec3> dirs(frames.size());
  for (int i = 0; i < 3; ++i) {
    for (std::size_t t = 0; t < frames.size(); ++t)
      dirs[t] = frames[t].col(i);
    G[i] = directional_gradient(ops, dirs);
  }
  return G;
}

double objective_with(const std::array<SparseMatrix, 3>& G, const VertexVectors& phi, double beta) {
  double obj = 0.0;
  for (int j = 0; j < 3; ++j) {
    const Eigen::VectorXd pj = phi.col(j);
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd r = G[i] * pj;
      if (i == j)
        obj += beta * (r.array() - 1.0).matrix().squaredNorm();
      else
        obj += r.squaredNorm();
    }
  }
  return obj;
}

} // namespace

double parametrization_objective(const DiscreteOperators& ops, std::span<const Mat3> frames,
                                 const VertexVectors& phi, double beta) {
  return objective_with(frame_operators(ops, frames), phi, beta);
}

Parametrization solve_parametrization(const TetMesh& mesh, std::span<const Mat3> frames,
                                      double beta) {
  if (!(beta > 0))
    fail(ErrorCode::Config, "beta must be positive");
  if (frames.size() != mesh.num_tets())
    fail(ErrorCode::InvalidArgument, "one frame per tet is required");
  if (mesh.num_components() != 1)
    fail(ErrorCode::Numerical,
         "parametrization system is singular beyond translations (mesh has " +
             std::to_string(mesh.num_components()) + " connected components)");

  const auto ops = build_operators(mesh);
  const auto G = frame_operators(ops, frames);
  const int nv = static_cast<int>(mesh.num_vertices());
  const Eigen::VectorXd ones_t = Eigen::VectorXd::Ones(mesh.num_tets());

  const SparseMatrix GtG[3] = {SparseMatrix(G[0].transpose() * G[0]),
                               SparseMatrix(G[1].transpose() * G[1]),
                               SparseMatrix(G[2].transpose() * G[2])};
  Parametrization p;
  p.beta = beta;
  p.phi.resize(nv, 3);
  double worst_residual = 0.0;
  for (int j = 0; j < 3; ++j) {
    SparseMatrix A = beta * GtG[j];
    for (int i = 0; i < 3; ++i)
      if (i != j)
        A += GtG[i];
    const Eigen::VectorXd b = beta * (G[j].transpose() * ones_t);

    // Bordered system [A 1; 1^T 0] enforcing a zero vertex mean.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(A.nonZeros() + 2 * nv);
    for (int col = 0; col < A.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(A, col); it; ++it)
        trip.emplace_back(it.row(), it.col(), it.value());
    for (int v = 0; v < nv; ++v) {
      trip.emplace_back(v, nv, 1.0);
      trip.emplace_back(nv, v, 1.0);
    }
    SparseMatrix K(nv + 1, nv + 1);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv + 1);
    rhs.head(nv) = b;

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success)
      fail(ErrorCode::Numerical, "parametrization system is singular (component " +
                                     std::to_string(j) + ")");
    Eigen::VectorXd x = lu.solve(rhs);
    for (int it = 0; it < 2; ++it)
      x += lu.solve(rhs - K * x);
    if (!x.allFinite())
      fail(ErrorCode::Numerical, "parametrization solve produced non-finite values");
    Eigen::VectorXd phi = x.head(nv);
    phi.array() -= phi.mean();
    const double rel = (A * phi - b).norm() / std::max(b.norm(), 1e-300);
    worst_residual = std::max(worst_residual, rel);
    p.phi.col(j) = phi;
  }
  p.normal_residual = worst_residual;
  if (!(worst_residual <= 1e-8))
    fail(ErrorCode::Numerical, "parametrization normal-equation residual " +
                                   std::to_string(worst_residual) + " exceeds 1e-8");
  p.objective = objective_with(G, p.phi, beta);
  logger()->info("param: beta {} objective {:.6e} residual {:.3e}", beta, p.objective,
                 worst_residual);
  return p;
}

Parametrization normalize_and_scale(Parametrization p, double rho) {
  if (!(rho > 0))
    fail(ErrorCode::Config, "rho must be positive");
  if (p.phi.rows() == 0)
    fail(ErrorCode::InvalidArgument, "parametrization is empty");
  const Vec3 lo = p.phi.colwise().minCoeff().transpose();
  const Vec3 hi = p.phi.colwise().maxCoeff().transpose();
  const double range = (hi - lo).maxCoeff();
  if (!(range > 0))
    fail(ErrorCode::Numerical, "constant parametrization");
  p.rho = rho;
  p.offset = lo;
  p.scale = 1.0 / range;
  p.phi_tilde.resize(p.phi.rows(), 3);
  for (Eigen::Index v = 0; v < p.phi.rows(); ++v)
    for (int c = 0; c < 3; ++c)
      p.phi_tilde(v, c) = (p.phi(v, c) - lo[c]) * p.scale * rho;
  return p;
}

} // namespace michell
