#include "core/frame_field.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "core/error.hpp"
#include "core/log.hpp"

namespace michell {

double tensor_norm(const Vec3& v, const Mat3& M) {
  if (std::abs(v.norm() - 1.0) > 1e-9)
    fail(ErrorCode::InvalidArgument, "tensor_norm expects a unit vector");
  return std::sqrt(std::abs(v.dot(M * v)));
}

Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

namespace {

constexpr double kSeriesThreshold = 1e-4;

// Coefficients of exp([s]) = I + a [s] + b [s]^2 and of their derivatives
// divided by theta: c = a'/theta, d = b'/theta.
struct RodriguesCoefficients {
  double a, b, c, d;
};

RodriguesCoefficients rodrigues(double theta) {
  const double t2 = theta * theta;
  if (theta < kSeriesThreshold) {
    return {1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            -1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0,
            -1.0 / 12.0 + t2 / 180.0 - t2 * t2 / 6720.0};
  }
  const double s = std::sin(theta), co = std::cos(theta);
  return {s / theta, (1.0 - co) / t2, (theta * co - s) / (t2 * theta),
          (theta * s - 2.0 * (1.0 - co)) / (t2 * t2)};
}

} // namespace

Mat3 rotation_exp(const Vec3& s) {
  const auto k = rodrigues(s.norm());
  const Mat3 S = cross_matrix(s);
  return Mat3::Identity() + k.a * S + k.b * S * S;
}

std::array<Mat3, 3> rotation_exp_jacobian(const Vec3& s) {
  const auto k = rodrigues(s.norm());
  const Mat3 S = cross_matrix(s);
  const Mat3 S2 = S * S;
  std::array<Mat3, 3> out;
  for (int m = 0; m < 3; ++m) {
    const Mat3 E = cross_matrix(Vec3::Unit(m));
    out[m] = k.c * s[m] * S + k.a * E + k.d * s[m] * S2 + k.b * (E * S + S * E);
  }
  return out;
}

Vec3 perturb_zero_omega(const Vec3& w) {
  if (w.squaredNorm() != 0.0)
    return w;
  return Vec3(std::sqrt(std::numeric_limits<double>::epsilon()), 0.0, 0.0);
}

Mat3 frame_from_omega(std::span<const Vec3, 4> omega_tet) {
  Vec3 s = Vec3::Zero();
  for (const Vec3& w : omega_tet)
    s += perturb_zero_omega(w);
  return rotation_exp(s);
}

namespace {

Vec3 tet_axis(const Tet& tet, const VertexVectors& omega) {
  Vec3 s = Vec3::Zero();
  for (int v : tet)
    s += perturb_zero_omega(omega.row(v).transpose());
  return s;
}

// Data energy of one tet and its gradient with respect to the rotation axis.
double data_energy_axis_grad(const Vec3& s, const Mat3& M, Vec3& grad) {
  const Mat3 R = rotation_exp(s);
  const auto dR = rotation_exp_jacobian(s);
  double e = 0.0;
  grad.setZero();
  for (int col = 1; col < 3; ++col) {
    const Vec3 r = R.col(col);
    const Vec3 Mr = M * r;
    const double q = r.dot(Mr);
    const double norm = std::sqrt(std::abs(q));
    e += norm;
    if (norm == 0.0)
      continue;
    const Vec3 de_dr = (q >= 0 ? 1.0 : -1.0) * Mr / norm;
    for (int m = 0; m < 3; ++m)
      grad[m] += de_dr.dot(dR[m].col(col));
  }
  return e;
}

} // namespace

std::vector<Mat3> frames_from_omega(const TetMesh& mesh, const VertexVectors& omega) {
  std::vector<Mat3> frames(mesh.num_tets());
  for (std::size_t t = 0; t < mesh.num_tets(); ++t)
    frames[t] = rotation_exp(tet_axis(mesh.tets()[t], omega));
  return frames;
}

double data_energy(const Mat3& R, const Mat3& sigma_plus) {
  return std::sqrt(std::abs(R.col(1).dot(sigma_plus * R.col(1)))) +
         std::sqrt(std::abs(R.col(2).dot(sigma_plus * R.col(2))));
}

double smooth_energy(const VertexVectors& omega, const SparseMatrix& laplacian) {
  double e = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Eigen::VectorXd w = omega.col(c);
    e += 0.5 * w.dot(laplacian * w) + 0.5 * w.squaredNorm();
  }
  return e;
}

FrameEnergy total_energy_grad(const TetMesh& mesh, const SparseMatrix& laplacian,
                              const StressField& stress, const VertexVectors& omega,
                              double alpha) {
  if (!stress.has_spd() || stress.size() != mesh.num_tets())
    fail(ErrorCode::InvalidArgument, "frame energy needs an SPD stress tensor for every tet");
  FrameEnergy out;
  out.gradient = VertexVectors::Zero(omega.rows(), 3);
  Vec3 g;
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const Tet& tet = mesh.tets()[t];
    out.data += data_energy_axis_grad(tet_axis(tet, omega), stress.sigma_plus[t], g);
    for (int v : tet)
      out.gradient.row(v) += g.transpose();
  }
  for (int c = 0; c < 3; ++c) {
    const Eigen::VectorXd w = omega.col(c);
    const Eigen::VectorXd Lw = laplacian * w;
    out.smooth += 0.5 * w.dot(Lw) + 0.5 * w.squaredNorm();
    out.gradient.col(c) += alpha * (Lw + w);
  }
  out.total = out.data + alpha * out.smooth;
  return out;
}

FrameField fit_frame_field(const TetMesh& mesh, const StressField& stress,
                           const FrameFitOptions& options) {
  if (options.outer_iterations < 1)
    fail(ErrorCode::Config, "outer_iterations must be at least 1");
  if (!(options.alpha_decay > 0 && options.alpha_decay < 1))
    fail(ErrorCode::Config, "alpha_decay must lie in (0, 1)");
  if (!(options.alpha0_factor > 0))
    fail(ErrorCode::Config, "alpha0_factor must be positive");

  const auto ops = build_operators(mesh);
  const Eigen::Index nv = static_cast<Eigen::Index>(mesh.num_vertices());

  FrameField field;
  field.omega = VertexVectors::Zero(nv, 3);
  field.initial_data_energy = total_energy_grad(mesh, ops.laplacian, stress, field.omega, 0.0).data;

  double alpha = options.alpha0_factor * static_cast<double>(mesh.num_tets());
  double prev_data = field.initial_data_energy;
  int stalled = 0;
  for (int k = 0; k < options.outer_iterations; ++k) {
    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      Eigen::Map<const VertexVectors> w(x.data(), nv, 3);
      auto e = total_energy_grad(mesh, ops.laplacian, stress, w, alpha);
      grad = Eigen::Map<const Eigen::VectorXd>(e.gradient.data(), 3 * nv);
      return e.total;
    };
    Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(field.omega.data(), 3 * nv);
    auto res = optim::minimize_lbfgs(objective, std::move(x0), options.inner);
    if (res.status == optim::LbfgsStatus::LineSearchFailed &&
        res.gradient_norm > 1e-4 * (1.0 + std::abs(res.value)))
      fail(ErrorCode::Numerical,
           "frame fitting: line search failed at outer iteration " + std::to_string(k) +
               " (alpha " + std::to_string(alpha) + ", inner iteration " +
               std::to_string(res.iterations) + ", energy " + std::to_string(res.value) +
               ", gradient norm " + std::to_string(res.gradient_norm) + ")");
    field.omega = Eigen::Map<const VertexVectors>(res.x.data(), nv, 3);

    auto e = total_energy_grad(mesh, ops.laplacian, stress, field.omega, alpha);
    field.history.push_back({alpha, e.data, e.smooth, res.iterations, res.status});
    logger()->info("frames: outer {:2d} alpha {:.4e} data {:.10e} smooth {:.4e} inner {} ({})", k,
                   alpha, e.data, e.smooth, res.iterations, optim::to_string(res.status));

    const double improvement = (prev_data - e.data) / std::max(std::abs(prev_data), 1e-300);
    stalled = improvement < 1e-10 ? stalled + 1 : 0;
    prev_data = e.data;
    alpha *= options.alpha_decay;
    if (options.early_stop && stalled >= 3)
      break;
  }
  field.frames = frames_from_omega(mesh, field.omega);
  return field;
}

double max_orthonormality_error(std::span<const Mat3> frames) {
  double worst = 0.0;
  for (const Mat3& R : frames)
    worst = std::max(worst, (R.transpose() * R - Mat3::Identity()).norm());
  return worst;
}

} // namespace michell
