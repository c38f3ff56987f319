#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "core/fem.hpp"
#include "core/lbfgs.hpp"
#include "core/mesh.hpp"
#include "core/operators.hpp"

namespace michell {

// One 3-vector per vertex, row-major so the storage is (x0, y0, z0, x1, ...).
using VertexVectors = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

// sqrt(|v^T M v|) for a unit vector v. Throws Error(InvalidArgument) if
// | ||v|| - 1 | > 1e-9.
double tensor_norm(const Vec3& v, const Mat3& M);

Mat3 cross_matrix(const Vec3& v);

// exp([s]) via Rodrigues, with a Taylor expansion for ||s|| < 1e-4.
Mat3 rotation_exp(const Vec3& s);

// Partial derivatives d exp([s]) / d s_m, m = 0..2.
std::array<Mat3, 3> rotation_exp_jacobian(const Vec3& s);

// Zero-length angular velocities are replaced by sqrt(machine epsilon) * e_x,
// where the exponential map's gradient would otherwise be undefined.
Vec3 perturb_zero_omega(const Vec3& w);

// R = exp(sum_j [w_j]) over the four vertices of a tet (after perturbation).
Mat3 frame_from_omega(std::span<const Vec3, 4> omega_tet);

// Per-tet frames for a vertex omega field.
std::vector<Mat3> frames_from_omega(const TetMesh& mesh, const VertexVectors& omega);

// ||r2||_M + ||r3||_M for the second and third columns of R.
double data_energy(const Mat3& R, const Mat3& sigma_plus);

// 1/2 w^T L w + 1/2 w^T w with L applied to each coordinate.
double smooth_energy(const VertexVectors& omega, const SparseMatrix& laplacian);

struct FrameEnergy {
  double total = 0.0;
  double data = 0.0;
  double smooth = 0.0;
  VertexVectors gradient;
};

// E_alpha = sum_t E_data(R_t) + alpha * E_smooth and its gradient in omega.
FrameEnergy total_energy_grad(const TetMesh& mesh, const SparseMatrix& laplacian,
                              const StressField& stress, const VertexVectors& omega,
                              double alpha);

struct FrameFitOptions {
  int outer_iterations = 30;
  double alpha0_factor = 10.0; // alpha_0 = factor * |T|
  double alpha_decay = 2.0 / 3.0;
  // Stop once the data energy improved by less than 1e-10 (relative) for
  // three consecutive outer iterations.
  bool early_stop = true;
  optim::LbfgsOptions inner;
};

struct OuterIteration {
  double alpha = 0.0;
  double data_energy = 0.0;
  double smooth_energy = 0.0;
  int inner_iterations = 0;
  optim::LbfgsStatus status = optim::LbfgsStatus::Converged;
};

struct FrameField {
  VertexVectors omega;
  std::vector<Mat3> frames;
  std::vector<OuterIteration> history;
  double initial_data_energy = 0.0;
};

// Annealed fit: omega starts at zero, alpha at alpha0_factor*|T|; every outer
// iteration warm-starts L-BFGS on E_alpha and then scales alpha by alpha_decay.
FrameField fit_frame_field(const TetMesh& mesh, const StressField& stress,
                           const FrameFitOptions& options = {});

// max ||R^T R - I||_F over a set of frames.
double max_orthonormality_error(std::span<const Mat3> frames);

} // namespace michell
