#pragma once

#include <span>
#include <vector>

#include "core/frame_field.hpp"
#include "core/mesh.hpp"
#include "core/operators.hpp"

namespace michell {

struct Parametrization {
  VertexVectors phi;       // raw solution, mean-zero per component
  VertexVectors phi_tilde; // translated, uniformly scaled and multiplied by rho
  double beta = 1.0;
  double rho = 0.0;
  double scale = 0.0;             // uniform normalization factor s (before rho)
  Vec3 offset = Vec3::Zero();     // per-component minimum subtracted from phi
  double objective = 0.0;         // weighted least-squares objective at phi
  double normal_residual = 0.0;   // relative residual of the normal equations
};

// Operator mapping a vertex scalar field to its per-tet derivative along the
// given per-tet direction.
SparseMatrix directional_gradient(const DiscreteOperators& ops, std::span<const Vec3> directions);

// beta * sum_i ||G_i phi_i - 1||^2 + sum_{i != j} ||G_i phi_j||^2, with G_i the
// derivative along frame column i.
double parametrization_objective(const DiscreteOperators& ops, std::span<const Mat3> frames,
                                 const VertexVectors& phi, double beta);

// Minimizes parametrization_objective; the per-component translation gauge is
// fixed by requiring every component to have zero vertex mean.
Parametrization solve_parametrization(const TetMesh& mesh, std::span<const Mat3> frames,
                                      double beta = 1.0);

// phi_tilde = rho * s * (phi - min), with s = 1 / (largest component range).
Parametrization normalize_and_scale(Parametrization p, double rho);

} // namespace michell
