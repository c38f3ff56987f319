#pragma once

#include <array>
#include <vector>

#include <Eigen/SparseCore>

#include "core/mesh.hpp"

namespace michell {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct DiscreteOperators {
  // Per-tet partial derivatives of a piecewise-linear vertex field (|T| x |V|, 1/m).
  SparseMatrix gx, gy, gz;
  // Cotangent Laplacian (|V| x |V|), positive semi-definite sign convention:
  // L_ij = sum over tets of vol * grad(b_i) . grad(b_j). Rows sum to zero.
  SparseMatrix laplacian;
  // Gradients of the four hat functions of each tet.
  std::vector<std::array<Vec3, 4>> hat_gradients;
};

// Gradients of the barycentric hat functions of a tet.
std::array<Vec3, 4> hat_gradients(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

DiscreteOperators build_operators(const TetMesh& mesh);

// Per-tet gradient of a vertex scalar field.
std::vector<Vec3> tet_gradients(const DiscreteOperators& ops, const Eigen::VectorXd& f);

} // namespace michell
