#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "core/mesh.hpp"
#include "core/parametrization.hpp"
#include "core/truss_graph.hpp"

namespace michell {

inline constexpr double kPerturbEpsilon = 1e-7;
// Parameter values closer than this to an integer count as "on" the integer.
inline constexpr double kIntegerGuard = 1e-9;

// Moves every value within kIntegerGuard of an integer by -epsilon, or by
// +epsilon when the vertex is a minimum of that column over its 1-ring
// (neighbours within kIntegerGuard below it count as ties).
// values is |V| x K; neighbors[v] lists the 1-ring of v.
void perturb_values(Eigen::MatrixXd& values, const std::vector<std::vector<int>>& neighbors,
                    double epsilon = kPerturbEpsilon);

// perturb_values applied to phi_tilde with the tet-mesh 1-ring.
Parametrization perturb_parametrization(const TetMesh& mesh, Parametrization p,
                                        double epsilon = kPerturbEpsilon);

// Throws Error(Internal) if any value lies within kIntegerGuard of an integer.
void check_perturbed(const Eigen::MatrixXd& values);

struct TriangleComplex {
  std::vector<Vec3> positions;
  std::vector<Tri> triangles;
  Eigen::MatrixXd params; // |V| x K, K = 2 or 3
};

struct ExtractionStats {
  int traced_curves = 0;     // end-to-end isocurves (2D)
  int closed_loops = 0;      // closed isocurves (2D)
  int face_touches = 0;      // tangential line/tet contacts skipped (3D)
  int inconsistent_tets = 0; // tets with degenerate parameter gradients (3D)
};

// Integer isocurves of a triangle complex. With K = 2 the elements of the
// phi_i = n curves get family iso(j) for the other parameter j, and edges on
// the complex boundary are chained into boundary elements. With K = 3 (a
// closed boundary surface) every node and element is tagged boundary.
TrussGraph extract_2d(const TriangleComplex& complex, ExtractionStats* stats = nullptr);

// Integer lines phi_i = n, phi_j = m clipped to each tet, split at the
// integer level sets of the remaining parameter.
TrussGraph extract_3d(const TetMesh& mesh, const Parametrization& p,
                      ExtractionStats* stats = nullptr);

// 2D extraction on the boundary surface with all three parameters, plus chains
// along the given feature edges (indices into mesh.boundary().edges).
TrussGraph extract_boundary(const TetMesh& mesh, const Parametrization& p,
                            std::span<const int> features, ExtractionStats* stats = nullptr);

// Boundary surface of the mesh as a triangle complex carrying phi_tilde.
TriangleComplex boundary_complex(const TetMesh& mesh, const Parametrization& p);

} // namespace michell
