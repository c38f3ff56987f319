#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "core/fem.hpp"
#include "core/geometry.hpp"
#include "core/mesh.hpp"
#include "core/truss_graph.hpp"

namespace michell {

using Vector6d = Eigen::Matrix<double, 6, 1>;

struct MemberSection {
  double area = 0.0;     // m^2
  double inertia = 0.0;  // second moment about either bending axis, m^4
  double polar = 0.0;    // torsion constant, m^4
  double fiber = 0.0;    // extreme fibre distance, m

  static MemberSection circular(double radius);
};

struct NodeSupport {
  int node = 0;
  std::array<bool, 6> fixed = {true, true, true, false, false, false}; // ux uy uz rx ry rz
  Vec3 displacement = Vec3::Zero();
};

struct NodeLoad {
  int node = 0;
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
};

struct TrussModel {
  TrussGraph graph;
  std::vector<MemberSection> sections; // per element
  std::vector<bool> pinned;            // per element: axial bar without bending/torsion
  Material material;
  std::vector<NodeSupport> supports;
  std::vector<NodeLoad> loads;

  // Uniform circular sections from a radius policy, all elements rigid.
  static TrussModel from_graph(TrussGraph graph, const RadiusPolicy& radii, const Material& material);
  void validate() const;
};

// Maps volumetric boundary conditions onto truss nodes. Region selectors take
// the truss nodes inside the region; index selectors (and regions containing
// no node) take the node nearest to every selected mesh vertex. A Dirichlet
// condition that lands on a single node clamps its rotations as well. Loads
// are split evenly over the selected nodes; gravity acts on member weight.
TrussModel build_truss_model(const TrussGraph& graph, const TetMesh& mesh,
                             const Material& material, const BoundaryConditions& bcs,
                             const RadiusPolicy& radii);

struct FrameResult {
  std::vector<Vector6d> displacement; // ux uy uz rx ry rz
  std::vector<Vector6d> reaction;
  std::vector<double> axial_force;    // N, tension positive
  std::vector<double> axial_stress;   // Pa
  std::vector<double> bending_stress; // max over both ends, Pa
  double relative_residual = 0.0;
  double equilibrium_error = 0.0;     // |sum(reactions + loads)| / sum|loads|
  int auto_fixed_dofs = 0;            // rotations with no stiffness
  int floating_nodes = 0;             // nodes of components without support

  double combined_stress(std::size_t e) const {
    return std::abs(axial_stress[e]) + std::abs(bending_stress[e]);
  }
};

// Linear 3D frame analysis (axial, torsion, Euler-Bernoulli bending). Throws
// Error(Numerical) on a mechanism, naming nodes of the zero-energy mode.
FrameResult frame_fem(const TrussModel& model);

// 12x12 element stiffness in local axes (x along the member).
Eigen::Matrix<double, 12, 12> frame_local_stiffness(double length, const MemberSection& s,
                                                    const Material& m, bool pinned);

struct CapacityResult {
  double load_factor = 0.0;
  int critical_element = -1;
  double max_template_stress = 0.0; // Pa, at load factor 1
  FrameResult frame;                 // analysis at load factor 1
};

// Load factor at which the largest |axial| + |bending| stress reaches yield.
CapacityResult capacity(const TrussModel& model);
CapacityResult capacity(const TrussModel& model, std::span<const NodeLoad> load_template);

void write_verify_report(const std::filesystem::path& path, const TrussModel& model,
                         const CapacityResult& result);

} // namespace michell
