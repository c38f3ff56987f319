#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "core/mesh.hpp"

namespace michell {

struct Material {
  double young_modulus = 2.4e9; // Pa
  double poisson_ratio = 0.35;
  double density = 1040.0;       // kg/m^3
  double yield_strength = 48e6;  // Pa

  void validate() const;
  double lame_lambda() const;
  double shear_modulus() const;
};

// Region or explicit index set used to pick vertices or boundary faces.
struct Selector {
  enum class Kind { Box, Sphere, Vertices, Faces };

  Kind kind = Kind::Box;
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  std::vector<int> indices;

  static Selector box(const Vec3& lo, const Vec3& hi);
  static Selector sphere(const Vec3& c, double r);
  static Selector vertices(std::vector<int> ids);
  static Selector faces(std::vector<int> ids);

  bool is_region() const { return kind == Kind::Box || kind == Kind::Sphere; }
  bool contains(const Vec3& p) const; // region kinds only
  Vec3 region_center() const;
};

struct DirichletCondition {
  Selector selector;
  std::array<bool, 3> axes = {true, true, true};
  Vec3 displacement = Vec3::Zero(); // m
};

struct NeumannCondition {
  Selector selector; // boundary faces
  Vec3 force = Vec3::Zero(); // total force, N
};

struct BoundaryConditions {
  std::vector<DirichletCondition> dirichlet;
  std::vector<NeumannCondition> neumann;
  std::optional<Vec3> gravity; // m/s^2
};

// Vertices picked by a selector (region: inside; Vertices: the list; Faces:
// vertices of the listed boundary faces). Sorted, unique.
std::vector<int> select_vertices(const TetMesh& mesh, const Selector& sel);
// Boundary faces picked by a selector (region: centroid inside; Faces: the
// list; Vertices: faces whose three vertices are all listed).
std::vector<int> select_faces(const TetMesh& mesh, const Selector& sel);

struct StaticSolution {
  std::vector<Vec3> displacement; // m
  std::vector<Vec3> applied;      // consistent nodal loads, N
  std::vector<Vec3> reactions;    // support reactions, N (zero on free dofs)
  std::vector<std::array<bool, 3>> constrained;
  double relative_residual = 0.0;
  int constrained_dofs = 0;
};

// Linear elastic static solve with P1 tets. Throws Error(Config) for invalid
// or insufficient boundary conditions, Error(Numerical) for solver failure.
StaticSolution solve_static(const TetMesh& mesh, const Material& material,
                            const BoundaryConditions& bcs);

// 12x12 element stiffness for the dof order (v0x, v0y, v0z, v1x, ...).
Eigen::Matrix<double, 12, 12> element_stiffness(const std::array<Vec3, 4>& hat_grads,
                                                double volume, const Material& material);

struct StressField {
  std::vector<Mat3> sigma;        // Cauchy stress per tet, Pa
  std::vector<Vec3> eigenvalues;  // sorted decreasing
  std::vector<Mat3> eigenvectors; // column k pairs with eigenvalues[k]
  // Populated by stress_spd.
  std::vector<Mat3> sigma_plus;
  std::vector<Vec3> spd_eigenvalues; // column-aligned with eigenvectors
  double abs_min = 0.0;
  double abs_max = 0.0;

  bool has_spd() const { return !sigma_plus.empty(); }
  std::size_t size() const { return sigma.size(); }
};

// Constant strain per tet, sigma = C : eps(u). Fills the eigen-decomposition.
StressField cauchy_stress(const TetMesh& mesh, const Material& material,
                          const std::vector<Vec3>& displacement);

// Builds a StressField (with eigen-decomposition) from given tensors.
StressField stress_from_tensors(std::vector<Mat3> sigma);

inline constexpr double kSpdLow = 1.0;
inline constexpr double kSpdHigh = 30.0;

// Absolute-value eigenvalues, then one global affine map sending the field-wide
// [min |lambda|, max |lambda|] onto [low, high]. A degenerate range maps every
// eigenvalue to the midpoint. Throws Error(Numerical) on an all-zero field.
StressField stress_spd(StressField field, double low = kSpdLow, double high = kSpdHigh);

} // namespace michell
