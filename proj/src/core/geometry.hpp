#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <vector>

#include "core/truss_graph.hpp"

namespace michell {

struct RadiusPolicy {
  double default_radius = 1e-3; // m
  std::map<Family, double> family_radius;

  double radius(Family f) const;
  double max_radius() const;
  void validate() const;
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
};

struct GeometryOptions {
  int sides = 8;
  bool node_spheres = true;
};

// One capped prism per element (4*sides - 4 triangles) and one sphere
// (octahedron subdivided once, 32 triangles) per node that has elements.
// Primitives overlap; no boolean union is performed.
TriangleMesh emit_geometry(const TrussGraph& g, const RadiusPolicy& radii,
                           const GeometryOptions& options = {}, int* skipped = nullptr);

inline constexpr int kSphereTriangles = 32;
inline constexpr int prism_triangles(int sides) { return 4 * sides - 4; }

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);
void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh); // binary LE
void write_graph_lines(const std::filesystem::path& path, const TrussGraph& g);

} // namespace michell
