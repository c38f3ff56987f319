#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace michell {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Tet = std::array<int, 4>;
using Tri = std::array<int, 3>;

// Tets with |signed volume| below this are degenerate (m^3).
inline constexpr double kDegenerateVolume = 1e-14;

// Outward-oriented faces of a positively oriented tet, listed by the local
// vertex they are opposite to.
inline constexpr std::array<std::array<int, 3>, 4> kTetFaces = {{
    {1, 2, 3},
    {0, 3, 2},
    {0, 1, 3},
    {0, 2, 1},
}};

struct BoundaryEdge {
  std::array<int, 2> vertices; // parent vertex ids, ascending
  std::array<int, 2> faces;    // incident boundary triangles
  // Angle between the outward normals of the two faces, in [0, pi].
  // Zero for coplanar faces.
  double dihedral = 0.0;
};

// Triangle 2-complex formed by the unpaired faces of a tet mesh. Vertex ids
// refer to the parent TetMesh.
struct SurfaceMesh {
  std::vector<Tri> triangles;
  std::vector<int> face_tet;  // tet owning each boundary triangle
  std::vector<int> face_slot; // local vertex of face_tet opposite the triangle
  std::vector<Vec3> normals;  // unit outward normals
  std::vector<double> areas;
  std::vector<BoundaryEdge> edges;
  std::vector<int> vertices; // sorted unique parent ids

  int euler_characteristic() const {
    return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(triangles.size());
  }
};

// Immutable tetrahedral mesh. Construction validates indices, rejects
// degenerate or duplicate tets, flips negatively oriented tets and extracts
// the boundary complex.
class TetMesh {
public:
  TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Tet>& tets() const { return tets_; }
  const std::vector<double>& volumes() const { return volumes_; }
  const SurfaceMesh& boundary() const { return boundary_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_tets() const { return tets_.size(); }
  std::size_t num_reoriented() const { return reoriented_; }
  double total_volume() const;

  // Unique undirected edges (ascending vertex pairs, lexicographically sorted).
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }

  // Sorted 1-ring neighbours of a vertex.
  std::span<const int> neighbors(int v) const {
    return {adjacency_.data() + adjacency_offsets_[v],
            adjacency_.data() + adjacency_offsets_[v + 1]};
  }

  Vec3 centroid(int t) const;
  // Number of connected components of the vertex graph.
  int num_components() const;

private:
  std::vector<Vec3> vertices_;
  std::vector<Tet> tets_;
  std::vector<double> volumes_;
  SurfaceMesh boundary_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<int> adjacency_offsets_;
  std::vector<int> adjacency_;
  std::size_t reoriented_ = 0;
};

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

// Boundary edges (indices into surface.edges) whose adjacent face normals have
// dot product below cos_threshold. cos_threshold must lie in (-1, 1]; a
// threshold of 1 selects every boundary edge.
std::vector<int> feature_edges(const SurfaceMesh& surface, double cos_threshold = 0.9);

} // namespace michell
