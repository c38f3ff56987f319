#include "core/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include <Eigen/Geometry>

#include "core/error.hpp"

namespace michell {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

namespace {

SurfaceMesh extract_boundary(const std::vector<Vec3>& vertices, const std::vector<Tet>& tets) {
  struct FaceRecord {
    int tet;
    int slot;
    int count;
  };
  std::map<std::array<int, 3>, FaceRecord> faces;
  for (int t = 0; t < static_cast<int>(tets.size()); ++t) {
    for (int s = 0; s < 4; ++s) {
      std::array<int, 3> key = {tets[t][kTetFaces[s][0]], tets[t][kTetFaces[s][1]],
                                tets[t][kTetFaces[s][2]]};
      std::sort(key.begin(), key.end());
      auto [it, inserted] = faces.try_emplace(key, FaceRecord{t, s, 0});
      it->second.count++;
      if (it->second.count > 2)
        fail(ErrorCode::Parse, "non-manifold face shared by more than two tets (tet " +
                                   std::to_string(t) + ")");
    }
  }

  SurfaceMesh surface;
  for (const auto& [key, rec] : faces) {
    if (rec.count != 1)
      continue;
    const Tet& tet = tets[rec.tet];
    Tri tri = {tet[kTetFaces[rec.slot][0]], tet[kTetFaces[rec.slot][1]],
               tet[kTetFaces[rec.slot][2]]};
    Vec3 n = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
    double len = n.norm();
    surface.triangles.push_back(tri);
    surface.face_tet.push_back(rec.tet);
    surface.face_slot.push_back(rec.slot);
    surface.areas.push_back(0.5 * len);
    surface.normals.push_back(len > 0 ? Vec3(n / len) : Vec3::Zero());
  }

  std::map<std::array<int, 2>, std::vector<int>> edge_faces;
  for (int f = 0; f < static_cast<int>(surface.triangles.size()); ++f) {
    const Tri& tri = surface.triangles[f];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      edge_faces[{std::min(a, b), std::max(a, b)}].push_back(f);
    }
  }
  for (const auto& [key, incident] : edge_faces) {
    if (incident.size() != 2)
      fail(ErrorCode::Parse, "boundary edge (" + std::to_string(key[0]) + ", " +
                                 std::to_string(key[1]) + ") has " +
                                 std::to_string(incident.size()) +
                                 " incident boundary triangles; expected 2");
    BoundaryEdge e;
    e.vertices = key;
    e.faces = {incident[0], incident[1]};
    double c = std::clamp(surface.normals[incident[0]].dot(surface.normals[incident[1]]), -1.0, 1.0);
    e.dihedral = std::acos(c);
    surface.edges.push_back(e);
  }

  for (const Tri& tri : surface.triangles)
    surface.vertices.insert(surface.vertices.end(), tri.begin(), tri.end());
  std::sort(surface.vertices.begin(), surface.vertices.end());
  surface.vertices.erase(std::unique(surface.vertices.begin(), surface.vertices.end()),
                         surface.vertices.end());
  return surface;
}

} // namespace

TetMesh::TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets)
    : vertices_(std::move(vertices)), tets_(std::move(tets)) {
  if (tets_.empty())
    fail(ErrorCode::Parse, "mesh has no tetrahedra");
  const int nv = static_cast<int>(vertices_.size());
  for (const Vec3& p : vertices_)
    if (!p.allFinite())
      fail(ErrorCode::Parse, "non-finite vertex coordinate");

  std::map<std::array<int, 4>, int> seen;
  volumes_.resize(tets_.size());
  for (std::size_t t = 0; t < tets_.size(); ++t) {
    Tet& tet = tets_[t];
    for (int v : tet)
      if (v < 0 || v >= nv)
        fail(ErrorCode::Parse, "tet " + std::to_string(t) + " references vertex " +
                                   std::to_string(v) + " out of range");
    std::array<int, 4> key = tet;
    std::sort(key.begin(), key.end());
    if (std::adjacent_find(key.begin(), key.end()) != key.end())
      fail(ErrorCode::Parse, "tet " + std::to_string(t) + " repeats a vertex");
    if (auto [it, inserted] = seen.emplace(key, static_cast<int>(t)); !inserted)
      fail(ErrorCode::Parse, "tet " + std::to_string(t) + " duplicates tet " +
                                 std::to_string(it->second));

    double vol = signed_volume(vertices_[tet[0]], vertices_[tet[1]], vertices_[tet[2]],
                               vertices_[tet[3]]);
    if (std::abs(vol) < kDegenerateVolume)
      fail(ErrorCode::Parse, "tet " + std::to_string(t) + " is degenerate (volume " +
                                 std::to_string(vol) + ")");
    if (vol < 0) {
      std::swap(tet[2], tet[3]);
      vol = -vol;
      ++reoriented_;
    }
    volumes_[t] = vol;
  }

  boundary_ = extract_boundary(vertices_, tets_);

  std::vector<std::array<int, 2>> all_edges;
  all_edges.reserve(tets_.size() * 6);
  for (const Tet& tet : tets_)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        all_edges.push_back({std::min(tet[a], tet[b]), std::max(tet[a], tet[b])});
  std::sort(all_edges.begin(), all_edges.end());
  all_edges.erase(std::unique(all_edges.begin(), all_edges.end()), all_edges.end());
  edges_ = std::move(all_edges);

  std::vector<int> degree(nv, 0);
  for (const auto& e : edges_) {
    degree[e[0]]++;
    degree[e[1]]++;
  }
  adjacency_offsets_.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v)
    adjacency_offsets_[v + 1] = adjacency_offsets_[v] + degree[v];
  adjacency_.resize(adjacency_offsets_[nv]);
  std::vector<int> fill(adjacency_offsets_.begin(), adjacency_offsets_.end() - 1);
  for (const auto& e : edges_) {
    adjacency_[fill[e[0]]++] = e[1];
    adjacency_[fill[e[1]]++] = e[0];
  }
  for (int v = 0; v < nv; ++v)
    std::sort(adjacency_.begin() + adjacency_offsets_[v],
              adjacency_.begin() + adjacency_offsets_[v + 1]);
}

double TetMesh::total_volume() const {
  return std::accumulate(volumes_.begin(), volumes_.end(), 0.0);
}

Vec3 TetMesh::centroid(int t) const {
  const Tet& tet = tets_[t];
  return 0.25 * (vertices_[tet[0]] + vertices_[tet[1]] + vertices_[tet[2]] + vertices_[tet[3]]);
}

int TetMesh::num_components() const {
  const int nv = static_cast<int>(vertices_.size());
  std::vector<int> label(nv, -1);
  std::vector<int> stack;
  int components = 0;
  for (int s = 0; s < nv; ++s) {
    if (label[s] >= 0)
      continue;
    label[s] = components;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : neighbors(v))
        if (label[w] < 0) {
          label[w] = components;
          stack.push_back(w);
        }
    }
    ++components;
  }
  return components;
}

std::vector<int> feature_edges(const SurfaceMesh& surface, double cos_threshold) {
  if (!(cos_threshold > -1.0 && cos_threshold <= 1.0))
    fail(ErrorCode::InvalidArgument, "feature cos threshold must lie in (-1, 1]");
  std::vector<int> out;
  // A threshold of exactly 1 marks every boundary edge, coplanar ones included.
  const bool select_all = cos_threshold >= 1.0;
  for (int e = 0; e < static_cast<int>(surface.edges.size()); ++e) {
    const auto& f = surface.edges[e].faces;
    if (select_all || surface.normals[f[0]].dot(surface.normals[f[1]]) < cos_threshold)
      out.push_back(e);
  }
  return out;
}

} // namespace michell
