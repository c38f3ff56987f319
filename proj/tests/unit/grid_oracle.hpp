#pragma once

// Oracle for extraction from an affine parametrization phi(x) = A x + b of
// the unit cube: the interior integer points and the grid graph joining them.

#include <algorithm>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "core/extraction.hpp"
#include "core/fixtures.hpp"
#include "core/parametrization.hpp"
#include "core/truss_graph.hpp"

namespace testing {

struct AffineMap {
  michell::Mat3 A;
  michell::Vec3 b;
  michell::Vec3 operator()(const michell::Vec3& x) const { return A * x + b; }
};

inline michell::Parametrization affine_parametrization(const michell::TetMesh& mesh,
                                                       const AffineMap& f) {
  michell::Parametrization p;
  p.phi_tilde.resize(static_cast<Eigen::Index>(mesh.num_vertices()), 3);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    p.phi_tilde.row(static_cast<Eigen::Index>(v)) = f(mesh.vertices()[v]).transpose();
  p.phi = p.phi_tilde;
  p.rho = 1.0;
  p.scale = 1.0;
  return p;
}

using Cell = std::array<int, 3>;

struct GridOracle {
  std::map<Cell, michell::Vec3> points; // integer cell -> preimage
  std::set<std::pair<Cell, Cell>> edges;
};

// Integer points whose preimage lies inside the unit cube by more than
// `margin`, and unit steps between two such points.
inline GridOracle grid_oracle(const AffineMap& f, double margin = 1e-6) {
  GridOracle o;
  const michell::Mat3 inv = f.A.inverse();
  michell::Vec3 lo = michell::Vec3::Constant(1e300), hi = -lo;
  for (int c = 0; c < 8; ++c) {
    const michell::Vec3 x(c & 1, (c >> 1) & 1, (c >> 2) & 1);
    lo = lo.cwiseMin(f(x));
    hi = hi.cwiseMax(f(x));
  }
  for (int i = int(std::floor(lo.x())); i <= int(std::ceil(hi.x())); ++i)
    for (int j = int(std::floor(lo.y())); j <= int(std::ceil(hi.y())); ++j)
      for (int k = int(std::floor(lo.z())); k <= int(std::ceil(hi.z())); ++k) {
        const michell::Vec3 x = inv * (michell::Vec3(i, j, k) - f.b);
        if ((x.array() > margin).all() && (x.array() < 1 - margin).all())
          o.points[{i, j, k}] = x;
      }
  for (const auto& [c, x] : o.points)
    for (int a = 0; a < 3; ++a) {
      Cell n = c;
      ++n[a];
      if (o.points.count(n))
        o.edges.insert({c, n});
    }
  return o;
}

inline Cell cell_of(const michell::TrussNode& n) {
  return {int(std::lround(n.param.x())), int(std::lround(n.param.y())),
          int(std::lround(n.param.z()))};
}

// Edges between grid nodes of g, following chains of degree-2 non-grid nodes.
inline std::set<std::pair<Cell, Cell>> grid_adjacency(const michell::TrussGraph& g) {
  using michell::NodeTag;
  std::vector<std::vector<int>> adj(g.nodes.size());
  for (const auto& e : g.elements) {
    adj[e.nodes[0]].push_back(e.nodes[1]);
    adj[e.nodes[1]].push_back(e.nodes[0]);
  }
  std::set<std::pair<Cell, Cell>> out;
  for (std::size_t s = 0; s < g.nodes.size(); ++s) {
    if (g.nodes[s].tag != NodeTag::InteriorGrid)
      continue;
    for (int next : adj[s]) {
      int prev = static_cast<int>(s), cur = next;
      while (g.nodes[cur].tag != NodeTag::InteriorGrid && adj[cur].size() == 2) {
        const int step = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
        prev = cur;
        cur = step;
      }
      if (g.nodes[cur].tag != NodeTag::InteriorGrid)
        continue;
      Cell a = cell_of(g.nodes[s]), b = cell_of(g.nodes[cur]);
      if (b < a)
        std::swap(a, b);
      out.insert({a, b});
    }
  }
  return out;
}

} // namespace testing
