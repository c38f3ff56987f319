#include "core/operators.hpp"

#include <cmath>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "core/error.hpp"

namespace michell {

std::array<Vec3, 4> hat_gradients(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  Mat3 edges;
  edges.col(0) = b - a;
  edges.col(1) = c - a;
  edges.col(2) = d - a;
  // Rows of the inverse edge matrix are the gradients of b_1..b_3.
  const Mat3 inv = edges.inverse();
  std::array<Vec3, 4> g;
  g[1] = inv.row(0).transpose();
  g[2] = inv.row(1).transpose();
  g[3] = inv.row(2).transpose();
  g[0] = -(g[1] + g[2] + g[3]);
  return g;
}

DiscreteOperators build_operators(const TetMesh& mesh) {
  const int nt = static_cast<int>(mesh.num_tets());
  const int nv = static_cast<int>(mesh.num_vertices());
  const auto& x = mesh.vertices();

  DiscreteOperators ops;
  ops.hat_gradients.resize(nt);
  std::vector<Eigen::Triplet<double>> tx, ty, tz;
  tx.reserve(4 * nt);
  ty.reserve(4 * nt);
  tz.reserve(4 * nt);
  std::map<std::pair<int, int>, double> offdiag;

  for (int t = 0; t < nt; ++t) {
    const Tet& tet = mesh.tets()[t];
    const double vol = mesh.volumes()[t];
    if (!(vol >= kDegenerateVolume))
      fail(ErrorCode::Numerical, "degenerate tet " + std::to_string(t));
    auto g = hat_gradients(x[tet[0]], x[tet[1]], x[tet[2]], x[tet[3]]);
    ops.hat_gradients[t] = g;
    for (int k = 0; k < 4; ++k) {
      tx.emplace_back(t, tet[k], g[k].x());
      ty.emplace_back(t, tet[k], g[k].y());
      tz.emplace_back(t, tet[k], g[k].z());
    }
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        int i = tet[a], j = tet[b];
        offdiag[{std::min(i, j), std::max(i, j)}] += vol * g[a].dot(g[b]);
      }
  }

  ops.gx.resize(nt, nv);
  ops.gy.resize(nt, nv);
  ops.gz.resize(nt, nv);
  ops.gx.setFromTriplets(tx.begin(), tx.end());
  ops.gy.setFromTriplets(ty.begin(), ty.end());
  ops.gz.setFromTriplets(tz.begin(), tz.end());

  // Diagonal is minus the off-diagonal row sum so constants are annihilated
  // exactly; each off-diagonal value is inserted once per side for exact symmetry.
  std::vector<double> diag(nv, 0.0);
  std::vector<Eigen::Triplet<double>> tl;
  tl.reserve(2 * offdiag.size() + nv);
  for (const auto& [key, w] : offdiag) {
    tl.emplace_back(key.first, key.second, w);
    tl.emplace_back(key.second, key.first, w);
    diag[key.first] -= w;
    diag[key.second] -= w;
  }
  for (int v = 0; v < nv; ++v)
    tl.emplace_back(v, v, diag[v]);
  ops.laplacian.resize(nv, nv);
  ops.laplacian.setFromTriplets(tl.begin(), tl.end());
  return ops;
}

std::vector<Vec3> tet_gradients(const DiscreteOperators& ops, const Eigen::VectorXd& f) {
  const Eigen::VectorXd dx = ops.gx * f, dy = ops.gy * f, dz = ops.gz * f;
  std::vector<Vec3> out(dx.size());
  for (Eigen::Index t = 0; t < dx.size(); ++t)
    out[t] = Vec3(dx[t], dy[t], dz[t]);
  return out;
}

} // namespace michell
