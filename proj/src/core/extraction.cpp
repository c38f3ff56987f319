#include "core/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include <Eigen/LU>

#include "core/error.hpp"
#include "core/log.hpp"
#include "core/operators.hpp"

namespace michell {

void perturb_values(Eigen::MatrixXd& values, const std::vector<std::vector<int>>& neighbors,
                    double epsilon) {
  if (!(epsilon > 2 * kIntegerGuard && epsilon < 0.5))
    fail(ErrorCode::Config, "epsilon must lie in (2e-9, 0.5)");
  if (static_cast<Eigen::Index>(neighbors.size()) != values.rows())
    fail(ErrorCode::InvalidArgument, "one neighbour list per vertex is required");
  const Eigen::MatrixXd orig = values;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    for (Eigen::Index v = 0; v < values.rows(); ++v) {
      const double x = orig(v, c);
      if (std::abs(x - std::round(x)) > kIntegerGuard)
        continue;
      // Neighbours on the same integer (up to round-off) do not break a minimum.
      bool is_min = true;
      for (int u : neighbors[v])
        is_min = is_min && orig(u, c) >= x - kIntegerGuard;
      values(v, c) = is_min ? x + epsilon : x - epsilon;
    }
  }
}

Parametrization perturb_parametrization(const TetMesh& mesh, Parametrization p, double epsilon) {
  if (p.phi_tilde.rows() != static_cast<Eigen::Index>(mesh.num_vertices()))
    fail(ErrorCode::InvalidArgument, "phi_tilde is not populated for this mesh");
  std::vector<std::vector<int>> nbrs(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    auto n = mesh.neighbors(static_cast<int>(v));
    nbrs[v].assign(n.begin(), n.end());
  }
  Eigen::MatrixXd values = p.phi_tilde;
  perturb_values(values, nbrs, epsilon);
  p.phi_tilde = values;
  return p;
}

void check_perturbed(const Eigen::MatrixXd& values) {
  for (Eigen::Index v = 0; v < values.rows(); ++v)
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double x = values(v, c);
      if (!std::isfinite(x) || std::abs(x - std::round(x)) <= kIntegerGuard)
        fail(ErrorCode::Internal, "parameter " + std::to_string(c) + " of vertex " +
                                      std::to_string(v) +
                                      " lies on an integer; perturbation contract violated");
    }
}

namespace {

long long ceil_ll(double x) { return static_cast<long long>(std::ceil(x)); }
long long floor_ll(double x) { return static_cast<long long>(std::floor(x)); }

// Element awaiting tracing: pass is the component held constant, -1 for
// boundary chains.
struct PassElement {
  TrussElement element;
  int pass;
};

class Extractor2d {
public:
  explicit Extractor2d(const TriangleComplex& c) : c_(c), k_(static_cast<int>(c.params.cols())) {
    for (std::size_t f = 0; f < c.triangles.size(); ++f)
      for (int e = 0; e < 3; ++e) {
        int a = c.triangles[f][e], b = c.triangles[f][(e + 1) % 3];
        ++edge_faces_[{std::min(a, b), std::max(a, b)}];
      }
  }

  TrussGraph run(ExtractionStats* stats) {
    for (std::size_t f = 0; f < c_.triangles.size(); ++f)
      for (int i = 0; i < k_; ++i)
        face_isolines(static_cast<int>(f), i);
    bool open = false;
    for (const auto& [edge, count] : edge_faces_)
      if (count == 1) {
        open = true;
        boundary_chain(edge.first, edge.second);
      }
    trace(stats, open);

    TrussGraph g;
    g.nodes = std::move(nodes_);
    for (auto& pe : elements_)
      g.elements.push_back(pe.element);
    const TrussGraph parts[] = {std::move(g)};
    return merge_graphs(parts);
  }

private:
  bool on_boundary(int a, int b) const {
    auto it = edge_faces_.find({std::min(a, b), std::max(a, b)});
    return it != edge_faces_.end() && it->second == 1;
  }

  Vec3 param_row(int v) const {
    Vec3 p = Vec3::Zero();
    for (int i = 0; i < k_; ++i)
      p[i] = c_.params(v, i);
    return p;
  }

  int add_node(const Vec3& pos, const Vec3& param, NodeTag tag) {
    nodes_.push_back({pos, param, tag});
    return static_cast<int>(nodes_.size()) - 1;
  }

  int vertex_node(int v) {
    auto [it, inserted] = vertex_nodes_.emplace(v, -1);
    if (inserted)
      it->second = add_node(c_.positions[v], param_row(v), NodeTag::Boundary);
    return it->second;
  }

  // Crossing of parameter comp = n on edge (a, b), computed in ascending
  // vertex order so that both incident faces produce the same node.
  int edge_node(int a, int b, int comp, long long n) {
    if (a > b)
      std::swap(a, b);
    auto [it, inserted] = edge_nodes_.emplace(std::make_tuple(a, b, comp, n), -1);
    if (!inserted)
      return it->second;
    const double pa = c_.params(a, comp), pb = c_.params(b, comp);
    const double t = (static_cast<double>(n) - pa) / (pb - pa);
    const Vec3 pos = c_.positions[a] + t * (c_.positions[b] - c_.positions[a]);
    Vec3 param = param_row(a) + t * (param_row(b) - param_row(a));
    param[comp] = static_cast<double>(n);
    const bool boundary = k_ == 3 || on_boundary(a, b);
    it->second = add_node(pos, param, boundary ? NodeTag::Boundary : NodeTag::EdgeHit);
    if (on_boundary(a, b))
      boundary_seeds_.push_back({comp, it->second});
    return it->second;
  }

  void connect(std::vector<std::pair<double, int>>& pts, Family family, int source, int pass) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t q = 1; q < pts.size(); ++q) {
      int a = pts[q - 1].second, b = pts[q].second;
      if (a != b)
        elements_.push_back({{{a, b}, family, source}, pass});
    }
  }

  void face_isolines(int f, int i) {
    const Tri& tri = c_.triangles[f];
    double p[3];
    for (int q = 0; q < 3; ++q)
      p[q] = c_.params(tri[q], i);
    const double lo = std::min({p[0], p[1], p[2]}), hi = std::max({p[0], p[1], p[2]});
    for (long long n = ceil_ll(lo); n <= floor_ll(hi); ++n) {
      const double level = static_cast<double>(n);
      int ends[2], found = 0;
      for (int e = 0; e < 3; ++e) {
        const int qa = e, qb = (e + 1) % 3;
        if ((p[qa] - level) * (p[qb] - level) < 0) {
          if (found == 2)
            fail(ErrorCode::Internal, "isocurve crosses three edges of a face");
          ends[found++] = edge_node(tri[qa], tri[qb], i, n);
        }
      }
      if (found != 2)
        fail(ErrorCode::Internal, "isocurve does not cross exactly two edges of face " +
                                      std::to_string(f));
      std::vector<std::pair<double, int>> pts = {{0.0, ends[0]}, {1.0, ends[1]}};
      const TrussNode a = nodes_[ends[0]], b = nodes_[ends[1]];
      for (int j = 0; j < k_; ++j) {
        if (j == i)
          continue;
        const double q0 = a.param[j], q1 = b.param[j];
        if (std::abs(q1 - q0) < 1e-15)
          continue;
        const double qlo = std::min(q0, q1) - kIntegerGuard, qhi = std::max(q0, q1) + kIntegerGuard;
        for (long long m = ceil_ll(qlo); m <= floor_ll(qhi); ++m) {
          const double t = std::clamp((static_cast<double>(m) - q0) / (q1 - q0), 0.0, 1.0);
          auto key = std::make_tuple(f, std::min(std::make_pair(i, n), std::make_pair(j, m)),
                                     std::max(std::make_pair(i, n), std::make_pair(j, m)));
          auto [it, inserted] = grid_nodes_.emplace(key, -1);
          if (inserted) {
            Vec3 param = a.param + t * (b.param - a.param);
            param[i] = static_cast<double>(n);
            param[j] = static_cast<double>(m);
            it->second = add_node(a.position + t * (b.position - a.position), param,
                                  k_ == 3 ? NodeTag::Boundary : NodeTag::InteriorGrid);
          }
          pts.emplace_back(t, it->second);
        }
      }
      const Family family = k_ == 2 ? iso_family(1 - i) : Family::Boundary;
      connect(pts, family, f, i);
    }
  }

  void boundary_chain(int a, int b) {
    std::vector<std::pair<double, int>> pts = {{0.0, vertex_node(a)}, {1.0, vertex_node(b)}};
    for (int comp = 0; comp < k_; ++comp) {
      const double pa = c_.params(a, comp), pb = c_.params(b, comp);
      for (long long n = ceil_ll(std::min(pa, pb)); n <= floor_ll(std::max(pa, pb)); ++n)
        pts.emplace_back((static_cast<double>(n) - pa) / (pb - pa), edge_node(a, b, comp, n));
    }
    connect(pts, Family::Boundary, -1, -1);
  }

  // Queue-based tracing of each family of isocurves: walk from every unused
  // boundary crossing to the opposite end; whatever is left forms loops.
  void trace(ExtractionStats* stats, bool open) {
    std::vector<Vec3> pos(nodes_.size());
    for (std::size_t q = 0; q < nodes_.size(); ++q)
      pos[q] = nodes_[q].position;
    const auto rep = cluster_points(pos, 1e-9);
    int curves = 0, loops = 0;
    for (int pass = 0; pass < k_; ++pass) {
      std::map<int, std::vector<std::pair<int, int>>> adj; // node -> (element, other)
      std::map<std::pair<int, int>, int> seen;
      int count = 0;
      for (const auto& pe : elements_) {
        if (pe.pass != pass)
          continue;
        int a = rep[pe.element.nodes[0]], b = rep[pe.element.nodes[1]];
        if (a == b || !seen.emplace(std::make_pair(std::min(a, b), std::max(a, b)), count).second)
          continue;
        adj[a].push_back({count, b});
        adj[b].push_back({count, a});
        ++count;
      }
      std::vector<bool> used(count, false);
      std::vector<bool> consumed(nodes_.size(), false);
      auto walk = [&](int start) {
        int cur = start;
        for (;;) {
          int next = -1;
          for (auto [e, other] : adj[cur])
            if (!used[e]) {
              used[e] = true;
              next = other;
              break;
            }
          if (next < 0)
            return cur;
          cur = next;
          if (cur == start)
            return cur;
        }
      };
      for (auto [comp, node] : boundary_seeds_) {
        const int s = rep[node];
        if (comp != pass || consumed[s])
          continue;
        const int end = walk(s);
        consumed[s] = consumed[end] = true;
        if (end != s)
          ++curves;
      }
      for (const auto& [node, list] : adj)
        for (auto [e, other] : list)
          if (!used[e]) {
            const int end = walk(node);
            if (end == node)
              ++loops;
            else
              ++curves;
          }
    }
    if (stats) {
      stats->traced_curves += curves;
      stats->closed_loops += loops;
    }
    if (open && loops > 0)
      logger()->warn("extract: {} closed isocurve loop(s) inside an open surface", loops);
  }

  const TriangleComplex& c_;
  int k_;
  std::map<std::pair<int, int>, int> edge_faces_;
  std::vector<TrussNode> nodes_;
  std::vector<PassElement> elements_;
  std::map<int, int> vertex_nodes_;
  std::map<std::tuple<int, int, int, long long>, int> edge_nodes_;
  std::map<std::tuple<int, std::pair<int, long long>, std::pair<int, long long>>, int> grid_nodes_;
  std::vector<std::pair<int, int>> boundary_seeds_; // (component, node)
};

} // namespace

TrussGraph extract_2d(const TriangleComplex& complex, ExtractionStats* stats) {
  const Eigen::Index k = complex.params.cols();
  if (k != 2 && k != 3)
    fail(ErrorCode::InvalidArgument, "triangle complex needs 2 or 3 parameters per vertex");
  if (complex.params.rows() != static_cast<Eigen::Index>(complex.positions.size()))
    fail(ErrorCode::InvalidArgument, "one parameter row per vertex is required");
  const int nv = static_cast<int>(complex.positions.size());
  for (const Tri& t : complex.triangles)
    for (int v : t)
      if (v < 0 || v >= nv)
        fail(ErrorCode::InvalidArgument, "triangle references a missing vertex");
  check_perturbed(complex.params);
  return Extractor2d(complex).run(stats);
}

TriangleComplex boundary_complex(const TetMesh& mesh, const Parametrization& p) {
  const auto& surf = mesh.boundary();
  TriangleComplex c;
  c.params.resize(static_cast<Eigen::Index>(surf.vertices.size()), 3);
  for (std::size_t q = 0; q < surf.vertices.size(); ++q) {
    c.positions.push_back(mesh.vertices()[surf.vertices[q]]);
    c.params.row(static_cast<Eigen::Index>(q)) = p.phi_tilde.row(surf.vertices[q]);
  }
  auto local = [&](int v) {
    return static_cast<int>(std::lower_bound(surf.vertices.begin(), surf.vertices.end(), v) -
                            surf.vertices.begin());
  };
  for (const Tri& t : surf.triangles)
    c.triangles.push_back({local(t[0]), local(t[1]), local(t[2])});
  return c;
}

TrussGraph extract_3d(const TetMesh& mesh, const Parametrization& p, ExtractionStats* stats) {
  const auto& phi = p.phi_tilde;
  if (phi.rows() != static_cast<Eigen::Index>(mesh.num_vertices()))
    fail(ErrorCode::InvalidArgument, "phi_tilde is not populated for this mesh");
  check_perturbed(Eigen::MatrixXd(phi));

  const auto& surf = mesh.boundary();
  std::vector<std::array<bool, 4>> boundary_face(mesh.num_tets(), {false, false, false, false});
  for (std::size_t f = 0; f < surf.triangles.size(); ++f)
    boundary_face[surf.face_tet[f]][surf.face_slot[f]] = true;

  constexpr double kBaryTol = 1e-12;
  TrussGraph g;
  int touches = 0, inconsistent = 0;
  std::map<std::array<long long, 3>, int> grid;
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const Tet& tet = mesh.tets()[t];
    std::array<Vec3, 4> X;
    Eigen::Matrix<double, 4, 3> P;
    for (int a = 0; a < 4; ++a) {
      X[a] = mesh.vertices()[tet[a]];
      P.row(a) = phi.row(tet[a]);
    }
    const auto grads = hat_gradients(X[0], X[1], X[2], X[3]);
    std::array<Vec3, 3> gphi;
    for (int c = 0; c < 3; ++c) {
      gphi[c].setZero();
      for (int a = 0; a < 4; ++a)
        gphi[c] += P(a, c) * grads[a];
    }
    double h = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        h = std::max(h, (X[a] - X[b]).norm());

    grid.clear();
    bool bad = false;
    constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pair : kPairs) {
      const int i = pair[0], j = pair[1], k = 3 - i - j;
      const long long n0 = ceil_ll(P.col(i).minCoeff()), n1 = floor_ll(P.col(i).maxCoeff());
      const long long m0 = ceil_ll(P.col(j).minCoeff()), m1 = floor_ll(P.col(j).maxCoeff());
      if (n0 > n1 || m0 > m1)
        continue;
      const Vec3 d = gphi[i].cross(gphi[j]);
      if (!(d.norm() > 1e-12 * gphi[i].norm() * gphi[j].norm())) {
        bad = true;
        continue;
      }
      Mat3 M;
      M.row(0) = gphi[i].transpose();
      M.row(1) = gphi[j].transpose();
      M.row(2) = d.transpose();
      const Eigen::PartialPivLU<Mat3> lu(M);
      double slope[4];
      for (int a = 0; a < 4; ++a)
        slope[a] = grads[a].dot(d);

      for (long long n = n0; n <= n1; ++n)
        for (long long m = m0; m <= m1; ++m) {
          const Vec3 rhs(static_cast<double>(n) - P(0, i), static_cast<double>(m) - P(0, j), 0.0);
          const Vec3 xr = lu.solve(rhs);
          double lam0[4];
          double tlo = -std::numeric_limits<double>::infinity();
          double thi = std::numeric_limits<double>::infinity();
          bool empty = false;
          for (int a = 0; a < 4; ++a) {
            lam0[a] = (a == 0 ? 1.0 : 0.0) + grads[a].dot(xr);
            if (slope[a] == 0.0) {
              empty = empty || lam0[a] < -kBaryTol;
            } else {
              const double bound = (-kBaryTol - lam0[a]) / slope[a];
              if (slope[a] > 0)
                tlo = std::max(tlo, bound);
              else
                thi = std::min(thi, bound);
            }
          }
          if (empty || !(tlo <= thi))
            continue;
          if ((thi - tlo) * d.norm() <= 1e-12 * h) {
            ++touches;
            continue;
          }
          const Vec3 xs = X[0] + xr;
          int ends[2];
          double qk[2];
          Vec3 epos[2];
          for (int e = 0; e < 2; ++e) {
            const double s = e == 0 ? tlo : thi;
            Vec3 param;
            param[i] = static_cast<double>(n);
            param[j] = static_cast<double>(m);
            param[k] = 0.0;
            bool on_boundary = false;
            for (int a = 0; a < 4; ++a) {
              const double lam = lam0[a] + s * slope[a];
              param[k] += lam * P(a, k);
              on_boundary = on_boundary || (lam <= 1e-9 && boundary_face[t][a]);
            }
            epos[e] = xs + s * d;
            qk[e] = param[k];
            g.nodes.push_back({epos[e], param, on_boundary ? NodeTag::Boundary : NodeTag::FaceHit});
            ends[e] = static_cast<int>(g.nodes.size()) - 1;
          }
          std::vector<std::pair<double, int>> pts = {{0.0, ends[0]}, {1.0, ends[1]}};
          if (std::abs(qk[1] - qk[0]) >= 1e-15) {
            const double lo = std::min(qk[0], qk[1]) - kIntegerGuard;
            const double hi = std::max(qk[0], qk[1]) + kIntegerGuard;
            for (long long l = ceil_ll(lo); l <= floor_ll(hi); ++l) {
              std::array<long long, 3> key;
              key[i] = n;
              key[j] = m;
              key[k] = l;
              const double s =
                  std::clamp((static_cast<double>(l) - qk[0]) / (qk[1] - qk[0]), 0.0, 1.0);
              auto [it, inserted] = grid.emplace(key, -1);
              if (inserted) {
                const Vec3 param(static_cast<double>(key[0]), static_cast<double>(key[1]),
                                 static_cast<double>(key[2]));
                g.nodes.push_back(
                    {epos[0] + s * (epos[1] - epos[0]), param, NodeTag::InteriorGrid});
                it->second = static_cast<int>(g.nodes.size()) - 1;
              }
              pts.emplace_back(s, it->second);
            }
          }
          std::sort(pts.begin(), pts.end());
          for (std::size_t q = 1; q < pts.size(); ++q)
            if (pts[q - 1].second != pts[q].second)
              g.elements.push_back({{pts[q - 1].second, pts[q].second},
                                    iso_family(k),
                                    static_cast<int>(t)});
        }
    }
    inconsistent += bad;
  }
  if (stats) {
    stats->face_touches += touches;
    stats->inconsistent_tets += inconsistent;
  }
  if (touches > 0)
    logger()->warn("extract: skipped {} tangential line/tet contact(s)", touches);
  if (inconsistent > 0) {
    if (inconsistent > 0.01 * static_cast<double>(mesh.num_tets()))
      fail(ErrorCode::Numerical, "extraction: " + std::to_string(inconsistent) + " of " +
                                     std::to_string(mesh.num_tets()) +
                                     " tets have degenerate parameter gradients");
    logger()->warn("extract: {} tet(s) with degenerate parameter gradients", inconsistent);
  }
  const TrussGraph parts[] = {std::move(g)};
  return merge_graphs(parts);
}

TrussGraph extract_boundary(const TetMesh& mesh, const Parametrization& p,
                            std::span<const int> features, ExtractionStats* stats) {
  TrussGraph surface = extract_2d(boundary_complex(mesh, p), stats);

  const auto& surf = mesh.boundary();
  const auto& phi = p.phi_tilde;
  TrussGraph chains;
  std::map<int, int> vertex_node;
  auto vnode = [&](int v) {
    auto [it, inserted] = vertex_node.emplace(v, -1);
    if (inserted) {
      chains.nodes.push_back({mesh.vertices()[v], phi.row(v).transpose(), NodeTag::Feature});
      it->second = static_cast<int>(chains.nodes.size()) - 1;
    }
    return it->second;
  };
  for (int fid : features) {
    if (fid < 0 || fid >= static_cast<int>(surf.edges.size()))
      fail(ErrorCode::InvalidArgument, "feature edge index out of range");
    const auto [a, b] = surf.edges[fid].vertices;
    std::vector<std::pair<double, int>> pts = {{0.0, vnode(a)}, {1.0, vnode(b)}};
    const Vec3 xa = mesh.vertices()[a], xb = mesh.vertices()[b];
    const Vec3 pa = phi.row(a).transpose(), pb = phi.row(b).transpose();
    for (int c = 0; c < 3; ++c)
      for (long long n = ceil_ll(std::min(pa[c], pb[c])); n <= floor_ll(std::max(pa[c], pb[c]));
           ++n) {
        const double t = (static_cast<double>(n) - pa[c]) / (pb[c] - pa[c]);
        Vec3 param = pa + t * (pb - pa);
        param[c] = static_cast<double>(n);
        chains.nodes.push_back({xa + t * (xb - xa), param, NodeTag::Feature});
        pts.emplace_back(t, static_cast<int>(chains.nodes.size()) - 1);
      }
    std::sort(pts.begin(), pts.end());
    for (std::size_t q = 1; q < pts.size(); ++q)
      chains.elements.push_back({{pts[q - 1].second, pts[q].second}, Family::Feature, -1});
  }
  const TrussGraph parts[] = {std::move(surface), std::move(chains)};
  return merge_graphs(parts);
}

} // namespace michell
