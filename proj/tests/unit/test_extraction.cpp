#include <doctest.h>

#include <Eigen/Geometry>

#include "core/extraction.hpp"
#include "core/fixtures.hpp"
#include "grid_oracle.hpp"
#include "helpers.hpp"

using namespace michell;

namespace {

bool near_integer(double x) { return std::abs(x - std::round(x)) <= kIntegerGuard; }

// Unit square [lo, hi]^2 split into n x n cells, two triangles each.
TriangleComplex square(int n, double lo, double hi) {
  TriangleComplex c;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      c.positions.push_back(Vec3(lo + (hi - lo) * i / n, lo + (hi - lo) * j / n, 0));
  auto id = [n](int i, int j) { return i + (n + 1) * j; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      c.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      c.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return c;
}

std::vector<std::vector<int>> triangle_neighbors(const TriangleComplex& c) {
  std::vector<std::vector<int>> nb(c.positions.size());
  for (const Tri& t : c.triangles)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b)
          nb[t[a]].push_back(t[b]);
  for (auto& l : nb) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return nb;
}

void check_grid_oracle(const testing::AffineMap& f, const TetMesh& mesh) {
  const Parametrization p = perturb_parametrization(mesh, testing::affine_parametrization(mesh, f));
  ExtractionStats stats;
  const TrussGraph g = extract_3d(mesh, p, &stats);
  g.validate();
  const auto oracle = testing::grid_oracle(f);
  REQUIRE(!oracle.points.empty());

  int interior = 0;
  for (const TrussNode& n : g.nodes) {
    if (n.tag != NodeTag::InteriorGrid)
      continue;
    ++interior;
    auto it = oracle.points.find(testing::cell_of(n));
    REQUIRE(it != oracle.points.end());
    CHECK((n.position - it->second).norm() <= 1e-7);
  }
  CHECK(interior == static_cast<int>(oracle.points.size()));
  CHECK(testing::grid_adjacency(g) == oracle.edges);
  CHECK(stats.inconsistent_tets == 0);
}

} // namespace

TEST_CASE("perturbation moves near-integers only") {
  const TetMesh mesh = fixtures::box({4, 4, 4});
  const testing::AffineMap f{Vec3(4, 4, 4).asDiagonal(), Vec3::Zero()};
  const Parametrization raw = testing::affine_parametrization(mesh, f);
  const Parametrization p = perturb_parametrization(mesh, raw);
  int moved = 0;
  for (Eigen::Index i = 0; i < p.phi_tilde.size(); ++i) {
    const double before = raw.phi_tilde.data()[i], after = p.phi_tilde.data()[i];
    CHECK(!near_integer(after));
    if (near_integer(before)) {
      CHECK(std::abs(std::abs(after - before) - kPerturbEpsilon) < 1e-15 * (1 + std::abs(before)));
      ++moved;
    } else {
      CHECK(after == before);
    }
  }
  CHECK(moved == p.phi_tilde.size());
  CHECK_NOTHROW(check_perturbed(Eigen::MatrixXd(p.phi_tilde)));
  CHECK(testing::error_code_of([&] { check_perturbed(Eigen::MatrixXd(raw.phi_tilde)); }) ==
        ErrorCode::Internal);
}

TEST_CASE("1-ring minima move up, everything else moves down") {
  // Path graph 0 - 1 - 2 with values 1, 2, 3 (+ round-off on the middle one).
  Eigen::MatrixXd v(3, 1);
  v << 1.0, 2.0 + 1e-12, 3.0;
  const std::vector<std::vector<int>> nb = {{1}, {0, 2}, {1}};
  perturb_values(v, nb, 1e-7);
  CHECK(v(0, 0) == 1.0 + 1e-7);
  CHECK(v(1, 0) == (2.0 + 1e-12) - 1e-7);
  CHECK(v(2, 0) == 3.0 - 1e-7);
  // A neighbour a hair below still counts as a tie for the minimum.
  Eigen::MatrixXd w(2, 1);
  w << 0.0, -1e-12;
  perturb_values(w, {{1}, {0}}, 1e-7);
  CHECK(w(0, 0) == 1e-7);
  CHECK(w(1, 0) == -1e-12 + 1e-7);
  CHECK(testing::error_code_of([&] { perturb_values(w, {{1}, {0}}, 0.6); }) != ErrorCode::Internal);
}

TEST_CASE("axis-aligned affine map: 27 grid points and the grid graph") {
  const testing::AffineMap f{Vec3(4, 4, 4).asDiagonal(), Vec3::Zero()};
  const auto oracle = testing::grid_oracle(f);
  CHECK(oracle.points.size() == 27);
  CHECK(oracle.edges.size() == 54);
  check_grid_oracle(f, fixtures::box({6, 6, 6}));
  check_grid_oracle(f, fixtures::jittered_box({5, 5, 5}, Vec3::Ones(), 0.2));
}

TEST_CASE("general affine map: grid points are affine preimages") {
  const Mat3 Q = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  Mat3 A = Q * Vec3(4.5, 3.5, 4.0).asDiagonal();
  A(0, 1) += 0.6;
  const testing::AffineMap f{A, Vec3(0.13, 0.27, -0.41)};
  check_grid_oracle(f, fixtures::box({7, 7, 7}));
  check_grid_oracle(f, fixtures::jittered_box({6, 6, 6}, Vec3::Ones(), 0.25));
}

TEST_CASE("iso elements run along the varying parameter") {
  const TetMesh mesh = fixtures::box({4, 4, 4});
  const testing::AffineMap f{Vec3(2.5, 2.5, 2.5).asDiagonal(), Vec3::Constant(0.3)};
  const Parametrization p = perturb_parametrization(mesh, testing::affine_parametrization(mesh, f));
  const TrussGraph g = extract_3d(mesh, p);
  REQUIRE(!g.elements.empty());
  for (std::size_t e = 0; e < g.elements.size(); ++e) {
    const auto& el = g.elements[e];
    REQUIRE(is_iso(el.family));
    const int k = static_cast<int>(el.family);
    const Vec3 d = g.nodes[el.nodes[1]].position - g.nodes[el.nodes[0]].position;
    CHECK(std::abs(d.normalized()[k]) > 1 - 1e-9);
    CHECK(el.source >= 0);
  }
}

TEST_CASE("parallel parameter gradients are rejected") {
  const TetMesh mesh = fixtures::box({3, 3, 3});
  Parametrization p;
  p.phi_tilde.resize(static_cast<Eigen::Index>(mesh.num_vertices()), 3);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3& x = mesh.vertices()[v];
    p.phi_tilde.row(static_cast<Eigen::Index>(v)) << 3.3 * x.x() + 0.1, 3.3 * x.x() + 0.2,
        2.7 * x.z() + 0.15;
  }
  CHECK(testing::error_code_of([&] { extract_3d(mesh, p); }) == ErrorCode::Numerical);
}

TEST_CASE("2D extraction of a linear map on a square") {
  TriangleComplex c = square(5, 0.0, 1.0);
  c.params.resize(static_cast<Eigen::Index>(c.positions.size()), 2);
  for (std::size_t v = 0; v < c.positions.size(); ++v)
    c.params.row(static_cast<Eigen::Index>(v)) << 2.5 * c.positions[v].x() + 0.25,
        2.5 * c.positions[v].y() + 0.25;
  ExtractionStats stats;
  const TrussGraph g = extract_2d(c, &stats);
  g.validate();
  CHECK(stats.traced_curves == 4);
  CHECK(stats.closed_loops == 0);
  std::vector<Vec3> grid;
  for (const TrussNode& n : g.nodes)
    if (n.tag == NodeTag::InteriorGrid)
      grid.push_back(n.position);
  REQUIRE(grid.size() == 4);
  for (const Vec3& x : grid)
    for (int a = 0; a < 2; ++a)
      CHECK((std::abs(x[a] - 0.3) < 1e-12 || std::abs(x[a] - 0.7) < 1e-12));
  // Boundary chain length is the perimeter; iso curves add 4 unit lines.
  double boundary = 0.0, iso = 0.0;
  for (std::size_t e = 0; e < g.elements.size(); ++e)
    (g.elements[e].family == Family::Boundary ? boundary : iso) += g.element_length(e);
  CHECK(boundary == doctest::Approx(4.0));
  CHECK(iso == doctest::Approx(4.0));
  CHECK(g.num_components() == 1);
}

TEST_CASE("2D extraction counts closed loops and open arcs") {
  TriangleComplex c = square(24, -1.0, 1.0);
  c.params.resize(static_cast<Eigen::Index>(c.positions.size()), 2);
  for (std::size_t v = 0; v < c.positions.size(); ++v) {
    const Vec3& x = c.positions[v];
    c.params.row(static_cast<Eigen::Index>(v)) << 2.2 * x.squaredNorm() + 0.1, 0.3 + 0.01 * x.x();
  }
  Eigen::MatrixXd params = c.params;
  perturb_values(params, triangle_neighbors(c));
  c.params = params;
  ExtractionStats stats;
  extract_2d(c, &stats);
  CHECK(stats.closed_loops == 2);
  CHECK(stats.traced_curves == 8);
}

TEST_CASE("closed surfaces tag everything as boundary") {
  const TetMesh mesh = fixtures::box({3, 3, 3});
  const testing::AffineMap f{Vec3(2.2, 2.2, 2.2).asDiagonal(), Vec3::Constant(0.4)};
  const Parametrization p = perturb_parametrization(mesh, testing::affine_parametrization(mesh, f));
  const TrussGraph g = extract_2d(boundary_complex(mesh, p));
  REQUIRE(!g.nodes.empty());
  for (const TrussNode& n : g.nodes)
    CHECK(n.tag == NodeTag::Boundary);
  for (const TrussElement& e : g.elements)
    CHECK(e.family == Family::Boundary);

  const auto features = feature_edges(mesh.boundary(), 0.9);
  const TrussGraph b = extract_boundary(mesh, p, features);
  int feature_nodes = 0;
  for (const TrussNode& n : b.nodes)
    feature_nodes += n.tag == NodeTag::Feature;
  // Crease vertices (8 corners, 2 more per crease) and two integer crossings
  // per crease.
  CHECK(feature_nodes == 8 + 12 * 2 + 12 * 2);
}
