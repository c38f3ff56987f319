#include <doctest.h>

#include <Eigen/Geometry>

#include "core/simplify.hpp"
#include "grid_oracle.hpp"
#include "helpers.hpp"

using namespace michell;

namespace {

TrussGraph chain(const std::vector<Vec3>& pts, const std::vector<NodeTag>& tags) {
  TrussGraph g;
  for (std::size_t i = 0; i < pts.size(); ++i)
    g.nodes.push_back({pts[i], Vec3(0.5, 0.5, 0.5), tags[i]});
  for (std::size_t i = 1; i < pts.size(); ++i)
    g.elements.push_back({{int(i - 1), int(i)}, Family::Iso1});
  return g;
}

void check_affine_reduction(const testing::AffineMap& f, const TetMesh& mesh) {
  const Parametrization p = perturb_parametrization(mesh, testing::affine_parametrization(mesh, f));
  const TrussGraph raw = extract_3d(mesh, p);
  SimplifyOptions opt;
  opt.remove_interior_hits = true;
  SimplifyStats stats;
  const TrussGraph g = simplify(raw, opt, &stats);
  g.validate();
  CHECK(g.num_components() == raw.num_components());
  CHECK(stats.hit_contractions > 0);

  const auto oracle = testing::grid_oracle(f);
  std::set<testing::Cell> interior;
  for (const TrussNode& n : g.nodes) {
    if (n.tag == NodeTag::Boundary)
      continue;
    CHECK(n.tag == NodeTag::InteriorGrid);
    const auto c = testing::cell_of(n);
    REQUIRE(oracle.points.count(c));
    CHECK((n.position - oracle.points.at(c)).norm() <= 1e-7);
    interior.insert(c);
  }
  CHECK(interior.size() == oracle.points.size());
  // Grid nodes are now joined directly.
  std::set<std::pair<testing::Cell, testing::Cell>> direct;
  for (const TrussElement& e : g.elements) {
    const TrussNode &a = g.nodes[e.nodes[0]], &b = g.nodes[e.nodes[1]];
    if (a.tag == NodeTag::InteriorGrid && b.tag == NodeTag::InteriorGrid) {
      auto ca = testing::cell_of(a), cb = testing::cell_of(b);
      direct.insert({std::min(ca, cb), std::max(ca, cb)});
    }
  }
  CHECK(direct == oracle.edges);
}

} // namespace

TEST_CASE("affine cube reduces to exactly the grid points") {
  check_affine_reduction({Vec3(4, 4, 4).asDiagonal(), Vec3::Zero()}, fixtures::box({6, 6, 6}));
  const Mat3 Q = Eigen::AngleAxisd(0.5, Vec3(-1, 2, 1).normalized()).toRotationMatrix();
  check_affine_reduction({3.7 * Q, Vec3(0.21, -0.33, 0.47)},
                         fixtures::jittered_box({6, 6, 6}, Vec3::Ones(), 0.2));
}

TEST_CASE("short elements collapse onto the higher-ranked node") {
  TrussGraph g = chain({{0, 0, 0}, {1, 0, 0}, {1.001, 0, 0}, {2, 0, 0}},
                       {NodeTag::Boundary, NodeTag::FaceHit, NodeTag::InteriorGrid, NodeTag::Boundary});
  SimplifyOptions opt;
  opt.length_threshold = 0.01;
  SimplifyStats stats;
  const TrussGraph s = simplify(g, opt, &stats);
  CHECK(stats.short_contractions == 1);
  CHECK(stats.threshold == 0.01);
  REQUIRE(s.nodes.size() == 3);
  bool kept_grid = false;
  for (const TrussNode& n : s.nodes)
    kept_grid = kept_grid || (n.tag == NodeTag::InteriorGrid && n.position.x() == 1.001);
  CHECK(kept_grid);
  CHECK(s.elements.size() == 2);
}

TEST_CASE("feature nodes survive contraction") {
  TrussGraph g = chain({{0, 0, 0}, {1e-4, 0, 0}, {1, 0, 0}},
                       {NodeTag::InteriorGrid, NodeTag::Feature, NodeTag::Boundary});
  SimplifyOptions opt;
  opt.length_threshold = 0.01;
  const TrussGraph s = simplify(g, opt);
  REQUIRE(s.nodes.size() == 2);
  int features = 0;
  for (const TrussNode& n : s.nodes)
    features += n.tag == NodeTag::Feature && n.position.x() == 1e-4;
  CHECK(features == 1);
}

TEST_CASE("nothing changes below the threshold") {
  TrussGraph g = chain({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}},
                       {NodeTag::Boundary, NodeTag::InteriorGrid, NodeTag::Boundary});
  SimplifyOptions opt;
  opt.length_threshold = 0.5;
  const TrussGraph s = simplify(g, opt);
  CHECK(s.nodes.size() == 3);
  CHECK(s.total_length() == doctest::Approx(2.0));
}

TEST_CASE("automatic threshold ignores sliver elements") {
  std::vector<Vec3> pts;
  std::vector<NodeTag> tags;
  double x = 0.0;
  for (int i = 0; i < 9; ++i) {
    pts.push_back(Vec3(x, 0, 0));
    tags.push_back(NodeTag::InteriorGrid);
    x += (i % 3 == 2) ? 1.0 : 1e-12; // two slivers per unit element
  }
  const TrussGraph g = chain(pts, tags);
  CHECK(median_element_length(g) == doctest::Approx(1.0));
}

TEST_CASE("boundary nodes with one integer parameter merge into the boundary") {
  TrussGraph g;
  g.nodes = {{Vec3(0, 0, 0), Vec3(1, 2, 0.3), NodeTag::Boundary},
             {Vec3(0.5, 0, 0), Vec3(1, 2.5, 0.3), NodeTag::Boundary},
             {Vec3(1, 0, 0), Vec3(1, 3, 0.3), NodeTag::Boundary}};
  g.elements = {{{0, 1}, Family::Boundary}, {{1, 2}, Family::Boundary}};
  SimplifyOptions opt;
  opt.length_threshold = 1e-3;
  opt.simplify_boundary = true;
  SimplifyStats stats;
  const TrussGraph s = simplify(g, opt, &stats);
  CHECK(stats.boundary_contractions == 1);
  CHECK(s.nodes.size() == 2);
  CHECK(s.num_components() == 1);
}

TEST_CASE("component count is invariant on random graphs") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    TrussGraph g;
    const int n = 40;
    for (int i = 0; i < n; ++i)
      g.nodes.push_back({Vec3(u(rng), u(rng), u(rng)) + Vec3(5.0 * (i % 3), 0, 0),
                         Vec3(u(rng), u(rng), u(rng)), static_cast<NodeTag>(i % 5)});
    std::set<std::pair<int, int>> seen;
    for (int k = 0; k < 50; ++k) {
      int a = static_cast<int>(u(rng) * n), b = static_cast<int>(u(rng) * n);
      if (a % 3 != b % 3 || a == b || !seen.insert({std::min(a, b), std::max(a, b)}).second)
        continue;
      g.elements.push_back({{a, b}, static_cast<Family>(k % 5)});
    }
    SimplifyOptions opt;
    opt.length_threshold = 0.3;
    opt.remove_interior_hits = true;
    opt.simplify_boundary = true;
    const TrussGraph s = simplify(g, opt);
    s.validate();
    CHECK(s.num_components() == g.num_components());
  }
}
