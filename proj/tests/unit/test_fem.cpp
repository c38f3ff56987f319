#include <doctest.h>

#include <chrono>

#include <Eigen/Eigenvalues>

#include "core/fem.hpp"
#include "core/fixtures.hpp"
#include "core/operators.hpp"
#include "helpers.hpp"

using namespace michell;

namespace {

constexpr double kSlab = 1e-9;

Selector x_face(double x, const Vec3& ext) {
  return Selector::box(Vec3(x - kSlab, -kSlab, -kSlab), Vec3(x + kSlab, ext.y() + kSlab, ext.z() + kSlab));
}

// Bar on symmetry rollers at x=0, y=0, z=0 with a traction on x = L.
BoundaryConditions roller_bar(const Vec3& ext, double force) {
  BoundaryConditions bcs;
  for (int a = 0; a < 3; ++a) {
    Vec3 lo = -Vec3::Constant(kSlab), hi = ext + Vec3::Constant(kSlab);
    hi[a] = kSlab;
    DirichletCondition d;
    d.selector = Selector::box(lo, hi);
    d.axes = {a == 0, a == 1, a == 2};
    bcs.dirichlet.push_back(d);
  }
  bcs.neumann.push_back({x_face(ext.x(), ext), Vec3(force, 0, 0)});
  return bcs;
}

} // namespace

TEST_CASE("patch test: uniaxial traction gives uniform stress") {
  const Vec3 ext(1.0, 0.2, 0.2);
  const TetMesh mesh = fixtures::jittered_box({16, 4, 5}, ext, 0.25);
  REQUIRE(mesh.num_tets() == 1920);
  Material mat;
  const double F = 1000.0, area = ext.y() * ext.z();

  const auto t0 = std::chrono::steady_clock::now();
  const StaticSolution sol = solve_static(mesh, mat, roller_bar(ext, F));
  const StressField s = cauchy_stress(mesh, mat, sol.displacement);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(seconds < 5.0);

  const double sxx = F / area;
  double worst = 0.0;
  for (const Mat3& sig : s.sigma) {
    Mat3 want = Mat3::Zero();
    want(0, 0) = sxx;
    worst = std::max(worst, (sig - want).norm() / sxx);
  }
  CHECK(worst <= 1e-6);
  CHECK(sol.relative_residual <= 1e-8);
  // Lateral contraction and elongation follow Hooke's law.
  const double eps = sxx / mat.young_modulus;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3& p = mesh.vertices()[v];
    CHECK(sol.displacement[v].x() == doctest::Approx(eps * p.x()).epsilon(1e-6).scale(eps));
    CHECK(sol.displacement[v].y() ==
          doctest::Approx(-mat.poisson_ratio * eps * p.y()).epsilon(1e-6).scale(eps));
  }
}

TEST_CASE("consistent loads and reactions balance") {
  const Vec3 ext(1.0, 0.2, 0.2);
  const TetMesh mesh = fixtures::box({10, 2, 2}, ext);
  const StaticSolution sol = solve_static(mesh, Material{}, roller_bar(ext, 250.0));
  Vec3 applied = Vec3::Zero(), reaction = Vec3::Zero();
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    applied += sol.applied[v];
    reaction += sol.reactions[v];
  }
  CHECK((applied - Vec3(250, 0, 0)).norm() < 1e-9);
  CHECK((applied + reaction).norm() < 1e-6);
  CHECK(sol.constrained_dofs > 6);
}

TEST_CASE("gravity load equals the weight of the body") {
  const Vec3 ext(1.0, 0.5, 0.5);
  const TetMesh mesh = fixtures::box({4, 2, 2}, ext);
  BoundaryConditions bcs;
  DirichletCondition clamp;
  clamp.selector = x_face(0.0, ext);
  bcs.dirichlet.push_back(clamp);
  bcs.gravity = Vec3(0, 0, -9.81);
  Material mat;
  const StaticSolution sol = solve_static(mesh, mat, bcs);
  Vec3 total = Vec3::Zero();
  for (const Vec3& f : sol.applied)
    total += f;
  CHECK(total.z() == doctest::Approx(-9.81 * mat.density * 0.25).epsilon(1e-12));
}

TEST_CASE("element stiffness is symmetric with a rigid-body null space") {
  const std::array<Vec3, 4> x{Vec3(0, 0, 0), Vec3(1, 0.1, 0), Vec3(0.2, 1, 0.1), Vec3(0.1, 0.2, 0.9)};
  const auto g = hat_gradients(x[0], x[1], x[2], x[3]);
  const double vol = signed_volume(x[0], x[1], x[2], x[3]);
  const auto K = element_stiffness(g, vol, Material{});
  CHECK((K - K.transpose()).norm() < 1e-9 * K.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> es(K);
  int zero = 0;
  for (int i = 0; i < 12; ++i) {
    CHECK(es.eigenvalues()[i] > -1e-9 * K.norm());
    zero += es.eigenvalues()[i] < 1e-9 * K.norm();
  }
  CHECK(zero == 6);
}

TEST_CASE("invalid boundary conditions are configuration errors") {
  const Vec3 ext(1, 1, 1);
  const TetMesh mesh = fixtures::box({2, 2, 2}, ext);
  BoundaryConditions none;
  none.neumann.push_back({x_face(1.0, ext), Vec3(1, 0, 0)});
  CHECK(testing::error_code_of([&] { solve_static(mesh, Material{}, none); }) == ErrorCode::Config);

  BoundaryConditions empty = roller_bar(ext, 1.0);
  empty.dirichlet[0].selector = Selector::box(Vec3::Constant(5), Vec3::Constant(6));
  CHECK(testing::error_code_of([&] { solve_static(mesh, Material{}, empty); }) == ErrorCode::Config);

  Material bad;
  bad.poisson_ratio = 0.5;
  CHECK(testing::error_code_of([&] { bad.validate(); }) == ErrorCode::Config);
}

TEST_CASE("selectors pick vertices and boundary faces") {
  const Vec3 ext(1, 1, 1);
  const TetMesh mesh = fixtures::box({2, 2, 2}, ext);
  CHECK(select_vertices(mesh, x_face(0.0, ext)).size() == 9);
  CHECK(select_faces(mesh, x_face(0.0, ext)).size() == 8);
  CHECK(select_vertices(mesh, Selector::sphere(Vec3(0.5, 0.5, 0.5), 0.1)).size() == 1);
  const auto ids = select_vertices(mesh, x_face(1.0, ext));
  CHECK(select_faces(mesh, Selector::vertices(ids)).size() == 8);
}

TEST_CASE("absolute stress is mapped onto [1, 30] with eigenvectors kept") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5e6, 5e6);
  std::vector<Mat3> sig;
  for (int i = 0; i < 200; ++i) {
    Mat3 a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        a(r, c) = u(rng);
    sig.push_back(0.5 * (a + a.transpose()));
  }
  const StressField raw = stress_from_tensors(sig);
  const StressField s = stress_spd(raw);
  double lo = 1e300, hi = 0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(s.sigma_plus[t]);
    for (int k = 0; k < 3; ++k) {
      CHECK(es.eigenvalues()[k] >= 1.0 - 1e-9);
      CHECK(es.eigenvalues()[k] <= 30.0 + 1e-9);
      lo = std::min(lo, es.eigenvalues()[k]);
      hi = std::max(hi, es.eigenvalues()[k]);
      // Each original eigenvector is an eigenvector of sigma_plus.
      const Vec3 q = raw.eigenvectors[t].col(k);
      const Vec3 mq = s.sigma_plus[t] * q;
      CHECK((mq - q.dot(mq) * q).norm() <= 1e-8 * mq.norm());
      CHECK(q.dot(mq) == doctest::Approx(s.spd_eigenvalues[t][k]).epsilon(1e-10));
    }
  }
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(30.0));
  // Eigenvalues come sorted in decreasing order.
  for (const Vec3& l : raw.eigenvalues)
    CHECK((l[0] >= l[1] && l[1] >= l[2]));
}

TEST_CASE("all-zero stress cannot be mapped") {
  const StressField z = stress_from_tensors(std::vector<Mat3>(3, Mat3::Zero()));
  CHECK(testing::error_code_of([&] { stress_spd(z); }) == ErrorCode::Numerical);
}

TEST_CASE("a uniform field maps to the midpoint") {
  Mat3 m = Mat3::Identity() * 4.0;
  const StressField s = stress_spd(stress_from_tensors({m, m}));
  CHECK((s.sigma_plus[0] - 15.5 * Mat3::Identity()).norm() < 1e-12);
}
