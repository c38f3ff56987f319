#include <doctest.h>

#include <fstream>

#include "core/fixtures.hpp"
#include "core/mesh.hpp"
#include "core/mesh_io.hpp"
#include "helpers.hpp"

using namespace michell;

TEST_CASE("box fixture matches its declared counts") {
  const std::array<int, 3> cells{3, 2, 4};
  const TetMesh m = fixtures::box(cells, Vec3(1.5, 1.0, 2.0));
  CHECK(m.num_vertices() == fixtures::box_vertex_count(cells));
  CHECK(m.num_tets() == fixtures::box_tet_count(cells));
  CHECK(m.total_volume() == doctest::Approx(3.0).epsilon(1e-12));
  for (double v : m.volumes())
    CHECK(v > 0);
  CHECK(m.num_components() == 1);
}

TEST_CASE("boundary surface of a box is a closed sphere") {
  const TetMesh m = fixtures::box({2, 3, 2}, Vec3(2, 3, 2));
  const SurfaceMesh& s = m.boundary();
  // 2 triangles per boundary quad.
  CHECK(s.triangles.size() == 2 * (2 * 2 * 3 + 2 * 2 * 2 + 2 * 3 * 2));
  CHECK(s.euler_characteristic() == 2);
  double area = 0.0;
  for (double a : s.areas)
    area += a;
  CHECK(area == doctest::Approx(2 * (6 + 4 + 6)));
  // Normals point away from the centre.
  for (std::size_t f = 0; f < s.triangles.size(); ++f) {
    const Tri& t = s.triangles[f];
    const Vec3 c = (m.vertices()[t[0]] + m.vertices()[t[1]] + m.vertices()[t[2]]) / 3.0;
    CHECK(s.normals[f].dot(c - Vec3(1, 1.5, 1)) > 0);
  }
}

TEST_CASE("inverted tets are reoriented") {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  TetMesh m(v, {Tet{0, 2, 1, 3}});
  CHECK(m.num_reoriented() == 1);
  CHECK(m.volumes()[0] == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("degenerate and out-of-range tets are rejected") {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 1}};
  CHECK(testing::error_code_of([&] { TetMesh m(v, {Tet{0, 1, 2, 3}}); }) == ErrorCode::Parse);
  CHECK(testing::error_code_of([&] { TetMesh m(v, {Tet{0, 1, 2, 7}}); }) == ErrorCode::Parse);
}

TEST_CASE("feature edges of a box are its twelve creases") {
  const TetMesh m = fixtures::box({2, 2, 2});
  const auto features = feature_edges(m.boundary(), 0.9);
  // Every crease is split into two mesh edges.
  CHECK(features.size() == 24);
  for (int e : features)
    CHECK(std::abs(m.boundary().edges[e].dihedral) > 1.0);
  CHECK(feature_edges(m.boundary(), 1.0).size() == m.boundary().edges.size());
}

TEST_CASE("disconnected meshes report their components") {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                      {5, 0, 0}, {6, 0, 0}, {5, 1, 0}, {5, 0, 1}};
  TetMesh m(v, {Tet{0, 1, 2, 3}, Tet{4, 5, 6, 7}});
  CHECK(m.num_components() == 2);
}

TEST_CASE("MEDIT and TetGen round trips preserve the mesh") {
  const auto dir = testing::scratch_dir("mesh_io");
  const TetMesh m = fixtures::jittered_box({3, 3, 2}, Vec3(1, 1, 0.5), 0.2);
  write_medit(m, dir / "a.mesh");
  write_tetgen(m, dir / "b");
  CHECK(detect_mesh_format(dir / "a.mesh") == MeshFormat::MeditMesh);
  CHECK(detect_mesh_format(dir / "b.node") == MeshFormat::TetgenPair);
  for (const TetMesh& r : {load_tet_mesh(dir / "a.mesh", MeshFormat::MeditMesh),
                           load_tet_mesh(dir / "b", MeshFormat::TetgenPair)}) {
    REQUIRE(r.num_vertices() == m.num_vertices());
    REQUIRE(r.num_tets() == m.num_tets());
    for (std::size_t i = 0; i < m.num_vertices(); ++i)
      CHECK((r.vertices()[i] - m.vertices()[i]).norm() == 0.0);
    CHECK(r.tets() == m.tets());
  }
}

TEST_CASE("malformed mesh files raise parse errors") {
  const auto dir = testing::scratch_dir("mesh_bad");
  std::ofstream(dir / "bad.mesh") << "MeshVersionFormatted 1\nDimension 3\nVertices\n2\n0 0 0 0\n";
  CHECK(testing::error_code_of([&] { load_tet_mesh(dir / "bad.mesh", MeshFormat::MeditMesh); }) ==
        ErrorCode::Parse);
  CHECK(testing::error_code_of([&] { load_tet_mesh(dir / "none.mesh", MeshFormat::MeditMesh); }) ==
        ErrorCode::Io);
}
