#include "core/fixture_files.hpp"

#include "core/error.hpp"
#include "core/fixtures.hpp"
#include "core/mesh_io.hpp"

namespace michell {

std::vector<std::string> fixture_names() { return {"uniaxial_bar", "bending_bar", "cube"}; }

namespace {

constexpr double kSlab = 1e-9;

Selector face_box(int axis, double value, const Vec3& extent) {
  Vec3 lo = -Vec3::Constant(kSlab), hi = extent + Vec3::Constant(kSlab);
  lo[axis] = value - kSlab;
  hi[axis] = value + kSlab;
  return Selector::box(lo, hi);
}

} // namespace

Mat3 uniaxial_bar_rotation() {
  return Eigen::AngleAxisd(0.7, Vec3(1.0, 2.0, 3.0).normalized()).toRotationMatrix();
}

Fixture make_fixture(const std::string& name) {
  PipelineConfig c;
  c.mesh_path = name + ".mesh";
  c.mesh_format = "medit";
  c.output_dir = "out/" + name;
  if (name == "uniaxial_bar") {
    // 1 x 0.2 x 0.2 m bar turned by a generic rotation and pulled apart by
    // equal and opposite end forces. Three vertices carry a statically
    // determinate 3-2-1 support, so reactions vanish and the stress is exactly
    // uniaxial along the bar axis, which is not a coordinate axis.
    const std::array<int, 3> cells{20, 4, 4};
    const Vec3 ext(1.0, 0.2, 0.2);
    const TetMesh straight = fixtures::box(cells, ext);
    const Mat3 Q = uniaxial_bar_rotation();
    std::vector<Vec3> verts;
    std::vector<int> left, right;
    int a = -1, b = -1, side = -1;
    for (std::size_t v = 0; v < straight.num_vertices(); ++v) {
      const Vec3& p = straight.vertices()[v];
      verts.push_back(Q * p);
      const int id = static_cast<int>(v);
      if (p.x() == 0.0)
        left.push_back(id);
      if (p.x() == ext.x())
        right.push_back(id);
      if (p == Vec3::Zero())
        a = id;
      if (p == Vec3(ext.x(), 0, 0))
        b = id;
      if (p == Vec3(0, ext.y(), 0))
        side = id;
    }
    const Vec3 axis = Q.col(0);
    c.bcs.neumann.push_back({Selector::vertices(left), -1000.0 * axis});
    c.bcs.neumann.push_back({Selector::vertices(right), 1000.0 * axis});
    DirichletCondition pa, pb, pc;
    pa.selector = Selector::vertices({a});
    pb.selector = Selector::vertices({b});
    pb.axes = {false, true, true};
    pc.selector = Selector::vertices({side});
    // A spin about the bar axis moves the side vertex along Q e_z.
    Eigen::Index k;
    axis.cross(Q.col(1)).cwiseAbs().maxCoeff(&k);
    pc.axes = {k == 0, k == 1, k == 2};
    c.bcs.dirichlet = {pa, pb, pc};
    c.rho = 10.0;
    c.radii.default_radius = 0.005;
    return {TetMesh(std::move(verts), straight.tets()), c};
  }
  if (name == "bending_bar") {
    // 200 x 40 x 40 mm bar, both ends clamped, downward load on a patch at
    // the middle of the top face.
    const Vec3 ext(0.2, 0.04, 0.04);
    DirichletCondition left, right;
    left.selector = face_box(0, 0.0, ext);
    right.selector = face_box(0, ext.x(), ext);
    c.bcs.dirichlet = {left, right};
    c.bcs.neumann.push_back({Selector::box(Vec3(0.09 - kSlab, -kSlab, ext.z() - kSlab),
                                           Vec3(0.11 + kSlab, ext.y() + kSlab, ext.z() + kSlab)),
                             Vec3(0.0, 0.0, -400.0)});
    c.rho = 20.0;
    c.radii.default_radius = 0.001;
    return {fixtures::box({20, 4, 4}, ext), c};
  }
  if (name == "cube") {
    // Unit cube clamped at the bottom, sheared at the top.
    const Vec3 ext = Vec3::Ones();
    DirichletCondition bottom;
    bottom.selector = face_box(2, 0.0, ext);
    c.bcs.dirichlet = {bottom};
    c.bcs.neumann.push_back({face_box(2, 1.0, ext), Vec3(100.0, 0.0, -100.0)});
    c.rho = 4.0;
    c.radii.default_radius = 0.01;
    return {fixtures::box({6, 6, 6}, ext), c};
  }
  fail(ErrorCode::InvalidArgument, "unknown fixture '" + name + "'");
}

void write_fixture(const std::string& name, const std::filesystem::path& dir) {
  Fixture f = make_fixture(name);
  try {
    std::filesystem::create_directories(dir);
  } catch (const std::filesystem::filesystem_error& e) {
    fail(ErrorCode::Io, std::string("cannot create ") + dir.string() + ": " + e.what());
  }
  write_medit(f.mesh, dir / (name + ".mesh"));
  f.config.save(dir / (name + ".json"));
}

} // namespace michell
