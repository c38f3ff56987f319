#include "core/geometry.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "core/error.hpp"
#include "core/log.hpp"

namespace michell {

double RadiusPolicy::radius(Family f) const {
  auto it = family_radius.find(f);
  return it == family_radius.end() ? default_radius : it->second;
}

double RadiusPolicy::max_radius() const {
  double r = default_radius;
  for (const auto& [f, v] : family_radius)
    r = std::max(r, v);
  return r;
}

void RadiusPolicy::validate() const {
  if (!(default_radius > 0))
    fail(ErrorCode::Config, "radius must be positive");
  for (const auto& [f, v] : family_radius)
    if (!(v > 0))
      fail(ErrorCode::Config, std::string("radius for family ") + to_string(f) + " must be positive");
}

namespace {

// Orthonormal pair perpendicular to a unit axis.
std::pair<Vec3, Vec3> perpendicular_basis(const Vec3& axis) {
  const Vec3 ref = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 u = axis.cross(ref).normalized();
  return {u, axis.cross(u)};
}

void add_prism(TriangleMesh& m, const Vec3& a, const Vec3& b, double r, int sides) {
  const Vec3 axis = (b - a).normalized();
  auto [u, w] = perpendicular_basis(axis);
  const int base = static_cast<int>(m.vertices.size());
  for (int end = 0; end < 2; ++end)
    for (int s = 0; s < sides; ++s) {
      const double ang = 2.0 * std::numbers::pi * s / sides;
      m.vertices.push_back((end ? b : a) + r * (std::cos(ang) * u + std::sin(ang) * w));
    }
  for (int s = 0; s < sides; ++s) {
    const int s1 = (s + 1) % sides;
    const int a0 = base + s, a1 = base + s1, b0 = base + sides + s, b1 = base + sides + s1;
    m.triangles.push_back({a0, a1, b1});
    m.triangles.push_back({a0, b1, b0});
  }
  // Fan caps, outward: the a-cap faces -axis, the b-cap faces +axis.
  for (int s = 1; s + 1 < sides; ++s) {
    m.triangles.push_back({base, base + s + 1, base + s});
    m.triangles.push_back({base + sides, base + sides + s, base + sides + s + 1});
  }
}

void add_sphere(TriangleMesh& m, const Vec3& c, double r) {
  static const std::array<Vec3, 6> oct = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(),
                                          -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  static const std::array<Tri, 8> faces = {{{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                                            {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}}};
  const int base = static_cast<int>(m.vertices.size());
  std::vector<Vec3> dirs(oct.begin(), oct.end());
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int b) {
    auto k = std::make_pair(std::min(a, b), std::max(a, b));
    auto [it, inserted] = mid.emplace(k, static_cast<int>(dirs.size()));
    if (inserted)
      dirs.push_back((dirs[a] + dirs[b]).normalized());
    return it->second;
  };
  std::vector<Tri> tris;
  for (const Tri& f : faces) {
    const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
    tris.push_back({f[0], ab, ca});
    tris.push_back({ab, f[1], bc});
    tris.push_back({ca, bc, f[2]});
    tris.push_back({ab, bc, ca});
  }
  for (const Vec3& d : dirs)
    m.vertices.push_back(c + r * d);
  for (const Tri& t : tris)
    m.triangles.push_back({base + t[0], base + t[1], base + t[2]});
}

} // namespace

TriangleMesh emit_geometry(const TrussGraph& g, const RadiusPolicy& radii,
                           const GeometryOptions& options, int* skipped) {
  radii.validate();
  if (options.sides < 3)
    fail(ErrorCode::Config, "sides must be at least 3");
  TriangleMesh m;
  int zero_length = 0;
  std::vector<double> node_radius(g.nodes.size(), 0.0);
  for (std::size_t e = 0; e < g.elements.size(); ++e) {
    const auto& el = g.elements[e];
    const double r = radii.radius(el.family);
    for (int v : el.nodes)
      node_radius[v] = std::max(node_radius[v], r);
    const Vec3& a = g.nodes[el.nodes[0]].position;
    const Vec3& b = g.nodes[el.nodes[1]].position;
    if (!((b - a).norm() > 1e-12)) {
      ++zero_length;
      continue;
    }
    add_prism(m, a, b, r, options.sides);
  }
  if (options.node_spheres)
    for (std::size_t v = 0; v < g.nodes.size(); ++v)
      if (node_radius[v] > 0)
        add_sphere(m, g.nodes[v].position, node_radius[v]);
  if (zero_length > 0)
    logger()->warn("geometry: skipped {} zero-length element(s)", zero_length);
  if (skipped)
    *skipped = zero_length;
  return m;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out)
    fail(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out)
    fail(ErrorCode::Io, "failed writing " + path.string());
}

template <typename T> void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

} // namespace

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  auto out = open_out(path, false);
  out.precision(17);
  for (const Vec3& v : mesh.vertices)
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Tri& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  close_out(out, path);
}

void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh) {
  auto out = open_out(path, true);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : mesh.vertices)
    for (int i = 0; i < 3; ++i)
      put_le<double>(out, v[i]);
  for (const Tri& t : mesh.triangles) {
    put_le<std::uint8_t>(out, 3);
    for (int i : t)
      put_le<std::int32_t>(out, i);
  }
  close_out(out, path);
}

void write_graph_lines(const std::filesystem::path& path, const TrussGraph& g) {
  auto out = open_out(path, false);
  out.precision(17);
  for (const auto& n : g.nodes)
    out << "v " << n.position.x() << ' ' << n.position.y() << ' ' << n.position.z() << '\n';
  Family current = Family::Iso1;
  bool first = true;
  for (const auto& el : g.elements) {
    if (first || el.family != current) {
      out << "g " << to_string(el.family) << '\n';
      current = el.family;
      first = false;
    }
    out << "l " << el.nodes[0] + 1 << ' ' << el.nodes[1] + 1 << '\n';
  }
  close_out(out, path);
}

} // namespace michell
