#include "core/fixtures.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace michell::fixtures {

namespace {

std::vector<Tet> kuhn_tets(std::array<int, 3> n) {
  auto id = [&](int i, int j, int k) { return (k * (n[1] + 1) + j) * (n[0] + 1) + i; };
  static const int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<Tet> tets;
  tets.reserve(6 * n[0] * n[1] * n[2]);
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i)
        for (const auto& perm : kPerms) {
          std::array<int, 3> c = {i, j, k};
          Tet t;
          t[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            c[perm[s]]++;
            t[s + 1] = id(c[0], c[1], c[2]);
          }
          tets.push_back(t);
        }
  return tets;
}

// splitmix64; deterministic jitter without global RNG state.
double hash_unit(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return static_cast<double>(x >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

} // namespace

TetMesh box(std::array<int, 3> n, Vec3 extent) {
  std::vector<Vec3> vertices;
  vertices.reserve(box_vertex_count(n));
  for (int k = 0; k <= n[2]; ++k)
    for (int j = 0; j <= n[1]; ++j)
      for (int i = 0; i <= n[0]; ++i)
        vertices.emplace_back(extent.x() * i / n[0], extent.y() * j / n[1], extent.z() * k / n[2]);
  return TetMesh(std::move(vertices), kuhn_tets(n));
}

TetMesh jittered_box(std::array<int, 3> n, Vec3 extent, double jitter) {
  std::vector<Vec3> vertices;
  vertices.reserve(box_vertex_count(n));
  std::uint64_t counter = 0;
  for (int k = 0; k <= n[2]; ++k)
    for (int j = 0; j <= n[1]; ++j)
      for (int i = 0; i <= n[0]; ++i) {
        std::array<int, 3> idx = {i, j, k};
        Vec3 p;
        for (int c = 0; c < 3; ++c) {
          double h = extent[c] / n[c];
          p[c] = h * idx[c];
          double r = hash_unit(counter++);
          if (idx[c] > 0 && idx[c] < n[c])
            p[c] += jitter * h * r;
        }
        vertices.push_back(p);
      }
  return TetMesh(std::move(vertices), kuhn_tets(n));
}

TetMesh single_tet() {
  return TetMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {{0, 1, 2, 3}});
}

TetMesh ball(int levels, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                         {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                         {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<Tri> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& p : v)
    p.normalize();
  for (int l = 0; l < levels; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      if (auto it = mid.find(key); it != mid.end())
        return it->second;
      v.push_back((v[a] + v[b]).normalized());
      return mid[key] = static_cast<int>(v.size()) - 1;
    };
    std::vector<Tri> next;
    for (const Tri& tri : f) {
      int ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]), ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (auto& p : v)
    p *= radius;
  const int centre = static_cast<int>(v.size());
  v.push_back(Vec3::Zero());
  std::vector<Tet> tets;
  tets.reserve(f.size());
  for (const Tri& tri : f)
    tets.push_back({centre, tri[0], tri[1], tri[2]});
  return TetMesh(std::move(v), std::move(tets));
}

} // namespace michell::fixtures
