#pragma once

#include <array>

#include "core/mesh.hpp"

namespace michell::fixtures {

// Axis-aligned box [0,lx]x[0,ly]x[0,lz] split into nx*ny*nz cells, six tets
// per cell (Kuhn subdivision along the main diagonal, conforming).
// Declared counts: (nx+1)(ny+1)(nz+1) vertices, 6*nx*ny*nz tets.
TetMesh box(std::array<int, 3> cells, Vec3 extent = Vec3::Ones());

// Same as box() but interior vertices are displaced by a deterministic
// pseudo-random offset of at most `jitter` times the cell size, and boundary
// vertices only tangentially (never across a crease).
TetMesh jittered_box(std::array<int, 3> cells, Vec3 extent, double jitter);

// Reference simplex (0,0,0),(1,0,0),(0,1,0),(0,0,1).
TetMesh single_tet();

// Ball of the given radius: an icosphere subdivided `levels` times, coned to
// the centre.
TetMesh ball(int levels, double radius = 1.0);

inline constexpr std::size_t box_vertex_count(std::array<int, 3> c) {
  return static_cast<std::size_t>(c[0] + 1) * (c[1] + 1) * (c[2] + 1);
}
inline constexpr std::size_t box_tet_count(std::array<int, 3> c) {
  return static_cast<std::size_t>(6) * c[0] * c[1] * c[2];
}

} // namespace michell::fixtures
