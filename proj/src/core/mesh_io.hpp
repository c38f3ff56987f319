#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "core/mesh.hpp"

namespace michell {

enum class MeshFormat { MeditMesh, TetgenPair };

std::optional<MeshFormat> parse_mesh_format(const std::string& name);
const char* to_string(MeshFormat format);

// Guess from the extension: .mesh is MEDIT, .node/.ele (or a bare stem with a
// sibling .node) is TetGen.
MeshFormat detect_mesh_format(const std::filesystem::path& path);

// For TetGen, `path` may name the .node file, the .ele file or the common stem.
TetMesh load_tet_mesh(const std::filesystem::path& path, MeshFormat format);

// MEDIT writer (1-based indices, Vertices/Tetrahedra/Triangles sections).
void write_medit(const TetMesh& mesh, const std::filesystem::path& path);

// TetGen writer; writes <stem>.node and <stem>.ele, 0-based.
void write_tetgen(const TetMesh& mesh, const std::filesystem::path& stem);

} // namespace michell
