#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/mesh.hpp"

namespace michell {

// Named desk-scale problems: a mesh plus a pipeline configuration whose mesh
// path is "<name>.mesh" and whose output directory is "out/<name>".
struct Fixture {
  TetMesh mesh;
  PipelineConfig config;
};

std::vector<std::string> fixture_names();
Fixture make_fixture(const std::string& name);

// Rotation applied to the uniaxial bar; its first column is the bar axis.
Mat3 uniaxial_bar_rotation();

// Writes <dir>/<name>.mesh and <dir>/<name>.json.
void write_fixture(const std::string& name, const std::filesystem::path& dir);

} // namespace michell
