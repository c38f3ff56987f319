#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "core/truss_graph.hpp"

namespace michell {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Field file: one JSON header line, then rows*cols little-endian doubles.
struct FieldFile {
  nlohmann::ordered_json header; // "kind", "version", "rows", "cols" plus extras
  RowMatrix data;
};

void write_field(const std::filesystem::path& path, const std::string& kind, int version,
                 const RowMatrix& data, nlohmann::ordered_json extra = nlohmann::ordered_json::object());
// Throws Error(Parse) on a malformed file or a kind mismatch, Error(Io) if
// the file cannot be read.
FieldFile read_field(const std::filesystem::path& path, const std::string& kind);

nlohmann::ordered_json graph_to_json(const TrussGraph& g);
TrussGraph graph_from_json(const nlohmann::json& j);
void write_graph(const std::filesystem::path& path, const TrussGraph& g);
TrussGraph read_graph(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace michell
