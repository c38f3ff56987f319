#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "core/fem.hpp"
#include "core/frame_field.hpp"
#include "core/geometry.hpp"
#include "core/simplify.hpp"

namespace michell {

struct PipelineConfig {
  std::string mesh_path;        // relative paths resolve against base_dir
  std::string mesh_format = "auto"; // auto | medit | tetgen
  Material material;
  BoundaryConditions bcs;
  FrameFitOptions frames;
  double beta = 1.0;
  double rho = 10.0;
  double epsilon = 1e-7;
  double feature_cos_threshold = 0.9;
  SimplifyOptions simplify{0.0, 0.05, true, true, true};
  RadiusPolicy radii;
  GeometryOptions geometry;
  std::string output_dir = "out";

  std::filesystem::path base_dir; // not serialized

  std::filesystem::path resolved_mesh_path() const;
  std::filesystem::path resolved_output_dir() const;

  // Throws Error(Config) naming the offending key.
  void validate(bool check_files = true) const;

  nlohmann::ordered_json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // FNV-1a (64 bit) of the canonical JSON serialization, as 16 hex digits.
  std::string hash() const;

  bool operator==(const PipelineConfig& other) const { return to_json() == other.to_json(); }
};

std::string fnv1a_hex(const std::string& bytes);

} // namespace michell
