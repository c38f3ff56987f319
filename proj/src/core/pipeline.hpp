#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/mesh.hpp"

namespace michell {

enum class Stage { Fea, Frames, Param, Extract, Simplify, Geometry, Verify, Pipeline };

std::optional<Stage> parse_stage(const std::string& name);
const char* to_string(Stage stage);
int stage_version(Stage stage);

// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* kStress = "stress.field";
inline constexpr const char* kFrames = "frames.field";
inline constexpr const char* kParam = "param.field";
inline constexpr const char* kGraphRaw = "graph_raw.json";
inline constexpr const char* kGraph = "graph.json";
inline constexpr const char* kObj = "truss.obj";
inline constexpr const char* kPly = "truss.ply";
inline constexpr const char* kLines = "graph_lines.obj";
inline constexpr const char* kReport = "verify_report.json";
inline constexpr const char* kManifest = "manifest.json";
} // namespace artifact

class Pipeline {
public:
  // Output goes to out_dir if given, else to the config's output directory.
  explicit Pipeline(PipelineConfig config, std::optional<std::filesystem::path> out_dir = {});

  const PipelineConfig& config() const { return config_; }
  const std::filesystem::path& output_dir() const { return out_; }

  // Runs one stage (or all of them). Errors keep their code and gain the
  // stage name as a prefix.
  void run(Stage stage);

private:
  const TetMesh& mesh();
  std::filesystem::path require(const char* file, const char* producer) const;
  void record(Stage stage, const std::vector<std::string>& files, const std::string& log);

  void fea();
  void frames();
  void param();
  void extract();
  void simplify();
  void geometry();
  void verify();

  PipelineConfig config_;
  std::filesystem::path out_;
  std::optional<TetMesh> mesh_;
};

} // namespace michell
