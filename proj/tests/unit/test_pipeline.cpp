#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "core/artifacts.hpp"
#include "core/fixture_files.hpp"
#include "core/frame_field.hpp"
#include "core/log.hpp"
#include "core/operators.hpp"
#include "core/pipeline.hpp"
#include "helpers.hpp"

using namespace michell;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

PipelineConfig fixture_config(const std::string& name, const std::filesystem::path& dir) {
  write_fixture(name, dir);
  return PipelineConfig::load(dir / (name + ".json"));
}

} // namespace

TEST_CASE("field files round trip") {
  const auto dir = testing::scratch_dir("fields");
  RowMatrix m(3, 2);
  m << 1, 2, 3, 4, 5, 6.5;
  write_field(dir / "a.field", "test", 1, m, {{"note", "x"}});
  const FieldFile f = read_field(dir / "a.field", "test");
  CHECK(f.data == m);
  CHECK(f.header["note"] == "x");
  CHECK(testing::error_code_of([&] { read_field(dir / "a.field", "other"); }) == ErrorCode::Parse);
  CHECK(testing::error_code_of([&] { read_field(dir / "none.field", "test"); }) == ErrorCode::Io);
}

TEST_CASE("graphs round trip through JSON") {
  TrussGraph g;
  g.nodes = {{Vec3(0.1, 0.2, 0.3), Vec3(1, 2, 3.5), NodeTag::InteriorGrid},
             {Vec3(1.0 / 3.0, 0, 0), Vec3(2, 2, 3.5), NodeTag::Feature}};
  g.elements = {{{0, 1}, Family::Iso2, 7}};
  const TrussGraph back = graph_from_json(graph_to_json(g));
  REQUIRE(back.nodes.size() == 2);
  CHECK(back.nodes[1].position == g.nodes[1].position);
  CHECK(back.nodes[1].tag == NodeTag::Feature);
  CHECK(back.elements[0].family == Family::Iso2);
  CHECK(back.elements[0].source == 7);
}

TEST_CASE("stages need their inputs") {
  const auto dir = testing::scratch_dir("pipeline_missing");
  Pipeline p(fixture_config("cube", dir), dir / "out");
  try {
    p.run(Stage::Extract);
    FAIL("extract ran without a parametrization");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingArtifact);
    CHECK(std::string(e.what()) == "missing artifact: param");
  }
  CHECK(testing::error_code_of([&] { p.run(Stage::Frames); }) == ErrorCode::MissingArtifact);
  CHECK(testing::error_code_of([&] { p.run(Stage::Verify); }) == ErrorCode::MissingArtifact);
}

TEST_CASE("full pipeline writes every artifact and is deterministic") {
  set_log_level("warn");
  const auto dir = testing::scratch_dir("pipeline_full");
  const PipelineConfig c = fixture_config("cube", dir);
  Pipeline a(c, dir / "a");
  a.run(Stage::Pipeline);
  for (const char* f : {artifact::kStress, artifact::kFrames, artifact::kParam, artifact::kGraphRaw,
                        artifact::kGraph, artifact::kObj, artifact::kPly, artifact::kLines,
                        artifact::kReport, artifact::kManifest})
    CHECK(std::filesystem::exists(dir / "a" / f));

  // The same stages run one by one give identical bytes.
  Pipeline b(c, dir / "b");
  for (Stage s : {Stage::Fea, Stage::Frames, Stage::Param, Stage::Extract, Stage::Simplify,
                  Stage::Geometry, Stage::Verify})
    b.run(s);
  for (const char* f : {artifact::kStress, artifact::kFrames, artifact::kParam, artifact::kGraphRaw,
                        artifact::kGraph, artifact::kPly, artifact::kReport})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));

  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / artifact::kManifest));
  CHECK(manifest["config_hash"] == c.hash());
  CHECK(manifest["stages"].size() == 7);

  const TrussGraph raw = read_graph(dir / "a" / artifact::kGraphRaw);
  const TrussGraph g = read_graph(dir / "a" / artifact::kGraph);
  CHECK(g.num_components() == raw.num_components());
  CHECK(g.nodes.size() < raw.nodes.size());

  const auto report = nlohmann::json::parse(slurp(dir / "a" / artifact::kReport));
  CHECK(report["load_factor"].get<double>() > 0);
}

TEST_CASE("uniaxial bar: the first parameter gradient follows the primary frame axis") {
  set_log_level("warn");
  const auto dir = testing::scratch_dir("pipeline_uniaxial");
  const PipelineConfig c = fixture_config("uniaxial_bar", dir);
  Pipeline p(c, dir / "out");
  for (Stage s : {Stage::Fea, Stage::Frames, Stage::Param})
    p.run(s);

  const TetMesh mesh = make_fixture("uniaxial_bar").mesh;
  const VertexVectors omega = read_field(dir / "out" / artifact::kFrames, "frames").data;
  const auto frames = frames_from_omega(mesh, omega);
  const RowMatrix param = read_field(dir / "out" / artifact::kParam, "param").data;
  const Eigen::VectorXd u = param.col(3);
  const auto grads = tet_gradients(build_operators(mesh), u);

  std::vector<double> angles;
  for (std::size_t t = 0; t < mesh.num_tets(); ++t)
    angles.push_back(std::acos(std::min(1.0, std::abs(grads[t].normalized().dot(frames[t].col(0))))));
  std::nth_element(angles.begin(), angles.begin() + angles.size() / 2, angles.end());
  CHECK(angles[angles.size() / 2] <= 5.0 * std::numbers::pi / 180.0);
}

TEST_CASE("numerical failures carry the stage name") {
  const auto dir = testing::scratch_dir("pipeline_bad");
  PipelineConfig c = fixture_config("cube", dir);
  c.bcs.neumann.clear();
  Pipeline p(c, dir / "out");
  try {
    p.run(Stage::Fea);
    FAIL("fea succeeded without loads");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("stage fea: ", 0) == 0);
  }
}

TEST_CASE("stage names parse") {
  for (Stage s : {Stage::Fea, Stage::Frames, Stage::Param, Stage::Extract, Stage::Simplify,
                  Stage::Geometry, Stage::Verify, Stage::Pipeline})
    CHECK(parse_stage(to_string(s)) == s);
  CHECK(!parse_stage("mesh"));
}
