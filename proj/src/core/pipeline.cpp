#include "core/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <spdlog/fmt/fmt.h>

#include "core/artifacts.hpp"
#include "core/error.hpp"
#include "core/extraction.hpp"
#include "core/fem.hpp"
#include "core/frame_field.hpp"
#include "core/geometry.hpp"
#include "core/log.hpp"
#include "core/mesh_io.hpp"
#include "core/parametrization.hpp"
#include "core/simplify.hpp"
#include "core/verify.hpp"

namespace michell {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr Stage kOrder[] = {Stage::Fea,     Stage::Frames,   Stage::Param, Stage::Extract,
                            Stage::Simplify, Stage::Geometry, Stage::Verify};

} // namespace

const char* to_string(Stage stage) {
  switch (stage) {
  case Stage::Fea: return "fea";
  case Stage::Frames: return "frames";
  case Stage::Param: return "param";
  case Stage::Extract: return "extract";
  case Stage::Simplify: return "simplify";
  case Stage::Geometry: return "geometry";
  case Stage::Verify: return "verify";
  case Stage::Pipeline: return "pipeline";
  }
  return "?";
}

std::optional<Stage> parse_stage(const std::string& name) {
  for (Stage s : kOrder)
    if (name == to_string(s))
      return s;
  if (name == "pipeline")
    return Stage::Pipeline;
  return std::nullopt;
}

int stage_version(Stage) { return 1; }

Pipeline::Pipeline(PipelineConfig config, std::optional<std::filesystem::path> out_dir)
    : config_(std::move(config)) {
  config_.validate();
  out_ = out_dir ? *out_dir : config_.resolved_output_dir();
}

const TetMesh& Pipeline::mesh() {
  if (!mesh_) {
    const auto path = config_.resolved_mesh_path();
    const MeshFormat fmt = config_.mesh_format == "auto" ? detect_mesh_format(path)
                                                         : *parse_mesh_format(config_.mesh_format);
    mesh_.emplace(load_tet_mesh(path, fmt));
  }
  return *mesh_;
}

std::filesystem::path Pipeline::require(const char* file, const char* producer) const {
  auto p = out_ / file;
  if (!std::filesystem::exists(p))
    fail(ErrorCode::MissingArtifact, std::string("missing artifact: ") + producer);
  return p;
}

void Pipeline::record(Stage stage, const std::vector<std::string>& files, const std::string& log) {
  write_text(out_ / (std::string(to_string(stage)) + ".log"), log);
  const auto path = out_ / artifact::kManifest;
  json manifest;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    try {
      manifest = json::parse(in);
    } catch (const json::exception&) {
      manifest = json();
    }
  }
  const std::string hash = config_.hash();
  if (!manifest.is_object() || manifest.value("config_hash", "") != hash)
    manifest = json{{"format", "michell-manifest"}, {"config_hash", hash}, {"stages", json::object()}};
  manifest["stages"][to_string(stage)] = {{"version", stage_version(stage)}, {"artifacts", files}};
  write_text(path, manifest.dump(2) + "\n");
}

void Pipeline::run(Stage stage) {
  if (stage == Stage::Pipeline) {
    for (Stage s : kOrder)
      run(s);
    return;
  }
  try {
    std::filesystem::create_directories(out_);
  } catch (const std::filesystem::filesystem_error& e) {
    fail(ErrorCode::Io, "cannot create output directory " + out_.string() + ": " + e.what());
  }
  try {
    logger()->info("stage {}", to_string(stage));
    switch (stage) {
    case Stage::Fea: fea(); break;
    case Stage::Frames: frames(); break;
    case Stage::Param: param(); break;
    case Stage::Extract: extract(); break;
    case Stage::Simplify: simplify(); break;
    case Stage::Geometry: geometry(); break;
    case Stage::Verify: verify(); break;
    case Stage::Pipeline: break;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MissingArtifact)
      throw;
    throw Error(e.code(), std::string("stage ") + to_string(stage) + ": " + e.what());
  }
}

namespace {

RowMatrix tensors_to_rows(const std::vector<Mat3>& m) {
  RowMatrix out(static_cast<Eigen::Index>(m.size()), 9);
  for (std::size_t t = 0; t < m.size(); ++t)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out(static_cast<Eigen::Index>(t), 3 * i + j) = m[t](i, j);
  return out;
}

std::vector<Mat3> rows_to_tensors(const RowMatrix& r) {
  std::vector<Mat3> out(static_cast<std::size_t>(r.rows()));
  for (Eigen::Index t = 0; t < r.rows(); ++t)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out[t](i, j) = r(t, 3 * i + j);
  return out;
}

void expect_rows(const FieldFile& f, std::size_t rows, Eigen::Index cols, const char* name) {
  if (f.data.rows() != static_cast<Eigen::Index>(rows) || f.data.cols() != cols)
    fail(ErrorCode::Parse, std::string(name) + " artifact does not match the mesh");
}

std::string count_summary(const TrussGraph& g) {
  std::map<std::string, int> tags, fams;
  for (const auto& n : g.nodes)
    ++tags[to_string(n.tag)];
  for (const auto& e : g.elements)
    ++fams[to_string(e.family)];
  std::string s = fmt::format("nodes {}\nelements {}\ncomponents {}\ntotal_length {:.9e}\n",
                              g.nodes.size(), g.elements.size(), g.num_components(),
                              g.total_length());
  for (const auto& [k, v] : tags)
    s += fmt::format("nodes.{} {}\n", k, v);
  for (const auto& [k, v] : fams)
    s += fmt::format("elements.{} {}\n", k, v);
  return s;
}

} // namespace

void Pipeline::fea() {
  const TetMesh& m = mesh();
  const auto sol = solve_static(m, config_.material, config_.bcs);
  auto stress = stress_spd(cauchy_stress(m, config_.material, sol.displacement));
  double umax = 0.0;
  for (const Vec3& u : sol.displacement)
    umax = std::max(umax, u.norm());
  ordered_json extra = {{"config_hash", config_.hash()},
                        {"relative_residual", sol.relative_residual},
                        {"abs_eigen_min", stress.abs_min},
                        {"abs_eigen_max", stress.abs_max}};
  write_field(out_ / artifact::kStress, "stress", stage_version(Stage::Fea),
              tensors_to_rows(stress.sigma), extra);
  std::string log = fmt::format("vertices {}\ntets {}\nreoriented_tets {}\nconstrained_dofs {}\n"
                                "relative_residual {:.6e}\nmax_displacement {:.9e}\n"
                                "abs_eigen_min {:.9e}\nabs_eigen_max {:.9e}\n",
                                m.num_vertices(), m.num_tets(), m.num_reoriented(),
                                sol.constrained_dofs, sol.relative_residual, umax, stress.abs_min,
                                stress.abs_max);
  record(Stage::Fea, {artifact::kStress}, log);
}

void Pipeline::frames() {
  const auto path = require(artifact::kStress, "fea");
  const TetMesh& m = mesh();
  const auto f = read_field(path, "stress");
  expect_rows(f, m.num_tets(), 9, "stress");
  const auto stress = stress_spd(stress_from_tensors(rows_to_tensors(f.data)));
  const auto field = fit_frame_field(m, stress, config_.frames);
  const double ortho = max_orthonormality_error(field.frames);
  ordered_json extra = {{"config_hash", config_.hash()},
                        {"initial_data_energy", field.initial_data_energy},
                        {"final_data_energy", field.history.back().data_energy},
                        {"outer_iterations", field.history.size()},
                        {"max_orthonormality_error", ortho}};
  write_field(out_ / artifact::kFrames, "frames", stage_version(Stage::Frames),
              RowMatrix(field.omega), extra);
  std::string log = fmt::format("initial_data_energy {:.12e}\n", field.initial_data_energy);
  for (std::size_t k = 0; k < field.history.size(); ++k) {
    const auto& h = field.history[k];
    log += fmt::format("outer {} alpha {:.6e} data {:.12e} smooth {:.6e} inner {} {}\n", k,
                       h.alpha, h.data_energy, h.smooth_energy, h.inner_iterations,
                       optim::to_string(h.status));
  }
  log += fmt::format("max_orthonormality_error {:.3e}\n", ortho);
  record(Stage::Frames, {artifact::kFrames}, log);
}

void Pipeline::param() {
  const auto path = require(artifact::kFrames, "frames");
  const TetMesh& m = mesh();
  const auto f = read_field(path, "frames");
  expect_rows(f, m.num_vertices(), 3, "frames");
  const VertexVectors omega = f.data;
  const auto frames = frames_from_omega(m, omega);
  auto p = normalize_and_scale(solve_parametrization(m, frames, config_.beta), config_.rho);

  // Alignment of the first parameter gradient with the primary frame axis.
  const auto ops = build_operators(m);
  const auto grads = tet_gradients(ops, p.phi_tilde.col(0));
  std::vector<double> angles;
  for (std::size_t t = 0; t < m.num_tets(); ++t) {
    const double n = grads[t].norm();
    if (n > 0)
      angles.push_back(std::acos(std::clamp(std::abs(grads[t].dot(frames[t].col(0))) / n, 0.0, 1.0)));
  }
  double median = 0.0;
  if (!angles.empty()) {
    std::nth_element(angles.begin(), angles.begin() + angles.size() / 2, angles.end());
    median = angles[angles.size() / 2] * 180.0 / std::numbers::pi;
  }

  RowMatrix data(p.phi.rows(), 6);
  data.leftCols(3) = p.phi;
  data.rightCols(3) = p.phi_tilde;
  ordered_json extra = {{"config_hash", config_.hash()},
                        {"beta", p.beta},
                        {"rho", p.rho},
                        {"scale", p.scale},
                        {"offset", {p.offset.x(), p.offset.y(), p.offset.z()}},
                        {"objective", p.objective},
                        {"normal_residual", p.normal_residual}};
  write_field(out_ / artifact::kParam, "param", stage_version(Stage::Param), data, extra);
  std::string log = fmt::format(
      "beta {}\nrho {}\nscale {:.12e}\nobjective {:.12e}\nnormal_residual {:.3e}\n"
      "phi_tilde_max {:.9e} {:.9e} {:.9e}\nmedian_angle_grad1_r1_deg {:.6f}\n",
      p.beta, p.rho, p.scale, p.objective, p.normal_residual, p.phi_tilde.col(0).maxCoeff(),
      p.phi_tilde.col(1).maxCoeff(), p.phi_tilde.col(2).maxCoeff(), median);
  record(Stage::Param, {artifact::kParam}, log);
}

void Pipeline::extract() {
  const auto path = require(artifact::kParam, "param");
  const TetMesh& m = mesh();
  const auto f = read_field(path, "param");
  expect_rows(f, m.num_vertices(), 6, "param");
  Parametrization p;
  p.phi = f.data.leftCols(3);
  p.phi_tilde = f.data.rightCols(3);
  p.beta = f.header.value("beta", config_.beta);
  p.rho = f.header.value("rho", config_.rho);
  p = perturb_parametrization(m, std::move(p), config_.epsilon);

  const auto features = feature_edges(m.boundary(), config_.feature_cos_threshold);
  ExtractionStats stats;
  const TrussGraph parts[] = {extract_3d(m, p, &stats), extract_boundary(m, p, features, &stats)};
  const TrussGraph g = merge_graphs(parts);
  write_graph(out_ / artifact::kGraphRaw, g);
  std::string log = fmt::format("feature_edges {}\nface_touches {}\ninconsistent_tets {}\n"
                                "boundary_curves {}\nboundary_loops {}\n",
                                features.size(), stats.face_touches, stats.inconsistent_tets,
                                stats.traced_curves, stats.closed_loops);
  log += count_summary(g);
  record(Stage::Extract, {artifact::kGraphRaw}, log);
}

void Pipeline::simplify() {
  const auto path = require(artifact::kGraphRaw, "extract");
  const TrussGraph raw = read_graph(path);
  SimplifyStats st;
  const TrussGraph g = michell::simplify(raw, config_.simplify, &st);
  write_graph(out_ / artifact::kGraph, g);
  std::string log = fmt::format("threshold {:.9e}\nshort_contractions {}\nhit_contractions {}\n"
                                "boundary_contractions {}\nremoved_elements {}\n"
                                "components_before {}\n",
                                st.threshold, st.short_contractions, st.hit_contractions,
                                st.boundary_contractions, st.removed_elements, raw.num_components());
  log += count_summary(g);
  record(Stage::Simplify, {artifact::kGraph}, log);
}

void Pipeline::geometry() {
  const auto path = require(artifact::kGraph, "simplify");
  const TrussGraph g = read_graph(path);
  int skipped = 0;
  const auto tm = emit_geometry(g, config_.radii, config_.geometry, &skipped);
  write_obj(out_ / artifact::kObj, tm);
  write_ply(out_ / artifact::kPly, tm);
  write_graph_lines(out_ / artifact::kLines, g);
  std::string log = fmt::format("vertices {}\ntriangles {}\nskipped_elements {}\n", tm.vertices.size(),
                                tm.triangles.size(), skipped);
  record(Stage::Geometry, {artifact::kObj, artifact::kPly, artifact::kLines}, log);
}

void Pipeline::verify() {
  const auto path = require(artifact::kGraph, "simplify");
  const TrussGraph g = read_graph(path);
  const auto model = build_truss_model(g, mesh(), config_.material, config_.bcs, config_.radii);
  const auto cap = capacity(model);
  write_verify_report(out_ / artifact::kReport, model, cap);
  std::string log = fmt::format("supported_nodes {}\nloaded_nodes {}\nfloating_nodes {}\n"
                                "relative_residual {:.3e}\nequilibrium_error {:.3e}\n"
                                "max_combined_stress {:.9e}\ncritical_element {}\nload_factor {:.9e}\n",
                                model.supports.size(), model.loads.size(), cap.frame.floating_nodes,
                                cap.frame.relative_residual, cap.frame.equilibrium_error,
                                cap.max_template_stress, cap.critical_element, cap.load_factor);
  record(Stage::Verify, {artifact::kReport}, log);
}

} // namespace michell
