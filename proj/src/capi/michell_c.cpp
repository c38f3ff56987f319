#include "michell/michell.h"

#include <exception>
#include <new>
#include <string>

#include "core/error.hpp"
#include "core/fixture_files.hpp"
#include "core/log.hpp"
#include "core/mesh_io.hpp"
#include "core/pipeline.hpp"

struct mt_mesh {
  michell::TetMesh mesh;
};

struct mt_pipeline {
  michell::Pipeline pipeline;
};

namespace {

thread_local std::string g_last_error;

mt_status status_of(michell::ErrorCode code) {
  using michell::ErrorCode;
  switch (code) {
  case ErrorCode::InvalidArgument: return MT_ERR_INVALID_ARGUMENT;
  case ErrorCode::Parse:
  case ErrorCode::Config: return MT_ERR_CONFIG;
  case ErrorCode::Numerical: return MT_ERR_NUMERICAL;
  case ErrorCode::MissingArtifact: return MT_ERR_MISSING_ARTIFACT;
  case ErrorCode::Io: return MT_ERR_IO;
  case ErrorCode::Internal: return MT_ERR_INTERNAL;
  }
  return MT_ERR_INTERNAL;
}

template <typename F> mt_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return MT_OK;
  } catch (const michell::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MT_ERR_INTERNAL;
  }
}

mt_status invalid(const char* what) {
  g_last_error = what;
  return MT_ERR_INVALID_ARGUMENT;
}

} // namespace

extern "C" {

const char* mt_last_error(void) { return g_last_error.c_str(); }

const char* mt_version(void) { return "1.0.0"; }

mt_status mt_set_log_level(const char* level) {
  if (!level)
    return invalid("level is null");
  if (!michell::set_log_level(level))
    return invalid("unknown log level");
  g_last_error.clear();
  return MT_OK;
}

mt_status mt_mesh_load(const char* path, const char* format, mt_mesh** out) {
  if (!path || !out)
    return invalid("path and out must not be null");
  *out = nullptr;
  return guarded([&] {
    const std::string fmt = format ? format : "auto";
    michell::MeshFormat f;
    if (fmt == "auto") {
      f = michell::detect_mesh_format(path);
    } else {
      auto parsed = michell::parse_mesh_format(fmt);
      if (!parsed)
        michell::fail(michell::ErrorCode::InvalidArgument, "unknown mesh format '" + fmt + "'");
      f = *parsed;
    }
    *out = new mt_mesh{michell::load_tet_mesh(path, f)};
  });
}

void mt_mesh_free(mt_mesh* mesh) { delete mesh; }

mt_status mt_mesh_counts(const mt_mesh* mesh, size_t* vertices, size_t* tets,
                         size_t* boundary_faces) {
  if (!mesh)
    return invalid("mesh is null");
  if (vertices)
    *vertices = mesh->mesh.num_vertices();
  if (tets)
    *tets = mesh->mesh.num_tets();
  if (boundary_faces)
    *boundary_faces = mesh->mesh.boundary().triangles.size();
  g_last_error.clear();
  return MT_OK;
}

mt_status mt_pipeline_open(const char* config_path, const char* out_dir, mt_pipeline** out) {
  if (!config_path || !out)
    return invalid("config_path and out must not be null");
  *out = nullptr;
  return guarded([&] {
    auto config = michell::PipelineConfig::load(config_path);
    std::optional<std::filesystem::path> dir;
    if (out_dir)
      dir = std::filesystem::path(out_dir);
    *out = new mt_pipeline{michell::Pipeline(std::move(config), dir)};
  });
}

mt_status mt_pipeline_run_stage(mt_pipeline* pipeline, const char* stage) {
  if (!pipeline || !stage)
    return invalid("pipeline and stage must not be null");
  auto s = michell::parse_stage(stage);
  if (!s)
    return invalid("unknown stage");
  return guarded([&] { pipeline->pipeline.run(*s); });
}

void mt_pipeline_free(mt_pipeline* pipeline) { delete pipeline; }

mt_status mt_write_fixture(const char* name, const char* dir) {
  if (!name || !dir)
    return invalid("name and dir must not be null");
  return guarded([&] { michell::write_fixture(name, dir); });
}

} // extern "C"
