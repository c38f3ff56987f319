// Command-line front end: runs one stage (or the whole pipeline) from a JSON
// config through the C API.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "michell/michell.h"

namespace {

// 0 success, 2 config, 3 numerical, 4 missing artifact.
int exit_code(mt_status s) {
  switch (s) {
  case MT_OK: return 0;
  case MT_ERR_NUMERICAL: return 3;
  case MT_ERR_MISSING_ARTIFACT: return 4;
  case MT_ERR_CONFIG:
  case MT_ERR_INVALID_ARGUMENT:
  case MT_ERR_IO: return 2;
  case MT_ERR_INTERNAL: return 1;
  }
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stress-aligned truss generation from a tetrahedral mesh"};
  std::string config, stage = "pipeline", out, level = "warn";
  app.add_option("--config", config, "pipeline configuration (JSON)")->required();
  app.add_option("--stage", stage, "fea, frames, param, extract, simplify, geometry, verify or pipeline")
      ->check(CLI::IsMember({"fea", "frames", "param", "extract", "simplify", "geometry", "verify",
                             "pipeline"}));
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--log-level", level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.set_version_flag("--version", std::string(mt_version()));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  mt_set_log_level(level.c_str());
  mt_pipeline* p = nullptr;
  mt_status s = mt_pipeline_open(config.c_str(), out.empty() ? nullptr : out.c_str(), &p);
  if (s != MT_OK) {
    std::fprintf(stderr, "error: %s\n", mt_last_error());
    return exit_code(s);
  }
  s = mt_pipeline_run_stage(p, stage.c_str());
  if (s != MT_OK)
    std::fprintf(stderr, "error: %s\n", mt_last_error());
  mt_pipeline_free(p);
  return exit_code(s);
}
