/* Exercises the shared library through the public C header only. */
#include <stdio.h>
#include <string.h>

#include "michell/michell.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

int main(int argc, char** argv) {
  char path[1024];
  const char* dir = argc > 1 ? argv[1] : "capi_work";
  mt_mesh* mesh = NULL;
  mt_pipeline* p = NULL;
  size_t nv = 0, nt = 0, nf = 0;

  EXPECT(strcmp(mt_version(), "1.0.0") == 0);
  EXPECT(mt_set_log_level("off") == MT_OK);
  EXPECT(mt_set_log_level("loud") == MT_ERR_INVALID_ARGUMENT);

  EXPECT(mt_write_fixture("cube", dir) == MT_OK);
  EXPECT(mt_write_fixture("sphere", dir) == MT_ERR_INVALID_ARGUMENT);
  EXPECT(strlen(mt_last_error()) > 0);

  snprintf(path, sizeof path, "%s/cube.mesh", dir);
  EXPECT(mt_mesh_load(path, NULL, &mesh) == MT_OK);
  EXPECT(mt_mesh_counts(mesh, &nv, &nt, &nf) == MT_OK);
  EXPECT(nv == 343 && nt == 1296 && nf == 432);
  mt_mesh_free(mesh);
  EXPECT(mt_mesh_counts(NULL, &nv, &nt, &nf) == MT_ERR_INVALID_ARGUMENT);
  mesh = NULL;
  snprintf(path, sizeof path, "%s/absent.mesh", dir);
  EXPECT(mt_mesh_load(path, "medit", &mesh) == MT_ERR_IO);
  EXPECT(mesh == NULL);

  snprintf(path, sizeof path, "%s/cube.json", dir);
  EXPECT(mt_pipeline_open(path, NULL, &p) == MT_OK);
  EXPECT(mt_pipeline_run_stage(p, "extract") == MT_ERR_MISSING_ARTIFACT);
  EXPECT(strcmp(mt_last_error(), "missing artifact: param") == 0);
  EXPECT(mt_pipeline_run_stage(p, "bogus") == MT_ERR_INVALID_ARGUMENT);
  EXPECT(mt_pipeline_run_stage(p, "fea") == MT_OK);
  EXPECT(mt_pipeline_run_stage(p, "frames") == MT_OK);
  mt_pipeline_free(p);
  mt_pipeline_free(NULL);

  snprintf(path, sizeof path, "%s/nothing.json", dir);
  p = NULL;
  EXPECT(mt_pipeline_open(path, NULL, &p) == MT_ERR_CONFIG);
  EXPECT(p == NULL);

  if (failures)
    fprintf(stderr, "%d failure(s)\n", failures);
  return failures ? 1 : 0;
}
