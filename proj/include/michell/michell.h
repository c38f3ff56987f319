/* C interface to the michell truss pipeline. */
#ifndef MICHELL_MICHELL_H
#define MICHELL_MICHELL_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(MICHELL_BUILDING_LIBRARY)
#    define MT_API __declspec(dllexport)
#  else
#    define MT_API __declspec(dllimport)
#  endif
#else
#  define MT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mt_status {
  MT_OK = 0,
  MT_ERR_INVALID_ARGUMENT = 1,
  MT_ERR_CONFIG = 2,
  MT_ERR_NUMERICAL = 3,
  MT_ERR_MISSING_ARTIFACT = 4,
  MT_ERR_IO = 5,
  MT_ERR_INTERNAL = 6
} mt_status;

typedef struct mt_mesh mt_mesh;
typedef struct mt_pipeline mt_pipeline;

/* Message of the last failed call on this thread ("" if none). */
MT_API const char* mt_last_error(void);
MT_API const char* mt_version(void);

/* log level: trace, debug, info, warn, error, off */
MT_API mt_status mt_set_log_level(const char* level);

/* format: "auto", "medit" or "tetgen" (NULL means auto). */
MT_API mt_status mt_mesh_load(const char* path, const char* format, mt_mesh** out);
MT_API void mt_mesh_free(mt_mesh* mesh);
MT_API mt_status mt_mesh_counts(const mt_mesh* mesh, size_t* vertices, size_t* tets,
                                size_t* boundary_faces);

/* Opens a pipeline from a JSON config. out_dir may be NULL to use the
   directory named in the config. */
MT_API mt_status mt_pipeline_open(const char* config_path, const char* out_dir,
                                  mt_pipeline** out);
/* stage: fea, frames, param, extract, simplify, geometry, verify, pipeline */
MT_API mt_status mt_pipeline_run_stage(mt_pipeline* pipeline, const char* stage);
MT_API void mt_pipeline_free(mt_pipeline* pipeline);

/* Writes a named fixture (mesh plus config) into dir. Names: uniaxial_bar,
   bending_bar, cube. */
MT_API mt_status mt_write_fixture(const char* name, const char* dir);

#ifdef __cplusplus
}
#endif

#endif
