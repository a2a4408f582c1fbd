#ifndef INKMOTION_INKMOTION_H
#define INKMOTION_INKMOTION_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define INK_API __declspec(dllexport)
#else
#define INK_API __attribute__((visibility("default")))
#endif

/* Every fallible call returns a status. On failure the calling thread's
   ink_last_error() describes it until the next call on that thread. */
typedef enum ink_status {
  INK_OK = 0,
  INK_ERR_INVALID_ARGUMENT,
  INK_ERR_EMPTY_MASK,
  INK_ERR_SPACING_TOO_COARSE,
  INK_ERR_DEGENERATE_BOUNDARY,
  INK_ERR_REFINEMENT_DIVERGED,
  INK_ERR_INVALID_POISSON,
  INK_ERR_NON_FINITE_STATE,
  INK_ERR_WRONG_RIG_KIND,
  INK_ERR_BAD_MAGIC,
  INK_ERR_TRUNCATED_STREAM,
  INK_ERR_DIMENSION_OVERFLOW,
  INK_ERR_DIMENSION_MISMATCH,
  INK_ERR_IO_FAILURE,
  INK_ERR_PARSE_ERROR,
  INK_ERR_VALIDATION_ERROR,
  INK_ERR_FILE_NOT_FOUND,
  INK_ERR_BAD_IMAGE,
  INK_ERR_STALE_REVISION,
  INK_ERR_STALE_SIMULATION,
  INK_ERR_INTERNAL
} ink_status;

INK_API const char* ink_status_name(ink_status status);
INK_API const char* ink_last_error(void);
/* JSON path of the last ValidationError, "" otherwise. */
INK_API const char* ink_last_error_path(void);

/* Strings returned through char** out-parameters are owned by the caller. */
INK_API void ink_string_free(char* s);

/* ---- scenes ---- */

typedef struct ink_scene ink_scene;

/* Loads, overrides ("dotted.path=value") and validates a scene file,
   including its image and masks. */
INK_API ink_status ink_scene_load(const char* path, const char* const* overrides, size_t override_count,
                                  ink_scene** out);
INK_API void ink_scene_free(ink_scene* scene);

/* Stage is "mesh", "simulate", "flow" or "imaging"; frame is 1-based. */
typedef void (*ink_progress_fn)(const char* stage, int frame, int total, void* user);

/* Runs the full pipeline and writes all configured artifacts. report_json
   (optional) receives the report. */
INK_API ink_status ink_scene_run(ink_scene* scene, ink_progress_fn progress, void* user, char** report_json);

/* Simulates and returns all snapshots as JSON:
   [{"time": t, "bodies": [[[x, y], ...], ...]}, ...] */
INK_API ink_status ink_scene_simulate(ink_scene* scene, char** snapshots_json);

/* Simulates up to `frame` (1..frame_count) and writes that frame's merged
   flow as a .flo file. */
INK_API ink_status ink_scene_write_flow(ink_scene* scene, int frame, const char* flo_path);

/* ---- meshes ---- */

typedef struct ink_mesh ink_mesh;

typedef struct ink_mesh_params {
  double spacing;   /* boundary sample spacing, pixels */
  double max_area;  /* triangle area bound, square pixels */
  double min_angle; /* degrees */
} ink_mesh_params;

INK_API ink_mesh_params ink_mesh_default_params(void);
INK_API ink_status ink_mesh_build(const char* mask_path, const ink_mesh_params* params, ink_mesh** out);
INK_API void ink_mesh_free(ink_mesh* mesh);
INK_API size_t ink_mesh_vertex_count(const ink_mesh* mesh);
INK_API size_t ink_mesh_triangle_count(const ink_mesh* mesh);
/* {"vertices", "triangles", "boundary_edges", "area"} */
INK_API ink_status ink_mesh_to_json(const ink_mesh* mesh, char** json);
INK_API ink_status ink_mesh_write_wireframe(const ink_mesh* mesh, const char* png_path);

/* ---- images ---- */

/* Forward-warps an image by a .flo field with flow-magnitude weights. */
INK_API ink_status ink_warp_files(const char* image_path, const char* flo_path, const char* out_path, double alpha,
                                  double background);

/* ---- session server ---- */

typedef struct ink_server ink_server;

/* Serves the session protocol over WebSocket on host:port on a background
   thread. Port 0 picks a free port; bound_port (optional) receives it. */
INK_API ink_status ink_server_start(const char* host, unsigned short port, ink_server** out,
                                    unsigned short* bound_port);
/* Stops serving and frees the server. */
INK_API void ink_server_stop(ink_server* server);

#ifdef __cplusplus
}
#endif

#endif
