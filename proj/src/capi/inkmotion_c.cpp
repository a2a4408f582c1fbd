#include "inkmotion/inkmotion.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "inkmotion/error.hpp"
#include "inkmotion/flowfield.hpp"
#include "inkmotion/imaging.hpp"
#include "inkmotion/scene.hpp"
#include "inkmotion/server.hpp"

using namespace inkmotion;

struct ink_scene {
  Scene scene;
};

struct ink_mesh {
  TriMesh mesh;
  Mask mask;
};

struct ink_server {
  service::Server server;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_path;

ink_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return INK_ERR_INVALID_ARGUMENT;
    case ErrorCode::EmptyMask: return INK_ERR_EMPTY_MASK;
    case ErrorCode::SpacingTooCoarse: return INK_ERR_SPACING_TOO_COARSE;
    case ErrorCode::DegenerateBoundary: return INK_ERR_DEGENERATE_BOUNDARY;
    case ErrorCode::RefinementDiverged: return INK_ERR_REFINEMENT_DIVERGED;
    case ErrorCode::InvalidPoisson: return INK_ERR_INVALID_POISSON;
    case ErrorCode::NonFiniteState: return INK_ERR_NON_FINITE_STATE;
    case ErrorCode::WrongRigKind: return INK_ERR_WRONG_RIG_KIND;
    case ErrorCode::BadMagic: return INK_ERR_BAD_MAGIC;
    case ErrorCode::TruncatedStream: return INK_ERR_TRUNCATED_STREAM;
    case ErrorCode::DimensionOverflow: return INK_ERR_DIMENSION_OVERFLOW;
    case ErrorCode::DimensionMismatch: return INK_ERR_DIMENSION_MISMATCH;
    case ErrorCode::IoFailure: return INK_ERR_IO_FAILURE;
    case ErrorCode::ParseError: return INK_ERR_PARSE_ERROR;
    case ErrorCode::ValidationError: return INK_ERR_VALIDATION_ERROR;
    case ErrorCode::FileNotFound: return INK_ERR_FILE_NOT_FOUND;
    case ErrorCode::BadImage: return INK_ERR_BAD_IMAGE;
    case ErrorCode::StaleRevision: return INK_ERR_STALE_REVISION;
    case ErrorCode::StaleSimulation: return INK_ERR_STALE_SIMULATION;
  }
  return INK_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into a status and the thread's last
// error.
template <typename F>
ink_status guarded(F&& body) {
  g_last_error.clear();
  g_last_path.clear();
  try {
    body();
    return INK_OK;
  } catch (const ValidationError& e) {
    g_last_error = e.what();
    g_last_path = e.path();
    return INK_ERR_VALIDATION_ERROR;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return INK_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return INK_ERR_INTERNAL;
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, message);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Scene assets plus rig anchor checks, so that no stage starts on an invalid
// scene.
SceneAssets checked_assets(const Scene& scene) {
  SceneAssets assets = load_assets(scene);
  validate_rig_anchors(scene, assets);
  return assets;
}

}  // namespace

extern "C" {

const char* ink_status_name(ink_status status) {
  if (status == INK_OK) return "OK";
  if (status == INK_ERR_INTERNAL) return "Internal";
  if (status > INK_OK && status < INK_ERR_INTERNAL) return to_string(static_cast<ErrorCode>(status - 1));
  return "Unknown";
}

const char* ink_last_error(void) { return g_last_error.c_str(); }

const char* ink_last_error_path(void) { return g_last_path.c_str(); }

void ink_string_free(char* s) { std::free(s); }

ink_status ink_scene_load(const char* path, const char* const* overrides, size_t override_count, ink_scene** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    require(override_count == 0 || overrides, "overrides is null");
    *out = nullptr;
    std::vector<std::string> sets;
    for (size_t i = 0; i < override_count; ++i) {
      require(overrides[i] != nullptr, "override is null");
      sets.emplace_back(overrides[i]);
    }
    auto handle = std::make_unique<ink_scene>();
    handle->scene = load_scene_file(path, sets);
    checked_assets(handle->scene);
    *out = handle.release();
  });
}

void ink_scene_free(ink_scene* scene) { delete scene; }

ink_status ink_scene_run(ink_scene* scene, ink_progress_fn progress, void* user, char** report_json) {
  return guarded([&] {
    require(scene, "scene is null");
    ProgressFn fn;
    if (progress) fn = [&](const std::string& stage, int frame, int total) { progress(stage.c_str(), frame, total, user); };
    const PipelineReport report = run_pipeline(scene->scene, fn);
    if (report_json) *report_json = dup_string(report.to_json().dump(2));
  });
}

ink_status ink_scene_simulate(ink_scene* scene, char** snapshots_json) {
  return guarded([&] {
    require(scene && snapshots_json, "scene and snapshots_json are required");
    const SceneAssets assets = checked_assets(scene->scene);
    const PreparedScene prepared = prepare(scene->scene, assets);
    *snapshots_json = dup_string(snapshots_to_json(simulate(prepared.setup)).dump());
  });
}

ink_status ink_scene_write_flow(ink_scene* scene, int frame, const char* flo_path) {
  return guarded([&] {
    require(scene && flo_path, "scene and flo_path are required");
    const int frames = scene->scene.sim.frame_count;
    if (frame < 1 || frame > frames) {
      throw Error(ErrorCode::InvalidArgument,
                  "frame " + std::to_string(frame) + " is outside 1.." + std::to_string(frames));
    }
    const SceneAssets assets = checked_assets(scene->scene);
    const PreparedScene prepared = prepare(scene->scene, assets);
    const auto snapshots = simulate(prepared.setup, [&](int k, const Snapshot&) { return k < frame; });
    const FlowField flow = frame_flow(prepared, snapshots.at(frame), assets.image.width, assets.image.height);
    write_flo_file(flow, flo_path);
  });
}

ink_mesh_params ink_mesh_default_params(void) {
  const MeshParams p;
  return ink_mesh_params{p.spacing, p.max_area, p.min_angle};
}

ink_status ink_mesh_build(const char* mask_path, const ink_mesh_params* params, ink_mesh** out) {
  return guarded([&] {
    require(mask_path && out, "mask_path and out are required");
    *out = nullptr;
    MeshParams p;
    if (params) {
      p.spacing = params->spacing;
      p.max_area = params->max_area;
      p.min_angle = params->min_angle;
    }
    auto handle = std::make_unique<ink_mesh>();
    handle->mask = mask_from_image(read_png(mask_path));
    handle->mesh = build_mesh(handle->mask, p);
    *out = handle.release();
  });
}

void ink_mesh_free(ink_mesh* mesh) { delete mesh; }

size_t ink_mesh_vertex_count(const ink_mesh* mesh) { return mesh ? mesh->mesh.vertex_count() : 0; }

size_t ink_mesh_triangle_count(const ink_mesh* mesh) { return mesh ? mesh->mesh.triangle_count() : 0; }

ink_status ink_mesh_to_json(const ink_mesh* mesh, char** json) {
  return guarded([&] {
    require(mesh && json, "mesh and json are required");
    *json = dup_string(mesh_to_json(mesh->mesh).dump());
  });
}

ink_status ink_mesh_write_wireframe(const ink_mesh* mesh, const char* png_path) {
  return guarded([&] {
    require(mesh && png_path, "mesh and png_path are required");
    write_png(render_wireframe(mesh->mesh, mesh->mask), png_path);
  });
}

ink_status ink_warp_files(const char* image_path, const char* flo_path, const char* out_path, double alpha,
                          double background) {
  return guarded([&] {
    require(image_path && flo_path && out_path, "image, flow and output paths are required");
    require(background >= 0.0 && background <= 1.0, "background must lie in [0, 1]");
    const ImageBuffer image = read_png(image_path);
    const FlowField flow = read_flo_file(flo_path);
    const float bg[1] = {static_cast<float>(background)};
    const ImageBuffer warped = forward_warp(image, flow, flow_magnitude_weights(flow), alpha, bg);
    write_png(warped, out_path);
  });
}

ink_status ink_server_start(const char* host, unsigned short port, ink_server** out, unsigned short* bound_port) {
  return guarded([&] {
    require(out, "out is required");
    *out = nullptr;
    auto handle = std::make_unique<ink_server>();
    const unsigned short bound = handle->server.start(host ? host : "127.0.0.1", port);
    if (bound_port) *bound_port = bound;
    *out = handle.release();
  });
}

void ink_server_stop(ink_server* server) {
  if (!server) return;
  server->server.stop();
  delete server;
}

}  // extern "C"
