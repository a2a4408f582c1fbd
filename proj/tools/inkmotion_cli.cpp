#include <CLI11.hpp>
#include <json.hpp>

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "inkmotion/inkmotion.h"

namespace {

// 0 success, 1 bad input, 2 runtime failure.
int exit_code(ink_status status) {
  switch (status) {
    case INK_OK: return 0;
    case INK_ERR_NON_FINITE_STATE:
    case INK_ERR_REFINEMENT_DIVERGED:
    case INK_ERR_IO_FAILURE:
    case INK_ERR_INTERNAL:
      return 2;
    default:
      return 1;
  }
}

int fail(ink_status status) {
  std::cerr << "error: " << ink_status_name(status) << ": " << ink_last_error() << "\n";
  return exit_code(status);
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { ink_string_free(p); }
};

struct SceneHandle {
  ink_scene* p = nullptr;
  ~SceneHandle() { ink_scene_free(p); }
};

struct MeshHandle {
  ink_mesh* p = nullptr;
  ~MeshHandle() { ink_mesh_free(p); }
};

ink_status load_scene(const std::string& path, const std::vector<std::string>& sets, SceneHandle& scene) {
  std::vector<const char*> argv;
  for (const auto& s : sets) argv.push_back(s.c_str());
  return ink_scene_load(path.c_str(), argv.data(), argv.size(), &scene.p);
}

int write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: IoFailure: cannot write " << path.string() << "\n";
    return 2;
  }
  return 0;
}

void print_progress(const char* stage, int frame, int total, void*) {
  std::fprintf(stderr, "%s %d/%d\n", stage, frame, total);
}

int cmd_run(const std::string& scene_path, const std::vector<std::string>& sets) {
  SceneHandle scene;
  if (const ink_status s = load_scene(scene_path, sets, scene)) return fail(s);
  OwnedString report;
  if (const ink_status s = ink_scene_run(scene.p, print_progress, nullptr, &report.p)) return fail(s);
  const auto doc = nlohmann::json::parse(report.p);
  std::cout << (std::filesystem::path(doc["output_dir"].get<std::string>()) / "report.json").string() << "\n";
  return 0;
}

int cmd_mesh(const std::string& mask, const std::filesystem::path& out, const ink_mesh_params& params) {
  std::filesystem::path json_path = out, png_path = out;
  if (out.extension() == ".png") {
    json_path.replace_extension(".json");
  } else {
    png_path.replace_extension(".png");
  }
  MeshHandle mesh;
  if (const ink_status s = ink_mesh_build(mask.c_str(), &params, &mesh.p)) return fail(s);
  OwnedString json;
  if (const ink_status s = ink_mesh_to_json(mesh.p, &json.p)) return fail(s);
  if (const int rc = write_text(json_path, std::string(json.p) + "\n")) return rc;
  if (const ink_status s = ink_mesh_write_wireframe(mesh.p, png_path.c_str())) return fail(s);
  std::cerr << ink_mesh_vertex_count(mesh.p) << " vertices, " << ink_mesh_triangle_count(mesh.p) << " triangles\n";
  std::cout << json_path.string() << "\n" << png_path.string() << "\n";
  return 0;
}

int cmd_simulate(const std::string& scene_path, const std::filesystem::path& out) {
  SceneHandle scene;
  if (const ink_status s = load_scene(scene_path, {}, scene)) return fail(s);
  OwnedString json;
  if (const ink_status s = ink_scene_simulate(scene.p, &json.p)) return fail(s);
  if (const int rc = write_text(out, std::string(json.p) + "\n")) return rc;
  std::cout << out.string() << "\n";
  return 0;
}

int cmd_flow(const std::string& scene_path, int frame, const std::string& out) {
  SceneHandle scene;
  if (const ink_status s = load_scene(scene_path, {}, scene)) return fail(s);
  if (const ink_status s = ink_scene_write_flow(scene.p, frame, out.c_str())) return fail(s);
  std::cout << out << "\n";
  return 0;
}

int cmd_warp(const std::string& image, const std::string& flow, const std::string& out, double alpha,
             double background) {
  if (const ink_status s = ink_warp_files(image.c_str(), flow.c_str(), out.c_str(), alpha, background)) return fail(s);
  std::cout << out << "\n";
  return 0;
}

int cmd_serve(int port) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  // Block before the server threads start so they inherit the mask.
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  ink_server* server = nullptr;
  unsigned short bound = 0;
  if (const ink_status s = ink_server_start("127.0.0.1", static_cast<unsigned short>(port), &server, &bound)) {
    return fail(s);
  }
  std::cout << "listening on ws://127.0.0.1:" << bound << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  ink_server_stop(server);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-driven sketch animation: meshes, simulation, optical flow and warped frames."};
  app.require_subcommand(1);
  int rc = 0;

  std::string scene_path;
  std::vector<std::string> sets;
  auto* run = app.add_subcommand("run", "Run the full pipeline for a scene and write its artifacts");
  run->add_option("--scene", scene_path, "Scene JSON file")->required()->type_name("PATH");
  run->add_option("--set", sets, "Override a scene field, e.g. sim.frame_count=8 (repeatable)")
      ->type_name("KEY=VALUE")
      ->allow_extra_args(false);
  run->callback([&] { rc = cmd_run(scene_path, sets); });

  std::string mask_path, mesh_out;
  ink_mesh_params params = ink_mesh_default_params();
  auto* mesh = app.add_subcommand("mesh", "Mesh a mask; writes mesh JSON and a wireframe PNG next to it");
  mesh->add_option("--mask", mask_path, "Mask PNG (foreground = gray >= 128)")->required()->type_name("PATH");
  mesh->add_option("--out", mesh_out, "Output JSON path; the wireframe PNG uses the same stem")
      ->required()
      ->type_name("PATH");
  mesh->add_option("--spacing", params.spacing, "Boundary sample spacing in pixels")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mesh->add_option("--max-area", params.max_area, "Maximum triangle area in square pixels")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  mesh->add_option("--min-angle", params.min_angle, "Minimum triangle angle in degrees, 0 to 28")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 28.0));
  mesh->callback([&] { rc = cmd_mesh(mask_path, mesh_out, params); });

  std::string image_path, flow_path, warp_out;
  double alpha = 10.0, background = 0.0;
  auto* warp = app.add_subcommand("warp", "Forward-warp an image by a .flo field");
  warp->add_option("--image", image_path, "Input PNG")->required()->type_name("PATH");
  warp->add_option("--flow", flow_path, "Flow field (.flo, pixels)")->required()->type_name("PATH");
  warp->add_option("--out", warp_out, "Output PNG")->required()->type_name("PATH");
  warp->add_option("--alpha", alpha, "Softmax sharpness over flow magnitude in pixels, >= 0")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  warp->add_option("--background", background, "Intensity for pixels nothing lands on, 0 (black) to 1 (white)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  warp->callback([&] { rc = cmd_warp(image_path, flow_path, warp_out, alpha, background); });

  std::string snapshots_out;
  auto* simulate = app.add_subcommand("simulate", "Simulate a scene and write vertex snapshots as JSON");
  simulate->add_option("--scene", scene_path, "Scene JSON file")->required()->type_name("PATH");
  simulate->add_option("--snapshots", snapshots_out, "Output JSON: [{time (s), bodies: [[[x, y] px]]}]")
      ->required()
      ->type_name("PATH");
  simulate->callback([&] { rc = cmd_simulate(scene_path, snapshots_out); });

  int frame = 1;
  std::string flow_out;
  auto* flow = app.add_subcommand("flow", "Write the merged flow of one frame as .flo");
  flow->add_option("--scene", scene_path, "Scene JSON file")->required()->type_name("PATH");
  flow->add_option("--frame", frame, "Frame index, 1 to sim.frame_count")->required()->check(CLI::PositiveNumber);
  flow->add_option("--out", flow_out, "Output .flo path (displacements in pixels)")->required()->type_name("PATH");
  flow->callback([&] { rc = cmd_flow(scene_path, frame, flow_out); });

  int port = 8765;
  auto* serve = app.add_subcommand("serve", "Serve editing sessions over WebSocket on 127.0.0.1");
  serve->add_option("--port", port, "TCP port, 0 picks a free one")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->callback([&] { rc = cmd_serve(port); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return rc;
}
