#include <doctest.h>

#include <cstring>

#include "inkmotion/inkmotion.h"
#include "scene_fixture.hpp"

using nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  ink_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and last error") {
  CHECK(std::strcmp(ink_status_name(INK_OK), "OK") == 0);
  CHECK(std::strcmp(ink_status_name(INK_ERR_VALIDATION_ERROR), "ValidationError") == 0);
  CHECK(std::strcmp(ink_status_name(INK_ERR_STALE_SIMULATION), "StaleSimulation") == 0);
  CHECK(std::strcmp(ink_status_name(INK_ERR_INTERNAL), "Internal") == 0);

  ink_scene* scene = nullptr;
  CHECK(ink_scene_load("/definitely/missing.json", nullptr, 0, &scene) == INK_ERR_FILE_NOT_FOUND);
  CHECK(scene == nullptr);
  CHECK(std::string(ink_last_error()).find("/definitely/missing.json") != std::string::npos);
  CHECK(ink_scene_load(nullptr, nullptr, 0, &scene) == INK_ERR_INVALID_ARGUMENT);
  CHECK(ink_scene_run(nullptr, nullptr, nullptr, nullptr) == INK_ERR_INVALID_ARGUMENT);
}

TEST_CASE("scene load, run, simulate and flow") {
  testing::SceneFixture fx("capi_scene");
  const std::string path = (fx.dir / "scene.json").string();

  ink_scene* bad = nullptr;
  const char* invalid[] = {"strokes[0].strength=\"x\""};
  CHECK(ink_scene_load(path.c_str(), invalid, 1, &bad) == INK_ERR_VALIDATION_ERROR);
  CHECK(std::string(ink_last_error_path()) == "strokes[0].strength");

  ink_scene* scene = nullptr;
  const char* sets[] = {"sim.frame_count=2"};
  REQUIRE(ink_scene_load(path.c_str(), sets, 1, &scene) == INK_OK);
  CHECK(std::string(ink_last_error()).empty());

  int calls = 0;
  char* report = nullptr;
  REQUIRE(ink_scene_run(
              scene, [](const char*, int, int, void* user) { ++*static_cast<int*>(user); }, &calls, &report) == INK_OK);
  const json r = json::parse(take(report));
  CHECK(r["frames"] == 2);
  CHECK(r["flow_files"].size() == 2);
  CHECK(r["settings"]["sim"]["frame_count"] == 2);
  CHECK(calls > 0);

  char* snaps = nullptr;
  REQUIRE(ink_scene_simulate(scene, &snaps) == INK_OK);
  CHECK(json::parse(take(snaps)).size() == 3);

  const std::string flo = (fx.dir / "f.flo").string();
  REQUIRE(ink_scene_write_flow(scene, 2, flo.c_str()) == INK_OK);
  CHECK(testing::read_file(flo) == testing::read_file(fx.dir / "out/flow_0002.flo"));
  CHECK(ink_scene_write_flow(scene, 3, flo.c_str()) == INK_ERR_INVALID_ARGUMENT);
  CHECK(ink_scene_write_flow(scene, 0, flo.c_str()) == INK_ERR_INVALID_ARGUMENT);
  ink_scene_free(scene);
}

TEST_CASE("unstable scene surfaces NonFiniteState") {
  testing::SceneFixture fx("capi_unstable");
  const std::string path = (fx.dir / "scene.json").string();
  const char* sets[] = {"bodies[0].material={\"mu\":1e9,\"lambda\":1e9}", "sim.dt=0.02", "sim.fps=1"};
  ink_scene* scene = nullptr;
  REQUIRE(ink_scene_load(path.c_str(), sets, 3, &scene) == INK_OK);
  CHECK(ink_scene_run(scene, nullptr, nullptr, nullptr) == INK_ERR_NON_FINITE_STATE);
  CHECK(std::string(ink_last_error()).find("frame 1") != std::string::npos);
  ink_scene_free(scene);
}

TEST_CASE("mesh build, json and wireframe") {
  testing::TempDir dir("capi_mesh");
  testing::write_mask(testing::disk_mask(64, 32, 32, 20), dir / "mask.png");
  testing::write_mask(inkmotion::Mask(8, 8), dir / "empty.png");
  const std::string mask = (dir / "mask.png").string();

  const ink_mesh_params defaults = ink_mesh_default_params();
  CHECK(defaults.spacing == 12.0);
  CHECK(defaults.min_angle == 20.0);

  ink_mesh* mesh = nullptr;
  ink_mesh_params params = defaults;
  params.spacing = 4;
  params.max_area = 20;
  REQUIRE(ink_mesh_build(mask.c_str(), &params, &mesh) == INK_OK);
  CHECK(ink_mesh_vertex_count(mesh) > 20);
  char* text = nullptr;
  REQUIRE(ink_mesh_to_json(mesh, &text) == INK_OK);
  const json j = json::parse(take(text));
  CHECK(j["triangles"].size() == ink_mesh_triangle_count(mesh));
  CHECK(j["vertices"].size() == ink_mesh_vertex_count(mesh));
  const std::string png = (dir / "wire.png").string();
  REQUIRE(ink_mesh_write_wireframe(mesh, png.c_str()) == INK_OK);
  CHECK(inkmotion::read_png(png).channels == 3);
  ink_mesh_free(mesh);

  ink_mesh* empty = nullptr;
  CHECK(ink_mesh_build((dir / "empty.png").string().c_str(), nullptr, &empty) == INK_ERR_EMPTY_MASK);
  CHECK(empty == nullptr);
  params.min_angle = 45;
  CHECK(ink_mesh_build(mask.c_str(), &params, &empty) == INK_ERR_INVALID_ARGUMENT);
}

TEST_CASE("warp files") {
  testing::TempDir dir("capi_warp");
  write_png(testing::ring_image(32, 16, 16, 8), dir / "in.png");
  write_flo_file(inkmotion::FlowField(32, 32), dir / "zero.flo");
  write_flo_file(inkmotion::FlowField(16, 32), dir / "narrow.flo");
  const auto in = (dir / "in.png").string(), out = (dir / "out.png").string();
  REQUIRE(ink_warp_files(in.c_str(), (dir / "zero.flo").string().c_str(), out.c_str(), 10, 0) == INK_OK);
  CHECK(testing::read_file(out) == testing::read_file(in));
  CHECK(ink_warp_files(in.c_str(), (dir / "narrow.flo").string().c_str(), out.c_str(), 10, 0) ==
        INK_ERR_DIMENSION_MISMATCH);
  CHECK(ink_warp_files(in.c_str(), (dir / "zero.flo").string().c_str(), out.c_str(), -1, 0) ==
        INK_ERR_INVALID_ARGUMENT);
  CHECK(ink_warp_files(in.c_str(), (dir / "zero.flo").string().c_str(), out.c_str(), 10, 2) ==
        INK_ERR_INVALID_ARGUMENT);
  CHECK(ink_warp_files((dir / "missing.png").string().c_str(), (dir / "zero.flo").string().c_str(), out.c_str(), 10,
                       0) == INK_ERR_FILE_NOT_FOUND);
}

TEST_CASE("server start and stop") {
  ink_server* server = nullptr;
  unsigned short port = 0;
  REQUIRE(ink_server_start("127.0.0.1", 0, &server, &port) == INK_OK);
  CHECK(port != 0);
  ink_server* clash = nullptr;
  CHECK(ink_server_start("127.0.0.1", port, &clash, nullptr) == INK_ERR_IO_FAILURE);
  ink_server_stop(server);
  CHECK(ink_server_start("not an address", 0, &clash, nullptr) == INK_ERR_INVALID_ARGUMENT);
}
