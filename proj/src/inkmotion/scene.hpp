#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "inkmotion/dynamics.hpp"
#include "inkmotion/flowfield.hpp"
#include "inkmotion/geometry.hpp"
#include "inkmotion/imaging.hpp"

namespace inkmotion {

struct BodySpec {
  std::string mask;
  Material material;
  MeshParams mesh;
};

// Rig vertices are addressed by a point in image space: the nearest rest
// vertex of the body, or every vertex within `radius` when radius > 0.
struct RigSpec {
  int body = 0;
  RigKind kind = RigKind::Fixed;
  Vec2 at = Vec2::Zero();
  double radius = 0.0;
  double amplitude = 0.0;
  double frequency = 1.0;
  Vec2 direction = Vec2::UnitY();
  std::vector<Keyframe> keyframes;
};

enum class WarpSource { Sketch, Image };

struct OutputSpec {
  std::string dir = "out";
  bool emit_flows = true;
  bool emit_sketches = true;
  bool emit_warped = true;
  double blur_sigma = 1.0;
  double alpha = 10.0;
  // One value for every channel or one per channel. Defaults to white for
  // sketches and black for images.
  std::vector<float> background;
  WarpSource warp_source = WarpSource::Sketch;
};

struct Scene {
  // Relative paths in the document resolve against this directory.
  std::filesystem::path base_dir;
  std::string image;
  std::vector<BodySpec> bodies;
  std::vector<EnergyStroke> strokes;
  std::vector<RigSpec> rigs;
  SimParams sim;
  OutputSpec output;
  SketchParams sketch;

  std::filesystem::path resolve(const std::string& relative) const;
  std::vector<float> background() const;
};

// Strict structural validation: unknown keys, wrong types and violated
// invariants raise ValidationError naming the JSON path. Files are not
// touched.
Scene parse_scene(const nlohmann::json& document);

nlohmann::json parse_json_text(const std::string& text);

// Applies one "dotted.path[0].key=value" override. The value is read as JSON
// when it parses, as a plain string otherwise.
void apply_override(nlohmann::json& document, const std::string& assignment);

// Reads, overrides and validates a scene file, then checks that every
// referenced file exists. base_dir is the scene file's directory.
Scene load_scene_file(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

struct SceneAssets {
  ImageBuffer image;
  std::vector<Mask> masks;
};

SceneAssets load_assets(const Scene& scene);

// Masks must match the image size (DimensionMismatch otherwise).
void check_asset_dimensions(const SceneAssets& assets);

struct PreparedScene {
  SimulationSetup setup;
  std::vector<std::vector<int>> rigged_vertices;  // per rig spec
};

// Every rig point must fall on a foreground pixel of its body's mask
// (ValidationError at "rigs[i].at").
void validate_rig_anchors(const Scene& scene, const SceneAssets& assets);

// Meshes every body and resolves rigs. A rig point outside its mask is a
// ValidationError at "rigs[i].at".
PreparedScene prepare(const Scene& scene, const SceneAssets& assets);

FlowField frame_flow(const PreparedScene& prepared, const Snapshot& snapshot, int width, int height);

struct StageTimings {
  double mesh = 0.0;
  double simulate = 0.0;
  double flow = 0.0;
  double imaging = 0.0;
};

struct PipelineReport {
  int frames = 0;
  std::vector<std::string> flow_files;
  std::vector<std::string> image_files;
  std::vector<double> max_flow;  // per frame, pixels
  std::vector<std::size_t> vertex_counts;
  std::vector<std::size_t> triangle_counts;
  std::size_t overlap_pixels = 0;
  StageTimings seconds;
  std::filesystem::path output_dir;
  nlohmann::json settings;  // echo of the simulation and output parameters

  nlohmann::json to_json() const;
};

using ProgressFn = std::function<void(const std::string& stage, int frame, int total)>;

// Writes flows, the blurred frame 0 sketch, warped frames and report.json for
// already simulated snapshots. Shared by the headless pipeline and session
// export so both produce the same bytes.
PipelineReport export_artifacts(const Scene& scene, const SceneAssets& assets, const PreparedScene& prepared,
                                const std::vector<Snapshot>& snapshots, PipelineReport report = {},
                                const ProgressFn& progress = {});

PipelineReport run_pipeline(const Scene& scene, const ProgressFn& progress = {});

// {"vertices": [[x, y], ...], "triangles": [[a, b, c], ...],
//  "boundary_edges": [[a, b], ...], "area": A}
nlohmann::json mesh_to_json(const TriMesh& mesh);

// Snapshots as {"time": t, "bodies": [[[x, y], ...], ...]} objects.
nlohmann::json snapshots_to_json(const std::vector<Snapshot>& snapshots);

}  // namespace inkmotion
