#include "inkmotion/scene.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "inkmotion/error.hpp"

namespace inkmotion {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path.empty() ? "$" : path, "expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  require_object(j, path);
  const std::set<std::string> known(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ValidationError(join(path, item.key()), "unknown key");
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path, "expected a finite number");
  return v;
}

double number(const json& obj, const char* key, const std::string& path, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return as_number(*it, join(path, key));
}

bool boolean(const json& obj, const char* key, const std::string& path, bool fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ValidationError(join(path, key), "expected true or false");
  return it->get<bool>();
}

std::string string(const json& obj, const char* key, const std::string& path, const std::string* fallback = nullptr) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    throw ValidationError(join(path, key), "required");
  }
  if (!it->is_string()) throw ValidationError(join(path, key), "expected a string");
  return it->get<std::string>();
}

Vec2 as_point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ValidationError(path, "expected [x, y]");
  return Vec2(as_number(j[0], index_path(path, 0)), as_number(j[1], index_path(path, 1)));
}

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ValidationError(path, message);
}

Material parse_material(const json& j, const std::string& path, double density) {
  check_keys(j, path, {"E", "nu", "mu", "lambda"});
  const bool young = j.contains("E") || j.contains("nu");
  const bool lame = j.contains("mu") || j.contains("lambda");
  require(!(young && lame), path, "give either E and nu or mu and lambda, not both");
  Material m;
  m.density = density;
  if (lame) {
    require(j.contains("mu") && j.contains("lambda"), path, "mu and lambda must be given together");
    m.mu = as_number(j["mu"], join(path, "mu"));
    m.lambda = as_number(j["lambda"], join(path, "lambda"));
    require(m.mu > 0, join(path, "mu"), "must be positive");
    require(m.lambda >= 0, join(path, "lambda"), "must be non-negative");
    return m;
  }
  const double E = number(j, "E", path, 2000.0);
  const double nu = number(j, "nu", path, 0.3);
  require(E > 0, join(path, "E"), "must be positive");
  require(nu >= 0, join(path, "nu"), "must be non-negative");
  require(nu < 0.5, join(path, "nu"), "must be below 0.5 (incompressible limit)");
  return material_from_young_poisson(E, nu, density);
}

BodySpec parse_body(const json& j, const std::string& path) {
  check_keys(j, path, {"mask", "material", "density", "mesh"});
  BodySpec body;
  body.mask = string(j, "mask", path);
  const double density = number(j, "density", path, 1.0);
  require(density > 0, join(path, "density"), "must be positive");
  body.material = parse_material(j.value("material", json::object()), join(path, "material"), density);
  if (j.contains("mesh")) {
    const std::string mp = join(path, "mesh");
    const json& m = j["mesh"];
    check_keys(m, mp, {"spacing", "max_area", "min_angle"});
    body.mesh.spacing = number(m, "spacing", mp, body.mesh.spacing);
    body.mesh.max_area = number(m, "max_area", mp, body.mesh.max_area);
    body.mesh.min_angle = number(m, "min_angle", mp, body.mesh.min_angle);
    require(body.mesh.spacing > 0, join(mp, "spacing"), "must be positive");
    require(body.mesh.max_area > 0, join(mp, "max_area"), "must be positive");
    require(body.mesh.min_angle >= 0 && body.mesh.min_angle <= kMaxMinAngle, join(mp, "min_angle"),
            "must lie in [0, 28] degrees");
  }
  return body;
}

EnergyStroke parse_stroke(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "path", "strength", "radius", "speed", "emit_rate", "start", "end"});
  EnergyStroke s;
  const std::string kind = string(j, "kind", path);
  if (kind == "wind") {
    s.kind = StrokeKind::Wind;
  } else if (kind == "repel") {
    s.kind = StrokeKind::Repel;
  } else if (kind == "attract") {
    s.kind = StrokeKind::Attract;
  } else {
    throw ValidationError(join(path, "kind"), "expected wind, repel or attract");
  }
  const std::string pp = join(path, "path");
  require(j.contains("path"), pp, "required");
  require(j["path"].is_array(), pp, "expected a list of [x, y] points");
  for (std::size_t i = 0; i < j["path"].size(); ++i) s.path.push_back(as_point(j["path"][i], index_path(pp, i)));
  if (s.kind == StrokeKind::Wind) {
    require(s.path.size() >= 2, pp, "wind strokes need at least 2 points");
    require(s.length() > 0, pp, "wind strokes need a path of positive length");
  } else {
    require(!s.path.empty(), pp, "needs at least 1 point");
  }
  s.strength = number(j, "strength", path, 500.0);
  s.radius = number(j, "radius", path, s.radius);
  s.particle_speed = number(j, "speed", path, s.particle_speed);
  s.emit_rate = number(j, "emit_rate", path, s.emit_rate);
  s.t_start = number(j, "start", path, 0.0);
  if (j.contains("end") && !j["end"].is_null()) s.t_end = as_number(j["end"], join(path, "end"));
  require(s.strength >= 0, join(path, "strength"), "must be non-negative");
  require(s.radius > 0, join(path, "radius"), "must be positive");
  require(s.kind == StrokeKind::Wind ? s.particle_speed > 0 : s.particle_speed >= 0, join(path, "speed"),
          s.kind == StrokeKind::Wind ? "must be positive for wind" : "must be non-negative");
  require(s.emit_rate > 0, join(path, "emit_rate"), "must be positive");
  require(s.t_start < s.t_end, join(path, "end"), "must be later than start");
  return s;
}

RigSpec parse_rig(const json& j, const std::string& path, std::size_t body_count) {
  check_keys(j, path, {"body", "kind", "at", "radius", "amplitude", "frequency", "direction", "keyframes"});
  RigSpec r;
  const double body = number(j, "body", path, 0.0);
  require(body >= 0 && body < static_cast<double>(body_count) && std::floor(body) == body, join(path, "body"),
          "must index an existing body");
  r.body = static_cast<int>(body);
  const std::string kind = string(j, "kind", path);
  if (kind == "fixed") {
    r.kind = RigKind::Fixed;
  } else if (kind == "wavy") {
    r.kind = RigKind::Wavy;
  } else if (kind == "trajectory") {
    r.kind = RigKind::Trajectory;
  } else {
    throw ValidationError(join(path, "kind"), "expected fixed, wavy or trajectory");
  }
  require(j.contains("at"), join(path, "at"), "required");
  r.at = as_point(j["at"], join(path, "at"));
  r.radius = number(j, "radius", path, 0.0);
  require(r.radius >= 0, join(path, "radius"), "must be non-negative");
  if (r.kind == RigKind::Wavy) {
    r.amplitude = number(j, "amplitude", path, 10.0);
    r.frequency = number(j, "frequency", path, 2.0 * M_PI);
    require(r.amplitude >= 0, join(path, "amplitude"), "must be non-negative");
    require(r.frequency > 0, join(path, "frequency"), "must be positive");
    if (j.contains("direction")) r.direction = as_point(j["direction"], join(path, "direction"));
    require(r.direction.norm() > 0, join(path, "direction"), "must be non-zero");
    r.direction.normalize();
  }
  if (r.kind == RigKind::Trajectory) {
    const std::string kp = join(path, "keyframes");
    require(j.contains("keyframes") && j["keyframes"].is_array() && !j["keyframes"].empty(), kp,
            "trajectory rigs need a non-empty keyframe list");
    for (std::size_t i = 0; i < j["keyframes"].size(); ++i) {
      const std::string ip = index_path(kp, i);
      const json& k = j["keyframes"][i];
      check_keys(k, ip, {"t", "offset"});
      require(k.contains("t"), join(ip, "t"), "required");
      require(k.contains("offset"), join(ip, "offset"), "required");
      Keyframe key{as_number(k["t"], join(ip, "t")), as_point(k["offset"], join(ip, "offset"))};
      if (!r.keyframes.empty()) require(key.time > r.keyframes.back().time, join(ip, "t"), "times must increase");
      r.keyframes.push_back(key);
    }
  }
  return r;
}

SimParams parse_sim(const json& j, const std::string& path) {
  check_keys(j, path, {"dt", "fps", "frame_count", "damping", "gravity"});
  SimParams p;
  p.dt = number(j, "dt", path, p.dt);
  p.fps = number(j, "fps", path, p.fps);
  const double frames = number(j, "frame_count", path, p.frame_count);
  p.damping = number(j, "damping", path, p.damping);
  if (j.contains("gravity")) p.gravity = as_point(j["gravity"], join(path, "gravity"));
  require(p.dt > 0, join(path, "dt"), "must be positive");
  require(p.fps > 0, join(path, "fps"), "must be positive");
  require(frames >= 1 && frames <= 100000 && std::floor(frames) == frames, join(path, "frame_count"),
          "must be an integer in [1, 100000]");
  p.frame_count = static_cast<int>(frames);
  require(p.damping >= 0, join(path, "damping"), "must be non-negative");
  require(p.substeps_per_frame() >= 1, join(path, "dt"), "round(1 / (fps * dt)) must be at least 1");
  return p;
}

OutputSpec parse_output(const json& j, const std::string& path) {
  check_keys(j, path,
             {"dir", "emit_flows", "emit_sketches", "emit_warped", "blur_sigma", "alpha", "background", "warp_source"});
  OutputSpec o;
  o.dir = string(j, "dir", path, &o.dir);
  require(!o.dir.empty(), join(path, "dir"), "must not be empty");
  o.emit_flows = boolean(j, "emit_flows", path, o.emit_flows);
  o.emit_sketches = boolean(j, "emit_sketches", path, o.emit_sketches);
  o.emit_warped = boolean(j, "emit_warped", path, o.emit_warped);
  o.blur_sigma = number(j, "blur_sigma", path, o.blur_sigma);
  o.alpha = number(j, "alpha", path, o.alpha);
  require(o.blur_sigma >= 0 && o.blur_sigma <= 50, join(path, "blur_sigma"), "must lie in [0, 50]");
  require(o.alpha >= 0, join(path, "alpha"), "must be non-negative");
  if (j.contains("background") && !j["background"].is_null()) {
    const std::string bp = join(path, "background");
    const json& b = j["background"];
    if (b.is_array()) {
      require(b.size() == 1 || b.size() == 3, bp, "expected 1 or 3 values");
      for (std::size_t i = 0; i < b.size(); ++i) o.background.push_back(static_cast<float>(as_number(b[i], index_path(bp, i))));
    } else {
      o.background.push_back(static_cast<float>(as_number(b, bp)));
    }
    for (float v : o.background) require(v >= 0 && v <= 1, bp, "values must lie in [0, 1]");
  }
  if (j.contains("warp_source")) {
    const std::string source = string(j, "warp_source", path);
    if (source == "sketch") {
      o.warp_source = WarpSource::Sketch;
    } else if (source == "image") {
      o.warp_source = WarpSource::Image;
    } else {
      throw ValidationError(join(path, "warp_source"), "expected sketch or image");
    }
  }
  return o;
}

SketchParams parse_sketch(const json& j, const std::string& path) {
  check_keys(j, path, {"sigma", "k", "threshold", "gain", "sharpness"});
  SketchParams s;
  s.sigma = number(j, "sigma", path, s.sigma);
  s.k = number(j, "k", path, s.k);
  s.threshold = number(j, "threshold", path, s.threshold);
  s.gain = number(j, "gain", path, s.gain);
  s.sharpness = number(j, "sharpness", path, s.sharpness);
  require(s.sigma > 0 && s.sigma <= 20, join(path, "sigma"), "must lie in (0, 20]");
  require(s.k > 1, join(path, "k"), "must exceed 1");
  require(s.threshold >= 0, join(path, "threshold"), "must be non-negative");
  require(s.gain > 0, join(path, "gain"), "must be positive");
  require(s.sharpness > 0, join(path, "sharpness"), "must be positive");
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string numbered(const char* prefix, int frame, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_%04d.%s", prefix, frame, ext);
  return name;
}

}  // namespace

std::filesystem::path Scene::resolve(const std::string& relative) const {
  const std::filesystem::path p(relative);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<float> Scene::background() const {
  if (!output.background.empty()) return output.background;
  return {output.warp_source == WarpSource::Sketch ? 1.0f : 0.0f};
}

Scene parse_scene(const json& document) {
  check_keys(document, "", {"image", "bodies", "strokes", "rigs", "sim", "output", "sketch"});
  Scene scene;
  scene.image = string(document, "image", "");
  require(document.contains("bodies") && document["bodies"].is_array() && !document["bodies"].empty(), "bodies",
          "at least one body is required");
  for (std::size_t i = 0; i < document["bodies"].size(); ++i) {
    scene.bodies.push_back(parse_body(document["bodies"][i], index_path("bodies", i)));
  }
  if (document.contains("strokes")) {
    require(document["strokes"].is_array(), "strokes", "expected a list");
    for (std::size_t i = 0; i < document["strokes"].size(); ++i) {
      scene.strokes.push_back(parse_stroke(document["strokes"][i], index_path("strokes", i)));
    }
  }
  if (document.contains("rigs")) {
    require(document["rigs"].is_array(), "rigs", "expected a list");
    for (std::size_t i = 0; i < document["rigs"].size(); ++i) {
      scene.rigs.push_back(parse_rig(document["rigs"][i], index_path("rigs", i), scene.bodies.size()));
    }
  }
  scene.sim = parse_sim(document.value("sim", json::object()), "sim");
  scene.output = parse_output(document.value("output", json::object()), "output");
  scene.sketch = parse_sketch(document.value("sketch", json::object()), "sketch");
  const std::size_t channels_needed = scene.output.warp_source == WarpSource::Sketch ? 1 : 3;
  require(scene.output.background.size() <= 1 || scene.output.background.size() == channels_needed,
          "output.background", "per-channel background must match the warp source channels");
  return scene;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

void apply_override(json& document, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError(assignment, "override must look like key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }

  // "a.b[2].c" and "a.b.2.c" both address document["a"]["b"][2]["c"].
  std::vector<std::string> tokens;
  std::string current;
  for (char c : key) {
    if (c == '.' || c == '[' || c == ']') {
      if (!current.empty()) tokens.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(current);
  if (tokens.empty()) throw ValidationError(key, "empty override path");

  json* node = &document;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& token = tokens[i];
    const bool last = i + 1 == tokens.size();
    if (node->is_array()) {
      std::size_t index = 0;
      try {
        std::size_t used = 0;
        index = std::stoul(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ValidationError(key, "'" + token + "' is not a list index");
      }
      if (index > node->size()) throw ValidationError(key, "index " + token + " is out of range");
      if (index == node->size()) node->push_back(json::object());
      node = &(*node)[index];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ValidationError(key, "'" + token + "' does not address an object");
      node = &(*node)[token];
    }
    if (last) *node = value;
  }
}

Scene load_scene_file(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "scene file not found: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json document = parse_json_text(buffer.str());
  for (const auto& o : overrides) apply_override(document, o);
  Scene scene = parse_scene(document);
  scene.base_dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  if (!std::filesystem::exists(scene.resolve(scene.image))) {
    throw Error(ErrorCode::FileNotFound, "image: file not found: " + scene.resolve(scene.image).string());
  }
  for (std::size_t i = 0; i < scene.bodies.size(); ++i) {
    const auto mask = scene.resolve(scene.bodies[i].mask);
    if (!std::filesystem::exists(mask)) {
      throw Error(ErrorCode::FileNotFound, "bodies[" + std::to_string(i) + "].mask: file not found: " + mask.string());
    }
  }
  return scene;
}

void check_asset_dimensions(const SceneAssets& assets) {
  for (std::size_t i = 0; i < assets.masks.size(); ++i) {
    const Mask& m = assets.masks[i];
    if (m.width != assets.image.width || m.height != assets.image.height) {
      throw Error(ErrorCode::DimensionMismatch,
                  "mask " + std::to_string(i) + " is " + std::to_string(m.width) + "x" + std::to_string(m.height) +
                      " but the image is " + std::to_string(assets.image.width) + "x" +
                      std::to_string(assets.image.height));
    }
  }
}

SceneAssets load_assets(const Scene& scene) {
  SceneAssets assets;
  assets.image = read_png(scene.resolve(scene.image));
  for (const auto& body : scene.bodies) assets.masks.push_back(mask_from_image(read_png(scene.resolve(body.mask))));
  check_asset_dimensions(assets);
  return assets;
}

void validate_rig_anchors(const Scene& scene, const SceneAssets& assets) {
  for (std::size_t r = 0; r < scene.rigs.size(); ++r) {
    const RigSpec& spec = scene.rigs[r];
    if (spec.body < 0 || static_cast<std::size_t>(spec.body) >= assets.masks.size()) {
      throw ValidationError("rigs[" + std::to_string(r) + "].body", "must index an existing body");
    }
    const Mask& mask = assets.masks[spec.body];
    const double fx = std::floor(spec.at.x()), fy = std::floor(spec.at.y());
    const bool inside = fx >= 0 && fy >= 0 && fx < mask.width && fy < mask.height &&
                        mask.at(static_cast<int>(fx), static_cast<int>(fy));
    if (!inside) {
      throw ValidationError("rigs[" + std::to_string(r) + "].at",
                            "point lies outside the mask of body " + std::to_string(spec.body));
    }
  }
}

PreparedScene prepare(const Scene& scene, const SceneAssets& assets) {
  if (assets.masks.size() != scene.bodies.size()) {
    throw Error(ErrorCode::InvalidArgument, "one mask per body is required");
  }
  validate_rig_anchors(scene, assets);
  PreparedScene prepared;
  prepared.setup.params = scene.sim;
  prepared.setup.strokes = scene.strokes;
  for (std::size_t b = 0; b < scene.bodies.size(); ++b) {
    try {
      auto mesh = std::make_shared<const TriMesh>(build_mesh(assets.masks[b], scene.bodies[b].mesh));
      prepared.setup.bodies.push_back({mesh, scene.bodies[b].material, {}});
    } catch (const Error& e) {
      throw Error(e.code(), "bodies[" + std::to_string(b) + "]: " + e.what());
    }
  }
  for (std::size_t r = 0; r < scene.rigs.size(); ++r) {
    const RigSpec& spec = scene.rigs[r];
    SimBody& body = prepared.setup.bodies[spec.body];
    const auto& rest = body.mesh->rest_positions;
    std::vector<int> vertices;
    if (spec.radius > 0) {
      for (std::size_t v = 0; v < rest.size(); ++v) {
        if ((rest[v] - spec.at).norm() <= spec.radius) vertices.push_back(static_cast<int>(v));
      }
    }
    if (vertices.empty()) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < rest.size(); ++v) {
        const double d = (rest[v] - spec.at).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(v);
        }
      }
      vertices.push_back(best);
    }
    for (int v : vertices) {
      RigPoint rig;
      rig.vertex = v;
      rig.kind = spec.kind;
      rig.anchor = rest[v];
      rig.amplitude = spec.amplitude;
      rig.frequency = spec.frequency;
      rig.direction = spec.direction;
      rig.trajectory = spec.keyframes;
      body.rigs.push_back(rig);
    }
    prepared.rigged_vertices.push_back(std::move(vertices));
  }
  return prepared;
}

FlowField frame_flow(const PreparedScene& prepared, const Snapshot& snapshot, int width, int height) {
  FlowField field(width, height);
  for (std::size_t b = 0; b < prepared.setup.bodies.size(); ++b) {
    rasterize_flow_into(field, *prepared.setup.bodies[b].mesh, snapshot.positions[b]);
  }
  return field;
}

namespace {

std::size_t count_overlap(const PreparedScene& prepared, int width, int height) {
  if (prepared.setup.bodies.size() < 2) return 0;
  std::vector<int> hits(static_cast<std::size_t>(width) * height, 0);
  for (const auto& body : prepared.setup.bodies) {
    // Rasterizing a unit shift marks exactly the pixels the body covers.
    auto shifted = body.mesh->rest_positions;
    for (auto& p : shifted) p += Vec2(1, 0);
    const FlowField f = rasterize_flow(*body.mesh, shifted, width, height);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += f.u[i] != 0.0f;
  }
  std::size_t overlap = 0;
  for (int h : hits) overlap += h > 1;
  return overlap;
}

}  // namespace

json PipelineReport::to_json() const {
  return json{{"frames", frames},
              {"flow_files", flow_files},
              {"image_files", image_files},
              {"max_flow", max_flow},
              {"vertex_counts", vertex_counts},
              {"triangle_counts", triangle_counts},
              {"overlap_pixels", overlap_pixels},
              {"seconds", {{"mesh", seconds.mesh}, {"simulate", seconds.simulate}, {"flow", seconds.flow},
                           {"imaging", seconds.imaging}}},
              {"output_dir", output_dir.string()},
              {"settings", settings}};
}

PipelineReport export_artifacts(const Scene& scene, const SceneAssets& assets, const PreparedScene& prepared,
                                const std::vector<Snapshot>& snapshots, PipelineReport report,
                                const ProgressFn& progress) {
  const int width = assets.image.width, height = assets.image.height;
  const int frames = static_cast<int>(snapshots.size()) - 1;
  report.frames = frames;
  report.output_dir = scene.resolve(scene.output.dir);
  report.vertex_counts.clear();
  report.triangle_counts.clear();
  for (const auto& body : prepared.setup.bodies) {
    report.vertex_counts.push_back(body.mesh->vertex_count());
    report.triangle_counts.push_back(body.mesh->triangle_count());
  }
  report.overlap_pixels = count_overlap(prepared, width, height);
  std::filesystem::create_directories(report.output_dir);

  auto start = std::chrono::steady_clock::now();
  ImageBuffer sketch;
  ImageBuffer source;
  if (scene.output.emit_sketches || (scene.output.emit_warped && scene.output.warp_source == WarpSource::Sketch)) {
    sketch = gaussian_blur(extract_sketch(assets.image, scene.sketch), scene.output.blur_sigma);
    if (scene.output.emit_sketches) {
      write_png(sketch, report.output_dir / "sketch_0000.png");
      report.image_files.push_back("sketch_0000.png");
    }
  }
  if (scene.output.emit_warped) source = scene.output.warp_source == WarpSource::Sketch ? sketch : assets.image;
  const std::vector<float> background = scene.background();
  report.seconds.imaging += seconds_since(start);

  for (int k = 1; k <= frames; ++k) {
    try {
      start = std::chrono::steady_clock::now();
      const FlowField flow = frame_flow(prepared, snapshots[k], width, height);
      const WeightMap weights = flow_magnitude_weights(flow);
      report.max_flow.push_back(weights.w.empty() ? 0.0 : *std::max_element(weights.w.begin(), weights.w.end()));
      if (scene.output.emit_flows) {
        const std::string name = numbered("flow", k, "flo");
        write_flo_file(flow, report.output_dir / name);
        report.flow_files.push_back(name);
      }
      report.seconds.flow += seconds_since(start);
      if (scene.output.emit_warped) {
        start = std::chrono::steady_clock::now();
        const std::string name = numbered("frame", k, "png");
        write_png(forward_warp(source, flow, weights, scene.output.alpha, background), report.output_dir / name);
        report.image_files.push_back(name);
        report.seconds.imaging += seconds_since(start);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "export frame " + std::to_string(k) + ": " + e.what());
    }
    if (progress) progress("export", k, frames);
  }

  const auto& sim = scene.sim;
  report.settings = {
      {"sim",
       {{"dt", sim.dt}, {"fps", sim.fps}, {"frame_count", sim.frame_count}, {"substeps_per_frame", sim.substeps_per_frame()},
        {"damping", sim.damping}, {"gravity", {sim.gravity.x(), sim.gravity.y()}}}},
      {"output",
       {{"emit_flows", scene.output.emit_flows}, {"emit_sketches", scene.output.emit_sketches},
        {"emit_warped", scene.output.emit_warped}, {"blur_sigma", scene.output.blur_sigma},
        {"alpha", scene.output.alpha}, {"background", scene.background()},
        {"warp_source", scene.output.warp_source == WarpSource::Sketch ? "sketch" : "image"}}},
      {"sketch",
       {{"sigma", scene.sketch.sigma}, {"k", scene.sketch.k}, {"threshold", scene.sketch.threshold},
        {"gain", scene.sketch.gain}, {"sharpness", scene.sketch.sharpness}}},
      {"bodies", scene.bodies.size()},
      {"strokes", scene.strokes.size()},
      {"rigs", scene.rigs.size()}};
  std::ofstream out(report.output_dir / "report.json");
  out << report.to_json().dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write report.json in " + report.output_dir.string());
  return report;
}

PipelineReport run_pipeline(const Scene& scene, const ProgressFn& progress) {
  const SceneAssets assets = load_assets(scene);
  PipelineReport report;
  auto start = std::chrono::steady_clock::now();
  const PreparedScene prepared = prepare(scene, assets);
  report.seconds.mesh = seconds_since(start);
  if (progress) progress("mesh", 0, 0);

  start = std::chrono::steady_clock::now();
  const auto snapshots = simulate(prepared.setup, [&](int frame, const Snapshot&) {
    if (progress) progress("simulate", frame, scene.sim.frame_count);
    return true;
  });
  report.seconds.simulate = seconds_since(start);
  return export_artifacts(scene, assets, prepared, snapshots, std::move(report), progress);
}

json mesh_to_json(const TriMesh& mesh) {
  json vertices = json::array();
  for (const Vec2& p : mesh.rest_positions) vertices.push_back({p.x(), p.y()});
  return json{{"vertices", std::move(vertices)},
              {"triangles", mesh.triangles},
              {"boundary_edges", mesh.boundary_edges},
              {"area", mesh.total_area()}};
}

json snapshots_to_json(const std::vector<Snapshot>& snapshots) {
  json out = json::array();
  for (const auto& snap : snapshots) {
    json bodies = json::array();
    for (const auto& body : snap.positions) {
      json pts = json::array();
      for (const Vec2& p : body) pts.push_back({p.x(), p.y()});
      bodies.push_back(std::move(pts));
    }
    out.push_back({{"time", snap.time}, {"bodies", std::move(bodies)}});
  }
  return out;
}

}  // namespace inkmotion
