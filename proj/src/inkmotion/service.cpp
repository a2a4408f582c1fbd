#include "inkmotion/service.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include <fstream>
#include <random>
#include <thread>
#include <vector>

#include "inkmotion/error.hpp"
#include "inkmotion/scene.hpp"

namespace inkmotion::service {

using nlohmann::json;

struct Session {
  std::string id;
  std::mutex mutex;
  json draft;
  std::string image_png;
  std::vector<std::string> mask_pngs;
  std::shared_ptr<const SceneAssets> assets;
  long long revision = 0;
  std::vector<MeshParams> mesh_params;

  // Last completed simulation.
  bool cache_valid = false;
  long long cache_revision = -1;
  std::shared_ptr<const Scene> cache_scene;
  std::shared_ptr<const PreparedScene> cache_prepared;
  std::shared_ptr<const std::vector<Snapshot>> cache_snapshots;

  std::thread worker;
  bool running = false;
  bool cancel = false;
};

namespace {

Envelope response_to(const Envelope& request, json body) {
  Envelope out;
  out.kind = "response";
  out.op = request.op;
  out.session = request.session;
  out.revision = request.revision;
  out.body = std::move(body);
  return out;
}

json error_body(const std::string& code, const std::string& message, const std::string& path = {}) {
  json e{{"code", code}, {"message", message}};
  if (!path.empty()) e["path"] = path;
  return json{{"error", std::move(e)}};
}

std::string new_session_id() {
  std::random_device rd;
  std::uniform_int_distribution<int> hex(0, 15);
  std::string id;
  for (int i = 0; i < 16; ++i) id.push_back("0123456789abcdef"[hex(rd)]);
  return id;
}

std::string mask_name(std::size_t i) { return "mask_" + std::to_string(i) + ".png"; }

json draft_for(std::size_t masks) {
  json bodies = json::array();
  for (std::size_t i = 0; i < masks; ++i) bodies.push_back({{"mask", mask_name(i)}});
  return json{{"image", "image.png"}, {"bodies", std::move(bodies)}};
}

const std::string& body_string(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) throw ValidationError(key, "expected a string");
  return it->get_ref<const std::string&>();
}

bool same_params(const MeshParams& a, const MeshParams& b) {
  return a.spacing == b.spacing && a.max_area == b.max_area && a.min_angle == b.min_angle;
}

json meshes_json(const Scene& scene, const SceneAssets& assets) {
  json meshes = json::array();
  for (std::size_t b = 0; b < scene.bodies.size(); ++b) {
    meshes.push_back(mesh_to_json(build_mesh(assets.masks[b], scene.bodies[b].mesh)));
  }
  return meshes;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

}  // namespace

json Envelope::to_json() const {
  return json{{"kind", kind}, {"op", op}, {"session", session}, {"revision", revision}, {"body", body}};
}

Envelope Envelope::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("$", "envelope must be an object");
  Envelope e;
  e.kind = j.value("kind", std::string("request"));
  if (!j.contains("op") || !j["op"].is_string()) throw ValidationError("op", "required string");
  e.op = j["op"].get<std::string>();
  if (j.contains("session") && !j["session"].is_null()) {
    if (!j["session"].is_string()) throw ValidationError("session", "expected a string");
    e.session = j["session"].get<std::string>();
  }
  if (j.contains("revision")) {
    if (!j["revision"].is_number_integer()) throw ValidationError("revision", "expected an integer");
    e.revision = j["revision"].get<long long>();
  }
  e.body = j.value("body", json::object());
  if (!e.body.is_object()) throw ValidationError("body", "expected an object");
  return e;
}

std::string base64_encode(const std::string& bytes) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::string base64_decode(const std::string& text) {
  namespace b64 = boost::beast::detail::base64;
  std::string out(b64::decoded_size(text.size()), '\0');
  const auto [written, read] = b64::decode(out.data(), text.data(), text.size());
  // Decoding stops at the first '=' or invalid character.
  if (text.find_first_not_of('=', read) != std::string::npos || text.size() - read > 2) throw Error(ErrorCode::BadImage, "payload is not valid base64");
  out.resize(written);
  return out;
}

Hub::Hub() = default;

Hub::~Hub() { shutdown(); }

std::shared_ptr<Session> Hub::find(const std::string& id) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::InvalidArgument, "unknown session '" + id + "'");
  return it->second;
}

void Hub::shutdown() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& [id, s] : sessions_) all.push_back(s);
  }
  for (auto& s : all) {
    std::thread worker;
    {
      std::lock_guard<std::mutex> lock(s->mutex);
      s->cancel = true;
      worker = std::move(s->worker);
    }
    if (worker.joinable()) worker.join();
  }
}

void Hub::wait_idle(const std::string& id) {
  const auto s = find(id);
  std::thread worker;
  {
    std::lock_guard<std::mutex> lock(s->mutex);
    worker = std::move(s->worker);
  }
  if (worker.joinable()) worker.join();
}

void Hub::handle_text(const std::string& text, const Sink& sink) {
  Envelope request;
  try {
    request = Envelope::from_json(parse_json_text(text));
  } catch (const ValidationError& e) {
    Envelope out;
    out.kind = "response";
    out.body = error_body("ValidationError", e.what(), e.path());
    sink(out);
    return;
  } catch (const Error& e) {
    Envelope out;
    out.kind = "response";
    out.body = error_body(to_string(e.code()), e.what());
    sink(out);
    return;
  }
  handle(request, sink);
}

void Hub::handle(const Envelope& request, const Sink& sink) {
  try {
    if (request.op == "create_session") {
      const json& body = request.body;
      auto assets = std::make_shared<SceneAssets>();
      auto session = std::make_shared<Session>();
      session->image_png = base64_decode(body_string(body, "image"));
      assets->image = decode_png(std::span(reinterpret_cast<const std::uint8_t*>(session->image_png.data()),
                                           session->image_png.size()));
      if (!body.contains("masks") || !body["masks"].is_array() || body["masks"].empty()) {
        throw ValidationError("masks", "at least one mask is required");
      }
      for (const auto& m : body["masks"]) {
        if (!m.is_string()) throw ValidationError("masks", "expected base64 strings");
        session->mask_pngs.push_back(base64_decode(m.get<std::string>()));
        const std::string& bytes = session->mask_pngs.back();
        assets->masks.push_back(
            mask_from_image(decode_png(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()))));
      }
      check_asset_dimensions(*assets);
      session->draft = draft_for(assets->masks.size());
      const Scene scene = parse_scene(session->draft);
      for (const auto& b : scene.bodies) session->mesh_params.push_back(b.mesh);
      json meshes = meshes_json(scene, *assets);
      session->assets = assets;
      session->id = new_session_id();
      {
        std::lock_guard<std::mutex> lock(mutex_);
        sessions_[session->id] = session;
      }
      Envelope out = response_to(request, {{"session", session->id}, {"revision", 0}, {"meshes", std::move(meshes)}});
      out.session = session->id;
      sink(out);
      return;
    }

    const auto session = find(request.session);

    if (request.op == "get_scene") {
      std::lock_guard<std::mutex> lock(session->mutex);
      sink(response_to(request, {{"scene", session->draft}, {"revision", session->revision}}));
      return;
    }

    if (request.op == "mutate") {
      std::unique_lock<std::mutex> lock(session->mutex);
      if (request.revision != session->revision) {
        sink(response_to(request, error_body("StaleRevision", "patch cites revision " +
                                                                  std::to_string(request.revision) +
                                                                  " but the session is at " +
                                                                  std::to_string(session->revision))));
        return;
      }
      if (!request.body.contains("patch") || !request.body["patch"].is_object()) {
        throw ValidationError("patch", "expected a JSON merge patch object");
      }
      json candidate = session->draft;
      candidate.merge_patch(request.body["patch"]);
      if (candidate.value("image", json()) != session->draft["image"]) {
        throw ValidationError("image", "the image is fixed by the session");
      }
      if (!candidate.contains("bodies") || !candidate["bodies"].is_array() ||
          candidate["bodies"].size() != session->mask_pngs.size()) {
        throw ValidationError("bodies", "the session has exactly " + std::to_string(session->mask_pngs.size()) +
                                            " bodies, one per mask");
      }
      for (std::size_t i = 0; i < session->mask_pngs.size(); ++i) {
        const json& b = candidate["bodies"][i];
        if (!b.is_object() || b.value("mask", json()) != json(mask_name(i))) {
          throw ValidationError("bodies[" + std::to_string(i) + "].mask", "masks are fixed by the session");
        }
      }
      const Scene scene = parse_scene(candidate);
      validate_rig_anchors(scene, *session->assets);
      bool remesh = false;
      for (std::size_t b = 0; b < scene.bodies.size(); ++b) {
        remesh = remesh || !same_params(scene.bodies[b].mesh, session->mesh_params[b]);
      }
      json meshes;
      if (remesh) meshes = meshes_json(scene, *session->assets);

      session->draft = std::move(candidate);
      ++session->revision;
      session->cache_valid = false;
      session->cancel = true;
      session->mesh_params.clear();
      for (const auto& b : scene.bodies) session->mesh_params.push_back(b.mesh);
      sink(response_to(request, {{"revision", session->revision}}));
      if (remesh) {
        Envelope event;
        event.kind = "event";
        event.op = "meshes";
        event.session = session->id;
        event.revision = session->revision;
        event.body = {{"meshes", std::move(meshes)}};
        sink(event);
      }
      return;
    }

    if (request.op == "cancel") {
      std::lock_guard<std::mutex> lock(session->mutex);
      const bool was_running = session->running && !session->cancel;
      session->cancel = true;
      sink(response_to(request, {{"cancelled", was_running}}));
      return;
    }

    if (request.op == "simulate") {
      std::thread previous;
      {
        std::lock_guard<std::mutex> lock(session->mutex);
        session->cancel = true;
        previous = std::move(session->worker);
      }
      if (previous.joinable()) previous.join();

      std::lock_guard<std::mutex> lock(session->mutex);
      json doc = session->draft;
      if (request.body.contains("frame_count")) doc["sim"]["frame_count"] = request.body["frame_count"];
      auto scene = std::make_shared<Scene>(parse_scene(doc));
      validate_rig_anchors(*scene, *session->assets);
      const bool preview = request.body.value("preview", false);
      const long long revision = session->revision;
      session->running = true;
      session->cancel = false;
      sink(response_to(request, {{"started", true}, {"revision", revision}, {"frame_count", scene->sim.frame_count}}));

      auto assets = session->assets;
      session->worker = std::thread([session, scene, assets, preview, revision, sink] {
        auto event = [&](const std::string& op, json body) {
          Envelope e;
          e.kind = "event";
          e.op = op;
          e.session = session->id;
          e.revision = revision;
          e.body = std::move(body);
          return e;
        };
        json done;
        std::shared_ptr<PreparedScene> prepared;
        std::shared_ptr<std::vector<Snapshot>> snapshots;
        try {
          prepared = std::make_shared<PreparedScene>(prepare(*scene, *assets));
          ImageBuffer sketch;
          if (preview) sketch = gaussian_blur(extract_sketch(assets->image, scene->sketch), scene->output.blur_sigma);
          const auto background = std::vector<float>{1.0f};
          snapshots = std::make_shared<std::vector<Snapshot>>(
              simulate(prepared->setup, [&](int frame, const Snapshot& snap) {
                json body{{"frame", frame}, {"time", snap.time}, {"bodies", snapshots_to_json({snap})[0]["bodies"]}};
                if (preview) {
                  const FlowField flow = frame_flow(*prepared, snap, assets->image.width, assets->image.height);
                  const ImageBuffer warped =
                      forward_warp(sketch, flow, flow_magnitude_weights(flow), scene->output.alpha, background);
                  const auto png = encode_png(downsample(warped, 256));
                  body["preview"] = base64_encode(std::string(png.begin(), png.end()));
                }
                std::lock_guard<std::mutex> lock(session->mutex);
                if (session->cancel) return false;
                sink(event("frame", std::move(body)));
                return true;
              }));
          done = {{"status", "completed"}};
        } catch (const NonFiniteState& e) {
          done = {{"status", "failed"},
                  {"error",
                   {{"code", "SimulationFailed"},
                    {"message", e.what()},
                    {"frame", e.frame()},
                    {"substep", e.substep()},
                    {"body", e.body()}}}};
        } catch (const ValidationError& e) {
          done = {{"status", "failed"}, {"error", {{"code", "ValidationError"}, {"message", e.what()}, {"path", e.path()}}}};
        } catch (const Error& e) {
          done = {{"status", "failed"}, {"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
        } catch (const std::exception& e) {
          done = {{"status", "failed"}, {"error", {{"code", "InternalError"}, {"message", e.what()}}}};
        }
        std::lock_guard<std::mutex> lock(session->mutex);
        if (session->cancel) {
          done = {{"status", "cancelled"}};
        } else if (done["status"] == "completed" && session->revision == revision) {
          session->cache_valid = true;
          session->cache_revision = revision;
          session->cache_scene = scene;
          session->cache_prepared = prepared;
          session->cache_snapshots = snapshots;
        }
        session->running = false;
        sink(event("simulate_done", std::move(done)));
      });
      return;
    }

    if (request.op == "export") {
      std::lock_guard<std::mutex> lock(session->mutex);
      if (!session->cache_valid || session->cache_revision != session->revision) {
        sink(response_to(request, error_body("StaleSimulation", "the scene changed since the last completed simulation; "
                                                                 "run simulate first")));
        return;
      }
      const std::filesystem::path dir(body_string(request.body, "dir"));
      std::filesystem::create_directories(dir);
      write_bytes(dir / "image.png", session->image_png);
      for (std::size_t i = 0; i < session->mask_pngs.size(); ++i) write_bytes(dir / mask_name(i), session->mask_pngs[i]);

      // The exported scene reproduces the cached run when loaded from `dir`.
      json doc = session->draft;
      doc["sim"]["frame_count"] = session->cache_scene->sim.frame_count;
      doc["output"]["dir"] = ".";
      write_bytes(dir / "scene.json", doc.dump(2) + "\n");

      Scene scene = *session->cache_scene;
      scene.base_dir = dir;
      scene.output.dir = ".";
      const PipelineReport report =
          export_artifacts(scene, *session->assets, *session->cache_prepared, *session->cache_snapshots);
      json body = report.to_json();
      body["scene"] = (dir / "scene.json").string();
      sink(response_to(request, std::move(body)));
      return;
    }

    throw Error(ErrorCode::InvalidArgument, "unknown op '" + request.op + "'");
  } catch (const ValidationError& e) {
    sink(response_to(request, error_body("ValidationError", e.what(), e.path())));
  } catch (const Error& e) {
    sink(response_to(request, error_body(to_string(e.code()), e.what())));
  } catch (const std::exception& e) {
    sink(response_to(request, error_body("InternalError", e.what())));
  }
}

}  // namespace inkmotion::service
