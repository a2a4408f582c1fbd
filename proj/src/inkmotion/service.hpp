#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

namespace inkmotion::service {

// Wire format shared by requests, responses and events:
//   {"kind": "request" | "response" | "event", "op": name, "session": id,
//    "revision": n, "body": {...}}
// Responses echo the request's op and revision. Failures are responses whose
// body is {"error": {"code": ..., "message": ..., "path"?: ...}}.
struct Envelope {
  std::string kind;
  std::string op;
  std::string session;
  long long revision = 0;
  nlohmann::json body = nlohmann::json::object();

  nlohmann::json to_json() const;
  static Envelope from_json(const nlohmann::json& j);
};

// Receives every outgoing envelope for one client. May be called from the
// simulation worker thread.
using Sink = std::function<void(const Envelope&)>;

struct Session;

// Session registry and request dispatcher, independent of any transport.
//
// Ops:
//   create_session {image: base64 PNG, masks: [base64 PNG, ...]}
//       -> {session, revision: 0, meshes: [...]}
//   mutate {patch: JSON merge patch of the scene} -> {revision}
//       Rejected with StaleRevision unless the envelope revision is current.
//       Invalidates the cached simulation and cancels a running one; a
//       "meshes" event follows when mesh parameters changed.
//   simulate {frame_count?, preview?} -> {started: true}
//       Streams "frame" events {frame, time, bodies, preview?} and one
//       "simulate_done" event {status: completed | cancelled | failed, error?}.
//   cancel {} -> {cancelled}
//   export {dir} -> report
//       Writes scene.json, the input PNGs and all artifacts; StaleSimulation
//       if the scene changed since the last completed simulation.
//   get_scene {} -> {scene}
class Hub {
 public:
  Hub();
  ~Hub();
  Hub(const Hub&) = delete;
  Hub& operator=(const Hub&) = delete;

  // Handles one request. The response goes through `sink` before this
  // returns; simulation events follow asynchronously through the same sink.
  void handle(const Envelope& request, const Sink& sink);
  void handle_text(const std::string& text, const Sink& sink);

  // Blocks until the session's running simulation (if any) has finished.
  void wait_idle(const std::string& session);

  // Cancels and joins all simulations.
  void shutdown();

 private:
  std::shared_ptr<Session> find(const std::string& id);

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

}  // namespace inkmotion::service
