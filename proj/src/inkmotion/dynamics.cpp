#include "inkmotion/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inkmotion/error.hpp"

namespace inkmotion {

int SimParams::substeps_per_frame() const { return static_cast<int>(std::lround(1.0 / (fps * dt))); }

const char* to_string(RigKind kind) {
  switch (kind) {
    case RigKind::Fixed: return "fixed";
    case RigKind::Wavy: return "wavy";
    case RigKind::Trajectory: return "trajectory";
  }
  return "fixed";
}

Vec2 wavy_rig_position(const RigPoint& rig, double t) {
  if (rig.kind != RigKind::Wavy) {
    throw Error(ErrorCode::WrongRigKind, std::string("expected a wavy rig, got ") + to_string(rig.kind));
  }
  return rig.anchor + rig.amplitude * std::sin(rig.frequency * t) * rig.direction;
}

namespace {

Vec2 trajectory_offset(const std::vector<Keyframe>& keys, double t) {
  if (keys.empty()) return Vec2::Zero();
  if (t <= keys.front().time) return keys.front().offset;
  if (t >= keys.back().time) return keys.back().offset;
  const auto hi = std::upper_bound(keys.begin(), keys.end(), t,
                                   [](double value, const Keyframe& k) { return value < k.time; });
  const auto lo = hi - 1;
  const double u = (t - lo->time) / (hi->time - lo->time);
  return lo->offset + u * (hi->offset - lo->offset);
}

}  // namespace

Vec2 rig_position(const RigPoint& rig, double t) {
  switch (rig.kind) {
    case RigKind::Fixed: return rig.anchor;
    case RigKind::Wavy: return wavy_rig_position(rig, t);
    case RigKind::Trajectory: return rig.anchor + trajectory_offset(rig.trajectory, t);
  }
  throw Error(ErrorCode::WrongRigKind, "unknown rig kind");
}

void step(BodyState& state, std::span<const Vec2> f_ext, const Material& material, double dt, double damping) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const std::size_t n = state.vertex_count();
  if (f_ext.size() != n) throw Error(ErrorCode::InvalidArgument, "external force count does not match vertices");

  std::vector<Vec2> forces(f_ext.begin(), f_ext.end());
  accumulate_internal_forces(*state.mesh, state.positions, material, forces);

  const double decay = std::max(0.0, 1.0 - damping * dt);
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    state.velocities[i] += dt / state.masses[i] * forces[i];
    state.positions[i] += dt * state.velocities[i];
    state.velocities[i] *= decay;
    finite = finite && state.positions[i].allFinite() && state.velocities[i].allFinite();
  }
  if (!finite) throw Error(ErrorCode::NonFiniteState, "integration produced a non-finite state");
}

void apply_rigs(BodyState& state, std::span<const RigPoint> rigs, double t_old, double t_new) {
  if (!(t_new > t_old)) throw Error(ErrorCode::InvalidArgument, "rig interval must move forward in time");
  for (const RigPoint& rig : rigs) {
    if (rig.vertex < 0 || static_cast<std::size_t>(rig.vertex) >= state.vertex_count()) {
      throw Error(ErrorCode::InvalidArgument, "rig vertex " + std::to_string(rig.vertex) + " out of range");
    }
    const Vec2 now = rig_position(rig, t_new);
    state.positions[rig.vertex] = now;
    state.velocities[rig.vertex] = (now - rig_position(rig, t_old)) / (t_new - t_old);
  }
}

std::vector<Snapshot> simulate(const SimulationSetup& setup, const FrameCallback& on_frame) {
  const SimParams& params = setup.params;
  const int substeps = params.substeps_per_frame();
  if (substeps < 1) throw Error(ErrorCode::InvalidArgument, "fps * dt must not exceed 2 (no substeps per frame)");

  std::vector<BodyState> states;
  states.reserve(setup.bodies.size());
  for (const SimBody& body : setup.bodies) states.push_back(BodyState::at_rest(body.mesh, body.material.density));
  std::vector<StrokeEmitter> emitters(setup.strokes.size());

  auto capture = [&](double time) {
    Snapshot snap;
    snap.time = time;
    for (const auto& s : states) snap.positions.push_back(s.positions);
    return snap;
  };

  std::vector<Snapshot> snapshots;
  snapshots.reserve(static_cast<std::size_t>(params.frame_count) + 1);
  snapshots.push_back(capture(0.0));

  std::vector<Vec2> f_ext;
  for (int frame = 1; frame <= params.frame_count; ++frame) {
    for (int sub = 0; sub < substeps; ++sub) {
      const long long n = static_cast<long long>(frame - 1) * substeps + sub;
      const double t_old = static_cast<double>(n) * params.dt;
      const double t_new = static_cast<double>(n + 1) * params.dt;
      for (std::size_t s = 0; s < setup.strokes.size(); ++s) {
        emit_and_advance(setup.strokes[s], static_cast<int>(s), emitters[s], t_old, params.dt);
      }
      const auto stroke_forces = accumulate_external_forces(setup.strokes, emitters, states);
      for (std::size_t b = 0; b < states.size(); ++b) {
        BodyState& state = states[b];
        f_ext = stroke_forces[b];
        if (!params.gravity.isZero()) {
          for (std::size_t i = 0; i < f_ext.size(); ++i) f_ext[i] += state.masses[i] * params.gravity;
        }
        try {
          step(state, f_ext, setup.bodies[b].material, params.dt, params.damping);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::NonFiniteState) throw NonFiniteState(frame, sub, b);
          throw;
        }
        apply_rigs(state, setup.bodies[b].rigs, t_old, t_new);
      }
    }
    snapshots.push_back(capture(static_cast<double>(static_cast<long long>(frame) * substeps) * params.dt));
    if (on_frame && !on_frame(frame, snapshots.back())) break;
  }
  return snapshots;
}

}  // namespace inkmotion
