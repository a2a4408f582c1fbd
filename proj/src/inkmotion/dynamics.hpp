#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "inkmotion/elastics.hpp"
#include "inkmotion/strokes.hpp"

namespace inkmotion {

struct SimParams {
  double dt = 0.001;
  double fps = 24.0;
  int frame_count = 48;
  double damping = 0.5;  // 1/s
  Vec2 gravity = Vec2::Zero();

  // round(1 / (fps * dt))
  int substeps_per_frame() const;
};

enum class RigKind { Fixed, Wavy, Trajectory };

const char* to_string(RigKind kind);

// Offset from the rest anchor at a given time; trajectories interpolate
// these linearly and clamp outside the keyed range.
struct Keyframe {
  double time = 0.0;
  Vec2 offset = Vec2::Zero();
};

struct RigPoint {
  int vertex = 0;
  RigKind kind = RigKind::Fixed;
  Vec2 anchor = Vec2::Zero();  // rest position X_r of the vertex
  double amplitude = 0.0;      // s, pixels
  double frequency = 1.0;      // f, radians/s
  Vec2 direction = Vec2::UnitY();
  std::vector<Keyframe> trajectory;
};

// X_r + s sin(f t) d_r. Throws WrongRigKind for non-wavy rigs.
Vec2 wavy_rig_position(const RigPoint& rig, double t);

// Prescribed position for any rig kind.
Vec2 rig_position(const RigPoint& rig, double t);

// Semi-implicit Euler:
//   v <- v + dt M^-1 (f_int(x) + f_ext)
//   x <- x + dt v
//   v <- v max(0, 1 - damping dt)
// Throws Error(NonFiniteState) if the result is not finite.
void step(BodyState& state, std::span<const Vec2> f_ext, const Material& material, double dt, double damping = 0.0);

// Projects rigged vertices onto their prescribed position at t_new with the
// finite-difference velocity over [t_old, t_new].
void apply_rigs(BodyState& state, std::span<const RigPoint> rigs, double t_old, double t_new);

struct Snapshot {
  double time = 0.0;
  std::vector<std::vector<Vec2>> positions;  // [body][vertex]
};

struct SimBody {
  std::shared_ptr<const TriMesh> mesh;
  Material material;
  std::vector<RigPoint> rigs;
};

struct SimulationSetup {
  std::vector<SimBody> bodies;
  std::vector<EnergyStroke> strokes;
  SimParams params;
};

// Called after every completed frame (1-based). Returning false stops the run.
using FrameCallback = std::function<bool(int frame, const Snapshot& snapshot)>;

// frame_count + 1 snapshots (index 0 = rest). Snapshot k is taken after
// k * substeps_per_frame steps, so its time is k * substeps * dt. Throws
// NonFiniteState naming the frame and substep on blow-up. If the callback
// stops the run, the snapshots produced so far are returned.
std::vector<Snapshot> simulate(const SimulationSetup& setup, const FrameCallback& on_frame = {});

}  // namespace inkmotion
