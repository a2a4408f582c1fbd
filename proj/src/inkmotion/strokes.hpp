#pragma once

#include <limits>
#include <span>
#include <vector>

#include "inkmotion/elastics.hpp"
#include "inkmotion/types.hpp"

namespace inkmotion {

enum class StrokeKind { Wind, Repel, Attract };

const char* to_string(StrokeKind kind);

// A user-drawn polyline emitting flow particles that push nearby vertices.
struct EnergyStroke {
  StrokeKind kind = StrokeKind::Wind;
  std::vector<Vec2> path;
  double strength = 0.0;
  double radius = 60.0;
  double particle_speed = 200.0;  // pixels/s
  double emit_rate = 30.0;        // particles/s
  double t_start = 0.0;
  double t_end = std::numeric_limits<double>::infinity();

  double length() const;
  // Point at arc length `arc` (clamped to the path) and the unit tangent of
  // the segment containing it.
  Vec2 point_at(double arc, Vec2* tangent = nullptr) const;
  // Paths of zero length or strokes with zero speed hold one particle parked
  // at the first point while active.
  bool stationary() const;
};

struct FlowParticle {
  Vec2 position = Vec2::Zero();
  Vec2 direction = Vec2::UnitX();
  double arc = 0.0;
  int stroke = 0;
};

// Particles of one stroke plus the fractional emission carried across steps.
struct StrokeEmitter {
  std::vector<FlowParticle> particles;
  double carry = 0.0;
};

// Advances existing particles by particle_speed * dt (dropping those past the
// end of the path), then emits emit_rate * dt new particles at the path start
// when t lies in [t_start, t_end).
void emit_and_advance(const EnergyStroke& stroke, int stroke_index, StrokeEmitter& emitter, double t, double dt);

// f = s (1 - |p - q| / r) d, zero for |p - q| >= r.
Vec2 wind_force(const Vec2& p, const Vec2& d, const Vec2& q, double s, double r);
// f = s (q - p) / r, zero for |q - p| >= r.
Vec2 repel_force(const Vec2& p, const Vec2& q, double s, double r);
// f = s (1 - |q - p| / r) (p - q) / |p - q|, zero at q == p and for |q - p| >= r.
Vec2 attract_force(const Vec2& p, const Vec2& q, double s, double r);

Vec2 particle_force(const EnergyStroke& stroke, const FlowParticle& particle, const Vec2& q);

// Per-body, per-vertex sum of all particle forces. Each vertex sums its
// contributions in (stroke, particle) order.
std::vector<std::vector<Vec2>> accumulate_external_forces(std::span<const EnergyStroke> strokes,
                                                          std::span<const StrokeEmitter> emitters,
                                                          std::span<const BodyState> bodies);

}  // namespace inkmotion
