#include "inkmotion/strokes.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace inkmotion {

const char* to_string(StrokeKind kind) {
  switch (kind) {
    case StrokeKind::Wind: return "wind";
    case StrokeKind::Repel: return "repel";
    case StrokeKind::Attract: return "attract";
  }
  return "wind";
}

double EnergyStroke::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += (path[i] - path[i - 1]).norm();
  return total;
}

Vec2 EnergyStroke::point_at(double arc, Vec2* tangent) const {
  Vec2 dir = Vec2::UnitX();
  if (path.size() < 2) {
    if (tangent) *tangent = dir;
    return path.empty() ? Vec2::Zero() : path.front();
  }
  double walked = 0.0;
  Vec2 point = path.back();
  bool found = false;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec2 seg = path[i] - path[i - 1];
    const double len = seg.norm();
    if (len == 0.0) continue;
    dir = seg / len;
    if (arc < walked + len) {
      point = path[i - 1] + std::max(0.0, arc - walked) * dir;
      found = true;
      break;
    }
    walked += len;
  }
  if (!found) point = path.back();
  if (tangent) *tangent = dir;
  return point;
}

bool EnergyStroke::stationary() const { return !(particle_speed > 0.0) || length() == 0.0; }

void emit_and_advance(const EnergyStroke& stroke, int stroke_index, StrokeEmitter& emitter, double t, double dt) {
  const bool active = t >= stroke.t_start && t < stroke.t_end;
  if (stroke.stationary()) {
    if (!active) {
      emitter.particles.clear();
    } else if (emitter.particles.empty()) {
      FlowParticle p;
      p.position = stroke.point_at(0.0, &p.direction);
      p.stroke = stroke_index;
      emitter.particles.push_back(p);
    }
    return;
  }

  const double length = stroke.length();
  std::vector<FlowParticle> alive;
  alive.reserve(emitter.particles.size() + 1);
  for (FlowParticle p : emitter.particles) {
    p.arc += stroke.particle_speed * dt;
    if (p.arc > length) continue;
    p.position = stroke.point_at(p.arc, &p.direction);
    alive.push_back(p);
  }
  if (active) {
    emitter.carry += stroke.emit_rate * dt;
    const double whole = std::floor(emitter.carry);
    emitter.carry -= whole;
    for (long k = 0; k < static_cast<long>(whole); ++k) {
      FlowParticle p;
      p.position = stroke.point_at(0.0, &p.direction);
      p.stroke = stroke_index;
      alive.push_back(p);
    }
  }
  emitter.particles = std::move(alive);
}

Vec2 wind_force(const Vec2& p, const Vec2& d, const Vec2& q, double s, double r) {
  const double w = (p - q).norm() / r;
  if (w >= 1.0) return Vec2::Zero();
  return s * (1.0 - w) * d;
}

Vec2 repel_force(const Vec2& p, const Vec2& q, double s, double r) {
  const Vec2 delta = q - p;
  if (delta.norm() >= r) return Vec2::Zero();
  return s * delta / r;
}

Vec2 attract_force(const Vec2& p, const Vec2& q, double s, double r) {
  const Vec2 delta = p - q;
  const double dist = delta.norm();
  if (dist == 0.0 || dist >= r) return Vec2::Zero();
  return s * (1.0 - dist / r) * delta / dist;
}

Vec2 particle_force(const EnergyStroke& stroke, const FlowParticle& particle, const Vec2& q) {
  switch (stroke.kind) {
    case StrokeKind::Wind: return wind_force(particle.position, particle.direction, q, stroke.strength, stroke.radius);
    case StrokeKind::Repel: return repel_force(particle.position, q, stroke.strength, stroke.radius);
    case StrokeKind::Attract: return attract_force(particle.position, q, stroke.strength, stroke.radius);
  }
  return Vec2::Zero();
}

namespace {

struct CellHash {
  std::size_t operator()(const std::pair<long long, long long>& c) const noexcept {
    return std::hash<long long>()(c.first * 73856093LL ^ c.second * 19349663LL);
  }
};

}  // namespace

std::vector<std::vector<Vec2>> accumulate_external_forces(std::span<const EnergyStroke> strokes,
                                                          std::span<const StrokeEmitter> emitters,
                                                          std::span<const BodyState> bodies) {
  std::vector<std::vector<Vec2>> forces;
  forces.reserve(bodies.size());
  for (const auto& body : bodies) forces.emplace_back(body.vertex_count(), Vec2::Zero());

  std::vector<int> candidates;
  for (std::size_t s = 0; s < strokes.size() && s < emitters.size(); ++s) {
    const EnergyStroke& stroke = strokes[s];
    const auto& particles = emitters[s].particles;
    if (particles.empty()) continue;

    // Uniform grid with cell size r: every particle within r of a vertex sits
    // in the vertex's cell or one of its eight neighbors.
    const double cell = stroke.radius;
    std::unordered_map<std::pair<long long, long long>, std::vector<int>, CellHash> grid;
    for (std::size_t i = 0; i < particles.size(); ++i) {
      const auto cx = static_cast<long long>(std::floor(particles[i].position.x() / cell));
      const auto cy = static_cast<long long>(std::floor(particles[i].position.y() / cell));
      grid[{cx, cy}].push_back(static_cast<int>(i));
    }

    for (std::size_t b = 0; b < bodies.size(); ++b) {
      const auto& positions = bodies[b].positions;
      for (std::size_t v = 0; v < positions.size(); ++v) {
        const Vec2& q = positions[v];
        const auto cx = static_cast<long long>(std::floor(q.x() / cell));
        const auto cy = static_cast<long long>(std::floor(q.y() / cell));
        candidates.clear();
        for (long long dy = -1; dy <= 1; ++dy) {
          for (long long dx = -1; dx <= 1; ++dx) {
            const auto it = grid.find({cx + dx, cy + dy});
            if (it != grid.end()) candidates.insert(candidates.end(), it->second.begin(), it->second.end());
          }
        }
        std::sort(candidates.begin(), candidates.end());
        for (int i : candidates) forces[b][v] += particle_force(stroke, particles[i], q);
      }
    }
  }
  return forces;
}

}  // namespace inkmotion
