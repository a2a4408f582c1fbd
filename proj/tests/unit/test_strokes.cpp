#include <doctest.h>

#include <random>

#include "inkmotion/strokes.hpp"
#include "support.hpp"

using namespace inkmotion;

namespace {

// Quadratic reference: every particle against every vertex.
std::vector<std::vector<Vec2>> brute_force(std::span<const EnergyStroke> strokes,
                                           std::span<const StrokeEmitter> emitters,
                                           std::span<const BodyState> bodies) {
  std::vector<std::vector<Vec2>> out;
  for (const auto& b : bodies) out.emplace_back(b.vertex_count(), Vec2::Zero());
  for (std::size_t s = 0; s < strokes.size(); ++s) {
    for (std::size_t b = 0; b < bodies.size(); ++b) {
      for (std::size_t v = 0; v < bodies[b].vertex_count(); ++v) {
        for (const auto& p : emitters[s].particles) out[b][v] += particle_force(strokes[s], p, bodies[b].positions[v]);
      }
    }
  }
  return out;
}

EnergyStroke straight(double length) {
  EnergyStroke s;
  s.path = {Vec2(0, 0), Vec2(length, 0)};
  return s;
}

}  // namespace

TEST_CASE("emission: rate times dt") {
  EnergyStroke s = straight(100);
  s.emit_rate = 10;
  StrokeEmitter e;
  emit_and_advance(s, 0, e, 0.0, 0.1);
  REQUIRE(e.particles.size() == 1);
  CHECK(e.particles[0].position == Vec2(0, 0));
  CHECK(e.particles[0].arc == 0.0);
}

TEST_CASE("emission: fractional carry across steps") {
  EnergyStroke s = straight(1000);
  s.emit_rate = 30;
  s.particle_speed = 1;
  StrokeEmitter e;
  for (int i = 0; i < 1000; ++i) emit_and_advance(s, 0, e, i * 0.001, 0.001);
  CHECK(e.particles.size() >= 29);
  CHECK(e.particles.size() <= 30);
}

TEST_CASE("emission: expiry past the path end") {
  EnergyStroke s = straight(100);
  s.particle_speed = 50;
  s.t_end = 0.0;
  StrokeEmitter e;
  FlowParticle p;
  p.arc = 80;
  e.particles.push_back(p);
  emit_and_advance(s, 0, e, 1.0, 0.5);
  CHECK(e.particles.empty());
}

TEST_CASE("emission: corner of an L-shaped path flips the tangent") {
  EnergyStroke s;
  s.path = {Vec2(0, 0), Vec2(10, 0), Vec2(10, 10)};
  s.particle_speed = 4;
  s.t_end = 0.0;
  StrokeEmitter e;
  FlowParticle p;
  p.arc = 8;
  p.position = Vec2(8, 0);
  p.direction = Vec2(1, 0);
  e.particles.push_back(p);
  emit_and_advance(s, 0, e, 1.0, 1.0);
  REQUIRE(e.particles.size() == 1);
  CHECK(e.particles[0].arc == 12.0);
  CHECK((e.particles[0].position - Vec2(10, 2)).norm() < 1e-12);
  CHECK((e.particles[0].direction - Vec2(0, 1)).norm() < 1e-12);
}

TEST_CASE("emission: inactive window emits nothing; stationary strokes park one particle") {
  EnergyStroke s = straight(100);
  s.t_start = 1.0;
  s.t_end = 2.0;
  StrokeEmitter e;
  emit_and_advance(s, 0, e, 0.5, 0.5);
  CHECK(e.particles.empty());

  EnergyStroke dot;
  dot.kind = StrokeKind::Repel;
  dot.path = {Vec2(5, 5)};
  StrokeEmitter d;
  for (int i = 0; i < 10; ++i) emit_and_advance(dot, 0, d, i * 0.1, 0.1);
  REQUIRE(d.particles.size() == 1);
  CHECK(d.particles[0].position == Vec2(5, 5));
}

TEST_CASE("wind kernel") {
  const Vec2 p(1, 2), d(0.6, 0.8);
  CHECK(wind_force(p, d, p, 3, 5) == 3 * d);
  CHECK(wind_force(p, d, p + Vec2(5, 0), 3, 5) == Vec2::Zero());
  CHECK(wind_force(Vec2(0, 0), Vec2(1, 0), Vec2(5, 0), 2, 10) == Vec2(1, 0));
}

TEST_CASE("repel kernel") {
  CHECK(repel_force(Vec2(1, 1), Vec2(1, 1), 2, 4) == Vec2::Zero());
  CHECK(repel_force(Vec2(0, 0), Vec2(2, 0), 1, 4) == Vec2(0.5, 0));
  CHECK(repel_force(Vec2(0, 0), Vec2(5, 0), 1, 4) == Vec2::Zero());
  CHECK(repel_force(Vec2(0, 0), Vec2(4, 0), 1, 4) == Vec2::Zero());
}

TEST_CASE("attract kernel") {
  CHECK(attract_force(Vec2(0, 0), Vec2(10, 0), 2, 10) == Vec2::Zero());
  CHECK(attract_force(Vec2(3, 3), Vec2(3, 3), 2, 10) == Vec2::Zero());
  CHECK((attract_force(Vec2(0, 0), Vec2(5, 0), 2, 10) - Vec2(-1, 0)).norm() < 1e-15);
}

TEST_CASE("kernel properties: parallelism and scaling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 500; ++i) {
    const Vec2 p(u(rng), u(rng)), q(u(rng), u(rng));
    const Vec2 d = Vec2(u(rng), u(rng)).normalized();
    const double s = std::abs(u(rng)), r = 1 + std::abs(u(rng));
    CHECK(std::abs(cross(wind_force(p, d, q, s, r), d)) < 1e-12);
    CHECK(std::abs(cross(attract_force(p, q, s, r), p - q)) < 1e-9);
    CHECK(std::abs(cross(repel_force(p, q, s, r), q - p)) < 1e-9);
    CHECK(repel_force(p, q, 4 * s, r) == 4.0 * repel_force(p, q, s, r));
  }
}

TEST_CASE("accumulate_external_forces") {
  const auto mesh = std::make_shared<TriMesh>(triangulate(testing::circle_polygon(24, 30, Vec2(50, 50)), 30, 20));
  std::vector<BodyState> bodies{BodyState::at_rest(mesh, 1.0)};

  EnergyStroke wind;
  wind.path = {Vec2(0, 50), Vec2(100, 50)};
  wind.strength = 2;
  wind.radius = 20;
  std::vector<EnergyStroke> strokes{wind};
  std::vector<StrokeEmitter> emitters(1);

  SUBCASE("no particles") {
    const auto forces = accumulate_external_forces(strokes, emitters, bodies);
    for (const Vec2& f : forces[0]) CHECK(f == Vec2::Zero());
  }
  SUBCASE("one particle on a vertex, then a duplicate doubles every force") {
    FlowParticle p;
    p.position = mesh->rest_positions[3];
    p.direction = Vec2(1, 0);
    emitters[0].particles.push_back(p);
    const auto single = accumulate_external_forces(strokes, emitters, bodies).at(0);
    CHECK(single[3] == wind.strength * Vec2(1, 0));
    for (std::size_t v = 0; v < single.size(); ++v) {
      if ((mesh->rest_positions[v] - p.position).norm() >= wind.radius) CHECK(single[v] == Vec2::Zero());
    }
    emitters[0].particles.push_back(p);
    const auto twice = accumulate_external_forces(strokes, emitters, bodies).at(0);
    for (std::size_t v = 0; v < single.size(); ++v) CHECK(twice[v] == 2.0 * single[v]);
  }
  SUBCASE("spatial hash equals the quadratic scan bit for bit") {
    EnergyStroke attract;
    attract.kind = StrokeKind::Attract;
    attract.path = {Vec2(50, 0), Vec2(50, 100)};
    attract.strength = 5;
    attract.radius = 15;
    strokes.push_back(attract);
    emitters.resize(2);
    for (int i = 0; i < 400; ++i) {
      const double t = i * 0.001;
      for (std::size_t s = 0; s < strokes.size(); ++s) {
        emit_and_advance(strokes[s], static_cast<int>(s), emitters[s], t, 0.001);
      }
    }
    REQUIRE(emitters[0].particles.size() > 5);
    CHECK(accumulate_external_forces(strokes, emitters, bodies) == brute_force(strokes, emitters, bodies));
  }
}
