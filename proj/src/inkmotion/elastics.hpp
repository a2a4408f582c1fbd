#pragma once

#include <memory>
#include <span>
#include <vector>

#include "inkmotion/geometry.hpp"
#include "inkmotion/types.hpp"

namespace inkmotion {

// Homogeneous Fixed Corotated material. Units: pixels, seconds, unit mass;
// mu and lambda are per unit thickness so triangle areas act as volumes.
struct Material {
  double mu = 1.0;
  double lambda = 1.0;
  double density = 1.0;
};

// Plane-strain conversion: mu = E / (2(1 + nu)), lambda = E nu / ((1 + nu)(1 - 2 nu)).
Material material_from_young_poisson(double youngs_modulus, double poisson, double density);

struct BodyState {
  std::shared_ptr<const TriMesh> mesh;
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  std::vector<double> masses;

  // Rest positions, zero velocity, lumped masses.
  static BodyState at_rest(std::shared_ptr<const TriMesh> mesh, double density);

  std::size_t vertex_count() const { return positions.size(); }
};

Mat2 deformation_gradient(const TriMesh& mesh, std::span<const Vec2> positions, std::size_t tri);
inline Mat2 deformation_gradient(const BodyState& state, std::size_t tri) {
  return deformation_gradient(*state.mesh, state.positions, tri);
}

// Rotation closest to F in the Frobenius norm. For det F > 0 this is the
// polar factor; for inverted F it matches the sign-corrected SVD rotation.
Mat2 polar_rotation(const Mat2& F);

// Psi = mu |F - R|^2 + lambda / 2 (det F - 1)^2
double energy_density(const Mat2& F, const Material& material);

// dPsi/dF = 2 mu (F - R) + lambda (det F - 1) cof(F), where cof(F) = det F F^-T.
Mat2 first_piola(const Mat2& F, const Material& material);

std::vector<double> lumped_masses(const TriMesh& mesh, double density);

double total_energy(const TriMesh& mesh, std::span<const Vec2> positions, const Material& material);
inline double total_energy(const BodyState& state, const Material& material) {
  return total_energy(*state.mesh, state.positions, material);
}

double kinetic_energy(const BodyState& state);

// Adds -dE/dx into `forces` (same length as positions).
void accumulate_internal_forces(const TriMesh& mesh, std::span<const Vec2> positions, const Material& material,
                                std::span<Vec2> forces);

std::vector<Vec2> internal_forces(const BodyState& state, const Material& material);

}  // namespace inkmotion
