#include "inkmotion/elastics.hpp"

#include <cmath>
#include <string>

#include "inkmotion/error.hpp"

namespace inkmotion {

Material material_from_young_poisson(double youngs_modulus, double poisson, double density) {
  if (!(youngs_modulus > 0.0)) throw Error(ErrorCode::InvalidArgument, "Young's modulus must be positive");
  if (!(poisson >= 0.0)) throw Error(ErrorCode::InvalidArgument, "Poisson ratio must be non-negative");
  if (!(poisson < 0.5)) {
    throw Error(ErrorCode::InvalidPoisson, "Poisson ratio " + std::to_string(poisson) + " must be below 0.5");
  }
  if (!(density > 0.0)) throw Error(ErrorCode::InvalidArgument, "density must be positive");
  Material m;
  m.mu = youngs_modulus / (2.0 * (1.0 + poisson));
  m.lambda = youngs_modulus * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  m.density = density;
  return m;
}

BodyState BodyState::at_rest(std::shared_ptr<const TriMesh> mesh, double density) {
  BodyState s;
  s.positions = mesh->rest_positions;
  s.velocities.assign(mesh->vertex_count(), Vec2::Zero());
  s.masses = lumped_masses(*mesh, density);
  s.mesh = std::move(mesh);
  return s;
}

Mat2 deformation_gradient(const TriMesh& mesh, std::span<const Vec2> positions, std::size_t tri) {
  const auto& t = mesh.triangles[tri];
  Mat2 deformed;
  deformed.col(0) = positions[t[1]] - positions[t[0]];
  deformed.col(1) = positions[t[2]] - positions[t[0]];
  return deformed * mesh.inv_rest_shape[tri];
}

Mat2 polar_rotation(const Mat2& F) {
  // F + cof(F) is a scaled rotation; normalizing it gives the closest rotation.
  const double c = F(0, 0) + F(1, 1);
  const double s = F(1, 0) - F(0, 1);
  const double norm = std::hypot(c, s);
  if (norm == 0.0) return Mat2::Identity();
  Mat2 R;
  R << c / norm, -s / norm, s / norm, c / norm;
  return R;
}

namespace {

Mat2 cofactor(const Mat2& F) {
  Mat2 cof;
  cof << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
  return cof;
}

}  // namespace

double energy_density(const Mat2& F, const Material& material) {
  const Mat2 R = polar_rotation(F);
  const double J = F.determinant();
  return material.mu * (F - R).squaredNorm() + 0.5 * material.lambda * (J - 1.0) * (J - 1.0);
}

Mat2 first_piola(const Mat2& F, const Material& material) {
  const Mat2 R = polar_rotation(F);
  const double J = F.determinant();
  return 2.0 * material.mu * (F - R) + material.lambda * (J - 1.0) * cofactor(F);
}

std::vector<double> lumped_masses(const TriMesh& mesh, double density) {
  std::vector<double> masses(mesh.vertex_count(), 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double share = density * mesh.rest_areas[t] / 3.0;
    for (int v : mesh.triangles[t]) masses[v] += share;
  }
  return masses;
}

double total_energy(const TriMesh& mesh, std::span<const Vec2> positions, const Material& material) {
  double energy = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    energy += energy_density(deformation_gradient(mesh, positions, t), material) * mesh.rest_areas[t];
  }
  return energy;
}

double kinetic_energy(const BodyState& state) {
  double energy = 0.0;
  for (std::size_t i = 0; i < state.velocities.size(); ++i) {
    energy += 0.5 * state.masses[i] * state.velocities[i].squaredNorm();
  }
  return energy;
}

void accumulate_internal_forces(const TriMesh& mesh, std::span<const Vec2> positions, const Material& material,
                                std::span<Vec2> forces) {
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Mat2 P = first_piola(deformation_gradient(mesh, positions, t), material);
    const Mat2 H = -mesh.rest_areas[t] * P * mesh.inv_rest_shape[t].transpose();
    const auto& tri = mesh.triangles[t];
    const Vec2 f1 = H.col(0);
    const Vec2 f2 = H.col(1);
    forces[tri[1]] += f1;
    forces[tri[2]] += f2;
    forces[tri[0]] -= f1 + f2;
  }
}

std::vector<Vec2> internal_forces(const BodyState& state, const Material& material) {
  std::vector<Vec2> forces(state.vertex_count(), Vec2::Zero());
  accumulate_internal_forces(*state.mesh, state.positions, material, forces);
  return forces;
}

}  // namespace inkmotion
