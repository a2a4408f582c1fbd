#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "inkmotion/types.hpp"

namespace inkmotion {

// Binary occupancy image, row-major, one byte per pixel (0 or 1).
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h);

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool on) { bits[static_cast<std::size_t>(y) * width + x] = on ? 1 : 0; }
  std::size_t count() const;
};

// Closed polygon in pixel coordinates. The closing edge (back -> front) is
// implicit. Orientation: positive shoelace area on raw (x, y-down) numbers.
struct Contour {
  std::vector<Vec2> points;

  double perimeter() const;
};

struct TriMesh {
  std::vector<Vec2> rest_positions;
  std::vector<std::array<int, 3>> triangles;
  // Constraint edges on the input boundary, directed along the boundary. A
  // boundary segment split by refinement shows up as a chain of edges.
  std::vector<std::array<int, 2>> boundary_edges;
  std::vector<double> rest_areas;
  // [X1 - X0, X2 - X0]^-1 per triangle.
  std::vector<Mat2> inv_rest_shape;

  std::size_t vertex_count() const { return rest_positions.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  double total_area() const;
};

struct MeshParams {
  double spacing = 12.0;
  double max_area = 300.0;
  double min_angle = 20.0;
  std::size_t steiner_cap = 200000;
};

inline constexpr double kAreaEpsilon = 1e-6;
inline constexpr double kMaxMinAngle = 28.0;

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);
double polygon_area(std::span<const Vec2> polygon);
bool point_in_polygon(std::span<const Vec2> polygon, const Vec2& p);
// Smallest interior angle of a triangle, in degrees.
double min_angle_degrees(const Vec2& a, const Vec2& b, const Vec2& c);

// One contour per 4-connected foreground component, holes dropped. Contours
// run through the midpoints between pixel centers (marching squares on the
// pixel-center lattice, saddles split) with collinear points pruned.
std::vector<Contour> extract_contours(const Mask& mask);

// `count = round(perimeter / spacing)` points spaced exactly
// perimeter / count apart along the contour, starting at points.front().
std::vector<Vec2> sample_boundary(const Contour& contour, double spacing);

// Conforming Delaunay triangulation of a simple polygon with Ruppert-style
// refinement. Boundary samples keep their indices 0..n-1 in the result
// (reversed first if the polygon is negatively oriented).
TriMesh triangulate(std::span<const Vec2> boundary, double max_area, double min_angle,
                    std::size_t steiner_cap = MeshParams{}.steiner_cap);

// Fills rest_areas and inv_rest_shape from rest_positions and triangles.
// Throws DegenerateBoundary if any triangle is below kAreaEpsilon.
void finalize_rest_state(TriMesh& mesh);

// Contours -> samples -> triangulation for every component, merged into one
// mesh (disconnected pieces simulate independently).
TriMesh build_mesh(const Mask& mask, const MeshParams& params);

}  // namespace inkmotion
