#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "inkmotion/error.hpp"
#include "inkmotion/geometry.hpp"
#include "support.hpp"

using namespace inkmotion;

namespace {

void check_mesh_invariants(const TriMesh& mesh) {
  REQUIRE(mesh.rest_areas.size() == mesh.triangle_count());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.rest_positions[tri[0]];
    const Vec2& b = mesh.rest_positions[tri[1]];
    const Vec2& c = mesh.rest_positions[tri[2]];
    CHECK(signed_area(a, b, c) >= kAreaEpsilon);
    Mat2 D;
    D.col(0) = b - a;
    D.col(1) = c - a;
    CHECK((mesh.inv_rest_shape[t] * D - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

std::set<std::pair<int, int>> undirected_edges(const TriMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return edges;
}

// Each input segment (i, i+1) must be covered by a chain of mesh edges lying
// on the segment.
void check_constraints(const TriMesh& mesh, std::size_t n) {
  const auto edges = undirected_edges(mesh);
  for (const auto& e : mesh.boundary_edges) CHECK(edges.count({std::min(e[0], e[1]), std::max(e[0], e[1])}) == 1);
  std::map<int, int> next;
  for (const auto& e : mesh.boundary_edges) next[e[0]] = e[1];
  for (std::size_t i = 0; i < n; ++i) {
    const int target = static_cast<int>((i + 1) % n);
    int at = static_cast<int>(i);
    int hops = 0;
    while (at != target && next.count(at) && hops < 100000) {
      const int nxt = next[at];
      const Vec2& a = mesh.rest_positions[i];
      const Vec2& b = mesh.rest_positions[target];
      const Vec2& p = mesh.rest_positions[nxt];
      CHECK(std::abs(cross(b - a, p - a)) <= 1e-9 * (b - a).squaredNorm());
      at = nxt;
      ++hops;
    }
    CHECK(at == target);
  }
}

}  // namespace

TEST_CASE("extract_contours: full 10x10 mask gives one rectangle-like contour") {
  Mask mask(10, 10);
  std::fill(mask.bits.begin(), mask.bits.end(), 1);
  const auto contours = extract_contours(mask);
  REQUIRE(contours.size() == 1);
  // Traced through midpoints between pixel centers: 36 along the sides plus
  // four cut corners.
  CHECK(contours[0].perimeter() == doctest::Approx(36.0 + 4.0 * std::sqrt(0.5)).epsilon(1e-12));
  CHECK(polygon_area(contours[0].points) > 0.0);
}

TEST_CASE("extract_contours: two disjoint squares give two contours") {
  Mask mask(12, 12);
  for (int y = 1; y < 4; ++y)
    for (int x = 1; x < 4; ++x) mask.set(x, y, true);
  for (int y = 7; y < 10; ++y)
    for (int x = 6; x < 9; ++x) mask.set(x, y, true);
  CHECK(extract_contours(mask).size() == 2);
}

TEST_CASE("extract_contours: disk perimeter near the circle") {
  const Mask mask = testing::disk_mask(64, 32, 32, 20);
  const auto contours = extract_contours(mask);
  REQUIRE(contours.size() == 1);
  const double ideal = 2.0 * M_PI * 20.0;
  CHECK(std::abs(contours[0].perimeter() - ideal) < 0.1 * ideal);
  // Oracle: the boundary pixel count (foreground with a background 4-neighbor)
  // of the rasterized disk approximates the perimeter from below.
  int boundary = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (mask.at(x, y) && (!mask.at(x - 1, y) || !mask.at(x + 1, y) || !mask.at(x, y - 1) || !mask.at(x, y + 1)))
        ++boundary;
  CHECK(contours[0].perimeter() > 0.6 * boundary);
  CHECK(contours[0].perimeter() < 1.2 * boundary);
}

TEST_CASE("extract_contours: holes are ignored") {
  Mask mask(20, 20);
  for (int y = 2; y < 18; ++y)
    for (int x = 2; x < 18; ++x) mask.set(x, y, !(x >= 8 && x < 12 && y >= 8 && y < 12));
  const auto contours = extract_contours(mask);
  REQUIRE(contours.size() == 1);
  CHECK(polygon_area(contours[0].points) > 200.0);
}

TEST_CASE("extract_contours: empty mask") {
  Mask mask(5, 5);
  try {
    extract_contours(mask);
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyMask);
  }
}

TEST_CASE("extract_contours: single pixel and diagonal saddle") {
  Mask single(3, 3);
  single.set(1, 1, true);
  const auto one = extract_contours(single);
  REQUIRE(one.size() == 1);
  CHECK(one[0].points.size() >= 3);

  Mask diag(4, 4);
  diag.set(1, 1, true);
  diag.set(2, 2, true);
  CHECK(extract_contours(diag).size() == 2);
}

TEST_CASE("sample_boundary: exact division") {
  Contour square{{Vec2(0, 0), Vec2(10, 0), Vec2(10, 10), Vec2(0, 10)}};
  const auto pts = sample_boundary(square, 10.0);
  REQUIRE(pts.size() == 4);
  CHECK((pts[0] - Vec2(0, 0)).norm() < 1e-12);
  CHECK((pts[1] - Vec2(10, 0)).norm() < 1e-12);
  CHECK((pts[2] - Vec2(10, 10)).norm() < 1e-12);
  CHECK((pts[3] - Vec2(0, 10)).norm() < 1e-12);
}

TEST_CASE("sample_boundary: rounding rule and equal gaps") {
  Contour square{{Vec2(0, 0), Vec2(10, 0), Vec2(10, 10), Vec2(0, 10)}};
  const auto pts = sample_boundary(square, 7.0);
  REQUIRE(pts.size() == 6);
  // Arc-length positions k * 40/6 mapped back onto the square.
  auto arc_of = [](const Vec2& p) {
    if (std::abs(p.y()) < 1e-9) return p.x();
    if (std::abs(p.x() - 10) < 1e-9) return 10 + p.y();
    if (std::abs(p.y() - 10) < 1e-9) return 20 + (10 - p.x());
    return 30 + (10 - p.y());
  };
  for (int k = 0; k < 6; ++k) CHECK(arc_of(pts[k]) == doctest::Approx(k * 40.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("sample_boundary: disk samples stay near the circle") {
  const Mask mask = testing::disk_mask(64, 32, 32, 20);
  const auto contour = extract_contours(mask).front();
  const auto pts = sample_boundary(contour, 2.0);
  CHECK(pts.size() == static_cast<std::size_t>(std::llround(contour.perimeter() / 2.0)));
  for (const Vec2& p : pts) CHECK(std::abs((p - Vec2(32, 32)).norm() - 20.0) < 1.0);
}

TEST_CASE("sample_boundary: too coarse") {
  Contour square{{Vec2(0, 0), Vec2(10, 0), Vec2(10, 10), Vec2(0, 10)}};
  try {
    sample_boundary(square, 20.0);
    FAIL("expected SpacingTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpacingTooCoarse);
  }
}

TEST_CASE("triangulate: unit square, no refinement") {
  const std::vector<Vec2> square{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  const TriMesh mesh = triangulate(square, std::numeric_limits<double>::infinity(), 0.0);
  CHECK(mesh.triangle_count() == 2);
  CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  check_mesh_invariants(mesh);
  check_constraints(mesh, 4);
}

TEST_CASE("triangulate: unit square with area bound") {
  const std::vector<Vec2> square{Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  const TriMesh mesh = triangulate(square, 0.1, 0.0);
  CHECK(mesh.triangle_count() >= 10);
  CHECK(std::abs(mesh.total_area() - 1.0) < 1e-6);
  for (double a : mesh.rest_areas) CHECK(a <= 0.1 + 1e-12);
  check_mesh_invariants(mesh);
  check_constraints(mesh, 4);
}

TEST_CASE("triangulate: 32-gon with quality bounds") {
  const auto circle = testing::circle_polygon(32, 15.0, Vec2(20, 20));
  const TriMesh mesh = triangulate(circle, 20.0, 20.0);
  CHECK(std::abs(mesh.total_area() - polygon_area(circle)) < 1e-6);
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    CHECK(mesh.rest_areas[t] <= 20.0 + 1e-9);
    CHECK(min_angle_degrees(mesh.rest_positions[tri[0]], mesh.rest_positions[tri[1]], mesh.rest_positions[tri[2]]) >=
          20.0 - 1e-9);
  }
  check_mesh_invariants(mesh);
  check_constraints(mesh, circle.size());
}

TEST_CASE("triangulate: clockwise input is reoriented") {
  auto circle = testing::circle_polygon(12, 5.0);
  std::reverse(circle.begin(), circle.end());
  const TriMesh mesh = triangulate(circle, 4.0, 15.0);
  CHECK(std::abs(mesh.total_area() - std::abs(polygon_area(circle))) < 1e-6);
  check_mesh_invariants(mesh);
}

TEST_CASE("triangulate: non-convex polygon keeps the exterior empty") {
  const std::vector<Vec2> ell{Vec2(0, 0), Vec2(20, 0), Vec2(20, 8), Vec2(8, 8), Vec2(8, 20), Vec2(0, 20)};
  const TriMesh mesh = triangulate(ell, 5.0, 25.0);
  CHECK(std::abs(mesh.total_area() - polygon_area(ell)) < 1e-6);
  for (const auto& tri : mesh.triangles) {
    const Vec2 c = (mesh.rest_positions[tri[0]] + mesh.rest_positions[tri[1]] + mesh.rest_positions[tri[2]]) / 3.0;
    CHECK(point_in_polygon(ell, c));
  }
  check_mesh_invariants(mesh);
  check_constraints(mesh, ell.size());
}

TEST_CASE("triangulate: degenerate inputs") {
  auto code_of = [](std::vector<Vec2> pts, double max_area = 10.0, double min_angle = 20.0) {
    try {
      triangulate(pts, max_area, min_angle);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ParseError;
  };
  CHECK(code_of({Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)}) == ErrorCode::DegenerateBoundary);
  CHECK(code_of({Vec2(0, 0), Vec2(2, 2), Vec2(2, 0), Vec2(0, 2)}) == ErrorCode::DegenerateBoundary);
  CHECK(code_of({Vec2(0, 0), Vec2(1, 0)}) == ErrorCode::DegenerateBoundary);
  CHECK(code_of({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, 10.0, 40.0) == ErrorCode::InvalidArgument);
  CHECK(code_of({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, 0.0) == ErrorCode::InvalidArgument);
}

TEST_CASE("triangulate: Steiner cap") {
  const auto circle = testing::circle_polygon(32, 50.0);
  try {
    triangulate(circle, 0.5, 20.0, 50);
    FAIL("expected RefinementDiverged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RefinementDiverged);
  }
}

TEST_CASE("triangulate: deterministic") {
  const auto circle = testing::circle_polygon(40, 25.0, Vec2(30, 30));
  const TriMesh a = triangulate(circle, 15.0, 25.0);
  const TriMesh b = triangulate(circle, 15.0, 25.0);
  REQUIRE(a.vertex_count() == b.vertex_count());
  CHECK(a.triangles == b.triangles);
  for (std::size_t i = 0; i < a.vertex_count(); ++i) CHECK(a.rest_positions[i] == b.rest_positions[i]);
}

TEST_CASE("build_mesh: disk mask") {
  const Mask mask = testing::disk_mask(64, 32, 32, 20);
  // Chords cut off area between boundary samples; the spacing must be small
  // against the radius for the 2% bound to be meaningful.
  const TriMesh mesh = build_mesh(mask, MeshParams{4.0, 20.0, 20.0});
  check_mesh_invariants(mesh);
  CHECK(std::abs(mesh.total_area() - static_cast<double>(mask.count())) < 0.02 * mask.count());
  for (const auto& tri : mesh.triangles) {
    const Vec2 c = (mesh.rest_positions[tri[0]] + mesh.rest_positions[tri[1]] + mesh.rest_positions[tri[2]]) / 3.0;
    CHECK(mask.at(static_cast<int>(c.x()), static_cast<int>(c.y())));
  }
}

TEST_CASE("build_mesh: two components merge into one mesh") {
  Mask mask(80, 40);
  for (int y = 5; y < 35; ++y) {
    for (int x = 5; x < 35; ++x) mask.set(x, y, true);
    for (int x = 45; x < 75; ++x) mask.set(x, y, true);
  }
  const TriMesh mesh = build_mesh(mask, MeshParams{3.0, 30.0, 20.0});
  check_mesh_invariants(mesh);
  CHECK(std::abs(mesh.total_area() - static_cast<double>(mask.count())) < 0.02 * mask.count());
  const auto contours = extract_contours(mask);
  REQUIRE(contours.size() == 2);
}
