#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "inkmotion/geometry.hpp"

namespace inkmotion {

// Dense displacement field anchored at the reference frame. Pixel (col, row)
// has its center at (col + 0.5, row + 0.5).
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;
  std::vector<float> v;

  FlowField() = default;
  FlowField(int w, int h);

  std::size_t index(int col, int row) const { return static_cast<std::size_t>(row) * width + col; }
};

// Writes displacement x_i - X_i interpolated barycentrically inside each rest
// triangle; pixels covered by no triangle are left untouched. Shared edges go
// to the lowest triangle index. Candidate triangles are bucketed per row.
void rasterize_flow_into(FlowField& field, const TriMesh& mesh, std::span<const Vec2> positions);

// Zero outside the mesh.
FlowField rasterize_flow(const TriMesh& mesh, std::span<const Vec2> positions, int width, int height);

// Same contract, testing every triangle at every pixel.
FlowField rasterize_flow_bruteforce(const TriMesh& mesh, std::span<const Vec2> positions, int width, int height);

// Middlebury .flo: "PIEH" (202021.25f), int32 width, int32 height, then
// row-major interleaved float32 u, v. Little-endian.
void write_flo(const FlowField& field, std::ostream& out);
FlowField read_flo(std::istream& in);

void write_flo_file(const FlowField& field, const std::filesystem::path& path);
FlowField read_flo_file(const std::filesystem::path& path);

}  // namespace inkmotion
