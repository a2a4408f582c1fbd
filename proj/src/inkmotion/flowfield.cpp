#include "inkmotion/flowfield.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "inkmotion/error.hpp"

namespace inkmotion {

FlowField::FlowField(int w, int h)
    : width(w), height(h), u(static_cast<std::size_t>(w) * h, 0.0f), v(static_cast<std::size_t>(w) * h, 0.0f) {}

namespace {

constexpr double kBarycentricTolerance = 1e-9;
constexpr float kFloTag = 202021.25f;
constexpr int kMaxFloDimension = 1 << 16;

bool sample_triangle(const TriMesh& mesh, std::span<const Vec2> positions, std::size_t t, const Vec2& p, Vec2& out) {
  const auto& tri = mesh.triangles[t];
  const Vec2& x0 = mesh.rest_positions[tri[0]];
  const Vec2 l12 = mesh.inv_rest_shape[t] * (p - x0);
  const double l0 = 1.0 - l12.x() - l12.y();
  if (l0 < -kBarycentricTolerance || l12.x() < -kBarycentricTolerance || l12.y() < -kBarycentricTolerance) {
    return false;
  }
  const Vec2 d0 = positions[tri[0]] - x0;
  const Vec2 d1 = positions[tri[1]] - mesh.rest_positions[tri[1]];
  const Vec2 d2 = positions[tri[2]] - mesh.rest_positions[tri[2]];
  out = l0 * d0 + l12.x() * d1 + l12.y() * d2;
  return true;
}

void check_positions(const TriMesh& mesh, std::span<const Vec2> positions) {
  if (positions.size() != mesh.vertex_count()) {
    throw Error(ErrorCode::InvalidArgument, "snapshot has " + std::to_string(positions.size()) +
                                                " positions for a mesh of " + std::to_string(mesh.vertex_count()));
  }
}

void store(FlowField& field, int col, int row, const Vec2& d) {
  field.u[field.index(col, row)] = static_cast<float>(d.x());
  field.v[field.index(col, row)] = static_cast<float>(d.y());
}

}  // namespace

void rasterize_flow_into(FlowField& field, const TriMesh& mesh, std::span<const Vec2> positions) {
  check_positions(mesh, positions);
  struct Box {
    double x0, x1;
  };
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(std::max(field.height, 0)));
  std::vector<Box> boxes(mesh.triangle_count());
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    Vec2 lo = mesh.rest_positions[tri[0]], hi = lo;
    for (int k = 1; k < 3; ++k) {
      lo = lo.cwiseMin(mesh.rest_positions[tri[k]]);
      hi = hi.cwiseMax(mesh.rest_positions[tri[k]]);
    }
    boxes[t] = {lo.x() - 1.0, hi.x() + 1.0};
    // one row of slack on each side; the barycentric test decides
    const int r0 = std::max(0, static_cast<int>(std::floor(lo.y() - 0.5)) - 1);
    const int r1 = std::min(field.height - 1, static_cast<int>(std::ceil(hi.y() - 0.5)) + 1);
    for (int r = r0; r <= r1; ++r) rows[r].push_back(static_cast<int>(t));
  }
  Vec2 d;
  for (int row = 0; row < field.height; ++row) {
    const auto& candidates = rows[row];
    if (candidates.empty()) continue;
    for (int col = 0; col < field.width; ++col) {
      const Vec2 p(col + 0.5, row + 0.5);
      for (int t : candidates) {
        if (p.x() < boxes[t].x0 || p.x() > boxes[t].x1) continue;
        if (sample_triangle(mesh, positions, t, p, d)) {
          store(field, col, row, d);
          break;
        }
      }
    }
  }
}

FlowField rasterize_flow(const TriMesh& mesh, std::span<const Vec2> positions, int width, int height) {
  FlowField field(width, height);
  rasterize_flow_into(field, mesh, positions);
  return field;
}

FlowField rasterize_flow_bruteforce(const TriMesh& mesh, std::span<const Vec2> positions, int width, int height) {
  check_positions(mesh, positions);
  FlowField field(width, height);
  Vec2 d;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const Vec2 p(col + 0.5, row + 0.5);
      for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        if (sample_triangle(mesh, positions, t, p, d)) {
          store(field, col, row, d);
          break;
        }
      }
    }
  }
  return field;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t value) {
  const char bytes[4] = {static_cast<char>(value & 0xff), static_cast<char>((value >> 8) & 0xff),
                         static_cast<char>((value >> 16) & 0xff), static_cast<char>((value >> 24) & 0xff)};
  out.write(bytes, 4);
}

bool get_u32(std::istream& in, std::uint32_t& value) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
  value = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
          (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
  return true;
}

}  // namespace

void write_flo(const FlowField& field, std::ostream& out) {
  put_u32(out, std::bit_cast<std::uint32_t>(kFloTag));
  put_u32(out, static_cast<std::uint32_t>(field.width));
  put_u32(out, static_cast<std::uint32_t>(field.height));
  for (std::size_t i = 0; i < field.u.size(); ++i) {
    put_u32(out, std::bit_cast<std::uint32_t>(field.u[i]));
    put_u32(out, std::bit_cast<std::uint32_t>(field.v[i]));
  }
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing .flo stream");
}

FlowField read_flo(std::istream& in) {
  std::uint32_t tag = 0, w = 0, h = 0;
  if (!get_u32(in, tag)) throw Error(ErrorCode::TruncatedStream, ".flo stream ends before its tag");
  if (std::bit_cast<float>(tag) != kFloTag) throw Error(ErrorCode::BadMagic, ".flo tag is not 202021.25");
  if (!get_u32(in, w) || !get_u32(in, h)) throw Error(ErrorCode::TruncatedStream, ".flo stream ends in its header");
  const auto width = static_cast<std::int32_t>(w);
  const auto height = static_cast<std::int32_t>(h);
  if (width <= 0 || height <= 0 || width > kMaxFloDimension || height > kMaxFloDimension) {
    throw Error(ErrorCode::DimensionOverflow,
                ".flo dimensions " + std::to_string(width) + "x" + std::to_string(height) + " out of range");
  }
  FlowField field(width, height);
  std::uint32_t a = 0, b = 0;
  for (std::size_t i = 0; i < field.u.size(); ++i) {
    if (!get_u32(in, a) || !get_u32(in, b)) {
      throw Error(ErrorCode::TruncatedStream, ".flo stream ends after " + std::to_string(i) + " of " +
                                                  std::to_string(field.u.size()) + " pixels");
    }
    field.u[i] = std::bit_cast<float>(a);
    field.v[i] = std::bit_cast<float>(b);
  }
  return field;
}

void write_flo_file(const FlowField& field, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  write_flo(field, out);
}

FlowField read_flo_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  return read_flo(in);
}

}  // namespace inkmotion
