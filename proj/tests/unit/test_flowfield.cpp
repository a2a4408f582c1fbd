#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "inkmotion/error.hpp"
#include "inkmotion/flowfield.hpp"
#include "support.hpp"

using namespace inkmotion;

namespace {

// Byte-level encoder written independently of write_flo: IEEE-754 bit
// patterns are taken from memcpy and emitted least significant byte first.
std::string encode_oracle(int w, int h, const std::vector<float>& u, const std::vector<float>& v) {
  std::string out;
  auto put32 = [&](std::uint32_t x) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
  };
  auto put_float = [&](float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put32(bits);
  };
  put_float(202021.25f);
  put32(static_cast<std::uint32_t>(w));
  put32(static_cast<std::uint32_t>(h));
  for (std::size_t i = 0; i < u.size(); ++i) {
    put_float(u[i]);
    put_float(v[i]);
  }
  return out;
}

ErrorCode read_error(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_flo(in);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("rasterize: identity and translation") {
  const auto mesh = triangulate(testing::circle_polygon(20, 12, Vec2(16, 16)), 10, 20);
  const FlowField still = rasterize_flow(mesh, mesh.rest_positions, 32, 32);
  for (std::size_t i = 0; i < still.u.size(); ++i) {
    CHECK(std::abs(still.u[i]) < 1e-6);
    CHECK(std::abs(still.v[i]) < 1e-6);
  }
  auto moved = mesh.rest_positions;
  for (auto& p : moved) p += Vec2(3, -4);
  const FlowField flow = rasterize_flow(mesh, moved, 32, 32);
  for (int row = 0; row < 32; ++row) {
    for (int col = 0; col < 32; ++col) {
      const std::size_t i = flow.index(col, row);
      const bool covered = point_in_polygon(mesh.rest_positions, Vec2(col + 0.5, row + 0.5));
      if (covered) {
        CHECK(flow.u[i] == doctest::Approx(3).epsilon(1e-6));
        CHECK(flow.v[i] == doctest::Approx(-4).epsilon(1e-6));
      } else if (flow.u[i] != 0.0f) {
        // Pixels on the polygon outline may still be claimed by an edge.
        CHECK(flow.u[i] == doctest::Approx(3).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("rasterize: single stretched triangle against a barycentric solve") {
  TriMesh mesh;
  mesh.rest_positions = {Vec2(0, 0), Vec2(10, 0), Vec2(0, 10)};
  mesh.triangles = {{0, 1, 2}};
  finalize_rest_state(mesh);
  const std::vector<Vec2> moved{Vec2(0, 0), Vec2(20, 0), Vec2(0, 10)};
  const FlowField flow = rasterize_flow(mesh, moved, 12, 12);
  for (int row = 0; row < 12; ++row) {
    for (int col = 0; col < 12; ++col) {
      const Vec2 p(col + 0.5, row + 0.5);
      // Barycentric coordinates solved by hand for this right triangle.
      const double l1 = p.x() / 10, l2 = p.y() / 10, l0 = 1 - l1 - l2;
      const std::size_t i = flow.index(col, row);
      if (l0 >= -1e-9 && l1 >= -1e-9 && l2 >= -1e-9) {
        CHECK(std::abs(flow.u[i] - l1 * 10) < 1e-6);
        CHECK(flow.v[i] == 0.0f);
      } else {
        CHECK(flow.u[i] == 0.0f);
      }
    }
  }
  CHECK(std::abs(flow.u[flow.index(4, 0)] - 4.5f) < 1e-6);
}

TEST_CASE("rasterize: grid equals brute force; painter's order across bodies") {
  std::mt19937_64 rng(9);
  const auto mesh = triangulate(testing::circle_polygon(30, 25, Vec2(32, 30)), 8, 25);
  std::normal_distribution<double> n(0, 2);
  auto moved = mesh.rest_positions;
  for (auto& p : moved) p += Vec2(n(rng), n(rng));
  const FlowField fast = rasterize_flow(mesh, moved, 64, 64);
  const FlowField slow = rasterize_flow_bruteforce(mesh, moved, 64, 64);
  CHECK(fast.u == slow.u);
  CHECK(fast.v == slow.v);

  const auto other = triangulate(testing::circle_polygon(12, 10, Vec2(50, 30)), 8, 25);
  auto other_moved = other.rest_positions;
  for (auto& p : other_moved) p += Vec2(0, 7);
  FlowField both = fast;
  rasterize_flow_into(both, other, other_moved);
  CHECK(both.v[both.index(50, 30)] == doctest::Approx(7.0f));
  CHECK(both.u[both.index(20, 30)] == fast.u[fast.index(20, 30)]);
}

TEST_CASE(".flo golden bytes") {
  FlowField f(1, 1);
  f.u[0] = 1.5f;
  f.v[0] = -2.0f;
  std::ostringstream out;
  write_flo(f, out);
  const std::string bytes = out.str();
  CHECK(bytes == encode_oracle(1, 1, f.u, f.v));
  const std::string expected("PIEH\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\xC0\x3F\x00\x00\x00\xC0", 20);
  CHECK(bytes == expected);

  std::istringstream in(bytes);
  const FlowField back = read_flo(in);
  CHECK(back.u[0] == 1.5f);
  CHECK(back.v[0] == -2.0f);
}

TEST_CASE(".flo size and round trip") {
  std::ostringstream zero;
  write_flo(FlowField(2, 2), zero);
  CHECK(zero.str().size() == 44);
  CHECK(zero.str().substr(12) == std::string(32, '\0'));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-100, 100);
  for (int t = 0; t < 20; ++t) {
    FlowField f(1 + t % 7, 1 + t % 5);
    for (auto& x : f.u) x = u(rng);
    for (auto& x : f.v) x = u(rng);
    std::ostringstream out;
    write_flo(f, out);
    CHECK(out.str() == encode_oracle(f.width, f.height, f.u, f.v));
    std::istringstream in(out.str());
    const FlowField g = read_flo(in);
    CHECK(g.width == f.width);
    CHECK(g.u == f.u);
    CHECK(g.v == f.v);
  }
}

TEST_CASE(".flo errors") {
  CHECK(read_error("XXXX" + std::string(8, '\0')) == ErrorCode::BadMagic);
  CHECK(read_error("PIE") == ErrorCode::TruncatedStream);
  CHECK(read_error(encode_oracle(100, 100, {}, {})) == ErrorCode::TruncatedStream);
  CHECK(read_error(encode_oracle(0, 5, {}, {})) == ErrorCode::DimensionOverflow);
  CHECK(read_error(encode_oracle(70000, 1, {}, {})) == ErrorCode::DimensionOverflow);
  CHECK(read_error(encode_oracle(-1, 1, {}, {})) == ErrorCode::DimensionOverflow);
  try {
    read_flo_file("/nonexistent/file.flo");
    FAIL("expected FileNotFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FileNotFound);
  }
}
