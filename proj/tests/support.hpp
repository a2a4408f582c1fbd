#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <unistd.h>
#include <vector>

#include "inkmotion/geometry.hpp"

namespace testing {

using inkmotion::Vec2;

inline inkmotion::Mask disk_mask(int size, double cx, double cy, double radius) {
  inkmotion::Mask mask(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      mask.set(x, y, dx * dx + dy * dy <= radius * radius);
    }
  }
  return mask;
}

inline std::vector<Vec2> circle_polygon(int n, double radius, Vec2 center = Vec2::Zero()) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    pts.push_back(center + radius * Vec2(std::cos(a), std::sin(a)));
  }
  return pts;
}

inline std::shared_ptr<const inkmotion::TriMesh> mesh_of(std::vector<Vec2> rest, std::vector<std::array<int, 3>> tris) {
  auto mesh = std::make_shared<inkmotion::TriMesh>();
  mesh->rest_positions = std::move(rest);
  mesh->triangles = std::move(tris);
  inkmotion::finalize_rest_state(*mesh);
  return mesh;
}

// Small random mesh: a jittered polygon triangulated without refinement.
inline std::shared_ptr<const inkmotion::TriMesh> random_mesh(std::mt19937_64& rng, int max_vertices = 20) {
  std::uniform_int_distribution<int> count(5, max_vertices);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  std::uniform_real_distribution<double> radius(3.0, 30.0);
  const int n = count(rng);
  const double r = radius(rng);
  std::vector<Vec2> poly;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    poly.push_back(r * jitter(rng) * Vec2(std::cos(a), std::sin(a)));
  }
  auto mesh = std::make_shared<inkmotion::TriMesh>(inkmotion::triangulate(poly, 1e30, 0.0));
  return mesh;
}

}  // namespace testing

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "inkmotion/imaging.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("inkmotion_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline void write_mask(const inkmotion::Mask& mask, const std::filesystem::path& path) {
  inkmotion::ImageBuffer img(mask.width, mask.height, 1);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) img.samples[i] = mask.bits[i] ? 1.0f : 0.0f;
  inkmotion::write_png(img, path);
}

// Gray background with a dark disk outline so the sketch has lines to move.
inline inkmotion::ImageBuffer ring_image(int size, double cx, double cy, double radius) {
  inkmotion::ImageBuffer img(size, size, 3, 0.9f);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      const float v = d < radius - 2 ? 0.6f : (d < radius ? 0.1f : 0.9f);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = v;
    }
  }
  return img;
}

}  // namespace testing
