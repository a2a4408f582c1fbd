#include "inkmotion/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <utility>

#include "inkmotion/error.hpp"

namespace inkmotion {

Mask::Mask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double Contour::perimeter() const {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += (points[(i + 1) % points.size()] - points[i]).norm();
  }
  return total;
}

double TriMesh::total_area() const {
  return std::accumulate(rest_areas.begin(), rest_areas.end(), 0.0);
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

double polygon_area(std::span<const Vec2> polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    twice += cross(polygon[i], polygon[(i + 1) % polygon.size()]);
  }
  return 0.5 * twice;
}

bool point_in_polygon(std::span<const Vec2> polygon, const Vec2& p) {
  bool inside = false;
  for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double min_angle_degrees(const Vec2& a, const Vec2& b, const Vec2& c) {
  const std::array<Vec2, 3> v{a, b, c};
  double smallest = 180.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2 e1 = v[(i + 1) % 3] - v[i];
    const Vec2 e2 = v[(i + 2) % 3] - v[i];
    const double angle = std::atan2(std::abs(cross(e1, e2)), e1.dot(e2));
    smallest = std::min(smallest, angle * 180.0 / M_PI);
  }
  return smallest;
}

namespace {

using Lattice = std::pair<int, int>;  // doubled pixel coordinates

std::vector<int> label_components(const Mask& mask, int& count) {
  std::vector<int> labels(mask.bits.size(), -1);
  count = 0;
  std::deque<int> queue;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const int idx = y * mask.width + x;
      if (!mask.bits[idx] || labels[idx] >= 0) continue;
      labels[idx] = count;
      queue.push_back(idx);
      while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        const int cx = cur % mask.width;
        const int cy = cur / mask.width;
        constexpr int dx[4] = {1, -1, 0, 0};
        constexpr int dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + dx[k];
          const int ny = cy + dy[k];
          if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
          const int nidx = ny * mask.width + nx;
          if (mask.bits[nidx] && labels[nidx] < 0) {
            labels[nidx] = count;
            queue.push_back(nidx);
          }
        }
      }
      ++count;
    }
  }
  return labels;
}

long long cross_lattice(const Lattice& o, const Lattice& a, const Lattice& b) {
  return static_cast<long long>(a.first - o.first) * (b.second - o.second) -
         static_cast<long long>(a.second - o.second) * (b.first - o.first);
}

// Outer boundary of one component. Segments are directed with foreground on
// their left so the outer loop comes out positively oriented.
std::vector<Lattice> trace_component(const Mask& mask, const std::vector<int>& labels, int label,
                                     int x0, int y0, int x1, int y1) {
  auto on = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= mask.width || y >= mask.height) return false;
    return labels[static_cast<std::size_t>(y) * mask.width + x] == label;
  };

  std::map<Lattice, Lattice> next;
  for (int j = y0 - 1; j <= y1; ++j) {
    for (int i = x0 - 1; i <= x1; ++i) {
      const std::array<bool, 4> b{on(i, j), on(i + 1, j), on(i + 1, j + 1), on(i, j + 1)};
      const std::array<Lattice, 4> corner{Lattice{2 * i + 1, 2 * j + 1}, Lattice{2 * i + 3, 2 * j + 1},
                                          Lattice{2 * i + 3, 2 * j + 3}, Lattice{2 * i + 1, 2 * j + 3}};
      // mid[k] sits between corner k and corner k+1
      const std::array<Lattice, 4> mid{Lattice{2 * i + 2, 2 * j + 1}, Lattice{2 * i + 3, 2 * j + 2},
                                       Lattice{2 * i + 2, 2 * j + 3}, Lattice{2 * i + 1, 2 * j + 2}};
      std::array<int, 4> crossing{};
      int n = 0;
      for (int k = 0; k < 4; ++k) {
        if (b[k] != b[(k + 1) % 4]) crossing[n++] = k;
      }
      if (n == 0) continue;
      auto add = [&](Lattice p, Lattice q, const Lattice& fg) {
        if (cross_lattice(p, q, fg) < 0) std::swap(p, q);
        next[p] = q;
      };
      if (n == 2) {
        const int fg = b[0] ? 0 : b[1] ? 1 : b[2] ? 2 : 3;
        add(mid[crossing[0]], mid[crossing[1]], corner[fg]);
      } else {
        for (int k = 0; k < 4; ++k) {
          if (b[k]) add(mid[(k + 3) % 4], mid[k], corner[k]);
        }
      }
    }
  }

  std::vector<Lattice> best;
  long long best_area = 0;
  while (!next.empty()) {
    std::vector<Lattice> loop;
    Lattice start = next.begin()->first;
    Lattice cur = start;
    do {
      loop.push_back(cur);
      auto it = next.find(cur);
      const Lattice nxt = it->second;
      next.erase(it);
      cur = nxt;
    } while (cur != start && next.count(cur));
    long long twice_area = 0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Lattice& a = loop[k];
      const Lattice& c = loop[(k + 1) % loop.size()];
      twice_area += static_cast<long long>(a.first) * c.second - static_cast<long long>(c.first) * a.second;
    }
    if (twice_area > best_area) {
      best_area = twice_area;
      best = std::move(loop);
    }
  }

  // prune collinear points
  bool changed = true;
  while (changed && best.size() > 3) {
    changed = false;
    std::vector<Lattice> kept;
    kept.reserve(best.size());
    for (std::size_t k = 0; k < best.size(); ++k) {
      const Lattice& prev = best[(k + best.size() - 1) % best.size()];
      const Lattice& nxt = best[(k + 1) % best.size()];
      if (cross_lattice(prev, best[k], nxt) == 0) {
        changed = true;
      } else {
        kept.push_back(best[k]);
      }
    }
    best = std::move(kept);
  }
  return best;
}

}  // namespace

std::vector<Contour> extract_contours(const Mask& mask) {
  if (mask.width <= 0 || mask.height <= 0 ||
      mask.bits.size() != static_cast<std::size_t>(mask.width) * mask.height) {
    throw Error(ErrorCode::InvalidArgument, "mask dimensions do not match its pixel buffer");
  }
  int count = 0;
  const std::vector<int> labels = label_components(mask, count);
  if (count == 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground pixel");

  std::vector<std::array<int, 4>> bbox(count, {mask.width, mask.height, -1, -1});
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const int l = labels[static_cast<std::size_t>(y) * mask.width + x];
      if (l < 0) continue;
      auto& b = bbox[l];
      b[0] = std::min(b[0], x);
      b[1] = std::min(b[1], y);
      b[2] = std::max(b[2], x);
      b[3] = std::max(b[3], y);
    }
  }

  std::vector<Contour> contours;
  contours.reserve(count);
  for (int l = 0; l < count; ++l) {
    const auto& b = bbox[l];
    const std::vector<Lattice> loop = trace_component(mask, labels, l, b[0], b[1], b[2], b[3]);
    Contour c;
    c.points.reserve(loop.size());
    for (const auto& [x, y] : loop) c.points.emplace_back(0.5 * x, 0.5 * y);
    contours.push_back(std::move(c));
  }
  return contours;
}

std::vector<Vec2> sample_boundary(const Contour& contour, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorCode::InvalidArgument, "sample spacing must be positive");
  }
  const auto& pts = contour.points;
  if (pts.size() < 3) throw Error(ErrorCode::DegenerateBoundary, "contour has fewer than 3 points");

  const std::size_t n = pts.size();
  std::vector<double> cumulative(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cumulative[i + 1] = cumulative[i] + (pts[(i + 1) % n] - pts[i]).norm();
  }
  const double perimeter = cumulative[n];
  const auto count = static_cast<std::size_t>(std::llround(perimeter / spacing));
  if (count < 3) {
    throw Error(ErrorCode::SpacingTooCoarse,
                "spacing " + std::to_string(spacing) + " yields fewer than 3 samples on a contour of perimeter " +
                    std::to_string(perimeter));
  }

  const double gap = perimeter / static_cast<double>(count);
  std::vector<Vec2> samples;
  samples.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = gap * static_cast<double>(k);
    while (seg + 1 < n && cumulative[seg + 1] <= s) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double t = len > 0.0 ? (s - cumulative[seg]) / len : 0.0;
    samples.push_back(pts[seg] + t * (pts[(seg + 1) % n] - pts[seg]));
  }
  return samples;
}

void finalize_rest_state(TriMesh& mesh) {
  mesh.rest_areas.clear();
  mesh.inv_rest_shape.clear();
  mesh.rest_areas.reserve(mesh.triangles.size());
  mesh.inv_rest_shape.reserve(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& x0 = mesh.rest_positions[tri[0]];
    const Vec2& x1 = mesh.rest_positions[tri[1]];
    const Vec2& x2 = mesh.rest_positions[tri[2]];
    const double area = signed_area(x0, x1, x2);
    if (!(area >= kAreaEpsilon)) {
      throw Error(ErrorCode::DegenerateBoundary,
                  "triangle " + std::to_string(t) + " has area " + std::to_string(area) + " below area epsilon");
    }
    Mat2 rest;
    rest.col(0) = x1 - x0;
    rest.col(1) = x2 - x0;
    mesh.rest_areas.push_back(area);
    mesh.inv_rest_shape.push_back(rest.inverse());
  }
}

TriMesh build_mesh(const Mask& mask, const MeshParams& params) {
  TriMesh merged;
  for (const Contour& contour : extract_contours(mask)) {
    // Specks too small to carry three samples are dropped rather than failing
    // the whole body.
    if (contour.perimeter() / params.spacing < 2.5) continue;
    const std::vector<Vec2> samples = sample_boundary(contour, params.spacing);
    TriMesh piece = triangulate(samples, params.max_area, params.min_angle, params.steiner_cap);
    const int offset = static_cast<int>(merged.rest_positions.size());
    merged.rest_positions.insert(merged.rest_positions.end(), piece.rest_positions.begin(),
                                 piece.rest_positions.end());
    for (auto tri : piece.triangles) {
      for (int& v : tri) v += offset;
      merged.triangles.push_back(tri);
    }
    for (auto e : piece.boundary_edges) {
      merged.boundary_edges.push_back({e[0] + offset, e[1] + offset});
    }
  }
  if (merged.triangles.empty()) {
    throw Error(ErrorCode::SpacingTooCoarse, "no mask component is large enough for the requested spacing");
  }
  finalize_rest_state(merged);
  return merged;
}

}  // namespace inkmotion
