// Conforming Delaunay triangulation of a simple polygon.
//
// Points are inserted Bowyer-Watson style into a triangulation seeded with a
// large enclosing triangle. Boundary segments missing from the Delaunay
// triangulation are bisected until they appear; from then on they are kept
// as subsegments that cavities may not cross. Refinement follows Ruppert:
// encroached subsegments are split at their midpoint, otherwise bad triangles
// (too large or too skinny) get their circumcenter inserted unless that point
// would encroach a subsegment, in which case the subsegment is split instead.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>

#include "inkmotion/error.hpp"
#include "inkmotion/geometry.hpp"

namespace inkmotion {
namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

// > 0 when d lies strictly inside the circumcircle of the positively oriented
// triangle (a, b, c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  return alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = ab.squaredNorm();
  const double ac2 = ac.squaredNorm();
  return a + Vec2(ac.y() * ab2 - ab.y() * ac2, ab.x() * ac2 - ac.x() * ab2) / d;
}

using Edge = std::pair<int, int>;

Edge undirected(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
           p.y() <= std::max(a.y(), b.y());
  };
  return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
         (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

void check_simple_polygon(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) throw Error(ErrorCode::DegenerateBoundary, "boundary needs at least 3 points");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(poly[i].x()) || !std::isfinite(poly[i].y())) {
      throw Error(ErrorCode::DegenerateBoundary, "boundary point " + std::to_string(i) + " is not finite");
    }
    if (poly[i] == poly[(i + 1) % n]) {
      throw Error(ErrorCode::DegenerateBoundary, "boundary points " + std::to_string(i) + " and " +
                                                     std::to_string((i + 1) % n) + " coincide");
    }
  }
  if (std::abs(polygon_area(poly)) < kAreaEpsilon) {
    throw Error(ErrorCode::DegenerateBoundary, "boundary polygon is collinear");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double minx = std::min(a.x(), b.x()), maxx = std::max(a.x(), b.x());
    const double miny = std::min(a.y(), b.y()), maxy = std::max(a.y(), b.y());
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::size_t jn = (j + 1) % n;
      const bool adjacent = j == i + 1 || jn == i;
      const Vec2& c = poly[j];
      const Vec2& d = poly[jn];
      if (std::max(c.x(), d.x()) < minx || std::min(c.x(), d.x()) > maxx || std::max(c.y(), d.y()) < miny ||
          std::min(c.y(), d.y()) > maxy) {
        continue;
      }
      if (adjacent) {
        // Adjacent edges share one endpoint; they must not fold back on each other.
        const Vec2& shared = (j == i + 1) ? b : a;
        const Vec2& other1 = (j == i + 1) ? a : b;
        const Vec2& other2 = (j == i + 1) ? d : c;
        if (orient(other1, shared, other2) == 0 && (other1 - shared).dot(other2 - shared) > 0) {
          throw Error(ErrorCode::DegenerateBoundary, "boundary folds back on itself at point " +
                                                         std::to_string(j == i + 1 ? j : i));
        }
        continue;
      }
      if (segments_intersect(a, b, c, d)) {
        throw Error(ErrorCode::DegenerateBoundary,
                    "boundary edges " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
      }
    }
  }
}

struct Triangle {
  std::array<int, 3> v{};
  // nbr[i] lies across the edge opposite v[i], i.e. (v[i+1], v[i+2]).
  std::array<int, 3> nbr{-1, -1, -1};
  bool alive = true;
  bool inside = false;
};

class Refiner {
 public:
  Refiner(std::span<const Vec2> boundary, double max_area, double min_angle, std::size_t steiner_cap)
      : polygon_(boundary.begin(), boundary.end()),
        max_area_(max_area),
        min_angle_(min_angle),
        steiner_cap_(steiner_cap) {}

  TriMesh run() {
    const int n = static_cast<int>(polygon_.size());
    pts_ = polygon_;
    make_super_triangle();

    int hint = 0;
    for (int i = 0; i < n; ++i) {
      const int loc = locate(pts_[i], hint);
      for (int k = 0; k < 3; ++k) {
        if ((pts_[tris_[loc].v[k]] - pts_[i]).norm() < 1e-12) {
          throw Error(ErrorCode::DegenerateBoundary, "boundary point " + std::to_string(i) + " is duplicated");
        }
      }
      insert_existing(i, grow_cavity(pts_[i], seeds_for(loc, pts_[i]), false));
      hint = new_tris_.front();
    }

    recover_segments();
    classify();

    for (const Edge& s : subsegs_) {
      if (subseg_encroached(s.first, s.second)) seg_queue_.push_back(s);
    }
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (tris_[t].alive && tris_[t].inside && is_bad(t)) bad_queue_.push_back(t);
    }
    refine();
    return extract();
  }

 private:
  void make_super_triangle() {
    Vec2 lo = pts_.front(), hi = pts_.front();
    for (const Vec2& p : pts_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec2 center = 0.5 * (lo + hi);
    const double radius = std::max(0.5 * (hi - lo).norm(), 1.0) * 20.0;
    super_ = static_cast<int>(pts_.size());
    for (int k = 0; k < 3; ++k) {
      const double angle = M_PI / 2.0 + k * 2.0 * M_PI / 3.0;
      pts_.push_back(center + 2.0 * radius * Vec2(std::cos(angle), std::sin(angle)));
    }
    Triangle t;
    t.v = {super_, super_ + 1, super_ + 2};
    if (orient(pts_[super_], pts_[super_ + 1], pts_[super_ + 2]) < 0) std::swap(t.v[1], t.v[2]);
    tris_.push_back(t);
    vert_tri_.assign(pts_.size(), 0);
  }

  bool is_super(int v) const { return v >= super_ && v < super_ + 3; }

  const Vec2& P(int t, int k) const { return pts_[tris_[t].v[k]]; }

  int locate(const Vec2& p, int start) const {
    int cur = (start >= 0 && start < static_cast<int>(tris_.size()) && tris_[start].alive) ? start : -1;
    if (cur < 0) {
      for (int t = static_cast<int>(tris_.size()) - 1; t >= 0; --t) {
        if (tris_[t].alive) {
          cur = t;
          break;
        }
      }
    }
    const std::size_t limit = 4 * tris_.size() + 64;
    for (std::size_t iter = 0; iter < limit; ++iter) {
      int next = -1;
      for (int i = 0; i < 3; ++i) {
        if (orient(P(cur, (i + 1) % 3), P(cur, (i + 2) % 3), p) < 0) {
          next = tris_[cur].nbr[i];
          break;
        }
      }
      if (next < 0) return cur;
      cur = next;
    }
    // Walk failed to converge (degenerate configuration); scan.
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      bool in = true;
      for (int i = 0; i < 3 && in; ++i) in = orient(P(t, (i + 1) % 3), P(t, (i + 2) % 3), p) >= 0;
      if (in) return t;
    }
    return cur;
  }

  // The containing triangle plus its neighbor when p sits on a shared edge.
  std::vector<int> seeds_for(int loc, const Vec2& p) const {
    std::vector<int> seeds{loc};
    for (int i = 0; i < 3; ++i) {
      const int a = tris_[loc].v[(i + 1) % 3];
      const int b = tris_[loc].v[(i + 2) % 3];
      if (orient(pts_[a], pts_[b], p) == 0 && tris_[loc].nbr[i] >= 0) seeds.push_back(tris_[loc].nbr[i]);
    }
    return seeds;
  }

  std::vector<int> grow_cavity(const Vec2& p, std::vector<int> seeds, bool barriers) {
    ++epoch_;
    if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);
    auto in = [&](int t) { return t >= 0 && mark_[t] == epoch_; };
    std::set<int> seed_set(seeds.begin(), seeds.end());

    std::vector<int> cavity;
    for (int s : seeds) {
      if (!in(s)) {
        mark_[s] = epoch_;
        cavity.push_back(s);
      }
    }
    for (std::size_t q = 0; q < cavity.size(); ++q) {
      const int t = cavity[q];
      for (int i = 0; i < 3; ++i) {
        const int nb = tris_[t].nbr[i];
        if (nb < 0 || in(nb)) continue;
        if (barriers && subsegs_.count(undirected(tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3]))) continue;
        if (incircle(P(nb, 0), P(nb, 1), P(nb, 2), p) > 0) {
          mark_[nb] = epoch_;
          cavity.push_back(nb);
        }
      }
    }

    // Shrink until the cavity is star-shaped from p with no enclosed vertex.
    for (bool changed = true; changed;) {
      changed = false;
      std::map<int, int> boundary_vertices;
      for (int t : cavity) {
        for (int i = 0; i < 3; ++i) {
          if (!in(tris_[t].nbr[i])) {
            ++boundary_vertices[tris_[t].v[(i + 1) % 3]];
            ++boundary_vertices[tris_[t].v[(i + 2) % 3]];
          }
        }
      }
      int drop = -1;
      int grow = -1;
      for (int t : cavity) {
        for (int i = 0; i < 3 && drop < 0 && grow < 0; ++i) {
          const int nb = tris_[t].nbr[i];
          if (in(nb)) {
            continue;
          }
          if (orient(P(t, (i + 1) % 3), P(t, (i + 2) % 3), p) <= 0) {
            if (seed_set.count(t)) {
              grow = nb;
            } else {
              drop = t;
            }
          }
        }
        for (int k = 0; k < 3 && drop < 0 && grow < 0; ++k) {
          if (!boundary_vertices.count(tris_[t].v[k]) && !seed_set.count(t)) drop = t;
        }
        if (drop >= 0 || grow >= 0) break;
      }
      if (grow >= 0) {
        mark_[grow] = epoch_;
        cavity.push_back(grow);
        changed = true;
      } else if (drop >= 0) {
        // Remove and keep only what stays connected to the seeds.
        mark_[drop] = 0;
        std::vector<int> kept;
        ++epoch_;
        for (int s : seeds) {
          if (mark_[s] != epoch_) {
            mark_[s] = epoch_;
            kept.push_back(s);
          }
        }
        std::set<int> allowed(cavity.begin(), cavity.end());
        allowed.erase(drop);
        for (std::size_t q = 0; q < kept.size(); ++q) {
          for (int i = 0; i < 3; ++i) {
            const int nb = tris_[kept[q]].nbr[i];
            if (nb >= 0 && mark_[nb] != epoch_ && allowed.count(nb)) {
              if (barriers &&
                  subsegs_.count(undirected(tris_[kept[q]].v[(i + 1) % 3], tris_[kept[q]].v[(i + 2) % 3]))) {
                continue;
              }
              mark_[nb] = epoch_;
              kept.push_back(nb);
            }
          }
        }
        cavity = std::move(kept);
        changed = true;
      }
    }
    return cavity;
  }

  int alloc_triangle() {
    if (!free_.empty()) {
      const int t = free_.back();
      free_.pop_back();
      tris_[t] = Triangle{};
      return t;
    }
    tris_.emplace_back();
    return static_cast<int>(tris_.size()) - 1;
  }

  int add_point(const Vec2& p) {
    pts_.push_back(p);
    vert_tri_.push_back(-1);
    return static_cast<int>(pts_.size()) - 1;
  }

  // Replace the cavity by a fan around vertex `v`.
  void insert_existing(int v, const std::vector<int>& cavity) {
    ++epoch_;
    for (int t : cavity) mark_[t] = epoch_;

    // Each fan triangle stays on the side of the boundary of the cavity
    // triangle it replaces, so the inside flag is inherited per rim edge.
    struct Rim {
      int a, b, outer;
      bool inside;
    };
    std::vector<Rim> rim;
    for (int t : cavity) {
      for (int i = 0; i < 3; ++i) {
        const int nb = tris_[t].nbr[i];
        if (nb >= 0 && mark_[nb] == epoch_) continue;
        rim.push_back({tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3], nb, tris_[t].inside});
      }
    }
    for (int t : cavity) {
      tris_[t].alive = false;
      free_.push_back(t);
    }
    // Reuse in a fixed order so results never depend on container internals.
    std::sort(free_.begin(), free_.end(), std::greater<>());

    new_tris_.clear();
    std::unordered_map<int, int> starts;
    std::unordered_map<int, int> ends;
    for (const Rim& r : rim) {
      const int t = alloc_triangle();
      if (mark_.size() < tris_.size()) mark_.resize(tris_.size(), 0);
      mark_[t] = 0;
      tris_[t].v = {r.a, r.b, v};
      tris_[t].inside = r.inside;
      tris_[t].nbr[2] = r.outer;
      if (r.outer >= 0) {
        auto& o = tris_[r.outer];
        for (int j = 0; j < 3; ++j) {
          const int oa = o.v[(j + 1) % 3];
          const int ob = o.v[(j + 2) % 3];
          if (oa == r.b && ob == r.a) o.nbr[j] = t;
        }
      }
      starts[r.a] = t;
      ends[r.b] = t;
      new_tris_.push_back(t);
    }
    for (int t : new_tris_) {
      auto& tri = tris_[t];
      tri.nbr[0] = starts.at(tri.v[1]);  // edge (b, v)
      tri.nbr[1] = ends.at(tri.v[0]);    // edge (v, a)
      for (int k = 0; k < 3; ++k) vert_tri_[tri.v[k]] = t;
    }
  }

  int insert_point(const Vec2& p, const std::vector<int>& cavity) {
    const int v = add_point(p);
    ++steiner_;
    if (steiner_ > steiner_cap_) {
      throw Error(ErrorCode::RefinementDiverged,
                  "refinement exceeded " + std::to_string(steiner_cap_) + " Steiner points");
    }
    insert_existing(v, cavity);
    return v;
  }

  // Triangle holding edge (a, b) and the index of its apex, or {-1, -1}.
  std::pair<int, int> find_edge(int a, int b) const {
    auto apex_of = [&](int t) {
      for (int k = 0; k < 3; ++k) {
        const int u = tris_[t].v[(k + 1) % 3];
        const int w = tris_[t].v[(k + 2) % 3];
        if ((u == a && w == b) || (u == b && w == a)) return k;
      }
      return -1;
    };
    const int start = vert_tri_[a];
    if (start >= 0 && tris_[start].alive) {
      for (int dir = 1; dir <= 2; ++dir) {
        int t = start;
        for (std::size_t guard = 0; guard < tris_.size() + 1; ++guard) {
          const int k = apex_of(t);
          if (k >= 0) return {t, k};
          int ia = 0;
          while (tris_[t].v[ia] != a) ++ia;
          t = tris_[t].nbr[(ia + dir) % 3];
          if (t < 0 || t == start) break;
        }
      }
    }
    return {-1, -1};
  }

  bool encroaches(const Vec2& p, int a, int b) const { return (pts_[a] - p).dot(pts_[b] - p) < 0; }

  bool subseg_encroached(int a, int b) const {
    const auto [t, k] = find_edge(a, b);
    if (t < 0) return true;
    if (encroaches(pts_[tris_[t].v[k]], a, b)) return true;
    const int nb = tris_[t].nbr[k];
    if (nb < 0) return false;
    for (int j = 0; j < 3; ++j) {
      const int w = tris_[nb].v[j];
      if (w != a && w != b) return encroaches(pts_[w], a, b);
    }
    return false;
  }

  void split_subseg(int a, int b) {
    const auto [t, k] = find_edge(a, b);
    const Vec2 m = 0.5 * (pts_[a] + pts_[b]);
    std::vector<int> seeds;
    if (t >= 0) {
      seeds.push_back(t);
      if (tris_[t].nbr[k] >= 0) seeds.push_back(tris_[t].nbr[k]);
    } else {
      const int loc = locate(m, vert_tri_[a]);
      seeds = seeds_for(loc, m);
    }
    subsegs_.erase(undirected(a, b));
    const int v = insert_point(m, grow_cavity(m, seeds, true));
    split_mid_[undirected(a, b)] = v;
    subsegs_.insert(undirected(a, v));
    subsegs_.insert(undirected(v, b));
    after_insert();
  }

  void after_insert() {
    for (int t : new_tris_) {
      if (tris_[t].inside && is_bad(t)) bad_queue_.push_back(t);
      for (int i = 0; i < 3; ++i) {
        const Edge e = undirected(tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3]);
        if (subsegs_.count(e) && subseg_encroached(e.first, e.second)) seg_queue_.push_back(e);
      }
    }
  }

  // Bisect input segments until each one is an edge of the triangulation.
  void recover_segments() {
    const int n = static_cast<int>(polygon_.size());
    std::deque<Edge> pending;
    for (int i = 0; i < n; ++i) pending.emplace_back(i, (i + 1) % n);
    while (!pending.empty()) {
      const auto [a, b] = pending.front();
      pending.pop_front();
      if (find_edge(a, b).first >= 0) {
        subsegs_.insert(undirected(a, b));
        continue;
      }
      const Vec2 m = 0.5 * (pts_[a] + pts_[b]);
      const int loc = locate(m, vert_tri_[a]);
      const int v = insert_point(m, grow_cavity(m, seeds_for(loc, m), true));
      split_mid_[undirected(a, b)] = v;
      pending.emplace_front(v, b);
      pending.emplace_front(a, v);
    }
  }

  void classify() {
    for (auto& t : tris_) {
      if (!t.alive) continue;
      if (is_super(t.v[0]) || is_super(t.v[1]) || is_super(t.v[2])) {
        t.inside = false;
        continue;
      }
      const Vec2 centroid = (pts_[t.v[0]] + pts_[t.v[1]] + pts_[t.v[2]]) / 3.0;
      t.inside = point_in_polygon(polygon_, centroid);
    }
  }

  bool is_bad(int t) const {
    const Vec2& a = P(t, 0);
    const Vec2& b = P(t, 1);
    const Vec2& c = P(t, 2);
    if (signed_area(a, b, c) > max_area_) return true;
    if (min_angle_ <= 0.0) return false;
    if (min_angle_degrees(a, b, c) >= min_angle_) return false;
    // A sharp corner of the input polygon (both edges at the smallest angle
    // are constraints) cannot be improved by refinement.
    int corner = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const Vec2 e1 = P(t, (k + 1) % 3) - P(t, k);
      const Vec2 e2 = P(t, (k + 2) % 3) - P(t, k);
      const double angle = std::atan2(std::abs(cross(e1, e2)), e1.dot(e2));
      if (angle < best) {
        best = angle;
        corner = k;
      }
    }
    const int v = tris_[t].v[corner];
    const bool e1 = subsegs_.count(undirected(v, tris_[t].v[(corner + 1) % 3])) > 0;
    const bool e2 = subsegs_.count(undirected(v, tris_[t].v[(corner + 2) % 3])) > 0;
    return !(e1 && e2);
  }

  struct WalkResult {
    int tri = -1;
    Edge blocked{-1, -1};
  };

  // Straight walk from the centroid of `from` to `target`, stopping at the
  // first subsegment crossed.
  WalkResult walk_to(int from, const Vec2& target) const {
    const Vec2 s = (P(from, 0) + P(from, 1) + P(from, 2)) / 3.0;
    int cur = from;
    const std::size_t limit = 4 * tris_.size() + 64;
    for (std::size_t iter = 0; iter < limit; ++iter) {
      int exit = -1;
      int fallback = -1;
      for (int i = 0; i < 3; ++i) {
        const Vec2& u = P(cur, (i + 1) % 3);
        const Vec2& w = P(cur, (i + 2) % 3);
        if (orient(u, w, target) >= 0) continue;
        if (fallback < 0) fallback = i;
        const double o1 = orient(s, target, u);
        const double o2 = orient(s, target, w);
        if ((o1 <= 0 && o2 >= 0) || (o1 >= 0 && o2 <= 0)) {
          exit = i;
          break;
        }
      }
      if (exit < 0) exit = fallback;
      if (exit < 0) return {cur, {-1, -1}};
      const Edge e = undirected(tris_[cur].v[(exit + 1) % 3], tris_[cur].v[(exit + 2) % 3]);
      if (subsegs_.count(e)) return {cur, e};
      cur = tris_[cur].nbr[exit];
      if (cur < 0) return {-1, {-1, -1}};
    }
    return {-1, {-1, -1}};
  }

  void refine() {
    while (true) {
      if (!seg_queue_.empty()) {
        const Edge s = seg_queue_.front();
        seg_queue_.pop_front();
        if (subsegs_.count(s) && subseg_encroached(s.first, s.second)) split_subseg(s.first, s.second);
        continue;
      }
      if (bad_queue_.empty()) break;
      const int t = bad_queue_.front();
      bad_queue_.pop_front();
      if (!tris_[t].alive || !tris_[t].inside || !is_bad(t)) continue;

      const Vec2 c = circumcenter(P(t, 0), P(t, 1), P(t, 2));
      if (!std::isfinite(c.x()) || !std::isfinite(c.y())) continue;
      const WalkResult walk = walk_to(t, c);
      if (walk.blocked.first >= 0) {
        split_subseg(walk.blocked.first, walk.blocked.second);
        bad_queue_.push_back(t);
        continue;
      }
      if (walk.tri < 0) continue;

      const std::vector<int> cavity = grow_cavity(c, seeds_for(walk.tri, c), true);
      std::vector<Edge> hit;
      for (int ct : cavity) {
        for (int i = 0; i < 3; ++i) {
          const int a = tris_[ct].v[(i + 1) % 3];
          const int b = tris_[ct].v[(i + 2) % 3];
          const Edge e = undirected(a, b);
          if (subsegs_.count(e) && encroaches(c, a, b) &&
              std::find(hit.begin(), hit.end(), e) == hit.end()) {
            hit.push_back(e);
          }
        }
      }
      if (!hit.empty()) {
        // The rejected circumcenter is not a vertex, so the encroachment test
        // in the segment queue would not see it; split right away.
        for (const Edge& e : hit) {
          if (subsegs_.count(e)) split_subseg(e.first, e.second);
        }
        bad_queue_.push_back(t);
        continue;
      }
      bool too_close = false;
      for (int ct : cavity) {
        for (int k = 0; k < 3; ++k) too_close = too_close || (P(ct, k) - c).norm() < 1e-9;
      }
      if (too_close) continue;
      insert_point(c, cavity);
      after_insert();
    }
  }

  void expand(int a, int b, std::vector<std::array<int, 2>>& out) const {
    const auto it = split_mid_.find(undirected(a, b));
    if (it == split_mid_.end()) {
      out.push_back({a, b});
      return;
    }
    expand(a, it->second, out);
    expand(it->second, b, out);
  }

  TriMesh extract() const {
    std::vector<int> remap(pts_.size(), -1);
    std::vector<int> kept;
    for (const auto& t : tris_) {
      if (!t.alive || !t.inside) continue;
      for (int v : t.v) remap[v] = 1;
    }
    TriMesh mesh;
    for (std::size_t v = 0; v < pts_.size(); ++v) {
      if (remap[v] < 0) continue;
      remap[v] = static_cast<int>(mesh.rest_positions.size());
      mesh.rest_positions.push_back(pts_[v]);
    }
    for (const auto& t : tris_) {
      if (!t.alive || !t.inside) continue;
      mesh.triangles.push_back({remap[t.v[0]], remap[t.v[1]], remap[t.v[2]]});
    }
    const int n = static_cast<int>(polygon_.size());
    std::vector<std::array<int, 2>> chain;
    for (int i = 0; i < n; ++i) expand(i, (i + 1) % n, chain);
    for (const auto& e : chain) mesh.boundary_edges.push_back({remap[e[0]], remap[e[1]]});
    finalize_rest_state(mesh);
    return mesh;
  }

  std::vector<Vec2> polygon_;
  double max_area_;
  double min_angle_;
  std::size_t steiner_cap_;

  std::vector<Vec2> pts_;
  std::vector<Triangle> tris_;
  std::vector<int> free_;
  std::vector<int> vert_tri_;
  std::vector<int> new_tris_;
  std::vector<unsigned> mark_;
  unsigned epoch_ = 0;
  int super_ = 0;
  std::size_t steiner_ = 0;

  std::set<Edge> subsegs_;
  std::map<Edge, int> split_mid_;
  std::deque<Edge> seg_queue_;
  std::deque<int> bad_queue_;
};

}  // namespace

TriMesh triangulate(std::span<const Vec2> boundary, double max_area, double min_angle, std::size_t steiner_cap) {
  if (!(max_area > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_area must be positive");
  if (!(min_angle >= 0.0) || min_angle > kMaxMinAngle) {
    throw Error(ErrorCode::InvalidArgument, "min_angle must lie in [0, 28] degrees");
  }
  check_simple_polygon(boundary);
  std::vector<Vec2> poly(boundary.begin(), boundary.end());
  if (polygon_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  return Refiner(poly, max_area, min_angle, steiner_cap).run();
}

}  // namespace inkmotion
