#pragma once

// Exact-enough 2D primitives for Voronoi cell construction by incremental
// half-plane clipping. All cells live inside the box [0, extent]^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <unordered_set>
#include <vector>

#include "dtoss/error.hpp"

namespace dtoss {

inline constexpr double kDefaultExtent = 1e9;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double dist2(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double dist(Point a, Point b) { return std::sqrt(dist2(a, b)); }

/// Absolute tolerance used by every geometric predicate for a given extent.
inline double geometric_epsilon(double extent) { return 1e-9 * extent; }

inline bool in_extent(Point p, double extent) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= extent && p.y <= extent;
}

/// a*x + b*y <= c, stored with a unit normal so that signed_distance() is a
/// true Euclidean distance.
struct HalfPlane {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;

  double signed_distance(Point p) const { return a * p.x + b * p.y - c; }
  bool contains(Point p, double eps = 0.0) const { return signed_distance(p) <= eps; }
};

inline HalfPlane make_half_plane(double a, double b, double c) {
  const double n = std::hypot(a, b);
  if (n == 0.0) throw Error("half-plane normal is zero");
  return HalfPlane{a / n, b / n, c / n};
}

/// Points at least as close to `a` as to `b`.
inline HalfPlane bisector(Point a, Point b) {
  if (a == b) throw Error("degenerate generator pair");
  const double nx = b.x - a.x;
  const double ny = b.y - a.y;
  const double n = std::hypot(nx, ny);
  const Point mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  const double ux = nx / n;
  const double uy = ny / n;
  return HalfPlane{ux, uy, ux * mid.x + uy * mid.y};
}

/// Distance from `o` to the perpendicular bisector of (pi, pj), via the
/// power-line identity |d(o,pj)^2 - d(o,pi)^2| / (2 d(pi,pj)). The difference
/// of squares is expanded as (pi - pj).(2o - pi - pj) to avoid cancellation.
inline double dist_to_hyperplane(Point o, Point pi, Point pj) {
  if (pi == pj) throw Error("coincident pivots");
  const double power = (pi.x - pj.x) * (2.0 * o.x - pi.x - pj.x) +
                       (pi.y - pj.y) * (2.0 * o.y - pi.y - pj.y);
  return std::abs(power) / (2.0 * dist(pi, pj));
}

enum class CellStatus : std::uint8_t { approximate, locally_refined, accurate, inaccurate };

inline const char* to_string(CellStatus s) {
  switch (s) {
    case CellStatus::approximate: return "approximate";
    case CellStatus::locally_refined: return "locally-refined";
    case CellStatus::accurate: return "accurate";
    case CellStatus::inaccurate: return "inaccurate";
  }
  return "unknown";
}

/// Label of a cell edge lying on the space boundary.
inline constexpr std::int64_t kBoundaryEdge = -1;

/// Convex counter-clockwise ring around a generator. edge_source[i] names the
/// generator whose bisector produced edge (vertices[i], vertices[i+1]), or
/// kBoundaryEdge for box sides.
struct VoronoiCell {
  Point generator;
  std::vector<Point> vertices;
  std::vector<std::int64_t> edge_source;
  CellStatus status = CellStatus::approximate;
};

inline VoronoiCell extent_cell(Point generator, double extent) {
  VoronoiCell cell;
  cell.generator = generator;
  cell.vertices = {{0.0, 0.0}, {extent, 0.0}, {extent, extent}, {0.0, extent}};
  cell.edge_source.assign(4, kBoundaryEdge);
  return cell;
}

inline double polygon_area(std::span<const Point> ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point& p = ring[i];
    const Point& q = ring[(i + 1) % ring.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * twice;
}

inline double cell_area(const VoronoiCell& cell) { return polygon_area(cell.vertices); }

namespace detail {

// Removes vertices closer than eps to their successor; the later vertex keeps
// its outgoing edge label.
inline void drop_short_edges(VoronoiCell& cell, double eps) {
  auto& v = cell.vertices;
  auto& s = cell.edge_source;
  const double eps2 = eps * eps;
  bool removed = true;
  while (removed && v.size() > 1) {
    removed = false;
    for (std::size_t i = 0; i < v.size() && v.size() > 1; ++i) {
      const std::size_t j = (i + 1) % v.size();
      if (dist2(v[i], v[j]) <= eps2) {
        // Keep v[j]'s outgoing label, v[i]'s position is within eps anyway.
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(i));
        removed = true;
        break;
      }
    }
  }
}

}  // namespace detail

/// Clips `cell` by `h` in place. Returns false (and leaves the cell untouched)
/// when no vertex lies more than eps outside h.
inline bool clip_in_place(VoronoiCell& cell, const HalfPlane& h, double eps,
                          std::int64_t label = kBoundaryEdge) {
  const auto& v = cell.vertices;
  const std::size_t n = v.size();
  double worst = -std::numeric_limits<double>::infinity();
  for (const Point& p : v) worst = std::max(worst, h.signed_distance(p));
  if (worst <= eps) return false;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = h.signed_distance(v[i]);
  if (h.signed_distance(cell.generator) > eps) throw Error("generator excluded");

  std::vector<Point> out;
  std::vector<std::int64_t> out_src;
  out.reserve(n + 2);
  out_src.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const Point p = v[i];
    const Point q = v[j];
    const double dp = d[i];
    const double dq = d[j];
    const std::int64_t lab = cell.edge_source[i];
    if (dp <= eps) {
      const bool on_line = dp >= -eps;
      out.push_back(p);
      out_src.push_back(on_line && dq > eps ? label : lab);
    }
    const bool crosses = (dp < -eps && dq > eps) || (dp > eps && dq < -eps);
    if (crosses) {
      const double t = dp / (dp - dq);
      out.push_back({p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t});
      out_src.push_back(dp < -eps ? label : lab);
    }
  }
  if (out.size() < 3) throw Error("generator excluded");
  cell.vertices = std::move(out);
  cell.edge_source = std::move(out_src);
  detail::drop_short_edges(cell, eps);
  if (cell.vertices.size() < 3) throw Error("generator excluded");
  return true;
}

/// Returns cell ∩ h.
inline VoronoiCell clip_cell(VoronoiCell cell, const HalfPlane& h, double eps,
                             std::int64_t label = kBoundaryEdge) {
  clip_in_place(cell, h, eps, label);
  return cell;
}

struct Circle {
  Point center;
  double radius = 0.0;

  // Strict containment: a point on the boundary cannot move the vertex.
  bool contains(Point p) const { return dist2(center, p) < radius * radius; }
};

/// Union of per-vertex circles; any generator that can shrink the cell lies
/// inside it. `radius` bounds the vertices (r_o = max d(o, v)); the whole
/// region fits in circle(center, 2 * radius).
struct InfluenceRegion {
  Point center;
  double radius = 0.0;
  std::vector<Circle> per_vertex;

  bool contains(Point p) const {
    return std::any_of(per_vertex.begin(), per_vertex.end(),
                       [&](const Circle& c) { return c.contains(p); });
  }
  Circle bounding_circle() const { return {center, 2.0 * radius}; }
};

inline InfluenceRegion influence_region(Point o, const VoronoiCell& cell) {
  InfluenceRegion ir;
  ir.center = o;
  ir.per_vertex.reserve(cell.vertices.size());
  for (const Point& v : cell.vertices) {
    const double r = dist(o, v);
    ir.per_vertex.push_back({v, r});
    ir.radius = std::max(ir.radius, r);
  }
  return ir;
}

/// Minimum distance from p to a convex ring (0 when inside).
inline double distance_to_polygon(Point p, std::span<const Point> ring) {
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % ring.size()];
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    const double cross = ex * (p.y - a.y) - ey * (p.x - a.x);
    if (cross < 0.0) inside = false;
    const double len2 = ex * ex + ey * ey;
    double t = len2 > 0.0 ? ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, dist(p, {a.x + ex * t, a.y + ey * t}));
  }
  return inside ? 0.0 : best;
}

inline bool circle_intersects_polygon(const Circle& c, std::span<const Point> ring,
                                      double eps) {
  return distance_to_polygon(c.center, ring) < c.radius + eps;
}

/// O(n^2) reference diagram: every cell is the extent box clipped by the
/// bisectors against all other generators. Cells come back in input order and
/// edge labels are input indices.
inline std::vector<VoronoiCell> brute_force_voronoi(std::span<const Point> points,
                                                    double extent) {
  if (points.empty()) throw Error("brute_force_voronoi needs at least one point");
  {
    struct Hash {
      std::size_t operator()(const Point& p) const {
        return std::hash<double>{}(p.x) * 31u ^ std::hash<double>{}(p.y);
      }
    };
    std::unordered_set<Point, Hash> seen;
    for (const Point& p : points)
      if (!seen.insert(p).second) throw Error("duplicate points");
  }
  const double eps = geometric_epsilon(extent);
  std::vector<VoronoiCell> cells;
  cells.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    VoronoiCell cell = extent_cell(points[i], extent);
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == i) continue;
      clip_in_place(cell, bisector(points[i], points[j]), eps, static_cast<std::int64_t>(j));
    }
    cell.status = CellStatus::accurate;
    cells.push_back(std::move(cell));
  }
  return cells;
}

/// Generators sharing an edge longer than eps with the cell (point contact is
/// not adjacency).
inline std::vector<std::int64_t> cell_neighbors(const VoronoiCell& cell, double eps) {
  std::vector<std::int64_t> out;
  const auto& v = cell.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::int64_t s = cell.edge_source[i];
    if (s == kBoundaryEdge) continue;
    if (dist(v[i], v[(i + 1) % v.size()]) <= eps) continue;
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Vertex-set equality up to tol: every vertex of one ring is within tol of
/// some vertex of the other, and vice versa.
inline bool same_vertex_set(const VoronoiCell& a, const VoronoiCell& b, double tol) {
  const double tol2 = tol * tol;
  auto covered = [tol2](const std::vector<Point>& from, const std::vector<Point>& to) {
    return std::all_of(from.begin(), from.end(), [&](const Point& p) {
      return std::any_of(to.begin(), to.end(),
                         [&](const Point& q) { return dist2(p, q) <= tol2; });
    });
  };
  return covered(a.vertices, b.vertices) && covered(b.vertices, a.vertices);
}

/// Strict interior containment test for convex CCW rings.
inline bool strictly_inside(Point p, std::span<const Point> ring) {
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % ring.size()];
    if ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) <= 0.0) return false;
  }
  return true;
}

inline bool is_convex_ccw(std::span<const Point> ring, double eps) {
  if (ring.size() < 3) return false;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % ring.size()];
    const Point c = ring[(i + 2) % ring.size()];
    const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    // cross / |ac| is the signed height of b over chord ac.
    if (cross < -eps * std::max(dist(a, c), 1.0)) return false;
  }
  return true;
}

}  // namespace dtoss
