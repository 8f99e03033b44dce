#pragma once

// Voronoi hierarchies: level 0 holds the objects; every higher level holds
// pivots drawn from the level below, and each lower entry hangs off its
// nearest pivot. Subtree radii make top-down range search exact.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"
#include "dtoss/nearest.hpp"
#include "dtoss/parallel.hpp"
#include "dtoss/partitioner.hpp"

namespace dtoss {

struct HierarchyLevel {
  std::vector<Point> points;
  std::vector<double> radius;              // furthest descendant distance bound
  std::vector<std::uint32_t> parent;       // index into the next level (empty at the top)
  std::vector<std::uint32_t> child_begin;  // CSR into `children` (empty at level 0)
  std::vector<std::uint32_t> children;
};

struct HierarchyOptions {
  std::size_t workers = 1;
  std::size_t objective_limit = 256;
};

class VoronoiHierarchy;
VoronoiHierarchy build_hierarchy(std::span<const Point> objects, std::size_t fanout,
                                 std::uint64_t seed, const HierarchyOptions& options = {});

class VoronoiHierarchy {
 public:
  std::size_t fanout() const { return fanout_; }
  /// Levels above the objects.
  std::size_t height() const { return levels_.empty() ? 0 : levels_.size() - 1; }
  const std::vector<HierarchyLevel>& levels() const { return levels_; }
  bool empty() const { return levels_.empty() || levels_[0].points.empty(); }

  /// Level-0 indices of every object within distance r of q (sorted).
  std::vector<std::uint32_t> range(Point q, double r) const {
    std::vector<std::uint32_t> out;
    if (empty()) return out;
    const std::size_t top = levels_.size() - 1;
    for (std::uint32_t i = 0; i < levels_[top].points.size(); ++i) descend(top, i, q, r, out);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Number of objects within distance r of q.
  std::size_t count(Point q, double r) const { return range(q, r).size(); }

  friend VoronoiHierarchy build_hierarchy(std::span<const Point>, std::size_t, std::uint64_t,
                                          const HierarchyOptions&);

 private:
  void descend(std::size_t level, std::uint32_t i, Point q, double r,
               std::vector<std::uint32_t>& out) const {
    const HierarchyLevel& L = levels_[level];
    const double d = dist(q, L.points[i]);
    // Relative slack absorbs rounding in the accumulated subtree radii.
    if (level > 0 ? d > (r + L.radius[i]) * (1.0 + 1e-12) : d > r) return;
    if (level == 0) {
      out.push_back(i);
      return;
    }
    for (std::uint32_t c = L.child_begin[i]; c < L.child_begin[i + 1]; ++c)
      descend(level - 1, L.children[c], q, r, out);
  }

  std::size_t fanout_ = 0;
  std::vector<HierarchyLevel> levels_;
};

/// Bottom-up construction: each level keeps ceil(m / fanout) pivots of the m
/// entries below, elected like partition pivots, until a single root remains.
/// The pairwise-sum objective is evaluated only while a level has at most
/// `objective_limit` pivots; larger levels take one seeded random draw.
inline VoronoiHierarchy build_hierarchy(std::span<const Point> objects, std::size_t fanout,
                                        std::uint64_t seed, const HierarchyOptions& options) {
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  const std::size_t objective_limit = options.objective_limit;
  if (fanout < 2) throw Error("fanout must be at least 2");

  VoronoiHierarchy h;
  h.fanout_ = fanout;
  HierarchyLevel base;
  base.points.assign(objects.begin(), objects.end());
  base.radius.assign(base.points.size(), 0.0);
  h.levels_.push_back(std::move(base));
  if (objects.empty()) return h;

  std::uint64_t level_seed = seed;
  do {
    HierarchyLevel& below = h.levels_.back();
    const std::size_t m = below.points.size();
    const std::size_t want = (m + fanout - 1) / fanout;
    const std::size_t trials = want <= objective_limit ? default_trials(m, want) : 1;
    level_seed = level_seed * 6364136223846793005ull + 1442695040888963407ull;
    PivotSet pivots = elect_pivots(below.points, want, trials, level_seed);

    HierarchyLevel above;
    above.points = std::move(pivots.pivots);
    const std::size_t n_above = above.points.size();
    below.parent.resize(m);
    if (n_above == 1) {
      std::fill(below.parent.begin(), below.parent.end(), 0u);
    } else {
      const NearestSite sites(above.points);
      parallel_for(m, workers, [&](std::size_t i) { below.parent[i] = sites.nearest(below.points[i]); },
                   1024);
    }
    above.child_begin.assign(n_above + 1, 0);
    for (std::uint32_t p : below.parent) ++above.child_begin[p + 1];
    for (std::size_t i = 0; i < n_above; ++i) above.child_begin[i + 1] += above.child_begin[i];
    above.children.resize(m);
    std::vector<std::uint32_t> fill(above.child_begin.begin(), above.child_begin.end() - 1);
    for (std::uint32_t i = 0; i < m; ++i) above.children[fill[below.parent[i]]++] = i;
    above.radius.assign(n_above, 0.0);
    for (std::uint32_t i = 0; i < m; ++i) {
      const std::uint32_t p = below.parent[i];
      above.radius[p] = std::max(above.radius[p], dist(above.points[p], below.points[i]) + below.radius[i]);
    }
    h.levels_.push_back(std::move(above));
  } while (h.levels_.back().points.size() > 1);
  return h;
}

}  // namespace dtoss
