#pragma once

// Per-partition local Voronoi diagrams: approximate cells from Z-order
// neighbors, influence-region refinement against local objects, border
// classification, and the cross-partition fixing exchange.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"
#include "dtoss/parallel.hpp"
#include "dtoss/partitioner.hpp"
#include "dtoss/zorder.hpp"

namespace dtoss {

using ObjectId = std::uint64_t;

struct ObjectRecord {
  ObjectId id = 0;
  Point location;

  friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

enum class AccuracyTest { tight, coarse };

/// Where each partition's primary objects can lie. With a pivot plan the
/// regions are pivot cells and lambda-replicas cover border slabs; without
/// one (random placement) regions are object bounding boxes and nothing is
/// replicated.
struct PartitionLayout {
  const PartitionPlan* plan = nullptr;
  std::vector<std::vector<Point>> regions;
  double extent = kDefaultExtent;

  std::size_t partitions() const { return regions.size(); }
  double lambda() const { return plan ? plan->lambda : 0.0; }
};

inline PartitionLayout pivot_layout(const PartitionPlan& plan) {
  PartitionLayout layout;
  layout.plan = &plan;
  layout.extent = plan.extent;
  for (const auto& cell : plan.pivot_cells) layout.regions.push_back(cell.vertices);
  return layout;
}

/// Bounding-box regions for arbitrary (e.g. random) placements.
inline PartitionLayout bbox_layout(std::span<const std::vector<ObjectRecord>> partitions,
                                   double extent) {
  PartitionLayout layout;
  layout.extent = extent;
  for (const auto& objs : partitions) {
    if (objs.empty()) {
      layout.regions.push_back({});
      continue;
    }
    double x0 = extent, y0 = extent, x1 = 0.0, y1 = 0.0;
    for (const auto& o : objs) {
      x0 = std::min(x0, o.location.x);
      y0 = std::min(y0, o.location.y);
      x1 = std::max(x1, o.location.x);
      y1 = std::max(y1, o.location.y);
    }
    layout.regions.push_back({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
  }
  return layout;
}

struct LvdConfig {
  std::size_t k = 3;
  std::size_t workers = 1;
  AccuracyTest accuracy_test = AccuracyTest::tight;
  std::size_t max_refine_iterations = 64;
};

struct LocalVoronoiDiagram {
  PartitionId partition = 0;
  std::vector<ObjectRecord> objects;  // primaries, then replicas
  std::size_t primary_count = 0;
  ZOrderIndex index;                  // over all local objects
  std::vector<VoronoiCell> cells;     // one per primary, same order
  std::vector<std::vector<PartitionId>> contacts;  // CN(o) per primary
  std::vector<std::uint32_t> inaccurate;           // primaries awaiting remote refinement

  std::span<const ObjectRecord> primaries() const {
    return std::span<const ObjectRecord>(objects).first(primary_count);
  }
};

/// Extent box clipped by the bisectors of the 2k Z-order neighbors of the
/// object at sorted position `pos`.
inline VoronoiCell build_approx_cell(const ZOrderIndex& index, std::span<const ObjectId> ids,
                                     std::size_t pos, std::size_t k, double extent) {
  const double eps = geometric_epsilon(extent);
  const auto& self = index[pos];
  VoronoiCell cell = extent_cell(self.p, extent);
  for (std::size_t n : z_neighbors(index.size(), pos, k)) {
    const auto& other = index[n];
    if (other.p == self.p) continue;
    clip_in_place(cell, bisector(self.p, other.p), eps,
                  static_cast<std::int64_t>(ids[other.index]));
  }
  cell.status = CellStatus::approximate;
  return cell;
}

inline double max_vertex_distance(const VoronoiCell& cell) {
  double r = 0.0;
  for (const Point& v : cell.vertices) r = std::max(r, dist2(cell.generator, v));
  return std::sqrt(r);
}

/// Clips `cell` by every indexed object accepted by `keep` inside its
/// influence region until nothing changes. Scans grow geometrically up to
/// circle(o, 2 r_o), which contains the whole region, so large approximate
/// cells never trigger a full scan up front.
template <class Keep>
VoronoiCell refine_cell_filtered(VoronoiCell cell, const ZOrderIndex& index, std::span<const ObjectId> ids,
                                 double extent, Keep&& keep, std::size_t max_iterations = 64,
                                 double initial_scan_radius = 0.0) {
  const double eps = geometric_epsilon(extent);
  const Point o = cell.generator;
  double reach = 2.0 * max_vertex_distance(cell);
  double scan = initial_scan_radius > 0.0 ? std::min(initial_scan_radius, reach) : reach;
  std::vector<std::pair<double, std::uint32_t>> found;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    found.clear();
    z_region_visit(index, Circle{o, scan}, [&](const ZOrderIndex::Entry& e) {
      if (e.p != o && keep(e)) found.emplace_back(dist2(o, e.p), static_cast<std::uint32_t>(&e - &index[0]));
    });
    std::sort(found.begin(), found.end());
    for (const auto& [d2, pos] : found) {
      if (d2 > reach * reach) break;
      const auto& e = index[pos];
      if (clip_in_place(cell, bisector(o, e.p), eps, static_cast<std::int64_t>(ids[e.index])))
        reach = 2.0 * max_vertex_distance(cell);
    }
    if (scan >= reach) {
      cell.status = CellStatus::locally_refined;
      return cell;
    }
    scan = std::min(2.0 * scan, reach);
  }
  throw Error("refinement did not converge");
}

inline VoronoiCell refine_cell(VoronoiCell cell, const ZOrderIndex& index,
                               std::span<const ObjectId> ids, double extent,
                               std::size_t max_iterations = 64,
                               double initial_scan_radius = 0.0) {
  return refine_cell_filtered(std::move(cell), index, ids, extent, [](const ZOrderIndex::Entry&) { return true; },
                              max_iterations, initial_scan_radius);
}

struct Classification {
  bool accurate = true;
  std::vector<PartitionId> contacts;  // partitions that may hold influencing objects
};

namespace detail {

// Signed distance of p past the border hyperplane between partitions i and j
// (positive on j's side).
inline double past_border(const PartitionPlan& plan, PartitionId i, PartitionId j, Point p) {
  return bisector(plan.pivot_set.pivots[i], plan.pivot_set.pivots[j]).signed_distance(p);
}

inline bool inside_own_region(const PartitionLayout& layout, PartitionId self, const Circle& c) {
  if (!layout.plan) return false;
  for (PartitionId j : layout.plan->adjacency[self])
    if (past_border(*layout.plan, self, j, c.center) + c.radius > 0.0) return false;
  return true;
}

// Partitions other than `self` whose objects inside circle c are not already
// local (as primaries or lambda-replicas).
inline void uncovered_contacts(const PartitionLayout& layout, PartitionId self, const Circle& c,
                               std::vector<PartitionId>& out) {
  const double eps = geometric_epsilon(layout.extent);
  if (inside_own_region(layout, self, c)) return;
  const double lambda = layout.lambda();
  for (PartitionId j = 0; j < layout.partitions(); ++j) {
    if (j == self || layout.regions[j].empty()) continue;
    if (!circle_intersects_polygon(c, layout.regions[j], eps)) continue;
    const bool covered = layout.plan && lambda > 0.0 && layout.plan->adjacent(self, j) &&
                         past_border(*layout.plan, self, j, c.center) + c.radius <= lambda;
    if (!covered) out.push_back(j);
  }
}

}  // namespace detail

/// Decides whether every object that could still shrink the cell is already
/// local. `contacts` lists the partitions to ask otherwise (CN(o)).
inline Classification classify_cell(const VoronoiCell& cell, PartitionId self,
                                    const PartitionLayout& layout,
                                    AccuracyTest test = AccuracyTest::tight) {
  Classification out;
  const InfluenceRegion ir = influence_region(cell.generator, cell);
  for (const Circle& c : ir.per_vertex) detail::uncovered_contacts(layout, self, c, out.contacts);
  std::sort(out.contacts.begin(), out.contacts.end());
  out.contacts.erase(std::unique(out.contacts.begin(), out.contacts.end()), out.contacts.end());
  if (test == AccuracyTest::tight) {
    out.accurate = out.contacts.empty();
  } else {
    std::vector<PartitionId> coarse;
    detail::uncovered_contacts(layout, self, ir.bounding_circle(), coarse);
    out.accurate = coarse.empty();
  }
  return out;
}

/// Builds, refines and classifies the cells of one partition. Replicas take
/// part in clipping but own no cells.
inline LocalVoronoiDiagram build_local_diagram(PartitionId partition,
                                               std::vector<ObjectRecord> primaries,
                                               std::span<const ObjectRecord> replicas,
                                               const PartitionLayout& layout,
                                               const LvdConfig& config = {}) {
  LocalVoronoiDiagram lvd;
  lvd.partition = partition;
  lvd.primary_count = primaries.size();
  lvd.objects = std::move(primaries);
  lvd.objects.insert(lvd.objects.end(), replicas.begin(), replicas.end());

  std::vector<Point> pts;
  std::vector<ObjectId> ids;
  pts.reserve(lvd.objects.size());
  ids.reserve(lvd.objects.size());
  for (const auto& o : lvd.objects) {
    pts.push_back(o.location);
    ids.push_back(o.id);
  }
  lvd.index = ZOrderIndex(pts, layout.extent);
  lvd.cells.resize(lvd.primary_count);
  lvd.contacts.resize(lvd.primary_count);
  std::vector<std::uint8_t> flagged(lvd.primary_count, 0);

  parallel_for(lvd.primary_count, config.workers, [&](std::size_t i) {
    const std::size_t pos = lvd.index.position_of(static_cast<std::uint32_t>(i));
    VoronoiCell cell = build_approx_cell(lvd.index, ids, pos, config.k, layout.extent);
    // Start scanning at the reach of the nearest Z-neighbor.
    double seed_radius = 0.0;
    for (std::size_t n : z_neighbors(lvd.index.size(), pos, config.k)) {
      const double d = dist(lvd.index[n].p, pts[i]);
      if (d > 0.0 && (seed_radius == 0.0 || d < seed_radius)) seed_radius = d;
    }
    cell = refine_cell(std::move(cell), lvd.index, ids, layout.extent,
                       config.max_refine_iterations, 2.0 * seed_radius);
    Classification c = classify_cell(cell, partition, layout, config.accuracy_test);
    cell.status = c.accurate ? CellStatus::accurate : CellStatus::inaccurate;
    flagged[i] = c.accurate ? 0 : 1;
    lvd.contacts[i] = std::move(c.contacts);
    lvd.cells[i] = std::move(cell);
  }, 256);
  for (std::size_t i = 0; i < flagged.size(); ++i)
    if (flagged[i]) lvd.inaccurate.push_back(static_cast<std::uint32_t>(i));
  return lvd;
}

struct MessageSizeModel {
  std::size_t header_bytes = 24;
  std::size_t point_bytes = 16;
};

struct FixStats {
  std::size_t inaccurate_cells = 0;  // flagged before fixing
  std::size_t ir_requests = 0;       // (cell, contacted partition) pairs
  std::size_t messages = 0;          // one request + one response per partition pair
  std::size_t bytes = 0;
  std::size_t objects_shipped = 0;
};

/// Resolves every inaccurate cell in rounds of growing radius s around its
/// generator. Each round sends the current cell to every contacted partition
/// whose region meets circle(o, s); the receiver answers with its primaries in
/// the new ring that still clip the cell. Rounds stop once s covers 2 r_o of
/// the shrunken cell, so every object that could clip it has been seen.
/// Requests of one round are batched per (source, target) pair.
inline FixStats fix_inaccurate(std::span<LocalVoronoiDiagram> lvds, const PartitionLayout& layout,
                               const MessageSizeModel& sizes = {}, std::size_t workers = 1) {
  struct Job {
    std::uint32_t partition;
    std::uint32_t cell;
  };
  std::vector<Job> jobs;
  for (std::uint32_t p = 0; p < lvds.size(); ++p)
    for (std::uint32_t c : lvds[p].inaccurate) jobs.push_back({p, c});

  struct Ask {
    std::size_t round;
    PartitionId target;
    std::size_t request_bytes;
    std::size_t returned;
  };
  std::vector<std::vector<Ask>> asks(jobs.size());
  const double eps = geometric_epsilon(layout.extent);

  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    LocalVoronoiDiagram& lvd = lvds[jobs[j].partition];
    VoronoiCell& cell = lvd.cells[jobs[j].cell];
    const Point o = cell.generator;
    const auto& targets = lvd.contacts[jobs[j].cell];
    double near = std::numeric_limits<double>::infinity();
    for (const Point& v : cell.vertices) near = std::min(near, dist(o, v));
    struct Found {
      double d2;
      ObjectId id;
      Point p;
      std::size_t ask;
    };
    std::vector<Found> found;
    double inner = -1.0, scan = 4.0 * near;
    for (std::size_t round = 0;; ++round) {
      const double reach = 2.0 * max_vertex_distance(cell);
      scan = std::min(scan, reach);
      found.clear();
      for (PartitionId t : targets) {
        if (!circle_intersects_polygon(Circle{o, scan}, layout.regions[t], eps)) continue;
        const LocalVoronoiDiagram& other = lvds[t];
        const std::size_t ask = asks[j].size();
        asks[j].push_back({round, t, sizes.point_bytes * (1 + cell.vertices.size()), 0});
        z_region_visit(other.index, Circle{o, scan}, [&](const ZOrderIndex::Entry& e) {
          if (e.index >= other.primary_count) return;
          const double d2 = dist2(o, e.p);
          if (d2 > inner * inner && d2 <= scan * scan)
            found.push_back({d2, other.objects[e.index].id, e.p, ask});
        });
      }
      std::sort(found.begin(), found.end(),
                [](const Found& a, const Found& b) { return std::tie(a.d2, a.id) < std::tie(b.d2, b.id); });
      for (const Found& f : found)
        if (clip_in_place(cell, bisector(o, f.p), eps, static_cast<std::int64_t>(f.id))) ++asks[j][f.ask].returned;
      if (scan >= 2.0 * max_vertex_distance(cell)) break;
      inner = scan;
      scan *= 2.0;
    }
    cell.status = CellStatus::accurate;
  }, 16);

  FixStats stats;
  stats.inaccurate_cells = jobs.size();
  std::map<std::tuple<std::size_t, PartitionId, PartitionId>, std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    std::vector<PartitionId> asked;
    for (const Ask& a : asks[j]) {
      auto& [req, ret] = frames[{a.round, jobs[j].partition, a.target}];
      req += a.request_bytes;
      ret += a.returned;
      asked.push_back(a.target);
      stats.objects_shipped += a.returned;
    }
    std::sort(asked.begin(), asked.end());
    stats.ir_requests += static_cast<std::size_t>(std::unique(asked.begin(), asked.end()) - asked.begin());
  }
  for (const auto& [key, totals] : frames) {
    stats.messages += 2;
    stats.bytes += 2 * sizes.header_bytes + totals.first + sizes.point_bytes * totals.second;
  }
  for (auto& lvd : lvds) lvd.inaccurate.clear();
  return stats;
}

/// One line per cell: `id status x,y x,y ...`.
inline void write_lvd_dump(std::ostream& out, const LocalVoronoiDiagram& lvd) {
  char buf[64];
  for (std::size_t i = 0; i < lvd.primary_count; ++i) {
    const auto& cell = lvd.cells[i];
    out << lvd.objects[i].id << ' ' << to_string(cell.status);
    for (const Point& v : cell.vertices) {
      std::snprintf(buf, sizeof buf, " %.17g,%.17g", v.x, v.y);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace dtoss
