#pragma once

// Decentralized pivot election and the object -> partition mapping, with
// optional border replication within lambda of a pivot hyperplane.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"
#include "dtoss/nearest.hpp"

namespace dtoss {

using PartitionId = std::uint32_t;
using Adjacency = std::vector<std::vector<PartitionId>>;

/// Pivot i defines partition i.
struct PivotSet {
  std::vector<Point> pivots;
  std::uint64_t seed = 0;

  std::size_t size() const { return pivots.size(); }
  friend bool operator==(const PivotSet&, const PivotSet&) = default;
};

namespace detail {

// First `count` slots of a partial Fisher-Yates shuffle over [0, n).
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count,
                                               std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

inline double pairwise_distance_sum(std::span<const Point> pts) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) sum += dist(pts[i], pts[j]);
  return sum;
}

}  // namespace detail

/// Uniform sample without replacement, deterministic under `seed`.
inline std::vector<Point> select_candidates(std::span<const Point> node_objects,
                                            std::size_t count, std::uint64_t seed) {
  if (count > node_objects.size()) throw Error("candidate count exceeds node objects");
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i : detail::sample_indices(node_objects.size(), count, rng))
    out.push_back(node_objects[i]);
  return out;
}

struct ElectionResult {
  PivotSet pivot_set;
  double objective = 0.0;               // pairwise distance sum of the chosen set
  std::vector<double> trial_objectives;  // one entry per trial, in draw order
};

/// Default trial budget: one random P-subset per P candidates.
inline std::size_t default_trials(std::size_t candidates, std::size_t p_count) {
  return std::max<std::size_t>(1, candidates / std::max<std::size_t>(1, p_count));
}

/// Draws `trials` seeded random P-subsets of the (deduplicated) candidates and
/// keeps the one with the largest sum of pairwise distances. With a single
/// trial the objective is not evaluated.
inline ElectionResult elect_pivots_detailed(std::span<const Point> candidates,
                                            std::size_t p_count, std::size_t trials,
                                            std::uint64_t seed) {
  if (p_count == 0) throw Error("pivot count must be positive");
  if (trials == 0) throw Error("trial count must be positive");
  std::vector<Point> distinct;
  distinct.reserve(candidates.size());
  {
    std::vector<std::pair<double, double>> seen;
    seen.reserve(candidates.size());
    for (const Point& p : candidates) seen.emplace_back(p.x, p.y);
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return seen[a] < seen[b]; });
    std::vector<bool> keep(candidates.size(), true);
    for (std::size_t i = 1; i < order.size(); ++i)
      if (seen[order[i]] == seen[order[i - 1]]) keep[order[i]] = false;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (keep[i]) distinct.push_back(candidates[i]);
  }
  if (distinct.size() < p_count) throw Error("too few candidates for pivot election");

  ElectionResult result;
  result.pivot_set.seed = seed;
  std::mt19937_64 rng(seed);
  double best = -1.0;
  std::vector<Point> set(p_count);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto idx = detail::sample_indices(distinct.size(), p_count, rng);
    for (std::size_t i = 0; i < p_count; ++i) set[i] = distinct[idx[i]];
    const double objective = trials == 1 ? 0.0 : detail::pairwise_distance_sum(set);
    result.trial_objectives.push_back(objective);
    if (objective > best) {
      best = objective;
      result.pivot_set.pivots = set;
    }
  }
  result.objective = best;
  return result;
}

inline PivotSet elect_pivots(std::span<const Point> candidates, std::size_t p_count,
                             std::size_t trials, std::uint64_t seed) {
  return elect_pivots_detailed(candidates, p_count, trials, seed).pivot_set;
}

/// Nearest pivot; lowest id on exact ties.
inline PartitionId map_object(Point o, const PivotSet& pivots) {
  if (pivots.pivots.empty()) throw Error("empty pivot set");
  PartitionId best = 0;
  double best_d2 = dist2(o, pivots.pivots[0]);
  for (PartitionId i = 1; i < pivots.pivots.size(); ++i) {
    const double d2 = dist2(o, pivots.pivots[i]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

/// Voronoi neighbors of every pivot, from the exact diagram over the pivots.
inline Adjacency pivot_adjacency(const PivotSet& pivots, double extent) {
  if (pivots.size() < 2) throw Error("adjacency needs at least two pivots");
  const auto cells = brute_force_voronoi(pivots.pivots, extent);
  const double eps = geometric_epsilon(extent);
  Adjacency adj(pivots.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::int64_t j : cell_neighbors(cells[i], eps)) adj[i].push_back(static_cast<PartitionId>(j));
  return adj;
}

/// Primary partition first, then every Voronoi neighbor of it whose border
/// hyperplane lies within lambda of o.
inline std::vector<PartitionId> map_object_replicated(Point o, const PivotSet& pivots,
                                                      const Adjacency& adjacency,
                                                      double lambda) {
  if (lambda < 0.0) throw Error("lambda must be non-negative");
  const PartitionId primary = map_object(o, pivots);
  std::vector<PartitionId> out{primary};
  if (primary < adjacency.size()) {
    for (PartitionId j : adjacency[primary])
      if (dist_to_hyperplane(o, pivots.pivots[primary], pivots.pivots[j]) <= lambda)
        out.push_back(j);
  }
  return out;
}

/// Everything a node needs to map objects and reason about borders.
struct PartitionPlan {
  PivotSet pivot_set;
  Adjacency adjacency;
  double lambda = 0.0;
  double extent = kDefaultExtent;
  std::vector<VoronoiCell> pivot_cells;  // region of each partition

  std::size_t partitions() const { return pivot_set.size(); }

  PartitionId primary(Point o) const { return map_object(o, pivot_set); }

  std::vector<PartitionId> replicated(Point o) const {
    return map_object_replicated(o, pivot_set, adjacency, lambda);
  }

  bool adjacent(PartitionId a, PartitionId b) const {
    const auto& n = adjacency[a];
    return std::find(n.begin(), n.end(), b) != n.end();
  }
};

inline PartitionPlan make_plan(PivotSet pivots, double extent, double lambda) {
  PartitionPlan plan;
  plan.extent = extent;
  plan.lambda = lambda;
  plan.pivot_set = std::move(pivots);
  if (plan.pivot_set.size() >= 2) {
    plan.pivot_cells = brute_force_voronoi(plan.pivot_set.pivots, extent);
    const double eps = geometric_epsilon(extent);
    plan.adjacency.resize(plan.pivot_set.size());
    for (std::size_t i = 0; i < plan.pivot_cells.size(); ++i)
      for (std::int64_t j : cell_neighbors(plan.pivot_cells[i], eps))
        plan.adjacency[i].push_back(static_cast<PartitionId>(j));
  } else {
    plan.adjacency.assign(plan.pivot_set.size(), {});
    for (const Point& p : plan.pivot_set.pivots) {
      auto cell = extent_cell(p, extent);
      cell.status = CellStatus::accurate;
      plan.pivot_cells.push_back(std::move(cell));
    }
  }
  return plan;
}

/// Distance from o to the nearest border shared with a neighbor of its
/// primary partition (infinity with no neighbors).
inline double border_distance(Point o, const PartitionPlan& plan) {
  const PartitionId p = plan.primary(o);
  double best = std::numeric_limits<double>::infinity();
  for (PartitionId j : plan.adjacency[p])
    best = std::min(best, dist_to_hyperplane(o, plan.pivot_set.pivots[p], plan.pivot_set.pivots[j]));
  return best;
}

/// Smallest lambda that replicates at least `fraction` of `objects`.
inline double tune_lambda(std::span<const Point> objects, const PartitionPlan& plan,
                          double fraction) {
  if (objects.empty() || fraction <= 0.0) return 0.0;
  std::vector<double> d;
  d.reserve(objects.size());
  for (const Point& o : objects) d.push_back(border_distance(o, plan));
  const auto rank = std::min(d.size() - 1,
                             static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(d.size()))) - 1);
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(rank), d.end());
  const double lambda = d[rank];
  return std::isfinite(lambda) ? lambda : 0.0;
}

/// Primary partition of each object, using a 2-d tree when P is large.
inline std::vector<PartitionId> assign_partitions(std::span<const Point> objects,
                                                  const PivotSet& pivots) {
  std::vector<PartitionId> out(objects.size());
  if (pivots.size() <= 64) {
    for (std::size_t i = 0; i < objects.size(); ++i) out[i] = map_object(objects[i], pivots);
  } else {
    const NearestSite tree(pivots.pivots);
    for (std::size_t i = 0; i < objects.size(); ++i) out[i] = tree.nearest(objects[i]);
  }
  return out;
}

}  // namespace dtoss
