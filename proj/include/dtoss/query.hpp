#pragma once

// Range and kNN queries over a built DistributedIndex.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dtoss/cluster_sim.hpp"
#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"
#include "dtoss/parallel.hpp"

namespace dtoss {

enum class Selectivity { small, medium, large };

inline double selectivity_fraction(Selectivity s) {
  switch (s) {
    case Selectivity::small: return 0.0001;
    case Selectivity::medium: return 0.0005;
    case Selectivity::large: return 0.0010;
  }
  return 0.0;
}

/// Radius whose circle covers `fraction` of the extent's area.
inline double selectivity_radius(double fraction, double extent) {
  if (!(fraction > 0.0)) throw Error("selectivity must be positive");
  return extent * std::sqrt(fraction / std::numbers::pi);
}

struct PartitionSearchStats {
  std::vector<PartitionId> hyperplane_pruned;
  std::vector<PartitionId> furthest_pruned;
};

/// Breadth-first walk over pivot adjacency from q's partition. A neighbor
/// whose border with P_q is farther than r from q is dropped and not
/// expanded. A partition with d(q, P_i) > f_i + r holds no result and is
/// dropped, but still expanded since its region may lie between q and others.
inline std::vector<PartitionId> find_intersecting_partitions(Point q, double r,
                                                             const PartitionPlan& plan,
                                                             std::span<const double> furthest,
                                                             PartitionSearchStats* stats = nullptr) {
  const std::size_t p = plan.partitions();
  if (p == 0) throw Error("empty pivot set");
  if (furthest.size() != p) throw Error("furthest distances do not match partitions");
  const PartitionId home = plan.primary(q);
  const auto& pivots = plan.pivot_set.pivots;
  std::vector<std::uint8_t> seen(p, 0);
  std::vector<PartitionId> out;
  std::deque<PartitionId> frontier{home};
  seen[home] = 1;
  while (!frontier.empty()) {
    const PartitionId i = frontier.front();
    frontier.pop_front();
    if (i != home && dist(q, pivots[i]) > furthest[i] + r) {
      if (stats) stats->furthest_pruned.push_back(i);
    } else {
      out.push_back(i);
    }
    if (i >= plan.adjacency.size()) continue;
    for (PartitionId j : plan.adjacency[i]) {
      if (seen[j]) continue;
      seen[j] = 1;
      if (dist_to_hyperplane(q, pivots[home], pivots[j]) > r) {
        if (stats) stats->hyperplane_pruned.push_back(j);
        continue;
      }
      frontier.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Indices into the partition's primaries within distance r of q.
inline std::vector<std::uint32_t> local_range(const PartitionStore& part, Point q, double r) {
  if (!part.hierarchy.empty()) return part.hierarchy.range(q, r);
  std::vector<std::uint32_t> out;
  const auto objs = part.objects();
  for (std::uint32_t i = 0; i < objs.size(); ++i)
    if (dist(q, objs[i].location) <= r) out.push_back(i);
  return out;
}

inline std::size_t local_count(const PartitionStore& part, Point q, double r) {
  if (!part.hierarchy.empty()) return part.hierarchy.count(q, r);
  return local_range(part, q, r).size();
}

namespace detail {

inline std::vector<PartitionId> candidate_partitions(const DistributedIndex& index, Point q, double r,
                                                     std::span<const double> furthest) {
  if (index.pivot_partitioned) return find_intersecting_partitions(q, r, index.plan, furthest);
  std::vector<PartitionId> all(index.partitions.size());
  for (PartitionId i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

inline NodeId entry_node(const DistributedIndex& index, Point q, NodeId from,
                         std::size_t& messages) {
  if (!index.pivot_partitioned) return from;
  const RouteResult rr = route(q, from, index);
  messages += rr.messages;
  return rr.node;
}

}  // namespace detail

struct RangeResult {
  std::vector<ObjectRecord> objects;  // sorted by id
  std::size_t messages = 0;
  std::size_t partitions_contacted = 0;
};

inline RangeResult range_query(const DistributedIndex& index, Point q, double r, NodeId from = 0,
                               std::span<const double> furthest = {}) {
  if (!(r >= 0.0)) throw Error("radius must be non-negative");
  std::vector<double> owned;
  if (furthest.empty()) {
    owned = index.furthest();
    furthest = owned;
  }
  RangeResult res;
  const NodeId nq = detail::entry_node(index, q, from, res.messages);
  const auto in_q = detail::candidate_partitions(index, q, r, furthest);
  res.partitions_contacted = in_q.size();
  for (PartitionId p : in_q) {
    if (index.owner[p] != nq) ++res.messages;
    const PartitionStore& part = index.partitions[p];
    const auto objs = part.objects();
    for (std::uint32_t i : local_range(part, q, r)) res.objects.push_back(objs[i]);
  }
  std::sort(res.objects.begin(), res.objects.end(),
            [](const ObjectRecord& a, const ObjectRecord& b) { return a.id < b.id; });
  return res;
}

/// Estimated distance to the k-th neighbor, in extent units.
inline double estimate_knn_distance(std::size_t k, std::size_t total_objects, double extent) {
  if (k == 0) throw Error("k must be positive");
  if (k > total_objects) throw Error("k exceeds object count");
  const double ratio = static_cast<double>(k) / static_cast<double>(total_objects);
  return extent * (1.0 / std::sqrt(std::numbers::pi)) * (1.0 - std::sqrt(1.0 - ratio));
}

/// Initial radius and per-round increment: ed(k) / k.
inline double estimate_knn_radius(std::size_t k, std::size_t total_objects, double extent) {
  return estimate_knn_distance(k, total_objects, extent) / static_cast<double>(k);
}

struct KnnResult {
  std::vector<ObjectRecord> objects;  // ascending distance, ties by id
  std::size_t rounds = 0;
  std::size_t messages = 0;
  double final_radius = 0.0;
};

inline KnnResult knn_query(const DistributedIndex& index, Point q, std::size_t k, NodeId from = 0,
                           std::span<const double> furthest = {}) {
  if (k == 0) throw Error("k must be positive");
  if (k > index.total_objects) throw Error("k exceeds object count");
  std::vector<double> owned;
  if (furthest.empty()) {
    owned = index.furthest();
    furthest = owned;
  }
  KnnResult res;
  const NodeId nq = detail::entry_node(index, q, from, res.messages);
  const double step = estimate_knn_radius(k, index.total_objects, index.plan.extent);
  // Once r covers the whole extent every object is counted.
  const double cover = index.plan.extent * std::numbers::sqrt2 * 2.0;
  double r = step;
  auto fan_out = [&](std::span<const PartitionId> in_q) {
    for (PartitionId p : in_q)
      if (index.owner[p] != nq) ++res.messages;
  };
  for (;;) {
    ++res.rounds;
    const auto in_q = detail::candidate_partitions(index, q, r, furthest);
    fan_out(in_q);
    std::size_t found = 0;
    for (PartitionId p : in_q) found += local_count(index.partitions[p], q, r);
    if (found >= k || r >= cover) break;
    r = std::min(r + step, cover);
  }

  auto collect = [&](double radius) {
    struct Hit {
      double d;
      ObjectRecord o;
    };
    std::vector<Hit> hits;
    const auto in_q = detail::candidate_partitions(index, q, radius, furthest);
    fan_out(in_q);
    for (PartitionId p : in_q) {
      const auto objs = index.partitions[p].objects();
      for (std::uint32_t i : local_range(index.partitions[p], q, radius))
        hits.push_back({dist(q, objs[i].location), objs[i]});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      return a.d != b.d ? a.d < b.d : a.o.id < b.o.id;
    });
    return hits;
  };
  auto hits = collect(r);
  // Exactness guard: only a k-th distance inside the searched radius is final.
  if (hits.size() >= k && hits[k - 1].d > r) {
    r = hits[k - 1].d;
    ++res.rounds;
    hits = collect(r);
  }
  if (hits.size() < k) throw Error("kNN search exhausted the index");
  for (std::size_t i = 0; i < k; ++i) res.objects.push_back(hits[i].o);
  res.final_radius = r;
  return res;
}

// ---------------------------------------------------------------------------
// Batches and throughput.

enum class QueryType { range, selectivity, knn };

struct QuerySpec {
  QueryType type = QueryType::range;
  Point q;
  double radius = 0.0;  // range: absolute; selectivity: area fraction
  std::size_t k = 0;
};

struct QueryOutcome {
  std::vector<ObjectRecord> objects;
  std::size_t messages = 0;
};

inline double effective_radius(const QuerySpec& spec, double extent) {
  return spec.type == QueryType::selectivity ? selectivity_radius(spec.radius, extent) : spec.radius;
}

inline QueryOutcome run_query(const DistributedIndex& index, const QuerySpec& spec, NodeId from,
                              std::span<const double> furthest) {
  if (spec.type == QueryType::knn) {
    KnnResult r = knn_query(index, spec.q, spec.k, from, furthest);
    return {std::move(r.objects), r.messages};
  }
  RangeResult r = range_query(index, spec.q, effective_radius(spec, index.plan.extent), from, furthest);
  return {std::move(r.objects), r.messages};
}

/// Runs every query once; entry nodes rotate so all nodes receive queries.
inline std::vector<QueryOutcome> run_batch(const DistributedIndex& index,
                                           std::span<const QuerySpec> queries,
                                           std::size_t workers = 1) {
  const auto furthest = index.furthest();
  const std::size_t nodes = std::max<std::size_t>(1, index.owner.size());
  std::vector<QueryOutcome> out(queries.size());
  parallel_for(queries.size(), workers, [&](std::size_t i) {
    out[i] = run_query(index, queries[i], static_cast<NodeId>(i % nodes), furthest);
  }, 8);
  return out;
}

struct ThroughputReport {
  std::size_t warmup_queries = 0;
  std::size_t measured_queries = 0;
  double measured_seconds = 0.0;
  std::size_t messages = 0;

  double throughput() const { return measured_seconds > 0.0 ? double(measured_queries) / measured_seconds : 0.0; }
  double messages_per_query() const {
    return measured_queries ? double(messages) / double(measured_queries) : 0.0;
  }
};

/// Cycles through the batch for a warm-up window, then counts completed
/// queries over the measurement window.
inline ThroughputReport measure_throughput(const DistributedIndex& index,
                                           std::span<const QuerySpec> queries,
                                           double warmup_seconds, double measure_seconds) {
  if (queries.empty()) throw Error("empty query batch");
  const auto furthest = index.furthest();
  const std::size_t nodes = std::max<std::size_t>(1, index.owner.size());
  using clock = std::chrono::steady_clock;
  ThroughputReport rep;
  std::size_t next = 0;
  auto one = [&]() {
    const std::size_t i = next++ % queries.size();
    return run_query(index, queries[i], static_cast<NodeId>(i % nodes), furthest).messages;
  };
  const auto warm_end = clock::now() + std::chrono::duration<double>(warmup_seconds);
  while (clock::now() < warm_end) {
    one();
    ++rep.warmup_queries;
  }
  const auto start = clock::now();
  const auto end = start + std::chrono::duration<double>(measure_seconds);
  do {
    rep.messages += one();
    ++rep.measured_queries;
  } while (clock::now() < end);
  rep.measured_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return rep;
}

}  // namespace dtoss
