#pragma once

// In-process shared-nothing cluster. Nodes are plain values exchanging
// batches through a message ledger; every construction phase is timed and
// its traffic accounted.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"
#include "dtoss/hierarchy.hpp"
#include "dtoss/local_index.hpp"
#include "dtoss/nearest.hpp"
#include "dtoss/partitioner.hpp"

namespace dtoss {

using NodeId = std::uint32_t;

struct ConstructionConfig {
  std::uint64_t seed = 1;
  double extent = kDefaultExtent;
  /// Total candidate sample S = candidates_per_pivot * P, split evenly across nodes.
  std::size_t candidates_per_pivot = 250;
  std::optional<std::size_t> election_trials;  // default S / P
  double lambda = 0.0;
  std::optional<double> replicate_fraction;  // when set, lambda is tuned to this fraction
  std::size_t k = 3;
  std::size_t fanout = 16;
  bool repartition = true;
  bool random_partitioning = false;  // baseline: keep the random placement
  bool build_hierarchies = true;
  std::size_t workers = 1;
  AccuracyTest accuracy_test = AccuracyTest::tight;
  MessageSizeModel sizes;
};

struct MessageCounters {
  std::size_t sent = 0;
  std::size_t received = 0;
  std::size_t bytes_sent = 0;
  std::size_t bytes_received = 0;
};

struct SimNode {
  NodeId id = 0;
  PartitionId partition = 0;
  std::vector<ObjectRecord> store;     // objects this node currently holds as primaries
  std::vector<ObjectRecord> replicas;  // border copies received during shuffle
  PivotSet pivots;
  MessageCounters counters;

  /// Pivot list as a routing table: 8 bytes of location plus 32 of address each.
  std::size_t routing_table_bytes() const { return pivots.size() * 40; }
};

struct PhaseReport {
  std::string name;
  double wall_seconds = 0.0;
  std::size_t messages = 0;
  std::size_t bytes = 0;
};

struct ConstructionReport {
  std::uint64_t seed = 0;
  std::size_t nodes = 0;
  std::size_t objects = 0;
  double lambda = 0.0;
  std::vector<PhaseReport> phases;
  std::size_t total_messages = 0;
  std::size_t total_bytes = 0;
  std::size_t messages_sent = 0;
  std::size_t messages_received = 0;
  std::size_t shuffled_objects = 0;    // primaries that changed node
  std::size_t replica_copies = 0;
  std::size_t replicated_objects = 0;  // objects with at least one replica
  std::size_t inaccurate_cells = 0;    // after replication, before fixing
  std::size_t inaccurate_without_replication = 0;
  std::size_t ir_requests = 0;
  std::size_t fix_messages = 0;
  std::size_t fix_objects = 0;
  std::vector<std::size_t> partition_sizes;

  /// beta * |O| objects shuffled and alpha * |O| exchanged while fixing.
  double beta() const { return objects ? double(shuffled_objects) / double(objects) : 0.0; }
  double alpha() const { return objects ? double(fix_objects) / double(objects) : 0.0; }
  double inaccurate_fraction() const {
    return objects ? double(inaccurate_cells) / double(objects) : 0.0;
  }
  double partition_size_cv() const {
    if (partition_sizes.empty()) return 0.0;
    double mean = 0.0;
    for (auto s : partition_sizes) mean += double(s);
    mean /= double(partition_sizes.size());
    double var = 0.0;
    for (auto s : partition_sizes) var += (double(s) - mean) * (double(s) - mean);
    var /= double(partition_sizes.size());
    return mean > 0.0 ? std::sqrt(var) / mean : 0.0;
  }
};

/// One partition as served by its node after construction.
struct PartitionStore {
  LocalVoronoiDiagram lvd;
  VoronoiHierarchy hierarchy;
  double furthest = 0.0;  // max distance from the pivot to any primary

  std::span<const ObjectRecord> objects() const { return lvd.primaries(); }
};

struct DistributedIndex {
  PartitionPlan plan;
  std::vector<PartitionStore> partitions;
  std::vector<NodeId> owner;  // partition -> node
  std::size_t total_objects = 0;
  bool pivot_partitioned = true;

  std::vector<double> furthest() const {
    std::vector<double> f;
    for (const auto& p : partitions) f.push_back(p.furthest);
    return f;
  }
};

struct RouteResult {
  NodeId node = 0;
  std::size_t messages = 0;
};

/// Nearest-pivot owner of q; forwarding from another node costs one message.
inline RouteResult route(Point q, NodeId from, const DistributedIndex& index) {
  const PartitionId p = map_object(q, index.plan.pivot_set);
  const NodeId owner = index.owner[p];
  return {owner, owner == from ? 0u : 1u};
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

class SimCluster {
 public:
  SimCluster(std::size_t nodes, ConstructionConfig config) : config_(std::move(config)) {
    if (nodes == 0) throw Error("cluster needs at least one node");
    nodes_.resize(nodes);
    for (NodeId i = 0; i < nodes; ++i) {
      nodes_[i].id = i;
      nodes_[i].partition = i;
    }
  }

  const ConstructionConfig& config() const { return config_; }
  ConstructionConfig& config() { return config_; }
  std::span<const SimNode> nodes() const { return nodes_; }
  const DistributedIndex& index() const { return index_; }
  bool has_plan() const { return has_plan_; }

  /// Scatters objects uniformly at random over the nodes (the worst case for
  /// the shuffle phase).
  void load_random(std::span<const ObjectRecord> objects, std::uint64_t seed) {
    for (auto& n : nodes_) n.store.clear();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, nodes_.size() - 1);
    for (const auto& o : objects) nodes_[pick(rng)].store.push_back(o);
  }

  /// Applies f to every stored object (e.g. movement between cycles).
  template <typename F>
  void for_each_object(F&& f) {
    for (auto& n : nodes_)
      for (auto& o : n.store) f(o);
  }

  std::vector<std::size_t> node_loads() const {
    std::vector<std::size_t> out;
    for (const auto& n : nodes_) out.push_back(n.store.size());
    return out;
  }

  ConstructionReport run_construction();

 private:
  void send(NodeId from, NodeId to, std::size_t bytes, PhaseReport& phase) {
    nodes_[from].counters.sent += 1;
    nodes_[from].counters.bytes_sent += bytes;
    nodes_[to].counters.received += 1;
    nodes_[to].counters.bytes_received += bytes;
    phase.messages += 1;
    phase.bytes += bytes;
  }

  void elect(ConstructionReport& report, PhaseReport& exchange, PhaseReport& election,
             detail::Stopwatch& clock);
  void shuffle(ConstructionReport& report, PhaseReport& phase);

  ConstructionConfig config_;
  std::vector<SimNode> nodes_;
  DistributedIndex index_;
  bool has_plan_ = false;
};

inline void SimCluster::elect(ConstructionReport& report, PhaseReport& exchange,
                              PhaseReport& election, detail::Stopwatch& clock) {
  const std::size_t n = nodes_.size();
  const std::size_t p = n;
  const std::size_t total = config_.candidates_per_pivot * p;
  const std::size_t per_node = (total + n - 1) / n;
  std::vector<std::vector<Point>> local(n);
  for (NodeId i = 0; i < n; ++i) {
    std::vector<Point> pts;
    pts.reserve(nodes_[i].store.size());
    for (const auto& o : nodes_[i].store) pts.push_back(o.location);
    local[i] = select_candidates(pts, std::min(per_node, pts.size()),
                                 detail::mix_seed(config_.seed, 1000 + i));
    for (NodeId j = 0; j < n; ++j)
      if (j != i) send(i, j, config_.sizes.header_bytes + config_.sizes.point_bytes * local[i].size(), exchange);
  }
  exchange.wall_seconds = clock.lap();

  std::vector<Point> all;
  for (const auto& c : local) all.insert(all.end(), c.begin(), c.end());
  const std::size_t trials = config_.election_trials.value_or(default_trials(all.size(), p));
  const std::uint64_t shared_seed = detail::mix_seed(config_.seed, 7);
  // Every node elects on its own; the shared seed makes the results identical.
  for (NodeId i = 0; i < n; ++i) nodes_[i].pivots = elect_pivots(all, p, trials, shared_seed);
  for (NodeId i = 1; i < n; ++i)
    if (!(nodes_[i].pivots == nodes_[0].pivots)) throw Error("nodes elected different pivots");

  double lambda = config_.lambda;
  PartitionPlan plan = make_plan(nodes_[0].pivots, config_.extent, lambda);
  if (config_.replicate_fraction) {
    std::vector<Point> sample;
    for (const auto& node : nodes_)
      for (const auto& o : node.store) sample.push_back(o.location);
    plan.lambda = tune_lambda(sample, plan, *config_.replicate_fraction);
  }
  index_.plan = std::move(plan);
  index_.owner.resize(p);
  for (NodeId i = 0; i < n; ++i) index_.owner[i] = i;
  index_.pivot_partitioned = true;
  has_plan_ = true;
  report.lambda = index_.plan.lambda;
  election.wall_seconds = clock.lap();
}

inline void SimCluster::shuffle(ConstructionReport& report, PhaseReport& phase) {
  const std::size_t n = nodes_.size();
  std::vector<std::vector<ObjectRecord>> primary(n), replica(n);
  std::map<std::pair<NodeId, NodeId>, std::size_t> batches;
  for (const auto& node : nodes_) {
    for (const auto& o : node.store) {
      const auto targets = index_.plan.replicated(o.location);
      const NodeId home = index_.owner[targets[0]];
      primary[home].push_back(o);
      if (home != node.id) {
        ++batches[{node.id, home}];
        ++report.shuffled_objects;
      }
      if (targets.size() > 1) ++report.replicated_objects;
      for (std::size_t t = 1; t < targets.size(); ++t) {
        const NodeId dst = index_.owner[targets[t]];
        replica[dst].push_back(o);
        ++report.replica_copies;
        if (dst != node.id) ++batches[{node.id, dst}];
      }
    }
  }
  for (const auto& [key, count] : batches)
    send(key.first, key.second, config_.sizes.header_bytes + config_.sizes.point_bytes * count, phase);
  for (NodeId i = 0; i < n; ++i) {
    nodes_[i].store = std::move(primary[i]);
    nodes_[i].replicas = std::move(replica[i]);
  }
}

inline ConstructionReport SimCluster::run_construction() {
  ConstructionReport report;
  report.seed = config_.seed;
  report.nodes = nodes_.size();
  for (const auto& node : nodes_) report.objects += node.store.size();
  if (report.objects == 0) throw Error("empty dataset");
  for (auto& node : nodes_) node.counters = {};

  detail::Stopwatch clock;
  PhaseReport exchange{"candidate_exchange"}, election{"election"}, shuffle_phase{"shuffle"},
      build{"lvd_build"}, fix{"fix"}, hierarchy{"hierarchy"};

  PartitionLayout layout;
  if (config_.random_partitioning) {
    exchange.wall_seconds = clock.lap();
    election.wall_seconds = clock.lap();
    index_.plan = PartitionPlan{};
    index_.plan.extent = config_.extent;
    index_.owner.resize(nodes_.size());
    for (NodeId i = 0; i < nodes_.size(); ++i) index_.owner[i] = i;
    index_.pivot_partitioned = false;
    for (auto& node : nodes_) node.replicas.clear();
    shuffle_phase.wall_seconds = clock.lap();
    std::vector<std::vector<ObjectRecord>> parts;
    for (const auto& node : nodes_) parts.push_back(node.store);
    layout = bbox_layout(parts, config_.extent);
  } else {
    if (config_.repartition || !has_plan_) {
      elect(report, exchange, election, clock);
    } else {
      exchange.wall_seconds = clock.lap();
      election.wall_seconds = clock.lap();
      report.lambda = index_.plan.lambda;
    }
    shuffle(report, shuffle_phase);
    shuffle_phase.wall_seconds = clock.lap();
    layout = pivot_layout(index_.plan);
  }

  LvdConfig lvd_config;
  lvd_config.k = config_.k;
  lvd_config.workers = config_.workers;
  lvd_config.accuracy_test = config_.accuracy_test;
  index_.partitions.clear();
  index_.partitions.resize(nodes_.size());
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    index_.partitions[i].lvd =
        build_local_diagram(i, nodes_[i].store, nodes_[i].replicas, layout, lvd_config);
    report.inaccurate_cells += index_.partitions[i].lvd.inaccurate.size();
  }
  if (!config_.random_partitioning && index_.plan.lambda > 0.0) {
    PartitionPlan bare = index_.plan;
    bare.lambda = 0.0;
    const PartitionLayout bare_layout = pivot_layout(bare);
    for (NodeId i = 0; i < nodes_.size(); ++i)
      for (const auto& cell : index_.partitions[i].lvd.cells)
        if (!classify_cell(cell, i, bare_layout, config_.accuracy_test).accurate)
          ++report.inaccurate_without_replication;
  } else {
    report.inaccurate_without_replication = report.inaccurate_cells;
  }
  build.wall_seconds = clock.lap();

  std::vector<LocalVoronoiDiagram> lvds;
  lvds.reserve(nodes_.size());
  for (auto& part : index_.partitions) lvds.push_back(std::move(part.lvd));
  const FixStats fs = fix_inaccurate(lvds, layout, config_.sizes, config_.workers);
  for (NodeId i = 0; i < nodes_.size(); ++i) index_.partitions[i].lvd = std::move(lvds[i]);
  report.ir_requests = fs.ir_requests;
  report.fix_messages = fs.messages;
  report.fix_objects = fs.objects_shipped;
  fix.messages = fs.messages;
  fix.bytes = fs.bytes;
  fix.wall_seconds = clock.lap();

  for (NodeId i = 0; i < nodes_.size(); ++i) {
    PartitionStore& part = index_.partitions[i];
    std::vector<Point> pts;
    for (const auto& o : part.lvd.primaries()) pts.push_back(o.location);
    if (config_.build_hierarchies)
      part.hierarchy = build_hierarchy(pts, config_.fanout, detail::mix_seed(config_.seed, 5000 + i),
                                       HierarchyOptions{config_.workers, 256});
    part.furthest = 0.0;
    if (index_.pivot_partitioned)
      for (const Point& p : pts)
        part.furthest = std::max(part.furthest, dist(p, index_.plan.pivot_set.pivots[i]));
    report.partition_sizes.push_back(pts.size());
  }
  hierarchy.wall_seconds = clock.lap();
  index_.total_objects = report.objects;

  report.phases = {exchange, election, shuffle_phase, build, fix, hierarchy};
  for (const auto& ph : report.phases) {
    report.total_messages += ph.messages;
    report.total_bytes += ph.bytes;
  }
  for (const auto& node : nodes_) {
    report.messages_sent += node.counters.sent;
    report.messages_received += node.counters.received;
  }
  // Fix exchanges are recorded per partition pair; each is one send and one receive.
  report.messages_sent += fs.messages;
  report.messages_received += fs.messages;
  return report;
}

/// Scatters `objects` randomly over `nodes` nodes and runs one construction cycle.
inline std::pair<DistributedIndex, ConstructionReport> run_construction(
    std::span<const ObjectRecord> objects, std::size_t nodes, const ConstructionConfig& config) {
  if (objects.empty()) throw Error("empty dataset");
  SimCluster cluster(nodes, config);
  cluster.load_random(objects, detail::mix_seed(config.seed, 99));
  ConstructionReport report = cluster.run_construction();
  return {cluster.index(), std::move(report)};
}

}  // namespace dtoss
