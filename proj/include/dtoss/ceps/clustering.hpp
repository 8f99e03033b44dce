#pragma once

// Clusterings of small partitions onto servers. A cluster runs on the
// cheapest tier covering its peak bucket; it is feasible while that peak fits
// the largest tier. Fitness T sums the idle time of every non-empty cluster.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "dtoss/ceps/patterns.hpp"
#include "dtoss/error.hpp"

namespace dtoss::ceps {

struct Cluster {
  std::vector<PartitionKey> members;  // sorted
  std::vector<double> aggregate;
  double peak = 0.0;
  double total = 0.0;

  bool empty() const { return members.empty(); }
};

class Clustering {
 public:
  Clustering() = default;
  Clustering(TierLadder ladder, std::size_t buckets) : ladder_(std::move(ladder)), buckets_(buckets) {}

  const TierLadder& ladder() const { return ladder_; }
  std::size_t buckets() const { return buckets_; }
  double theta_max() const { return ladder_.max_capacity(); }

  std::size_t size() const { return clusters_.size(); }
  std::size_t non_empty() const {
    return static_cast<std::size_t>(std::count_if(clusters_.begin(), clusters_.end(),
                                                  [](const Cluster& c) { return !c.empty(); }));
  }
  const Cluster& cluster(std::size_t i) const { return clusters_.at(i); }
  std::span<const Cluster> clusters() const { return clusters_; }
  std::size_t partition_count() const { return patterns_.size(); }
  bool contains(PartitionKey p) const { return patterns_.count(p) != 0; }
  const AccessPattern& pattern(PartitionKey p) const { return at(p).pattern; }
  std::size_t cluster_of(PartitionKey p) const { return at(p).cluster; }

  /// Incrementally maintained T.
  double fitness() const { return fitness_; }

  /// T rebuilt from member patterns alone.
  double recompute_fitness() const {
    double t = 0.0;
    for (const auto& c : clusters_) {
      if (c.empty()) continue;
      std::vector<double> agg(buckets_, 0.0);
      for (PartitionKey m : c.members) {
        const auto& b = pattern(m).buckets;
        for (std::size_t i = 0; i < buckets_; ++i) agg[i] += b[i];
      }
      t += cluster_idle(agg);
    }
    return t;
  }

  /// Idle time of an aggregate on its cheapest covering tier.
  double cluster_idle(std::span<const double> agg) const {
    const double pk = peak(agg);
    const std::size_t tier = ladder_.covering_or_throw(pk);
    return idle_time(agg, ladder_.tier(tier).capacity, buckets_);
  }

  double idle(std::size_t c) const {
    return clusters_.at(c).empty() ? 0.0 : cluster_idle(clusters_[c].aggregate);
  }

  double flatness_of(std::size_t c) const { return flatness(std::span<const double>(clusters_.at(c).aggregate)); }

  bool feasible_aggregate(std::span<const double> agg) const { return peak(agg) <= theta_max(); }

  bool feasible() const {
    return std::all_of(clusters_.begin(), clusters_.end(),
                       [&](const Cluster& c) { return c.peak <= theta_max(); });
  }

  std::size_t add_cluster() {
    Cluster c;
    c.aggregate.assign(buckets_, 0.0);
    clusters_.push_back(std::move(c));
    return clusters_.size() - 1;
  }

  void insert(AccessPattern p, std::size_t c) {
    if (p.buckets.size() != buckets_) throw Error("mismatched bucket counts");
    check_pattern(p);
    if (contains(p.partition)) throw Error("partition already clustered");
    if (c >= clusters_.size()) throw Error("unknown cluster");
    const PartitionKey key = p.partition;
    patterns_.emplace(key, Entry{std::move(p), c});
    attach(key, c);
  }

  /// Removes a partition; an emptied cluster is dropped unless keep_empty.
  AccessPattern erase(PartitionKey p, bool keep_empty = false) {
    const std::size_t c = at(p).cluster;
    detach(p, c);
    AccessPattern out = std::move(patterns_.at(p).pattern);
    patterns_.erase(p);
    if (!keep_empty && clusters_[c].empty()) drop_cluster(c);
    return out;
  }

  void move(PartitionKey p, std::size_t to) {
    if (to >= clusters_.size()) throw Error("unknown cluster");
    const std::size_t from = at(p).cluster;
    if (from == to) return;
    detach(p, from);
    patterns_.at(p).cluster = to;
    attach(p, to);
  }

  /// Replaces a partition's pattern without moving it.
  void set_pattern(PartitionKey p, std::vector<double> buckets) {
    if (buckets.size() != buckets_) throw Error("mismatched bucket counts");
    const std::size_t c = at(p).cluster;
    detach(p, c);
    patterns_.at(p).pattern.buckets = std::move(buckets);
    check_pattern(patterns_.at(p).pattern);
    attach(p, c);
  }

  void drop_empty() {
    for (std::size_t c = clusters_.size(); c-- > 0;)
      if (clusters_[c].empty()) drop_cluster(c);
  }

  /// Member lists of the non-empty clusters, sorted, for comparisons.
  std::vector<std::vector<PartitionKey>> groups() const {
    std::vector<std::vector<PartitionKey>> g;
    for (const auto& c : clusters_)
      if (!c.empty()) g.push_back(c.members);
    std::sort(g.begin(), g.end());
    return g;
  }

 private:
  struct Entry {
    AccessPattern pattern;
    std::size_t cluster = 0;
  };

  const Entry& at(PartitionKey p) const {
    const auto it = patterns_.find(p);
    if (it == patterns_.end()) throw Error("unknown partition");
    return it->second;
  }

  void attach(PartitionKey p, std::size_t c) {
    Cluster& cl = clusters_[c];
    fitness_ -= idle(c);
    cl.members.insert(std::upper_bound(cl.members.begin(), cl.members.end(), p), p);
    const auto& b = patterns_.at(p).pattern.buckets;
    for (std::size_t i = 0; i < buckets_; ++i) cl.aggregate[i] += b[i];
    refresh(cl);
    if (cl.peak > theta_max()) throw Error("cluster exceeds server capacity");
    fitness_ += idle(c);
  }

  void detach(PartitionKey p, std::size_t c) {
    Cluster& cl = clusters_[c];
    fitness_ -= idle(c);
    cl.members.erase(std::lower_bound(cl.members.begin(), cl.members.end(), p));
    if (cl.members.empty()) {
      std::fill(cl.aggregate.begin(), cl.aggregate.end(), 0.0);
    } else {
      const auto& b = patterns_.at(p).pattern.buckets;
      for (std::size_t i = 0; i < buckets_; ++i) cl.aggregate[i] -= b[i];
    }
    refresh(cl);
    fitness_ += idle(c);
  }

  static void refresh(Cluster& cl) {
    cl.peak = peak(cl.aggregate);
    cl.total = total(cl.aggregate);
  }

  void drop_cluster(std::size_t c) {
    clusters_.erase(clusters_.begin() + static_cast<std::ptrdiff_t>(c));
    for (auto& [key, e] : patterns_)
      if (e.cluster > c) --e.cluster;
  }

  TierLadder ladder_;
  std::size_t buckets_ = 0;
  std::vector<Cluster> clusters_;
  std::map<PartitionKey, Entry> patterns_;
  double fitness_ = 0.0;
};

/// Sum of idle times; throws when a cluster is infeasible.
inline double total_fitness(const Clustering& c) {
  if (!c.feasible()) throw Error("infeasible cluster present");
  return c.recompute_fitness();
}

// ---------------------------------------------------------------------------
// Agglomerative clustering.

struct AhrMerge {
  std::size_t slot_a = 0;  // surviving slot (the smaller one)
  std::size_t slot_b = 0;
  double flatness = 0.0;
};

struct AhrOptions {
  bool stop_when_exhausted = false;  // return early instead of throwing
};

struct AhrResult {
  Clustering clustering;
  std::vector<AhrMerge> merges;
  bool exhausted = false;
};

/// Starting from singletons (slot i holds patterns[i]), repeatedly merges
/// the feasible pair whose merged aggregate is flattest until n_clusters
/// remain. The merged cluster keeps the smaller slot; ties go to the
/// lexicographically smallest slot pair.
inline AhrResult ahr_cluster_detailed(std::span<const AccessPattern> patterns, std::size_t n_clusters,
                                      const TierLadder& ladder, const AhrOptions& options = {}) {
  const std::size_t n = patterns.size();
  if (n_clusters == 0) throw Error("cluster count must be positive");
  if (n < n_clusters) throw Error("fewer patterns than clusters");
  const std::size_t buckets = n ? patterns[0].buckets.size() : 0;
  const double theta = ladder.max_capacity();
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> agg(n);
  std::vector<std::vector<std::size_t>> members(n);
  std::vector<std::uint8_t> alive(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (patterns[i].buckets.size() != buckets) throw Error("mismatched bucket counts");
    check_pattern(patterns[i]);
    if (peak(patterns[i].buckets) > theta) throw Error("singleton exceeds server capacity");
    agg[i] = patterns[i].buckets;
    members[i] = {i};
  }

  std::vector<double> merged(buckets);
  auto pair_delta = [&](std::size_t i, std::size_t j) {
    double pk = 0.0;
    for (std::size_t t = 0; t < buckets; ++t) {
      merged[t] = agg[i][t] + agg[j][t];
      pk = std::max(pk, merged[t]);
    }
    return pk > theta ? inf : flatness(std::span<const double>(merged));
  };

  std::vector<double> delta(n * n, inf);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) delta[i * n + j] = delta[j * n + i] = pair_delta(i, j);

  // best[i]: partner of i minimizing (delta, min slot, max slot).
  std::vector<std::size_t> best(n, n);
  auto better = [&](std::size_t i, std::size_t j, std::size_t k) {  // is (i,j) before (i,k)?
    const double a = delta[i * n + j], b = delta[i * n + k];
    if (a != b) return a < b;
    return std::minmax(i, j) < std::minmax(i, k);
  };
  auto rescan = [&](std::size_t i) {
    best[i] = n;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && alive[j] && (best[i] == n || better(i, j, best[i]))) best[i] = j;
  };
  for (std::size_t i = 0; i < n; ++i) rescan(i);

  AhrResult res;
  std::size_t count = n;
  while (count > n_clusters) {
    std::size_t bi = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i] || best[i] == n) continue;
      if (bi == n) {
        bi = i;
        continue;
      }
      const double a = delta[i * n + best[i]], b = delta[bi * n + best[bi]];
      if (a < b || (a == b && std::minmax(i, best[i]) < std::minmax(bi, best[bi]))) bi = i;
    }
    if (bi == n || delta[bi * n + best[bi]] == inf) {
      if (options.stop_when_exhausted) {
        res.exhausted = true;
        break;
      }
      throw Error("capacity exhausted");
    }
    const std::size_t a = std::min(bi, best[bi]), b = std::max(bi, best[bi]);
    res.merges.push_back({a, b, delta[a * n + b]});
    for (std::size_t t = 0; t < buckets; ++t) agg[a][t] += agg[b][t];
    members[a].insert(members[a].end(), members[b].begin(), members[b].end());
    alive[b] = 0;
    agg[b].clear();
    --count;
    for (std::size_t j = 0; j < n; ++j) {
      delta[b * n + j] = delta[j * n + b] = inf;
      if (j != a && alive[j]) delta[a * n + j] = delta[j * n + a] = pair_delta(a, j);
    }
    rescan(a);
    for (std::size_t j = 0; j < n; ++j) {
      if (!alive[j] || j == a) continue;
      if (best[j] == a || best[j] == b) rescan(j);
      else if (better(j, a, best[j])) best[j] = a;
    }
  }

  res.clustering = Clustering(ladder, buckets);
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    const std::size_t c = res.clustering.add_cluster();
    for (std::size_t m : members[i]) res.clustering.insert(patterns[m], c);
  }
  return res;
}

inline Clustering ahr_cluster(std::span<const AccessPattern> patterns, std::size_t n_clusters,
                              const TierLadder& ladder) {
  return ahr_cluster_detailed(patterns, n_clusters, ladder).clustering;
}

// ---------------------------------------------------------------------------
// Tabu search.

struct TabuParams {
  std::size_t tabu_size = 50;
  /// Moves must change the flatness of both affected clusters by less than
  /// eta percent; nullopt admits every move.
  std::optional<double> eta = 10.0;
  std::size_t stop_s = 100;
  std::uint64_t seed = 1;
  std::size_t neighborhood = 0;  // fragments moved per iteration; 0 means all
  std::size_t max_iterations = 100000;
};

struct TabuMove {
  PartitionKey partition = 0;
  std::size_t from = 0;
  std::size_t to = 0;  // == cluster count means "open a new cluster"
  friend bool operator==(const TabuMove&, const TabuMove&) = default;
};

struct TabuTrace {
  std::vector<double> best_fitness;     // best-so-far T after every iteration
  std::vector<double> current_fitness;  // T of the current solution
  std::size_t iterations = 0;
  std::size_t aspirations = 0;
};

namespace detail {

// Relative flatness change; zero only when both sides are zero.
inline double relative_change(double before, double after) {
  const double base = std::max(before, after);
  return base == 0.0 ? 0.0 : std::abs(after - before) / base;
}

}  // namespace detail

/// Local search over single-partition moves from the current solution. A
/// move back to the cluster a partition just left is tabu unless it would
/// beat the best solution found. Stops after stop_s iterations without a
/// new best. Empty clusters are dropped from the result.
inline Clustering tabu_search(Clustering start, const TabuParams& params, TabuTrace* trace = nullptr) {
  if (!start.feasible()) throw Error("tabu search needs a feasible clustering");
  start.drop_empty();
  Clustering current = start;
  Clustering best = start;
  std::mt19937_64 rng(params.seed);
  std::deque<std::pair<PartitionKey, std::size_t>> tabu;  // (partition, forbidden target)
  const std::size_t buckets = current.buckets();
  std::vector<double> src(buckets), dst(buckets);
  std::size_t stale = 0;

  for (std::size_t iter = 0; iter < params.max_iterations && stale < params.stop_s; ++iter) {
    std::vector<PartitionKey> keys;
    for (const auto& c : current.clusters()) keys.insert(keys.end(), c.members.begin(), c.members.end());
    std::sort(keys.begin(), keys.end());
    if (keys.empty()) break;
    if (params.neighborhood > 0 && params.neighborhood < keys.size()) {
      std::shuffle(keys.begin(), keys.end(), rng);
      keys.resize(params.neighborhood);
    }

    std::optional<TabuMove> chosen;
    double chosen_t = std::numeric_limits<double>::infinity();
    bool chosen_aspiration = false;
    const std::size_t nc = current.size();
    for (PartitionKey p : keys) {
      const std::size_t from = current.cluster_of(p);
      if (nc == 1 && current.cluster(from).members.size() == 1) continue;
      std::uniform_int_distribution<std::size_t> pick(0, nc - 1);
      std::size_t to = pick(rng);
      if (to == from) to = nc;  // the freed draw opens a new cluster
      const auto& pb = current.pattern(p).buckets;
      const Cluster& cf = current.cluster(from);
      for (std::size_t t = 0; t < buckets; ++t) src[t] = cf.aggregate[t] - pb[t];
      const bool src_empty = cf.members.size() == 1;
      if (src_empty) std::fill(src.begin(), src.end(), 0.0);
      if (to < nc) {
        const Cluster& ct = current.cluster(to);
        for (std::size_t t = 0; t < buckets; ++t) dst[t] = ct.aggregate[t] + pb[t];
      } else {
        dst = pb;
      }
      if (!current.feasible_aggregate(dst)) continue;
      if (params.eta) {
        const double limit = *params.eta / 100.0;
        const double df = detail::relative_change(current.flatness_of(from), flatness(std::span<const double>(src)));
        const double before_to = to < nc ? current.flatness_of(to) : 0.0;
        const double dt = detail::relative_change(before_to, flatness(std::span<const double>(dst)));
        if (df >= limit || dt >= limit) continue;
      }
      const double t_new = current.fitness() - current.idle(from) - (to < nc ? current.idle(to) : 0.0) +
                           (src_empty ? 0.0 : current.cluster_idle(src)) + current.cluster_idle(dst);
      const bool is_tabu = std::find(tabu.begin(), tabu.end(), std::pair{p, to}) != tabu.end();
      const bool aspiration = is_tabu && t_new < best.fitness();
      if (is_tabu && !aspiration) continue;
      if (t_new < chosen_t) {
        chosen_t = t_new;
        chosen = TabuMove{p, from, to};
        chosen_aspiration = aspiration;
      }
    }

    bool improved = false;
    if (chosen) {
      std::size_t to = chosen->to;
      if (to == current.size()) to = current.add_cluster();
      current.move(chosen->partition, to);
      // Forbid returning to the origin cluster for a while.
      tabu.emplace_back(chosen->partition, chosen->from);
      if (tabu.size() > params.tabu_size) tabu.pop_front();
      if (chosen_aspiration && trace) ++trace->aspirations;
      if (current.cluster(chosen->from).empty()) {
        // Cluster indices above `from` shift down; keep tabu entries aligned.
        current.drop_empty();
        for (auto& [key, c] : tabu) {
          if (c == chosen->from) c = std::numeric_limits<std::size_t>::max();
          else if (c > chosen->from && c != std::numeric_limits<std::size_t>::max()) --c;
        }
      }
      if (current.fitness() < best.fitness()) {
        best = current;
        improved = true;
      }
    }
    stale = improved ? 0 : stale + 1;
    if (trace) {
      trace->best_fitness.push_back(best.fitness());
      trace->current_fitness.push_back(current.fitness());
      trace->iterations = iter + 1;
    }
  }
  best.drop_empty();
  return best;
}

// ---------------------------------------------------------------------------
// Incremental maintenance.

struct AddResult {
  std::size_t cluster = 0;
  bool created = false;
  std::size_t visited = 0;  // clusters examined
};

/// Groups clusters by spare capacity and starts the search at the group
/// matching p's peak, moving to larger groups until some cluster can take p
/// (flattest result wins). Opens a new cluster when none can.
inline AddResult add_partition(Clustering& clustering, AccessPattern p, std::size_t num_groups) {
  if (num_groups == 0) throw Error("group count must be positive");
  if (p.buckets.size() != clustering.buckets()) throw Error("mismatched bucket counts");
  const double theta = clustering.theta_max();
  const double need = peak(p.buckets);
  if (need > theta) throw Error("partition exceeds server capacity");
  auto group_of = [&](double capacity) {
    const auto g = static_cast<std::size_t>(std::floor(capacity / theta * static_cast<double>(num_groups)));
    return std::min(g, num_groups - 1);
  };
  std::vector<std::vector<std::size_t>> groups(num_groups);
  for (std::size_t c = 0; c < clustering.size(); ++c)
    groups[group_of(theta - clustering.cluster(c).peak)].push_back(c);

  AddResult res;
  std::vector<double> merged(clustering.buckets());
  for (std::size_t g = group_of(need); g < num_groups; ++g) {
    std::optional<std::size_t> pick;
    double pick_delta = 0.0;
    for (std::size_t c : groups[g]) {
      ++res.visited;
      const Cluster& cl = clustering.cluster(c);
      for (std::size_t t = 0; t < merged.size(); ++t) merged[t] = cl.aggregate[t] + p.buckets[t];
      if (!clustering.feasible_aggregate(merged)) continue;
      const double d = flatness(std::span<const double>(merged));
      if (!pick || d < pick_delta) {
        pick = c;
        pick_delta = d;
      }
    }
    if (pick) {
      res.cluster = *pick;
      clustering.insert(std::move(p), *pick);
      return res;
    }
  }
  res.cluster = clustering.add_cluster();
  res.created = true;
  clustering.insert(std::move(p), res.cluster);
  return res;
}

inline AccessPattern remove_partition(Clustering& clustering, PartitionKey id, bool keep_empty = false) {
  return clustering.erase(id, keep_empty);
}

/// Deletion followed by insertion of the new pattern.
inline AddResult update_partition(Clustering& clustering, AccessPattern p, std::size_t num_groups,
                                  bool keep_empty = false) {
  clustering.erase(p.partition, keep_empty);
  return add_partition(clustering, std::move(p), num_groups);
}

}  // namespace dtoss::ceps
