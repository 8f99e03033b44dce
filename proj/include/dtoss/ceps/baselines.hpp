#pragma once

// Server cost accounting, the full CEPS pipeline and the grid baselines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dtoss/ceps/clustering.hpp"
#include "dtoss/ceps/patterns.hpp"
#include "dtoss/ceps/prkdtree.hpp"
#include "dtoss/error.hpp"

namespace dtoss::ceps {

struct ServerUse {
  std::size_t server = 0;
  std::size_t tier = 0;
  double peak = 0.0;
  double cost = 0.0;
  std::size_t partitions = 0;
};

struct CostReport {
  std::string method;
  double horizon_hours = 24.0;
  double cost = 0.0;
  std::vector<ServerUse> servers;
};

/// Time-based pricing: each non-empty cluster rents its cheapest covering
/// tier for the whole horizon.
inline CostReport cost_report(const Clustering& clustering, double horizon_hours, std::string method = "ceps") {
  CostReport rep;
  rep.method = std::move(method);
  rep.horizon_hours = horizon_hours;
  for (std::size_t c = 0; c < clustering.size(); ++c) {
    const Cluster& cl = clustering.cluster(c);
    if (cl.empty()) continue;
    const std::size_t tier = clustering.ladder().covering_or_throw(cl.peak);
    const double cost = clustering.ladder().tier(tier).cost_per_hour * horizon_hours;
    rep.servers.push_back({rep.servers.size(), tier, cl.peak, cost, cl.members.size()});
    rep.cost += cost;
  }
  return rep;
}

struct CepsOptions {
  bool tabu = true;  // CEPS+ when set, CEPS- otherwise
  TabuParams tabu_params;
};

/// Agglomerative clustering until no feasible merge is left, optionally
/// refined by tabu search.
inline Clustering ceps_plan(std::span<const AccessPattern> patterns, const TierLadder& ladder,
                            const CepsOptions& options = {}) {
  if (patterns.empty()) return Clustering(ladder, 0);
  AhrOptions ahr;
  ahr.stop_when_exhausted = true;
  Clustering c = ahr_cluster_detailed(patterns, 1, ladder, ahr).clustering;
  if (options.tabu) c = tabu_search(std::move(c), options.tabu_params);
  return c;
}

/// A small partition's pattern together with where it lives.
struct PlacedPattern {
  AccessPattern pattern;
  Point location;         // representative point (leaf center)
  std::size_t objects = 0;
};

namespace detail {

inline void rent(CostReport& rep, const TierLadder& ladder, std::span<const double> agg,
                 std::size_t partitions) {
  const double pk = peak(agg);
  // A cell hotter than the largest tier is spread evenly over several servers.
  const auto copies = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(pk / ladder.max_capacity())));
  const double share = pk / static_cast<double>(copies);
  const std::size_t tier = ladder.covering_or_throw(share);
  for (std::size_t k = 0; k < copies; ++k) {
    const double cost = ladder.tier(tier).cost_per_hour * rep.horizon_hours;
    rep.servers.push_back({rep.servers.size(), tier, share, cost, partitions});
    rep.cost += cost;
  }
}

inline std::size_t grid_side(std::size_t total_objects, std::size_t grid_capacity) {
  if (grid_capacity == 0) throw Error("grid capacity must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(
                                      std::sqrt(double(total_objects) / double(grid_capacity)))));
}

inline std::vector<std::vector<std::size_t>> grid_cells(std::span<const PlacedPattern> parts, double extent,
                                                        std::size_t grid_capacity) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.objects;
  const std::size_t g = grid_side(total, grid_capacity);
  std::vector<std::vector<std::size_t>> cells(g * g);
  auto cell = [&](double v) {
    return std::min(g - 1, static_cast<std::size_t>(std::floor(v / extent * static_cast<double>(g))));
  };
  for (std::size_t i = 0; i < parts.size(); ++i)
    cells[cell(parts[i].location.y) * g + cell(parts[i].location.x)].push_back(i);
  return cells;
}

inline std::vector<double> sum_patterns(std::span<const PlacedPattern> parts, std::span<const std::size_t> idx,
                                        std::size_t buckets) {
  std::vector<double> agg(buckets, 0.0);
  for (std::size_t i : idx)
    for (std::size_t t = 0; t < buckets; ++t) agg[t] += parts[i].pattern.buckets[t];
  return agg;
}

}  // namespace detail

struct GridParams {
  double extent = kDefaultExtent;
  std::size_t grid_capacity = 100000;  // objects per grid cell
  double horizon_hours = 24.0;
  std::uint64_t seed = 1;
};

/// GP: one grid cell per server.
inline CostReport baseline_gp(std::span<const PlacedPattern> parts, const TierLadder& ladder,
                              const GridParams& params) {
  CostReport rep;
  rep.method = "gp";
  rep.horizon_hours = params.horizon_hours;
  if (parts.empty()) return rep;
  const std::size_t buckets = parts[0].pattern.buckets.size();
  for (const auto& cell : detail::grid_cells(parts, params.extent, params.grid_capacity)) {
    if (cell.empty()) continue;
    detail::rent(rep, ladder, detail::sum_patterns(parts, cell, buckets), cell.size());
  }
  return rep;
}

/// GP-R: the granular cells are dealt to servers in random order, first fit.
inline CostReport baseline_gp_r(std::span<const PlacedPattern> parts, const TierLadder& ladder,
                                const GridParams& params) {
  CostReport rep;
  rep.method = "gp_r";
  rep.horizon_hours = params.horizon_hours;
  if (parts.empty()) return rep;
  const std::size_t buckets = parts[0].pattern.buckets.size();
  std::vector<std::size_t> order(parts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(params.seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<double>> servers;
  std::vector<std::size_t> counts;
  for (std::size_t i : order) {
    const auto& b = parts[i].pattern.buckets;
    bool placed = false;
    for (std::size_t s = 0; s < servers.size() && !placed; ++s) {
      double pk = 0.0;
      for (std::size_t t = 0; t < buckets; ++t) pk = std::max(pk, servers[s][t] + b[t]);
      if (pk <= ladder.max_capacity()) {
        for (std::size_t t = 0; t < buckets; ++t) servers[s][t] += b[t];
        ++counts[s];
        placed = true;
      }
    }
    if (!placed) {
      servers.push_back(b);
      counts.push_back(1);
    }
  }
  for (std::size_t s = 0; s < servers.size(); ++s) detail::rent(rep, ladder, servers[s], counts[s]);
  return rep;
}

struct AasParams {
  std::size_t downgrade_window = 6;  // buckets of sustained low use (30 minutes)
  double low_utilization = 0.5;
};

/// GP-AAS: GP cells under a reactive scaling policy, billed per bucket.
/// A server below half utilization for the whole window drops one tier; a
/// saturated server sheds its excess onto a new lowest-tier server; two
/// servers of a cell merge when one can absorb both.
inline CostReport baseline_gp_aas(std::span<const PlacedPattern> parts, const TierLadder& ladder,
                                  const GridParams& params, const AasParams& aas = {}) {
  CostReport rep;
  rep.method = "gp_aas";
  rep.horizon_hours = params.horizon_hours;
  if (parts.empty()) return rep;
  const std::size_t buckets = parts[0].pattern.buckets.size();
  const double bucket_hours = params.horizon_hours / static_cast<double>(buckets);
  struct Server {
    std::size_t tier;
    double share;  // fraction of the cell's load
    std::size_t low_streak = 0;
    double peak = 0.0;
  };
  std::size_t server_count = 0;
  for (const auto& cell : detail::grid_cells(parts, params.extent, params.grid_capacity)) {
    if (cell.empty()) continue;
    const auto load = detail::sum_patterns(parts, cell, buckets);
    std::vector<Server> servers{{ladder.covering(load[0]).value_or(ladder.size() - 1), 1.0}};
    double cell_cost = 0.0, cell_peak = 0.0;
    for (std::size_t t = 0; t < buckets; ++t) {
      for (std::size_t s = 0; s < servers.size(); ++s) {
        const double cap = ladder.tier(servers[s].tier).capacity;
        const double mine = servers[s].share * load[t];
        if (mine > cap && load[t] > 0.0) {
          // Shed the excess in lowest-tier chunks.
          double excess = mine - cap;
          servers[s].share = cap / load[t];
          while (excess > 0.0) {
            const double chunk = std::min(excess, ladder.tier(0).capacity);
            servers.push_back({0, chunk / load[t]});
            excess -= chunk;
          }
        }
      }
      for (auto& s : servers) {
        const double cap = ladder.tier(s.tier).capacity;
        const double mine = s.share * load[t];
        s.peak = std::max(s.peak, mine);
        s.low_streak = mine < aas.low_utilization * cap ? s.low_streak + 1 : 0;
        if (s.tier > 0 && s.low_streak >= aas.downgrade_window &&
            mine <= ladder.tier(s.tier - 1).capacity) {
          --s.tier;
          s.low_streak = 0;
        }
      }
      for (std::size_t a = 0; a < servers.size(); ++a) {
        for (std::size_t b = a + 1; b < servers.size();) {
          const std::size_t big = servers[a].tier >= servers[b].tier ? a : b;
          if ((servers[a].share + servers[b].share) * load[t] <= ladder.tier(servers[big].tier).capacity) {
            servers[a].tier = servers[big].tier;
            servers[a].share += servers[b].share;
            servers[a].low_streak = 0;
            servers.erase(servers.begin() + static_cast<std::ptrdiff_t>(b));
          } else {
            ++b;
          }
        }
      }
      for (const auto& s : servers) cell_cost += ladder.tier(s.tier).cost_per_hour * bucket_hours;
      cell_peak = std::max(cell_peak, load[t]);
    }
    rep.servers.push_back({server_count++, servers.front().tier, cell_peak, cell_cost, cell.size()});
    rep.cost += cell_cost;
  }
  return rep;
}

/// Places every leaf at its rectangle center.
inline std::vector<PlacedPattern> place_patterns(std::span<const SmallPartition> leaves,
                                                 std::span<const AccessPattern> patterns) {
  if (leaves.size() != patterns.size()) throw Error("one pattern per partition required");
  std::vector<PlacedPattern> out;
  for (std::size_t i = 0; i < leaves.size(); ++i)
    out.push_back({patterns[i], leaves[i].rect.center(), leaves[i].objects.size()});
  return out;
}

}  // namespace dtoss::ceps
