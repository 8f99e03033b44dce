#pragma once

// Access patterns, the server tier ladder and the per-cluster metrics:
// flatness (summed absolute slope of the aggregate) and idle time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dtoss/error.hpp"

namespace dtoss::ceps {

using PartitionKey = std::uint32_t;

inline constexpr std::size_t kDefaultBuckets = 288;  // one day at 5-minute resolution

struct AccessPattern {
  PartitionKey partition = 0;
  std::vector<double> buckets;  // non-negative access counts
};

inline void check_pattern(const AccessPattern& p) {
  for (double v : p.buckets)
    if (!(v >= 0.0)) throw Error("access counts must be non-negative");
}

/// Sum of |a(t+1) - a(t)| over adjacent buckets.
inline double flatness(std::span<const double> aggregate) {
  double d = 0.0;
  for (std::size_t t = 0; t + 1 < aggregate.size(); ++t) d += std::abs(aggregate[t + 1] - aggregate[t]);
  return d;
}

inline std::vector<double> aggregate(std::span<const AccessPattern> patterns) {
  if (patterns.empty()) return {};
  std::vector<double> sum(patterns[0].buckets.size(), 0.0);
  for (const auto& p : patterns) {
    if (p.buckets.size() != sum.size()) throw Error("mismatched bucket counts");
    for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += p.buckets[t];
  }
  return sum;
}

inline double flatness(std::span<const AccessPattern> patterns) {
  if (patterns.empty()) throw Error("flatness of an empty set");
  const auto sum = aggregate(patterns);
  return flatness(std::span<const double>(sum));
}

inline double peak(std::span<const double> series) {
  double m = 0.0;
  for (double v : series) m = std::max(m, v);
  return m;
}

inline double total(std::span<const double> series) {
  double s = 0.0;
  for (double v : series) s += v;
  return s;
}

/// theta * B minus the accesses served; theta is a per-bucket capacity.
inline double idle_time(std::span<const double> aggregate, double theta, std::size_t buckets) {
  return theta * static_cast<double>(buckets) - total(aggregate);
}

struct ServerTier {
  std::uint32_t id = 0;
  double capacity = 0.0;      // accesses per bucket
  double cost_per_hour = 0.0;
};

/// Tiers sorted by capacity; each one doubles the previous.
class TierLadder {
 public:
  TierLadder() = default;
  explicit TierLadder(std::vector<ServerTier> tiers) : tiers_(std::move(tiers)) {
    if (tiers_.empty()) throw Error("tier ladder is empty");
    for (std::size_t i = 1; i < tiers_.size(); ++i)
      if (!(tiers_[i].capacity > tiers_[i - 1].capacity)) throw Error("tier capacities must increase");
  }

  static TierLadder doubling(double base_capacity, double base_cost, std::size_t count = 5) {
    if (!(base_capacity > 0.0) || count == 0) throw Error("invalid tier ladder");
    std::vector<ServerTier> t;
    double cap = base_capacity, cost = base_cost;
    for (std::uint32_t i = 0; i < count; ++i, cap *= 2.0, cost *= 2.0) t.push_back({i, cap, cost});
    return TierLadder(std::move(t));
  }

  std::span<const ServerTier> tiers() const { return tiers_; }
  const ServerTier& tier(std::size_t i) const { return tiers_.at(i); }
  std::size_t size() const { return tiers_.size(); }
  double max_capacity() const { return tiers_.empty() ? 0.0 : tiers_.back().capacity; }

  /// Cheapest tier whose capacity covers `load`.
  std::optional<std::size_t> covering(double load) const {
    for (std::size_t i = 0; i < tiers_.size(); ++i)
      if (load <= tiers_[i].capacity) return i;
    return std::nullopt;
  }

  std::size_t covering_or_throw(double load) const {
    const auto t = covering(load);
    if (!t) throw Error("peak exceeds largest tier");
    return *t;
  }

 private:
  std::vector<ServerTier> tiers_;
};

}  // namespace dtoss::ceps
