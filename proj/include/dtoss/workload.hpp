#pragma once

// Seeded dataset and workload generators plus check-in ingestion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dtoss/ceps/patterns.hpp"
#include "dtoss/ceps/prkdtree.hpp"
#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"
#include "dtoss/local_index.hpp"

namespace dtoss {

inline std::vector<ObjectRecord> gen_uniform(std::size_t n, double extent, std::uint64_t seed) {
  if (n == 0) throw Error("object count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<ObjectRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng);
    out[i] = {i, {x, u(rng)}};
  }
  return out;
}

struct Rectangle {
  Point lo;
  Point hi;
};

struct HotspotSpec {
  std::size_t count = 10;
  double sigma = 2e7;
  /// Fixed size weights; when empty, weights are drawn from the bundled table.
  std::vector<double> weights;
  /// Admissible regions for centers; empty means the whole extent.
  std::vector<Rectangle> regions;
  double extent = kDefaultExtent;
};

/// Synthetic population weights normalized to [1, 100].
inline const std::vector<double>& hotspot_weight_table() {
  static const std::vector<double> table = {
      100, 71, 55, 44, 37, 31, 27, 24, 21, 19, 17, 15.5, 14, 12.8, 11.7, 10.8,
      10,  9.2, 8.5, 7.8, 7.2, 6.6, 6.1, 5.6, 5.1, 4.6, 4.1, 3.6, 3.1, 2.6, 2.1, 1};
  return table;
}

/// Draws from the sequential-binomial multinomial: counts[i] ~ n * w_i / sum(w).
inline std::vector<std::size_t> multinomial(std::size_t n, std::span<const double> weights, std::mt19937_64& rng) {
  std::vector<std::size_t> counts(weights.size(), 0);
  double remaining_w = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("weights must be non-negative");
    remaining_w += w;
  }
  std::size_t remaining = n;
  for (std::size_t i = 0; i < weights.size() && remaining > 0; ++i) {
    if (i + 1 == weights.size() || remaining_w <= 0.0) {
      counts[i] = remaining;
      break;
    }
    const double p = std::clamp(weights[i] / remaining_w, 0.0, 1.0);
    std::binomial_distribution<std::size_t> b(remaining, p);
    counts[i] = b(rng);
    remaining -= counts[i];
    remaining_w -= weights[i];
  }
  return counts;
}

struct HotspotDataset {
  std::vector<ObjectRecord> objects;
  std::vector<Point> centers;
  std::vector<double> weights;
  std::vector<std::size_t> counts;
};

/// Objects fall around seeded centers with a 2-d Gaussian offset; each
/// hotspot receives objects in proportion to its weight. Offsets leaving the
/// extent are redrawn.
inline HotspotDataset gen_hotspots_detailed(std::size_t n, const HotspotSpec& spec, std::uint64_t seed) {
  if (spec.count == 0) throw Error("hotspot count must be positive");
  if (!(spec.sigma > 0.0)) throw Error("sigma must be positive");
  std::mt19937_64 rng(seed);
  HotspotDataset d;
  const auto& table = hotspot_weight_table();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t h = 0; h < spec.count; ++h) {
    Rectangle r{{0, 0}, {spec.extent, spec.extent}};
    if (!spec.regions.empty()) r = spec.regions[static_cast<std::size_t>(u(rng) * double(spec.regions.size())) % spec.regions.size()];
    d.centers.push_back({r.lo.x + u(rng) * (r.hi.x - r.lo.x), r.lo.y + u(rng) * (r.hi.y - r.lo.y)});
    if (spec.weights.empty()) d.weights.push_back(table[static_cast<std::size_t>(u(rng) * double(table.size())) % table.size()]);
    else d.weights.push_back(spec.weights.at(h % spec.weights.size()));
  }
  d.counts = multinomial(n, d.weights, rng);
  std::normal_distribution<double> g(0.0, spec.sigma);
  d.objects.reserve(n);
  for (std::size_t h = 0; h < spec.count; ++h) {
    for (std::size_t i = 0; i < d.counts[h]; ++i) {
      Point p;
      do {
        p = {d.centers[h].x + g(rng), d.centers[h].y + g(rng)};
      } while (!in_extent(p, spec.extent));
      d.objects.push_back({d.objects.size(), p});
    }
  }
  return d;
}

inline std::vector<ObjectRecord> gen_hotspots(std::size_t n, const HotspotSpec& spec, std::uint64_t seed) {
  return gen_hotspots_detailed(n, spec, seed).objects;
}

/// Independent per-axis displacement drawn from [lo, hi], clamped to the extent.
inline void move_objects(std::span<ObjectRecord> objects, double lo, double hi, double extent,
                         std::uint64_t seed) {
  if (lo > hi) throw Error("empty displacement range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& o : objects) {
    const double dx = lo == hi ? lo : u(rng);
    const double dy = lo == hi ? lo : u(rng);
    o.location.x = std::clamp(o.location.x + dx, 0.0, extent);
    o.location.y = std::clamp(o.location.y + dy, 0.0, extent);
  }
}

/// Moves every repeated location (all but the lowest id) by a seeded jitter
/// of at most 1e-3 per axis, until all locations are distinct. The diagram
/// builders require distinct generators. Returns the number of moves.
inline std::size_t jitter_duplicates(std::span<ObjectRecord> objects, double extent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  std::vector<std::size_t> order(objects.size());
  std::size_t moved = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto key = [&](std::size_t i) { return std::pair{objects[i].location.x, objects[i].location.y}; };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return key(a) != key(b) ? key(a) < key(b) : objects[a].id < objects[b].id;
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
      Point& cur = objects[order[i]].location;
      if (cur == objects[order[i - 1]].location) {
        cur.x = std::clamp(cur.x + u(rng), 0.0, extent);
        cur.y = std::clamp(cur.y + u(rng), 0.0, extent);
        ++moved;
        changed = true;
      }
    }
  }
  return moved;
}

// ---------------------------------------------------------------------------
// Temporal patterns.

/// Integer cosine table with c(t + B/2) = -c(t) exactly.
inline std::vector<double> cosine_table(std::size_t buckets, double amplitude) {
  if (buckets < 2 || buckets % 2) throw Error("cosine patterns need an even bucket count of at least 2");
  std::vector<double> c(buckets);
  const std::size_t half = buckets / 2;
  for (std::size_t t = 0; t < half; ++t) {
    c[t] = std::round(amplitude * std::cos(2.0 * std::numbers::pi * double(t) / double(buckets)));
    c[t + half] = -c[t];
  }
  return c;
}

/// alpha_i(t) = base + amplitude * cos(2 pi (t + shift_i) / B), rounded and
/// clipped at zero. Phases are bucket shifts so that a shift of B/2 is an
/// exact antiphase.
inline std::vector<ceps::AccessPattern> gen_cosine_patterns(std::span<const std::size_t> shifts,
                                                            std::size_t buckets, double amplitude,
                                                            double base) {
  const auto table = cosine_table(buckets, amplitude);
  std::vector<ceps::AccessPattern> out;
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    ceps::AccessPattern p{static_cast<ceps::PartitionKey>(i), std::vector<double>(buckets)};
    for (std::size_t t = 0; t < buckets; ++t)
      p.buckets[t] = std::max(0.0, std::round(base) + table[(t + shifts[i]) % buckets]);
    out.push_back(std::move(p));
  }
  return out;
}

/// Two-timezone leaf model: leaves centered west of x = extent/2 peak at
/// bucket 0, the others half a day later. Mean load is per_object accesses
/// per object per bucket.
inline std::function<std::vector<double>(const ceps::Rect&, std::size_t)> timezone_pattern_model(
    double extent, std::size_t buckets, double per_object) {
  const auto table = cosine_table(buckets, 1000.0);
  return [=](const ceps::Rect& r, std::size_t count) {
    const std::size_t shift = r.center().x < extent / 2 ? 0 : buckets / 2;
    const double load = double(count) * per_object;
    std::vector<double> out(buckets);
    for (std::size_t t = 0; t < buckets; ++t) out[t] = load * (1000.0 + table[(t + shift) % buckets]) / 1000.0;
    return out;
  };
}

/// Alternating 0 and B/2 shifts.
inline std::vector<std::size_t> antiphase_shifts(std::size_t p_count, std::size_t buckets) {
  std::vector<std::size_t> s(p_count);
  for (std::size_t i = 0; i < p_count; ++i) s[i] = i % 2 ? buckets / 2 : 0;
  return s;
}

inline std::vector<std::size_t> random_shifts(std::size_t p_count, std::size_t buckets, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> u(0, buckets - 1);
  std::vector<std::size_t> s(p_count);
  for (auto& v : s) v = u(rng);
  return s;
}

/// total_accesses spread over (partition, bucket) cells with weight
/// zipf(partition rank) * zipf(bucket rank); both rankings are seeded
/// permutations. sf = 0 is uniform.
inline std::vector<ceps::AccessPattern> gen_zipf_workload(std::size_t p_count, std::size_t buckets, double sf,
                                                          std::size_t total_accesses, std::uint64_t seed) {
  if (sf < 0.0) throw Error("skew factor must be non-negative");
  if (p_count == 0 || buckets == 0) throw Error("empty workload shape");
  std::mt19937_64 rng(seed);
  auto ranked = [&](std::size_t n) {
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) rank[i] = i;
    std::shuffle(rank.begin(), rank.end(), rng);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(double(rank[i] + 1), sf);
    return w;
  };
  const auto pw = ranked(p_count);
  const auto bw = ranked(buckets);
  std::vector<double> cell(p_count * buckets);
  for (std::size_t p = 0; p < p_count; ++p)
    for (std::size_t t = 0; t < buckets; ++t) cell[p * buckets + t] = pw[p] * bw[t];
  const auto counts = multinomial(total_accesses, cell, rng);
  std::vector<ceps::AccessPattern> out(p_count);
  for (std::size_t p = 0; p < p_count; ++p) {
    out[p].partition = static_cast<ceps::PartitionKey>(p);
    out[p].buckets.resize(buckets);
    for (std::size_t t = 0; t < buckets; ++t) out[p].buckets[t] = double(counts[p * buckets + t]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Check-ins.

struct CheckinEvent {
  std::uint64_t user_id = 0;
  std::int64_t timestamp = 0;  // seconds since the Unix epoch, UTC
  double latitude = 0.0;
  double longitude = 0.0;
  std::uint64_t location_id = 0;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// YYYY-MM-DDTHH:MM:SS with optional fraction and Z or +hh:mm / -hh:mm.
inline bool parse_iso8601(const std::string& s, std::int64_t& out) {
  int y, mo, d, h, mi;
  double sec;
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%*1[T ]%2d:%2d:%lf%n", &y, &mo, &d, &h, &mi, &sec, &consumed) != 6)
    return false;
  std::string rest = s.substr(static_cast<std::size_t>(consumed));
  std::int64_t offset = 0;
  if (rest == "Z" || rest.empty()) {
  } else if ((rest[0] == '+' || rest[0] == '-') && rest.size() == 6 && rest[3] == ':') {
    const int oh = std::stoi(rest.substr(1, 2)), om = std::stoi(rest.substr(4, 2));
    offset = (rest[0] == '+' ? 1 : -1) * (oh * 3600 + om * 60);
  } else {
    return false;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec < 0 || sec >= 61) return false;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  out = std::int64_t(days) * 86400 + h * 3600 + mi * 60 + static_cast<std::int64_t>(sec) - offset;
  return true;
}

}  // namespace detail

/// Parses `user_id, timestamp, latitude, longitude, location_id` lines. A
/// leading header line starting with "user_id" and blank lines are skipped.
inline std::vector<CheckinEvent> parse_checkins(std::istream& in) {
  std::vector<CheckinEvent> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (lineno == 1 && t.rfind("user_id", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(detail::trim(cell));
    auto fail = [&] { return Error("malformed check-in at line " + std::to_string(lineno)); };
    if (f.size() != 5) throw fail();
    CheckinEvent e;
    try {
      std::size_t pos = 0;
      e.user_id = std::stoull(f[0], &pos);
      if (pos != f[0].size()) throw fail();
      e.latitude = std::stod(f[2], &pos);
      if (pos != f[2].size()) throw fail();
      e.longitude = std::stod(f[3], &pos);
      if (pos != f[3].size()) throw fail();
      e.location_id = std::stoull(f[4], &pos);
      if (pos != f[4].size()) throw fail();
    } catch (const std::logic_error&) {
      throw fail();
    }
    if (!detail::parse_iso8601(f[1], e.timestamp)) throw fail();
    if (e.latitude < -90 || e.latitude > 90 || e.longitude < -180 || e.longitude > 180) throw fail();
    out.push_back(e);
  }
  return out;
}

inline std::vector<CheckinEvent> load_checkins(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_checkins(in);
}

/// Time-of-day bucket of a UTC timestamp.
inline std::size_t checkin_bucket(std::int64_t timestamp, std::size_t buckets) {
  const std::int64_t day = 86400;
  const std::int64_t tod = ((timestamp % day) + day) % day;
  return static_cast<std::size_t>(tod * std::int64_t(buckets) / day);
}

/// Per-bucket counts; every event adds `amplification`.
inline std::vector<double> bucketize_checkins(std::span<const CheckinEvent> events, std::size_t buckets,
                                              std::size_t amplification = 1) {
  if (buckets == 0) throw Error("bucket count must be positive");
  std::vector<double> counts(buckets, 0.0);
  for (const auto& e : events) counts[checkin_bucket(e.timestamp, buckets)] += double(amplification);
  return counts;
}

/// Longitude/latitude mapped linearly onto the index square.
inline Point checkin_location(const CheckinEvent& e, double extent) {
  return {std::clamp((e.longitude + 180.0) / 360.0 * extent, 0.0, extent),
          std::clamp((e.latitude + 90.0) / 180.0 * extent, 0.0, extent)};
}

}  // namespace dtoss
