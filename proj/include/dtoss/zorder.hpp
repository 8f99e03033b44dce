#pragma once

// Morton (Z-order) codes over a 32x32-bit grid, a z-sorted object sequence,
// and circle range scans that skip out-of-box runs with BIGMIN.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"

namespace dtoss {

struct ZValue {
  std::uint64_t code = 0;

  friend auto operator<=>(const ZValue&, const ZValue&) = default;
};

namespace detail {

inline std::uint64_t spread_bits(std::uint32_t v) {
  std::uint64_t x = v;
  x = (x | (x << 16)) & 0x0000FFFF0000FFFFull;
  x = (x | (x << 8)) & 0x00FF00FF00FF00FFull;
  x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0Full;
  x = (x | (x << 2)) & 0x3333333333333333ull;
  x = (x | (x << 1)) & 0x5555555555555555ull;
  return x;
}

inline std::uint32_t compact_bits(std::uint64_t x) {
  x &= 0x5555555555555555ull;
  x = (x | (x >> 1)) & 0x3333333333333333ull;
  x = (x | (x >> 2)) & 0x0F0F0F0F0F0F0F0Full;
  x = (x | (x >> 4)) & 0x00FF00FF00FF00FFull;
  x = (x | (x >> 8)) & 0x0000FFFF0000FFFFull;
  x = (x | (x >> 16)) & 0x00000000FFFFFFFFull;
  return static_cast<std::uint32_t>(x);
}

inline constexpr std::uint64_t kEvenBits = 0x5555555555555555ull;
inline constexpr std::uint64_t kOddBits = 0xAAAAAAAAAAAAAAAAull;

}  // namespace detail

/// x occupies the even bit positions, y the odd ones.
inline ZValue z_interleave(std::uint32_t x, std::uint32_t y) {
  return {detail::spread_bits(x) | (detail::spread_bits(y) << 1)};
}

inline std::pair<std::uint32_t, std::uint32_t> z_deinterleave(ZValue z) {
  return {detail::compact_bits(z.code), detail::compact_bits(z.code >> 1)};
}

/// Maps [0, extent] monotonically onto the 32-bit grid.
class ZQuantizer {
 public:
  explicit ZQuantizer(double extent) : extent_(extent), scale_(4294967295.0 / extent) {
    if (!(extent > 0.0)) throw Error("extent must be positive");
  }

  double extent() const { return extent_; }

  std::uint32_t quantize(double v) const {
    const double q = std::floor(v * scale_);
    if (q <= 0.0) return 0;
    if (q >= 4294967295.0) return 0xFFFFFFFFu;
    return static_cast<std::uint32_t>(q);
  }

  ZValue encode(Point p) const {
    if (!in_extent(p, extent_)) throw Error("coordinate outside extent");
    return z_interleave(quantize(p.x), quantize(p.y));
  }

 private:
  double extent_;
  double scale_;
};

inline ZValue z_encode(Point p, double extent) { return ZQuantizer(extent).encode(p); }

/// Smallest code > `z` that lies inside the box spanned by [zmin, zmax]
/// (Tropf & Herzog). `z` must be within [zmin, zmax] and outside the box.
inline std::uint64_t z_bigmin(std::uint64_t z, std::uint64_t zmin, std::uint64_t zmax) {
  std::uint64_t bigmin = 0;
  for (int pos = 63; pos >= 0; --pos) {
    const std::uint64_t bit = 1ull << pos;
    const std::uint64_t dim = (pos % 2 == 0) ? detail::kEvenBits : detail::kOddBits;
    const std::uint64_t lower = dim & (bit - 1);
    const int code = ((z & bit) ? 4 : 0) | ((zmin & bit) ? 2 : 0) | ((zmax & bit) ? 1 : 0);
    switch (code) {
      case 0b000:
      case 0b111:
        break;
      case 0b001:
        bigmin = (zmin | bit) & ~lower;
        zmax = (zmax & ~bit) | lower;
        break;
      case 0b011:
        return zmin;
      case 0b100:
        return bigmin;
      case 0b101:
        zmin = (zmin | bit) & ~lower;
        break;
      default:
        // 010 / 110 imply zmin > zmax on this dimension.
        return bigmin;
    }
  }
  return bigmin;
}

/// Objects sorted by Z-value (ties by input index). Holds its own copy of the
/// points so scans stay cache-local.
class ZOrderIndex {
 public:
  struct Entry {
    std::uint64_t z;
    Point p;
    std::uint32_t index;  // position in the caller's input span
  };

  ZOrderIndex() : quantizer_(kDefaultExtent) {}

  ZOrderIndex(std::span<const Point> points, double extent) : quantizer_(extent) {
    entries_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      entries_.push_back({quantizer_.encode(points[i]).code, points[i],
                          static_cast<std::uint32_t>(i)});
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      return a.z != b.z ? a.z < b.z : a.index < b.index;
    });
    position_.resize(entries_.size());
    for (std::size_t pos = 0; pos < entries_.size(); ++pos) position_[entries_[pos].index] = pos;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& operator[](std::size_t pos) const { return entries_[pos]; }
  std::span<const Entry> entries() const { return entries_; }
  /// Sorted position of input index i.
  std::size_t position_of(std::uint32_t i) const { return position_[i]; }
  const ZQuantizer& quantizer() const { return quantizer_; }

 private:
  ZQuantizer quantizer_;
  std::vector<Entry> entries_;
  std::vector<std::size_t> position_;
};

/// Sorted positions of the k predecessors and k successors of `pos`,
/// truncated at the sequence ends.
inline std::vector<std::size_t> z_neighbors(std::size_t n, std::size_t pos, std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  std::vector<std::size_t> out;
  const std::size_t lo = pos >= k ? pos - k : 0;
  const std::size_t hi = std::min(n == 0 ? 0 : n - 1, pos + k);
  for (std::size_t i = lo; i <= hi && i < n; ++i)
    if (i != pos) out.push_back(i);
  return out;
}

namespace detail {

struct ZBox {
  std::uint32_t x0, y0, x1, y1;
  std::uint64_t zmin, zmax;

  bool contains(std::uint64_t z) const {
    const auto [x, y] = z_deinterleave(ZValue{z});
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

inline ZBox circle_zbox(const ZQuantizer& q, const Circle& c) {
  const double e = q.extent();
  ZBox b{};
  b.x0 = q.quantize(std::clamp(c.center.x - c.radius, 0.0, e));
  b.y0 = q.quantize(std::clamp(c.center.y - c.radius, 0.0, e));
  b.x1 = q.quantize(std::clamp(c.center.x + c.radius, 0.0, e));
  b.y1 = q.quantize(std::clamp(c.center.y + c.radius, 0.0, e));
  b.zmin = z_interleave(b.x0, b.y0).code;
  b.zmax = z_interleave(b.x1, b.y1).code;
  return b;
}

inline bool in_closed_circle(const Circle& c, Point p) {
  return dist2(c.center, p) <= c.radius * c.radius;
}

}  // namespace detail

/// Visits every entry whose point lies in the closed circle. Runs of codes
/// outside the circle's bounding box are skipped with BIGMIN.
template <typename Visit>
void z_region_visit(const ZOrderIndex& index, const Circle& region, Visit&& visit) {
  if (index.empty() || region.radius < 0.0) return;
  const detail::ZBox box = detail::circle_zbox(index.quantizer(), region);
  const auto entries = index.entries();
  auto by_z = [](const ZOrderIndex::Entry& e, std::uint64_t z) { return e.z < z; };
  auto it = std::lower_bound(entries.begin(), entries.end(), box.zmin, by_z);
  int misses = 0;
  while (it != entries.end() && it->z <= box.zmax) {
    if (box.contains(it->z)) {
      misses = 0;
      if (detail::in_closed_circle(region, it->p)) visit(*it);
      ++it;
      continue;
    }
    // A few linear steps are cheaper than a BIGMIN jump on dense runs.
    if (++misses < 4) {
      ++it;
      continue;
    }
    misses = 0;
    const std::uint64_t next = z_bigmin(it->z, box.zmin, box.zmax);
    if (next <= it->z) break;
    it = std::lower_bound(it, entries.end(), next, by_z);
  }
}

/// Input indices of every object inside the closed circle (sorted).
inline std::vector<std::uint32_t> z_region_scan(const ZOrderIndex& index, const Circle& region) {
  std::vector<std::uint32_t> out;
  z_region_visit(index, region, [&](const ZOrderIndex::Entry& e) { out.push_back(e.index); });
  std::sort(out.begin(), out.end());
  return out;
}

/// Reference path: filtered linear scan of [zmin, zmax] without skipping.
inline std::vector<std::uint32_t> z_region_scan_filtered(const ZOrderIndex& index,
                                                         const Circle& region) {
  std::vector<std::uint32_t> out;
  if (index.empty() || region.radius < 0.0) return out;
  const detail::ZBox box = detail::circle_zbox(index.quantizer(), region);
  for (const auto& e : index.entries()) {
    if (e.z < box.zmin || e.z > box.zmax) continue;
    if (box.contains(e.z) && detail::in_closed_circle(region, e.p)) out.push_back(e.index);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dtoss
