#pragma once

// Static 2-d tree for exact nearest-site lookups. Ties resolve to the lowest
// site index, which is what every mapping function in the library requires.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"

namespace dtoss {

class NearestSite {
 public:
  NearestSite() = default;

  explicit NearestSite(std::span<const Point> sites) : sites_(sites.begin(), sites.end()) {
    order_.resize(sites_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(sites_.size());
    if (!order_.empty()) root_ = build(0, order_.size(), 0);
  }

  std::size_t size() const { return sites_.size(); }
  std::span<const Point> sites() const { return sites_; }

  /// Index of the nearest site; lowest index among exact ties.
  std::uint32_t nearest(Point q) const {
    if (sites_.empty()) throw Error("nearest site query on empty set");
    Best best;
    search(root_, q, best);
    return best.index;
  }

 private:
  struct Node {
    std::uint32_t site;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis;
  };
  struct Best {
    double d2 = std::numeric_limits<double>::infinity();
    std::uint32_t index = std::numeric_limits<std::uint32_t>::max();
  };

  std::int32_t build(std::size_t lo, std::size_t hi, int depth) {
    if (lo >= hi) return -1;
    const std::uint8_t axis = depth % 2;
    const std::size_t mid = lo + (hi - lo) / 2;
    auto key = [&](std::uint32_t i) { return axis == 0 ? sites_[i].x : sites_[i].y; };
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return key(a) != key(b) ? key(a) < key(b) : a < b;
                     });
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({order_[mid], -1, -1, axis});
    const std::int32_t l = build(lo, mid, depth + 1);
    const std::int32_t r = build(mid + 1, hi, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  void search(std::int32_t id, Point q, Best& best) const {
    if (id < 0) return;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const Point s = sites_[n.site];
    const double d2 = dist2(q, s);
    if (d2 < best.d2 || (d2 == best.d2 && n.site < best.index)) best = {d2, n.site};
    const double delta = n.axis == 0 ? q.x - s.x : q.y - s.y;
    const std::int32_t near = delta < 0 ? n.left : n.right;
    const std::int32_t far = delta < 0 ? n.right : n.left;
    search(near, q, best);
    // <= keeps equal-distance sites on the far side reachable for tie-breaks.
    if (delta * delta <= best.d2) search(far, q, best);
  }

  std::vector<Point> sites_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace dtoss
