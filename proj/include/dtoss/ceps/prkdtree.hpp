#pragma once

// Point-region kd-tree over the extent box. Splits halve the box on
// alternating axes; the leaves are the small partitions.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "dtoss/error.hpp"
#include "dtoss/geometry.hpp"
#include "dtoss/local_index.hpp"

namespace dtoss::ceps {

using LeafId = std::uint32_t;

struct Rect {
  Point lo;
  Point hi;

  Point center() const { return {(lo.x + hi.x) / 2, (lo.y + hi.y) / 2}; }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct SmallPartition {
  LeafId id = 0;
  Rect rect;
  std::vector<ObjectRecord> objects;
};

/// Structural change to the leaf set.
struct LeafEvent {
  enum class Kind { added, removed, resized };
  Kind kind;
  LeafId leaf;
};

class PrKdTree {
 public:
  static constexpr int kMaxDepth = 64;

  PrKdTree(double extent, std::size_t max_objects) : extent_(extent), max_objects_(max_objects) {
    if (max_objects == 0) throw Error("max_objects must be at least 1");
    root_ = std::make_unique<Node>();
    root_->rect = {{0.0, 0.0}, {extent, extent}};
    root_->leaf = next_id_++;
    by_leaf_[root_->leaf] = root_.get();
  }

  double extent() const { return extent_; }
  std::size_t max_objects() const { return max_objects_; }
  std::size_t size() const { return size_; }
  std::size_t leaf_count() const { return by_leaf_.size(); }

  /// Adds an object; a leaf over capacity splits at its midpoint.
  std::vector<LeafEvent> insert(const ObjectRecord& o) {
    if (!in_extent(o.location, extent_)) throw Error("object outside extent");
    std::vector<LeafEvent> events;
    Node* n = descend(o.location);
    n->objects.push_back(o);
    ++size_;
    if (n->objects.size() > max_objects_ && n->depth < kMaxDepth) split(n, events);
    else events.push_back({LeafEvent::Kind::resized, n->leaf});
    return events;
  }

  /// Removes the object with this id at this location. Sibling leaves whose
  /// combined size drops to half the capacity merge back into their parent.
  std::vector<LeafEvent> erase(ObjectId id, Point location) {
    if (!in_extent(location, extent_)) throw Error("unknown object");
    Node* n = descend(location);
    auto it = std::find_if(n->objects.begin(), n->objects.end(),
                           [&](const ObjectRecord& r) { return r.id == id; });
    if (it == n->objects.end()) throw Error("unknown object");
    n->objects.erase(it);
    --size_;
    std::vector<LeafEvent> events;
    Node* parent = n->parent;
    bool merged = false;
    while (parent && parent->child[0]->is_leaf() && parent->child[1]->is_leaf() &&
           parent->child[0]->objects.size() + parent->child[1]->objects.size() <= max_objects_ / 2) {
      for (int s = 0; s < 2; ++s) {
        events.push_back({LeafEvent::Kind::removed, parent->child[s]->leaf});
        by_leaf_.erase(parent->child[s]->leaf);
      }
      parent->objects = std::move(parent->child[0]->objects);
      parent->objects.insert(parent->objects.end(), parent->child[1]->objects.begin(),
                             parent->child[1]->objects.end());
      parent->child[0].reset();
      parent->child[1].reset();
      parent->leaf = next_id_++;
      by_leaf_[parent->leaf] = parent;
      merged = true;
      n = parent;
      parent = n->parent;
    }
    if (merged) events.push_back({LeafEvent::Kind::added, n->leaf});
    else events.push_back({LeafEvent::Kind::resized, n->leaf});
    return events;
  }

  /// Leaves in depth-first order (lower half first).
  std::vector<SmallPartition> leaves() const {
    std::vector<SmallPartition> out;
    collect(root_.get(), out);
    return out;
  }

  SmallPartition leaf(LeafId id) const {
    const Node* n = find(id);
    if (!n) throw Error("unknown leaf");
    return {n->leaf, n->rect, n->objects};
  }

  std::size_t leaf_size(LeafId id) const {
    const Node* n = find(id);
    if (!n) throw Error("unknown leaf");
    return n->objects.size();
  }

  Rect leaf_rect(LeafId id) const {
    const Node* n = find(id);
    if (!n) throw Error("unknown leaf");
    return n->rect;
  }

  LeafId leaf_at(Point p) const { return const_cast<PrKdTree*>(this)->descend(p)->leaf; }

 private:
  struct Node {
    Rect rect;
    int depth = 0;
    Node* parent = nullptr;
    std::unique_ptr<Node> child[2];
    std::vector<ObjectRecord> objects;
    LeafId leaf = 0;

    bool is_leaf() const { return !child[0]; }
    int axis() const { return depth % 2; }
    double mid() const { return axis() == 0 ? (rect.lo.x + rect.hi.x) / 2 : (rect.lo.y + rect.hi.y) / 2; }
  };

  Node* descend(Point p) {
    Node* n = root_.get();
    while (!n->is_leaf()) {
      const double v = n->axis() == 0 ? p.x : p.y;
      n = n->child[v < n->mid() ? 0 : 1].get();
    }
    return n;
  }

  void split(Node* n, std::vector<LeafEvent>& events) {
    events.push_back({LeafEvent::Kind::removed, n->leaf});
    by_leaf_.erase(n->leaf);
    std::vector<Node*> pending{n};
    while (!pending.empty()) {
      Node* cur = pending.back();
      pending.pop_back();
      const double m = cur->mid();
      for (int s = 0; s < 2; ++s) {
        auto c = std::make_unique<Node>();
        c->depth = cur->depth + 1;
        c->parent = cur;
        c->rect = cur->rect;
        if (cur->axis() == 0) (s == 0 ? c->rect.hi.x : c->rect.lo.x) = m;
        else (s == 0 ? c->rect.hi.y : c->rect.lo.y) = m;
        cur->child[s] = std::move(c);
      }
      for (const auto& o : cur->objects) {
        const double v = cur->axis() == 0 ? o.location.x : o.location.y;
        cur->child[v < m ? 0 : 1]->objects.push_back(o);
      }
      cur->objects.clear();
      cur->objects.shrink_to_fit();
      for (int s = 0; s < 2; ++s) {
        Node* c = cur->child[s].get();
        if (c->objects.size() > max_objects_ && c->depth < kMaxDepth) {
          pending.push_back(c);
        } else {
          c->leaf = next_id_++;
          by_leaf_[c->leaf] = c;
          events.push_back({LeafEvent::Kind::added, c->leaf});
        }
      }
    }
  }

  static void collect(const Node* n, std::vector<SmallPartition>& out) {
    if (n->is_leaf()) {
      out.push_back({n->leaf, n->rect, n->objects});
      return;
    }
    collect(n->child[0].get(), out);
    collect(n->child[1].get(), out);
  }

  const Node* find(LeafId id) const {
    const auto it = by_leaf_.find(id);
    return it == by_leaf_.end() ? nullptr : it->second;
  }

  double extent_;
  std::size_t max_objects_;
  std::unique_ptr<Node> root_;
  std::size_t size_ = 0;
  LeafId next_id_ = 0;
  std::unordered_map<LeafId, Node*> by_leaf_;
};

/// Recursive midpoint splits of the extent box until every leaf holds at
/// most max_objects objects.
inline std::vector<SmallPartition> build_small_partitions(std::span<const ObjectRecord> objects,
                                                          std::size_t max_objects,
                                                          double extent = kDefaultExtent) {
  PrKdTree tree(extent, max_objects);
  for (const auto& o : objects) tree.insert(o);
  return tree.leaves();
}

}  // namespace dtoss::ceps
