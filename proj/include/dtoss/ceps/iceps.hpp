#pragma once

// Incremental plan maintenance: object requests reshape the PR kd-tree, and
// each leaf change is folded into the clustering with as little data movement
// as possible.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "dtoss/ceps/clustering.hpp"
#include "dtoss/ceps/prkdtree.hpp"
#include "dtoss/error.hpp"

namespace dtoss::ceps {

/// Access pattern of a leaf given its rectangle and object count.
using PatternModel = std::function<std::vector<double>(const Rect&, std::size_t count)>;

struct DataRequest {
  enum class Kind { insert, erase, update };
  Kind kind = Kind::insert;
  ObjectRecord object;  // for erase/update: id and current location
  Point to;             // update target
};

struct IcepsConfig {
  std::size_t num_groups = 10;
};

struct TransferReport {
  std::size_t requests = 0;
  std::size_t transferred = 0;  // object records sent between servers
  std::size_t initial_objects = 0;
  std::size_t splits = 0;
  std::size_t merges = 0;
  std::size_t replaced = 0;  // leaves re-placed because their host overflowed
  std::size_t new_clusters = 0;

  double ratio() const {
    return initial_objects ? double(transferred) / double(initial_objects) : 0.0;
  }
};

class IcepsState {
 public:
  /// `clustering` must hold exactly the tree's leaves, keyed by leaf id.
  IcepsState(PrKdTree tree, Clustering clustering, PatternModel model, IcepsConfig config = {})
      : tree_(std::move(tree)), clustering_(std::move(clustering)), model_(std::move(model)), config_(config) {
    for (const auto& leaf : tree_.leaves()) {
      if (!clustering_.contains(leaf.id)) throw Error("clustering does not cover every leaf");
      const std::size_t c = clustering_.cluster_of(leaf.id);
      for (const auto& o : leaf.objects) server_[o.id] = c;
    }
  }

  const PrKdTree& tree() const { return tree_; }
  const Clustering& clustering() const { return clustering_; }

  TransferReport apply(std::span<const DataRequest> requests) {
    TransferReport rep;
    rep.initial_objects = tree_.size();
    for (const auto& r : requests) {
      ++rep.requests;
      switch (r.kind) {
        case DataRequest::Kind::insert: insert(r.object, rep); break;
        case DataRequest::Kind::erase: erase(r.object, rep); break;
        case DataRequest::Kind::update:
          erase(r.object, rep);
          insert({r.object.id, r.to}, rep);
          break;
      }
    }
    return rep;
  }

 private:
  AccessPattern pattern_for(LeafId id) const {
    return {id, model_(tree_.leaf_rect(id), tree_.leaf_size(id))};
  }

  void insert(const ObjectRecord& o, TransferReport& rep) {
    if (server_.count(o.id)) throw Error("duplicate object id");
    ++rep.transferred;  // the payload itself
    const auto events = tree_.insert(o);
    absorb(events, rep);
    server_[o.id] = clustering_.cluster_of(tree_.leaf_at(o.location));
  }

  void erase(const ObjectRecord& o, TransferReport& rep) {
    if (!server_.count(o.id)) throw Error("unknown object");
    ++rep.transferred;
    const auto events = tree_.erase(o.id, o.location);
    server_.erase(o.id);
    absorb(events, rep);
  }

  void absorb(const std::vector<LeafEvent>& events, TransferReport& rep) {
    std::size_t removed = 0, added = 0;
    for (const auto& e : events)
      if (e.kind == LeafEvent::Kind::removed) {
        clustering_.erase(e.leaf, /*keep_empty=*/true);
        ++removed;
      }
    for (const auto& e : events) {
      if (e.kind == LeafEvent::Kind::added) {
        ++added;
        place(pattern_for(e.leaf), rep);
        ship(e.leaf, rep);
      } else if (e.kind == LeafEvent::Kind::resized) {
        AccessPattern p = pattern_for(e.leaf);
        const std::size_t host = clustering_.cluster_of(e.leaf);
        const Cluster& cl = clustering_.cluster(host);
        const auto& old = clustering_.pattern(e.leaf).buckets;
        double pk = 0.0;
        for (std::size_t t = 0; t < p.buckets.size(); ++t)
          pk = std::max(pk, cl.aggregate[t] - old[t] + p.buckets[t]);
        if (pk <= clustering_.theta_max()) {
          clustering_.set_pattern(e.leaf, std::move(p.buckets));
        } else {
          ++rep.replaced;
          clustering_.erase(e.leaf, /*keep_empty=*/true);
          place(std::move(p), rep);
          ship(e.leaf, rep);
        }
      }
    }
    if (removed == 1 && added >= 2) ++rep.splits;
    if (removed >= 2 && added == 1) ++rep.merges;
  }

  void place(AccessPattern p, TransferReport& rep) {
    const AddResult a = add_partition(clustering_, std::move(p), config_.num_groups);
    if (a.created) ++rep.new_clusters;
  }

  // Objects of a leaf whose cluster changed travel to the new server.
  void ship(LeafId id, TransferReport& rep) {
    const std::size_t c = clustering_.cluster_of(id);
    for (const auto& o : tree_.leaf(id).objects) {
      auto it = server_.find(o.id);
      if (it == server_.end()) continue;  // payload of the request in flight
      if (it->second != c) {
        ++rep.transferred;
        it->second = c;
      }
    }
  }

  PrKdTree tree_;
  Clustering clustering_;
  PatternModel model_;
  IcepsConfig config_;
  std::unordered_map<ObjectId, std::size_t> server_;
};

/// Zipf(sf) weights over `n` ranks (rank 1 heaviest); sf = 0 is uniform.
inline std::vector<double> zipf_weights(std::size_t n, double sf) {
  if (sf < 0.0) throw Error("skew factor must be non-negative");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), sf);
  return w;
}

/// `count` inserts: the leaf is drawn by zipf over a seeded leaf ranking, the
/// location uniformly inside it. Ids start at first_id.
inline std::vector<DataRequest> gen_insert_requests(const PrKdTree& tree, std::size_t count, double sf,
                                                    std::uint64_t seed, ObjectId first_id) {
  auto leaves = tree.leaves();
  std::mt19937_64 rng(seed);
  std::shuffle(leaves.begin(), leaves.end(), rng);
  const auto w = zipf_weights(leaves.size(), sf);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<DataRequest> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Rect& r = leaves[pick(rng)].rect;
    Point p{r.lo.x + u(rng) * r.width(), r.lo.y + u(rng) * r.height()};
    p.x = std::min(p.x, std::nextafter(r.hi.x, r.lo.x));
    p.y = std::min(p.y, std::nextafter(r.hi.y, r.lo.y));
    DataRequest d;
    d.kind = DataRequest::Kind::insert;
    d.object = {first_id + i, p};
    out.push_back(d);
  }
  return out;
}

/// Turns inserts into updates: each moves an existing object (drawn without
/// replacement) to the insert's location.
inline std::vector<DataRequest> as_updates(std::span<const DataRequest> inserts,
                                           std::span<const ObjectRecord> existing, std::uint64_t seed) {
  if (inserts.size() > existing.size()) throw Error("more updates than objects");
  std::vector<std::size_t> idx(existing.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::vector<DataRequest> out;
  for (std::size_t i = 0; i < inserts.size(); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    DataRequest d;
    d.kind = DataRequest::Kind::update;
    d.object = existing[idx[i]];
    d.to = inserts[i].object.location;
    out.push_back(d);
  }
  return out;
}

}  // namespace dtoss::ceps
