#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dtoss/query.hpp"
#include "dtoss/workload.hpp"

using namespace dtoss;

namespace {

struct Fixture {
  std::vector<ObjectRecord> objects;
  DistributedIndex index;
};

const Fixture& uniform_fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.objects = gen_uniform(10000, kDefaultExtent, 21);
    ConstructionConfig cfg;
    cfg.seed = 22;
    cfg.candidates_per_pivot = 50;
    x.index = run_construction(x.objects, 8, cfg).first;
    return x;
  }();
  return f;
}

const Fixture& hotspot_fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.objects = gen_hotspots(10000, HotspotSpec{}, 23);
    ConstructionConfig cfg;
    cfg.seed = 24;
    cfg.candidates_per_pivot = 50;
    cfg.replicate_fraction = 0.05;
    x.index = run_construction(x.objects, 6, cfg).first;
    return x;
  }();
  return f;
}

std::vector<ObjectId> brute_range(std::span<const ObjectRecord> objs, Point q, double r) {
  std::vector<ObjectId> out;
  for (const auto& o : objs)
    if (dist(q, o.location) <= r) out.push_back(o.id);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ObjectId> brute_knn(std::span<const ObjectRecord> objs, Point q, std::size_t k) {
  std::vector<std::pair<double, ObjectId>> d;
  for (const auto& o : objs) d.push_back({dist(q, o.location), o.id});
  std::sort(d.begin(), d.end());
  std::vector<ObjectId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(d[i].second);
  return out;
}

std::vector<ObjectId> ids(std::span<const ObjectRecord> objs) {
  std::vector<ObjectId> out;
  for (const auto& o : objs) out.push_back(o.id);
  return out;
}

}  // namespace

TEST(Selectivity, Presets) {
  EXPECT_DOUBLE_EQ(selectivity_fraction(Selectivity::small), 0.0001);
  EXPECT_DOUBLE_EQ(selectivity_fraction(Selectivity::medium), 0.0005);
  EXPECT_DOUBLE_EQ(selectivity_fraction(Selectivity::large), 0.001);
  const double r = selectivity_radius(0.001, 1e9);
  EXPECT_NEAR(std::numbers::pi * r * r, 0.001 * 1e18, 1e6);
  EXPECT_THROW(selectivity_radius(0.0, 1e9), Error);
}

TEST(PartitionSearch, SmallRadiusStaysHome) {
  const PartitionPlan plan = make_plan(PivotSet{{{250, 500}, {750, 500}}, 0}, 1000, 0.0);
  const std::vector<double> f{400, 400};
  EXPECT_EQ(find_intersecting_partitions({200, 500}, 50, plan, f), (std::vector<PartitionId>{0}));
  EXPECT_EQ(find_intersecting_partitions({200, 500}, 350, plan, f), (std::vector<PartitionId>{0, 1}));
}

TEST(PartitionSearch, HyperplaneAndFurthestPruning) {
  // P2's border is too far from q; P3's border is close but all its objects
  // lie within 100 of its pivot, beyond reach of the query circle.
  const PartitionPlan plan =
      make_plan(PivotSet{{{300, 500}, {300, 100}, {300, 900}, {700, 500}}, 0}, 1000, 0.0);
  const std::vector<double> f{300, 400, 300, 100};
  PartitionSearchStats stats;
  const auto in_q = find_intersecting_partitions({400, 450}, 160, plan, f, &stats);
  EXPECT_EQ(in_q, (std::vector<PartitionId>{0, 1}));
  EXPECT_EQ(stats.hyperplane_pruned, (std::vector<PartitionId>{2}));
  EXPECT_EQ(stats.furthest_pruned, (std::vector<PartitionId>{3}));
}

TEST(PartitionSearch, NoFalseNegativesAndSoundFurthestPruning) {
  for (const Fixture* fx : {&uniform_fixture(), &hotspot_fixture()}) {
    const auto& index = fx->index;
    const auto furthest = index.furthest();
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> u(0.0, kDefaultExtent), ur(0.0, 1.5e8);
    for (int t = 0; t < 500; ++t) {
      const Point q{u(rng), u(rng)};
      const double r = ur(rng);
      PartitionSearchStats stats;
      const auto in_q = find_intersecting_partitions(q, r, index.plan, furthest, &stats);
      for (PartitionId p = 0; p < index.partitions.size(); ++p) {
        bool has_result = false;
        for (const auto& o : index.partitions[p].objects()) has_result |= dist(q, o.location) <= r;
        if (has_result) {
          EXPECT_TRUE(std::binary_search(in_q.begin(), in_q.end(), p));
        }
      }
      for (PartitionId p : stats.furthest_pruned)
        for (const auto& o : index.partitions[p].objects()) EXPECT_GT(dist(q, o.location), r);
    }
  }
}

TEST(LocalRange, EqualsFlatScan) {
  const auto& index = uniform_fixture().index;
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> u(0.0, kDefaultExtent), ur(0.0, 2e8);
  PartitionStore flat;
  for (int t = 0; t < 200; ++t) {
    const auto& part = index.partitions[t % index.partitions.size()];
    const Point q{u(rng), u(rng)};
    const double r = ur(rng);
    std::vector<std::uint32_t> want;
    const auto objs = part.objects();
    for (std::uint32_t i = 0; i < objs.size(); ++i)
      if (dist(q, objs[i].location) <= r) want.push_back(i);
    EXPECT_EQ(local_range(part, q, r), want);
    EXPECT_EQ(local_count(part, q, r), want.size());
  }
  EXPECT_TRUE(local_range(flat, {1, 1}, 10).empty());
}

TEST(RangeQuery, ExtremeRadii) {
  const auto& fx = uniform_fixture();
  EXPECT_EQ(range_query(fx.index, {5e8, 5e8}, 2e9).objects.size(), fx.objects.size());
  const auto& o = fx.objects[1234];
  const auto r = range_query(fx.index, o.location, 0.0);
  ASSERT_EQ(r.objects.size(), 1u);
  EXPECT_EQ(r.objects[0].id, o.id);
  EXPECT_THROW(range_query(fx.index, o.location, -1.0), Error);
}

TEST(RangeQuery, EqualsBruteForceAtEverySelectivity) {
  for (const Fixture* fx : {&uniform_fixture(), &hotspot_fixture()}) {
    std::mt19937_64 rng(27);
    std::uniform_real_distribution<double> u(0.0, kDefaultExtent);
    for (Selectivity s : {Selectivity::small, Selectivity::medium, Selectivity::large}) {
      const double r = selectivity_radius(selectivity_fraction(s), kDefaultExtent);
      for (int t = 0; t < 1000; ++t) {
        const Point q{u(rng), u(rng)};
        const NodeId from = static_cast<NodeId>(t % fx->index.owner.size());
        const auto res = range_query(fx->index, q, r, from);
        EXPECT_EQ(ids(res.objects), brute_range(fx->objects, q, r));
        EXPECT_LE(res.messages, 1 + res.partitions_contacted);
      }
    }
  }
}

TEST(KnnEstimate, Formula) {
  EXPECT_NEAR(estimate_knn_distance(100, 100, 1e9), 1e9 / std::sqrt(std::numbers::pi), 1e-3);
  const double first = estimate_knn_distance(1, 1000000, 1e9);
  EXPECT_NEAR(first, 1e9 / std::sqrt(std::numbers::pi) * 5e-7, 1e-3);
  double prev = 0.0;
  for (std::size_t k = 1; k <= 64; k *= 2) {
    const double ed = estimate_knn_distance(k, 10000, 1e9);
    EXPECT_GT(ed, prev);
    EXPECT_GT(estimate_knn_radius(k, 10000, 1e9), 0.0);
    prev = ed;
  }
  EXPECT_THROW(estimate_knn_distance(11, 10, 1e9), Error);
  EXPECT_THROW(estimate_knn_distance(0, 10, 1e9), Error);
}

TEST(KnnQuery, OnTopOfAnObject) {
  const auto& fx = uniform_fixture();
  const auto& o = fx.objects[777];
  const auto r = knn_query(fx.index, o.location, 1);
  ASSERT_EQ(r.objects.size(), 1u);
  EXPECT_EQ(r.objects[0].id, o.id);
  EXPECT_EQ(r.rounds, 1u);
}

TEST(KnnQuery, AllObjects) {
  const auto objs = gen_uniform(300, kDefaultExtent, 28);
  ConstructionConfig cfg;
  cfg.candidates_per_pivot = 20;
  const auto index = run_construction(objs, 3, cfg).first;
  const auto r = knn_query(index, {1e8, 9e8}, objs.size());
  EXPECT_EQ(r.objects.size(), objs.size());
  EXPECT_THROW(knn_query(index, {1, 1}, objs.size() + 1), Error);
}

TEST(KnnQuery, EqualsBruteForce) {
  for (const Fixture* fx : {&uniform_fixture(), &hotspot_fixture()}) {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, kDefaultExtent);
    for (std::size_t k : {1u, 2u, 4u, 8u, 16u, 32u}) {
      for (int t = 0; t < 500; ++t) {
        const Point q{u(rng), u(rng)};
        const auto res = knn_query(fx->index, q, k, static_cast<NodeId>(t % fx->index.owner.size()));
        EXPECT_EQ(ids(res.objects), brute_knn(fx->objects, q, k));
      }
    }
  }
}

TEST(Batch, MixedTypesMatchSingleQueries) {
  const auto& fx = uniform_fixture();
  std::vector<QuerySpec> qs{{QueryType::range, {3e8, 3e8}, 2e7, 0},
                            {QueryType::selectivity, {6e8, 2e8}, 0.0005, 0},
                            {QueryType::knn, {1e8, 8e8}, 0.0, 5}};
  const auto one = run_batch(fx.index, qs, 1);
  const auto many = run_batch(fx.index, qs, 3);
  ASSERT_EQ(one.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(one[i].objects, many[i].objects);
    EXPECT_EQ(one[i].messages, many[i].messages);
  }
  EXPECT_EQ(ids(one[0].objects), brute_range(fx.objects, {3e8, 3e8}, 2e7));
  EXPECT_EQ(ids(one[2].objects), brute_knn(fx.objects, {1e8, 8e8}, 5));
}

TEST(Batch, RandomPartitioningStillExact) {
  const auto objs = gen_uniform(3000, kDefaultExtent, 30);
  ConstructionConfig cfg;
  cfg.random_partitioning = true;
  const auto index = run_construction(objs, 4, cfg).first;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, kDefaultExtent);
  for (int t = 0; t < 100; ++t) {
    const Point q{u(rng), u(rng)};
    EXPECT_EQ(ids(range_query(index, q, 3e7).objects), brute_range(objs, q, 3e7));
  }
}
