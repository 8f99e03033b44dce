#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "dtoss/partitioner.hpp"

using namespace dtoss;

namespace {

std::vector<Point> random_points(std::size_t n, double extent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

PivotSet grid_pivots(double extent) {
  PivotSet ps;
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) ps.pivots.push_back({extent * (x + 0.5) / 3, extent * (y + 0.5) / 3});
  return ps;
}

}  // namespace

TEST(SelectCandidates, WholeSetAndDeterminism) {
  const auto pts = random_points(100, 1e9, 1);
  auto all = select_candidates(pts, pts.size(), 7);
  auto key = [](const Point& p) { return std::pair{p.x, p.y}; };
  std::set<std::pair<double, double>> a, b;
  for (const auto& p : all) a.insert(key(p));
  for (const auto& p : pts) b.insert(key(p));
  EXPECT_EQ(a, b);
  EXPECT_EQ(select_candidates(pts, 30, 9), select_candidates(pts, 30, 9));
  EXPECT_THROW(select_candidates(pts, 101, 1), Error);
}

TEST(ElectPivots, AllCandidatesWhenCountsMatch) {
  const auto pts = random_points(6, 1e9, 2);
  auto got = elect_pivots(pts, 6, 3, 5).pivots;
  auto want = pts;
  auto lt = [](const Point& a, const Point& b) { return std::pair{a.x, a.y} < std::pair{b.x, b.y}; };
  std::sort(got.begin(), got.end(), lt);
  std::sort(want.begin(), want.end(), lt);
  EXPECT_EQ(got, want);
}

TEST(ElectPivots, SquareCornersBeatTheCenter) {
  const std::vector<Point> cands{{0, 0}, {10, 0}, {0, 10}, {10, 10}, {5, 5}};
  // 200 draws cover all five 4-subsets with overwhelming probability.
  const auto r = elect_pivots_detailed(cands, 4, 200, 3);
  std::set<std::pair<double, double>> got;
  for (const auto& p : r.pivot_set.pivots) got.insert({p.x, p.y});
  EXPECT_EQ(got, (std::set<std::pair<double, double>>{{0, 0}, {10, 0}, {0, 10}, {10, 10}}));
  EXPECT_NEAR(r.objective, 40 + 20 * std::sqrt(2.0), 1e-9);
}

TEST(ElectPivots, ChosenObjectiveIsMaxOfOwnTrials) {
  const auto pts = random_points(400, 1e9, 3);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = elect_pivots_detailed(pts, 8, 50, seed);
    EXPECT_EQ(r.trial_objectives.size(), 50u);
    EXPECT_DOUBLE_EQ(r.objective, *std::max_element(r.trial_objectives.begin(), r.trial_objectives.end()));
    EXPECT_EQ(r.pivot_set.size(), 8u);
  }
}

TEST(ElectPivots, IdenticalInputsElectIdenticalSets) {
  const auto pts = random_points(2000, 1e9, 4);
  const auto a = elect_pivots(pts, 16, default_trials(pts.size(), 16), 42);
  const auto b = elect_pivots(pts, 16, default_trials(pts.size(), 16), 42);
  EXPECT_EQ(a, b);
  std::set<std::pair<double, double>> distinct;
  for (const auto& p : a.pivots) distinct.insert({p.x, p.y});
  EXPECT_EQ(distinct.size(), 16u);
}

TEST(ElectPivots, TooFewCandidatesThrows) {
  const std::vector<Point> cands{{1, 1}, {1, 1}, {2, 2}};
  EXPECT_THROW(elect_pivots(cands, 3, 1, 1), Error);
  EXPECT_THROW(elect_pivots(cands, 0, 1, 1), Error);
}

TEST(MapObject, CoincidentAndTies) {
  PivotSet ps{{{0, 0}, {10, 0}, {0, 10}, {10, 10}}, 0};
  EXPECT_EQ(map_object({10, 10}, ps), 3u);
  EXPECT_EQ(map_object({5, 0}, ps), 0u);
  EXPECT_EQ(map_object({10, 5}, ps), 1u);
  EXPECT_EQ(map_object({5, 5}, ps), 0u);
}

TEST(MapObject, MatchesLinearScan) {
  const auto pivots = random_points(100, 1e9, 5);
  const PivotSet ps{pivots, 0};
  const auto objs = random_points(1000, 1e9, 6);
  const auto assigned = assign_partitions(objs, ps);
  for (std::size_t i = 0; i < objs.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < pivots.size(); ++j)
      if (dist2(objs[i], pivots[j]) < dist2(objs[i], pivots[best])) best = j;
    EXPECT_EQ(map_object(objs[i], ps), best);
    EXPECT_EQ(assigned[i], best);
  }
}

TEST(Adjacency, SmallConfigurations) {
  const PivotSet two{{{100, 500}, {900, 500}}, 0};
  EXPECT_EQ(pivot_adjacency(two, 1000), (Adjacency{{1}, {0}}));
  const PivotSet three{{{100, 100}, {900, 200}, {500, 900}}, 0};
  EXPECT_EQ(pivot_adjacency(three, 1000), (Adjacency{{1, 2}, {0, 2}, {0, 1}}));
  EXPECT_THROW(pivot_adjacency(PivotSet{{{1, 1}}, 0}, 10), Error);
}

TEST(Adjacency, GridCenterTouchesOnlyEdgeNeighbours) {
  const auto adj = pivot_adjacency(grid_pivots(900), 900);
  EXPECT_EQ(adj[4], (std::vector<PartitionId>{1, 3, 5, 7}));
  EXPECT_EQ(adj[0], (std::vector<PartitionId>{1, 3}));
}

TEST(MapReplicated, LambdaZeroInteriorIsPrimaryOnly) {
  const auto plan = make_plan(grid_pivots(900), 900, 0.0);
  EXPECT_EQ(plan.replicated({450, 450}), (std::vector<PartitionId>{4}));
  EXPECT_EQ(plan.replicated({310, 450}), (std::vector<PartitionId>{4}));
}

TEST(MapReplicated, NearOneBorder) {
  const auto plan = make_plan(grid_pivots(900), 900, 20.0);
  // 10 from the border x = 300 between partitions 3 and 4.
  EXPECT_EQ(plan.replicated({310, 450}), (std::vector<PartitionId>{4, 3}));
}

TEST(MapReplicated, CornerOfThreeOrMorePartitions) {
  const auto plan = make_plan(grid_pivots(900), 900, 50.0);
  const auto r = plan.replicated({305, 305});
  EXPECT_GE(r.size(), 3u);
  EXPECT_EQ(r.front(), 4u);
  for (std::size_t i = 1; i < r.size(); ++i) {
    EXPECT_TRUE(plan.adjacent(4, r[i]));
    EXPECT_LE(dist_to_hyperplane({305, 305}, plan.pivot_set.pivots[4], plan.pivot_set.pivots[r[i]]), 50.0);
  }
  EXPECT_THROW(map_object_replicated({1, 1}, plan.pivot_set, plan.adjacency, -1.0), Error);
}

TEST(MapReplicated, ReplicaCountMonotoneInLambda) {
  const auto pivots = random_points(16, 1e9, 7);
  const auto objs = random_points(5000, 1e9, 8);
  std::size_t prev = 0;
  for (double lambda : {0.0, 1e6, 5e6, 1e7, 5e7, 1e8}) {
    const auto plan = make_plan(PivotSet{pivots, 0}, 1e9, lambda);
    std::size_t replicas = 0;
    for (const auto& o : objs) {
      const auto r = plan.replicated(o);
      replicas += r.size() - 1;
      for (std::size_t i = 1; i < r.size(); ++i) {
        EXPECT_TRUE(plan.adjacent(r[0], r[i]));
        EXPECT_LE(dist_to_hyperplane(o, plan.pivot_set.pivots[r[0]], plan.pivot_set.pivots[r[i]]), lambda);
      }
    }
    if (lambda == 0.0) {
      EXPECT_EQ(replicas, 0u);
    }
    EXPECT_GE(replicas, prev);
    prev = replicas;
  }
}

TEST(TuneLambda, ReplicatesRequestedShare) {
  const auto pivots = random_points(16, 1e9, 9);
  const auto objs = random_points(20000, 1e9, 10);
  const auto plan0 = make_plan(PivotSet{pivots, 0}, 1e9, 0.0);
  const double lambda = tune_lambda(objs, plan0, 0.05);
  const auto plan = make_plan(PivotSet{pivots, 0}, 1e9, lambda);
  std::size_t replicated = 0;
  for (const auto& o : objs) replicated += plan.replicated(o).size() > 1;
  EXPECT_NEAR(static_cast<double>(replicated) / objs.size(), 0.05, 0.001);
}

TEST(Partitioning, EveryObjectHasOnePrimary) {
  const auto objs = random_points(10000, 1e9, 11);
  const auto ps = elect_pivots(objs, 32, 50, 12);
  const auto assigned = assign_partitions(objs, ps);
  std::vector<std::size_t> sizes(32, 0);
  for (auto a : assigned) ++sizes.at(a);
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  EXPECT_EQ(total, objs.size());
}
