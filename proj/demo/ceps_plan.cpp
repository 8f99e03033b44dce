// Places 2,000 small partitions whose load peaks in one of two timezones and
// compares the plan's cost with grid partitioning.

#include <iostream>

#include "dtoss/dtoss.hpp"

int main() {
  using namespace dtoss;
  using namespace dtoss::ceps;
  const auto objects = gen_uniform(200000, kDefaultExtent, 7);
  const auto leaves = build_small_partitions(objects, 100, kDefaultExtent);
  const auto model = timezone_pattern_model(kDefaultExtent, 48, 1.0);
  std::vector<AccessPattern> patterns;
  for (std::size_t i = 0; i < leaves.size(); ++i)
    patterns.push_back({static_cast<PartitionKey>(i), model(leaves[i].rect, leaves[i].objects.size())});

  const auto ladder = TierLadder::doubling(2500, 0.05, 5);
  const auto plan = ceps_plan(patterns, ladder);
  const auto placed = place_patterns(leaves, patterns);
  GridParams grid;
  grid.grid_capacity = 10000;
  for (const auto& r : {cost_report(plan, 24), baseline_gp(placed, ladder, grid)})
    std::cout << r.method << ": " << r.servers.size() << " servers, cost " << r.cost << "\n";
}
