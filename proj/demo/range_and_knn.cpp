// Builds a distributed index over clustered data on 8 simulated nodes and
// runs one range and one kNN query against it.

#include <iostream>

#include "dtoss/dtoss.hpp"

int main() {
  using namespace dtoss;
  const auto objects = gen_hotspots(50000, HotspotSpec{}, 42);

  ConstructionConfig cfg;
  cfg.seed = 42;
  cfg.replicate_fraction = 0.05;
  const auto [index, report] = run_construction(objects, 8, cfg);
  std::cout << "seed " << report.seed << ": " << report.total_messages << " messages, "
            << report.inaccurate_cells << " cells fixed remotely, lambda " << report.lambda << "\n";

  const Point q = objects[0].location;
  const double r = selectivity_radius(selectivity_fraction(Selectivity::medium), cfg.extent);
  const auto range = range_query(index, q, r, 3);
  std::cout << "range: " << range.objects.size() << " objects from " << range.partitions_contacted
            << " partitions, " << range.messages << " messages\n";

  const auto knn = knn_query(index, q, 10, 3);
  std::cout << "10-NN: " << knn.rounds << " rounds, radius " << knn.final_radius << "\n";
  for (const auto& o : knn.objects) std::cout << "  " << o.id << " at " << dist(q, o.location) << "\n";
}
