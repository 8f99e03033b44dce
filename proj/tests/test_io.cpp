#include <gtest/gtest.h>

#include <sstream>

#include "dtoss/io.hpp"
#include "dtoss/workload.hpp"

using namespace dtoss;

TEST(ObjectFiles, BinaryRoundTripIsBitExact) {
  auto objs = gen_uniform(1000, kDefaultExtent, 1);
  objs.push_back({~0ull, {0.1, 1e9}});
  std::stringstream buf;
  io::write_objects_binary(buf, objs);
  EXPECT_EQ(buf.str().size(), objs.size() * io::kObjectRecordBytes);
  EXPECT_EQ(io::read_objects_binary(buf), objs);
}

TEST(ObjectFiles, BinaryIsLittleEndian) {
  const std::vector<ObjectRecord> one{{0x0102030405060708ull, {1.0, 2.0}}};
  std::stringstream buf;
  io::write_objects_binary(buf, one);
  const std::string s = buf.str();
  EXPECT_EQ(static_cast<unsigned char>(s[0]), 0x08);
  EXPECT_EQ(static_cast<unsigned char>(s[7]), 0x01);
  // 1.0 = 0x3FF0000000000000: the high byte comes last.
  EXPECT_EQ(static_cast<unsigned char>(s[15]), 0x3F);
}

TEST(ObjectFiles, TruncatedBinaryThrows) {
  std::stringstream buf(std::string(30, '\0'));
  EXPECT_THROW(io::read_objects_binary(buf), Error);
}

TEST(ObjectFiles, CsvRoundTrip) {
  const auto objs = gen_hotspots(500, HotspotSpec{}, 2);
  std::stringstream buf;
  io::write_objects_csv(buf, objs);
  EXPECT_EQ(io::read_objects_csv(buf), objs);
  std::stringstream bad("id,x,y\n1,2\n");
  EXPECT_THROW(io::read_objects_csv(bad), Error);
}

TEST(Plans, JsonRoundTrip) {
  const auto pts = gen_uniform(400, kDefaultExtent, 3);
  std::vector<Point> locs;
  for (const auto& o : pts) locs.push_back(o.location);
  const auto plan = make_plan(elect_pivots(locs, 9, 10, 4), kDefaultExtent, 1234.5);
  const auto back = io::plan_from_json(io::Json::parse(io::to_json(plan).dump()));
  EXPECT_EQ(back.pivot_set, plan.pivot_set);
  EXPECT_EQ(back.adjacency, plan.adjacency);
  EXPECT_EQ(back.lambda, plan.lambda);
  EXPECT_EQ(back.extent, plan.extent);
}

TEST(Reports, CsvHasOneRowPerPhaseAndSeed) {
  ConstructionReport r;
  r.seed = 77;
  r.phases = {{"shuffle", 0.5, 10, 100}, {"fix", 0.25, 4, 40}};
  std::ostringstream with, without;
  io::write_report_csv(with, r);
  io::write_report_csv(without, r, false);
  EXPECT_EQ(with.str(), "seed,phase,seconds,messages,bytes\n77,shuffle,0.5,10,100\n77,fix,0.25,4,40\n");
  EXPECT_EQ(without.str(), "seed,phase,messages,bytes\n77,shuffle,10,100\n77,fix,4,40\n");
  const auto j = io::to_json(r, false);
  EXPECT_EQ(j["seed"], 77);
  EXPECT_FALSE(j["phases"][0].contains("seconds"));
}

TEST(Patterns, CsvRoundTripAndErrors) {
  const std::vector<ceps::AccessPattern> ps{{3, {1, 0, 2.5}}, {7, {0, 4, 0}}};
  std::stringstream buf;
  io::write_patterns_csv(buf, ps);
  const auto back = io::read_patterns_csv(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].partition, 3u);
  EXPECT_EQ(back[0].buckets, ps[0].buckets);
  EXPECT_EQ(back[1].buckets, ps[1].buckets);

  std::stringstream sparse("partition_id,bucket_index,count\n1,4,9\n");
  EXPECT_EQ(io::read_patterns_csv(sparse, 6)[0].buckets, (std::vector<double>{0, 0, 0, 0, 9, 0}));
  std::stringstream neg("1,0,-2\n");
  EXPECT_THROW(io::read_patterns_csv(neg), Error);
  std::stringstream over("1,9,1\n");
  EXPECT_THROW(io::read_patterns_csv(over, 4), Error);
}

TEST(Clusterings, JsonListsNonEmptyClusters) {
  ceps::Clustering c(ceps::TierLadder::doubling(10, 1, 3), 2);
  c.insert({4, {3, 3}}, c.add_cluster());
  c.add_cluster();
  c.insert({5, {12, 1}}, c.add_cluster());
  const auto j = io::to_json(c);
  ASSERT_EQ(j["clusters"].size(), 2u);
  EXPECT_EQ(j["clusters"][0]["members"][0], 4);
  EXPECT_EQ(j["clusters"][1]["tier"], 1);
  EXPECT_EQ(j["fitness"], c.fitness());
}

TEST(Costs, Csv) {
  ceps::CostReport r{"gp", 24, 48, {{0, 0, 5, 48, 2}}};
  std::ostringstream out;
  io::write_cost_csv(out, std::span(&r, 1));
  EXPECT_EQ(out.str(), "method,servers,horizon_hours,cost\ngp,1,24,48\n");
}
