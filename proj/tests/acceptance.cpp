// Acceptance checks. Each criterion prints one PASS or FAIL line with the
// measured values; the exit code is nonzero when any selected criterion fails.
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "dtoss/dtoss.hpp"
#include "dtoss/io.hpp"

using namespace dtoss;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<Point> locations(std::span<const ObjectRecord> objs) {
  std::vector<Point> out;
  out.reserve(objs.size());
  for (const auto& o : objs) out.push_back(o.location);
  return out;
}

double stdev(std::span<const std::size_t> v) {
  double mean = 0.0;
  for (auto x : v) mean += double(x);
  mean /= double(v.size());
  double var = 0.0;
  for (auto x : v) var += (double(x) - mean) * (double(x) - mean);
  return std::sqrt(var / double(v.size()));
}

// ---------------------------------------------------------------------------

Verdict criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double extent = kDefaultExtent;
  const double tol = geometric_epsilon(extent);
  std::size_t cells = 0, mismatches = 0;
  for (std::size_t inst = 0; inst < 20; ++inst) {
    const std::size_t n = 500 + 75 * inst;  // 500 .. 1925
    const std::size_t nodes = 2 + inst % 7;  // 2 .. 8
    auto objs = inst % 2 ? gen_hotspots(n, HotspotSpec{}, 100 + inst) : gen_uniform(n, extent, 100 + inst);
    jitter_duplicates(objs, extent, inst);
    ConstructionConfig cfg;
    cfg.seed = 200 + inst;
    cfg.candidates_per_pivot = 50;
    cfg.build_hierarchies = false;
    if (inst % 4 >= 2) cfg.replicate_fraction = 0.05;
    const auto index = run_construction(objs, nodes, cfg).first;
    const auto oracle = brute_force_voronoi(locations(objs), extent);
    std::size_t seen = 0;
    for (const auto& part : index.partitions) {
      for (std::size_t i = 0; i < part.lvd.primary_count; ++i) {
        ++seen;
        const auto& cell = part.lvd.cells[i];
        if (cell.status != CellStatus::accurate || !same_vertex_set(cell, oracle[part.lvd.objects[i].id], tol))
          ++mismatches;
      }
    }
    cells += seen;
    if (seen != objs.size()) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0,
          "20 instances, " + std::to_string(cells) + " cells, " + std::to_string(mismatches) + " mismatches, " +
              fmt("%.1f s", secs)};
}

Verdict criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto objs = gen_uniform(10000, kDefaultExtent, 300);
  ConstructionConfig cfg;
  cfg.seed = 301;
  cfg.replicate_fraction = 0.05;
  const auto index = run_construction(objs, 8, cfg).first;
  std::mt19937_64 rng(302);
  std::uniform_real_distribution<double> u(0.0, kDefaultExtent);
  std::size_t range_bad = 0, knn_bad = 0, range_n = 0, knn_n = 0;
  for (Selectivity s : {Selectivity::small, Selectivity::medium, Selectivity::large}) {
    const double r = selectivity_radius(selectivity_fraction(s), kDefaultExtent);
    for (int t = 0; t < 1000; ++t, ++range_n) {
      const Point q{u(rng), u(rng)};
      std::vector<ObjectId> want;
      for (const auto& o : objs)
        if (dist(q, o.location) <= r) want.push_back(o.id);
      std::vector<ObjectId> got;
      for (const auto& o : range_query(index, q, r, static_cast<NodeId>(t % 8)).objects) got.push_back(o.id);
      range_bad += got != want;
    }
  }
  for (std::size_t k : {1u, 2u, 4u, 8u, 16u, 32u}) {
    for (int t = 0; t < 500; ++t, ++knn_n) {
      const Point q{u(rng), u(rng)};
      std::vector<std::pair<double, ObjectId>> d;
      for (const auto& o : objs) d.push_back({dist(q, o.location), o.id});
      std::partial_sort(d.begin(), d.begin() + k, d.end());
      const auto got = knn_query(index, q, k, static_cast<NodeId>(t % 8)).objects;
      bool same = got.size() == k;
      for (std::size_t i = 0; same && i < k; ++i) same = got[i].id == d[i].second;
      knn_bad += !same;
    }
  }
  const double secs = seconds_since(t0);
  return {range_bad == 0 && knn_bad == 0 && secs < 120.0,
          std::to_string(range_n) + " range (" + std::to_string(range_bad) + " wrong), " + std::to_string(knn_n) +
              " kNN (" + std::to_string(knn_bad) + " wrong), " + fmt("%.1f s", secs)};
}

Verdict criterion_3() {
  const auto objs = gen_uniform(1000000, kDefaultExtent, 400);
  ConstructionConfig cfg;
  cfg.seed = 401;
  cfg.candidates_per_pivot = 250;
  cfg.build_hierarchies = false;
  const auto rep = run_construction(objs, 32, cfg).second;
  const double cv = rep.partition_size_cv();
  return {cv <= 0.15, "P=32, S=8000: stdev/mean = " + fmt("%.3f", cv) + " (limit 0.15)"};
}

Verdict criterion_4() {
  HotspotSpec spec;
  spec.count = 10;
  const auto objs = gen_hotspots(100000, spec, 500);
  ConstructionConfig cfg;
  cfg.seed = 501;
  cfg.build_hierarchies = false;
  cfg.replicate_fraction = 0.05;
  const auto adaptive = run_construction(objs, 8, cfg).second;
  cfg.random_partitioning = true;
  const auto random = run_construction(objs, 8, cfg).second;
  const double a = adaptive.inaccurate_fraction(), r = random.inaccurate_fraction();
  return {a <= 0.10 && r >= 0.60,
          "inaccurate cells: adaptive " + fmt("%.4f", a) + " (limit 0.10), random " + fmt("%.4f", r) +
              " (limit 0.60)"};
}

Verdict criterion_5() {
  HotspotSpec spec;
  spec.count = 10;
  const auto objs = gen_hotspots(100000, spec, 500);
  ConstructionConfig cfg;
  cfg.seed = 601;
  cfg.build_hierarchies = false;
  const auto none = run_construction(objs, 8, cfg).second;
  cfg.replicate_fraction = 0.05;
  const auto repl = run_construction(objs, 8, cfg).second;
  const double share = double(repl.replicated_objects) / double(objs.size());
  // Fix traffic counted per IR request (one per inaccurate cell and contacted
  // partition); the batched exchange frames are reported alongside.
  const double reduction = none.ir_requests ? 1.0 - double(repl.ir_requests) / double(none.ir_requests) : 0.0;
  const bool ok = std::abs(share - 0.05) <= 0.01 && reduction >= 0.5;
  return {ok, "replicated " + fmt("%.4f", share) + ", IR requests " + std::to_string(none.ir_requests) + " -> " +
                  std::to_string(repl.ir_requests) + " (reduction " + fmt("%.3f", reduction) +
                  ", limit 0.50), batched frames " + std::to_string(none.fix_messages) + " -> " +
                  std::to_string(repl.fix_messages)};
}

std::string dump_index(const DistributedIndex& index) {
  std::ostringstream out;
  for (const auto& part : index.partitions) write_lvd_dump(out, part.lvd);
  return out.str();
}

Verdict criterion_6() {
  const auto objs = gen_uniform(500000, kDefaultExtent, 700);
  auto timed = [&](std::size_t workers, std::string& dump) {
    ConstructionConfig cfg;
    cfg.seed = 701;
    cfg.workers = workers;
    cfg.build_hierarchies = false;
    cfg.replicate_fraction = 0.05;
    const auto [index, rep] = run_construction(objs, 4, cfg);
    double secs = 0.0;
    for (const auto& ph : rep.phases)
      if (ph.name == "lvd_build" || ph.name == "fix") secs += ph.wall_seconds;
    dump = dump_index(index);
    return secs;
  };
  std::string d1, d4;
  const double t1 = timed(1, d1);
  const double t4 = timed(4, d4);
  const double speedup = t1 / t4;
  const bool identical = d1 == d4;
  return {speedup >= 2.0 && identical, "LVD build 1 worker " + fmt("%.2f s", t1) + ", 4 workers " + fmt("%.2f s", t4) +
                                           ", speedup " + fmt("%.2f", speedup) + " (limit 2.0, " +
                                           std::to_string(std::thread::hardware_concurrency()) +
                                           " hardware threads), output " + (identical ? "identical" : "DIFFERS")};
}

Verdict criterion_7() {
  // Movement deltas of [-100, 250] per axis and cycle over a 10^6 space.
  const double extent = 1e6;
  const auto objs = gen_uniform(20000, extent, 800);
  ConstructionConfig cfg;
  cfg.seed = 801;
  cfg.extent = extent;
  cfg.build_hierarchies = false;
  SimCluster cluster(8, cfg);
  cluster.load_random(objs, 802);
  std::vector<double> sd;
  for (std::size_t cycle = 1; cycle <= 10; ++cycle) {
    cluster.run_construction();
    sd.push_back(stdev(cluster.node_loads()));
    cluster.config().repartition = false;
    std::mt19937_64 rng(detail::mix_seed(803, cycle));
    std::uniform_real_distribution<double> delta(-100.0, 250.0);
    cluster.for_each_object([&](ObjectRecord& o) {
      o.location.x = std::clamp(o.location.x + delta(rng), 0.0, extent);
      o.location.y = std::clamp(o.location.y + delta(rng), 0.0, extent);
    });
  }
  std::string trace;
  for (double s : sd) trace += (trace.empty() ? "" : " ") + fmt("%.0f", s);
  return {sd.back() > sd.front(), "per-node load stdev by cycle: " + trace};
}

std::vector<ceps::AccessPattern> random_cosine_instance(std::uint64_t seed, std::size_t n, std::size_t buckets) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(10.0, 60.0), base(40.0, 80.0);
  std::vector<ceps::AccessPattern> ps;
  const auto shifts = random_shifts(n, buckets, seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<std::size_t> one{shifts[i]};
    auto p = gen_cosine_patterns(one, buckets, std::round(amp(rng)), std::round(base(rng)))[0];
    p.partition = static_cast<ceps::PartitionKey>(i);
    ps.push_back(std::move(p));
  }
  return ps;
}

bool ahr_replay_ok(std::span<const ceps::AccessPattern> ps, const ceps::AhrResult& r, const ceps::TierLadder& ladder) {
  const std::size_t b = ps[0].buckets.size();
  std::vector<std::vector<double>> agg;
  std::vector<bool> alive(ps.size(), true);
  for (const auto& p : ps) agg.push_back(p.buckets);
  for (const auto& m : r.merges) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        if (!alive[j]) continue;
        std::vector<double> s(b);
        for (std::size_t t = 0; t < b; ++t) s[t] = agg[i][t] + agg[j][t];
        if (ceps::peak(s) > ladder.max_capacity()) continue;
        const double f = ceps::flatness(std::span<const double>(s));
        if (f < best) {
          best = f;
          bi = i;
          bj = j;
        }
      }
    }
    if (m.flatness != best || m.slot_a != bi || m.slot_b != bj) return false;
    for (std::size_t t = 0; t < b; ++t) agg[bi][t] += agg[bj][t];
    alive[bj] = false;
  }
  return true;
}

Verdict criterion_8() {
  // Exact antiphase pairs.
  const auto pair = gen_cosine_patterns(antiphase_shifts(2, 288), 288, 100, 100);
  const double pair_flatness = ceps::flatness(std::span<const ceps::AccessPattern>(pair));

  std::size_t monotone_bad = 0, worse_than_ahr = 0, replay_bad = 0;
  for (std::uint64_t inst = 0; inst < 50; ++inst) {
    const auto ps = random_cosine_instance(900 + inst, 30, 48);
    const auto ladder = ceps::TierLadder::doubling(150, 1, 4);
    ceps::AhrOptions opt;
    opt.stop_when_exhausted = true;
    const auto ahr = ceps::ahr_cluster_detailed(ps, 1, ladder, opt);
    replay_bad += !ahr_replay_ok(ps, ahr, ladder);
    ceps::TabuParams tp;
    tp.seed = inst;
    tp.stop_s = 50;
    ceps::TabuTrace trace;
    const auto best = ceps::tabu_search(ahr.clustering, tp, &trace);
    for (std::size_t i = 1; i < trace.best_fitness.size(); ++i)
      monotone_bad += trace.best_fitness[i] > trace.best_fitness[i - 1];
    worse_than_ahr += best.fitness() > ahr.clustering.fitness();
  }
  const bool ok = pair_flatness == 0.0 && monotone_bad == 0 && worse_than_ahr == 0 && replay_bad == 0;
  return {ok, "antiphase flatness " + fmt("%g", pair_flatness) + "; 50 instances: " + std::to_string(monotone_bad) +
                  " best-fitness increases, " + std::to_string(worse_than_ahr) + " tabu worse than AHR, " +
                  std::to_string(replay_bad) + " replay failures"};
}

/// 1,000 small partitions of 100 objects on a 50 x 20 lattice.
std::vector<ceps::PlacedPattern> lattice(bool timezones, std::size_t buckets) {
  const auto model = timezones ? timezone_pattern_model(kDefaultExtent, buckets, 1.0)
                               : ceps::PatternModel([buckets](const ceps::Rect&, std::size_t count) {
                                   return std::vector<double>(buckets, double(count));
                                 });
  std::vector<ceps::PlacedPattern> out;
  const double w = kDefaultExtent / 50, h = kDefaultExtent / 20;
  for (std::size_t i = 0; i < 1000; ++i) {
    const double x = double(i % 50) * w, y = double(i / 50) * h;
    const ceps::Rect r{{x, y}, {x + w, y + h}};
    out.push_back({{static_cast<ceps::PartitionKey>(i), model(r, 100)}, r.center(), 100});
  }
  return out;
}

Verdict criterion_9() {
  const std::size_t buckets = 48;
  const auto ladder = ceps::TierLadder::doubling(3125, 0.05, 5);
  ceps::GridParams gp;
  gp.grid_capacity = 25000;
  auto costs = [&](bool timezones) {
    const auto parts = lattice(timezones, buckets);
    std::vector<ceps::AccessPattern> ps;
    for (const auto& p : parts) ps.push_back(p.pattern);
    ceps::CepsOptions opt;
    opt.tabu_params.stop_s = 50;
    const double ceps_cost = ceps::cost_report(ceps::ceps_plan(ps, ladder, opt), 24).cost;
    return std::pair{ceps_cost, ceps::baseline_gp(parts, ladder, gp).cost};
  };
  const auto [tz_ceps, tz_gp] = costs(true);
  const auto [flat_ceps, flat_gp] = costs(false);
  const double ratio = tz_ceps / tz_gp;
  return {ratio <= 0.80 && flat_ceps == flat_gp,
          "two timezones: CEPS+ " + fmt("%.2f", tz_ceps) + " vs GP " + fmt("%.2f", tz_gp) + " (ratio " +
              fmt("%.3f", ratio) + ", limit 0.80); flat: CEPS+ " + fmt("%.2f", flat_ceps) + " vs GP " +
              fmt("%.2f", flat_gp)};
}

Verdict criterion_10() {
  const auto objs = gen_uniform(50000, kDefaultExtent, 1000);
  const auto ladder = ceps::TierLadder::doubling(500, 0.05, 5);
  const auto model = timezone_pattern_model(kDefaultExtent, 48, 1.0);
  auto fresh = [&] {
    ceps::PrKdTree tree(kDefaultExtent, 1000);
    for (const auto& o : objs) tree.insert(o);
    std::vector<ceps::AccessPattern> ps;
    for (const auto& l : tree.leaves()) ps.push_back({l.id, model(l.rect, l.objects.size())});
    ceps::CepsOptions opt;
    opt.tabu = false;
    return ceps::IcepsState(std::move(tree), ceps::ceps_plan(ps, ladder, opt), model);
  };
  const std::vector<double> ratios{0.01, 0.05, 0.10}, skews{0.0, 1.0};
  std::map<std::pair<double, double>, double> ins, upd;
  bool below_one = true, updates_ge = true;
  std::string detail;
  for (double sf : skews) {
    for (double ratio : ratios) {
      const auto n = static_cast<std::size_t>(ratio * double(objs.size()));
      auto a = fresh();
      const auto reqs = ceps::gen_insert_requests(a.tree(), n, sf, 1001, objs.size());
      const auto ri = a.apply(reqs);
      auto b = fresh();
      const auto ru = b.apply(ceps::as_updates(reqs, objs, 1002));
      ins[{sf, ratio}] = ri.ratio();
      upd[{sf, ratio}] = ru.ratio();
      below_one &= ri.ratio() < 1.0 && ru.ratio() < 1.0;
      updates_ge &= ru.transferred >= ri.transferred;
      detail += " sf" + fmt("%g", sf) + "/" + fmt("%g", ratio * 100) + "%=" + fmt("%.4f", ri.ratio()) + "|" +
                fmt("%.4f", ru.ratio());
    }
  }
  bool monotone = true;
  for (double sf : skews)
    for (std::size_t i = 1; i < ratios.size(); ++i) monotone &= ins[{sf, ratios[i]}] >= ins[{sf, ratios[i - 1]}];
  for (double ratio : ratios) monotone &= ins[{1.0, ratio}] >= ins[{0.0, ratio}];
  return {below_one && monotone && updates_ge,
          std::string("insert|update transfer ratios:") + detail + (monotone ? "; monotone" : "; NOT monotone") +
              (updates_ge ? "; updates >= inserts" : "; updates < inserts")};
}

// Determinism of CLI outputs, timing fields removed.

const std::set<std::string> kTimingFields{"seconds", "wall_seconds", "warmup_queries", "measured_queries",
                                          "throughput", "messages_per_query"};

void strip_json(io::Json& j) {
  if (j.is_object()) {
    for (const auto& k : kTimingFields) j.erase(k);
    for (auto& [k, v] : j.items()) strip_json(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_json(v);
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string strip_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  std::vector<bool> keep;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      out += line + "\n";
      continue;
    }
    const auto cols = split(line);
    if (header) {
      for (const auto& c : cols) keep.push_back(!kTimingFields.count(c));
      header = false;
    }
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (i >= keep.size() || keep[i]) out += cols[i] + ",";
    out += "\n";
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string normalized(const fs::path& p) {
  const std::string raw = read_file(p);
  if (p.extension() == ".json") {
    auto j = io::Json::parse(raw);
    strip_json(j);
    return j.dump();
  }
  if (p.extension() == ".csv") return strip_csv(raw);
  return raw;
}

Verdict criterion_11() {
  const char* cli = std::getenv("DTOSS_CLI");
  if (!cli || !*cli) return {false, "DTOSS_CLI is not set"};
  const fs::path root = fs::temp_directory_path() / ("dtoss_determinism_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<std::string> runs{
      "gen --kind uniform --count 20000 --output uniform.bin",
      "gen --kind hotspot --count 20000 --output hotspot.csv",
      "gen --kind cosine --partitions 40 --buckets 48 --output cosine.csv",
      "gen --kind zipf --partitions 40 --buckets 48 --sf 1 --output zipf.csv",
      "build --objects {in}/hotspot.csv --nodes 6",
      "query --objects {in}/uniform.bin --nodes 4 --queries 300 --selectivity medium --measure 0.2 --warmup 0.1",
      "query --objects {in}/uniform.bin --nodes 4 --queries 300 --type knn --knn 8 --measure 0",
      "ceps --objects {in}/uniform.bin --leaf-capacity 200 --buckets 48 --tier-capacity 2000 --baselines "
      "--grid-capacity 5000 --stop 30",
      "iceps --objects {in}/uniform.bin --leaf-capacity 500 --buckets 48 --tier-capacity 4000",
      "oracle --points 1500 --nodes 4 --queries 50",
  };
  std::size_t files = 0, differing = 0, failed = 0;
  std::string bad;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path base = root / ("rep" + std::to_string(rep));
    const fs::path in = base / "inputs";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      std::string args = runs[i];
      for (auto at = args.find("{in}"); at != std::string::npos; at = args.find("{in}"))
        args.replace(at, 4, in.string());
      const fs::path out = args.rfind("gen ", 0) == 0 ? in : base / ("cmd" + std::to_string(i));
      fs::create_directories(out);
      const std::string cmd = std::string(cli) + " " + args + " --seed 13 --workers 2 --out-dir " + out.string() +
                              " >> " + (base / "log.txt").string() + " 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        if (rep == 0) bad += " [" + args + "]";
        ++failed;
      }
    }
  }
  for (const auto& e : fs::recursive_directory_iterator(root / "rep0")) {
    if (!e.is_regular_file() || e.path().filename() == "log.txt") continue;
    ++files;
    const fs::path twin = root / "rep1" / fs::relative(e.path(), root / "rep0");
    if (!fs::exists(twin) || normalized(e.path()) != normalized(twin)) {
      ++differing;
      bad += " " + fs::relative(e.path(), root / "rep0").string();
    }
  }
  fs::remove_all(root);
  return {failed == 0 && differing == 0 && files > 0,
          std::to_string(runs.size()) + " commands twice, " + std::to_string(files) + " output files, " +
              std::to_string(differing) + " differ, " + std::to_string(failed) + " failed" + bad};
}

const std::vector<std::pair<std::string, std::function<Verdict()>>> kCriteria{
    {"oracle equivalence of the index", criterion_1},
    {"oracle equivalence of range and kNN queries", criterion_2},
    {"partition balance on 1M uniform objects", criterion_3},
    {"inaccurate cells, adaptive vs random", criterion_4},
    {"replication cuts fix-phase messages", criterion_5},
    {"LVD build speedup and determinism", criterion_6},
    {"load drift with repartitioning disabled", criterion_7},
    {"CEPS flatness, tabu and AHR metrics", criterion_8},
    {"CEPS+ cost vs grid partitioning", criterion_9},
    {"ICEPS transfer ratios", criterion_10},
    {"CLI determinism", criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run one criterion (1-11)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);
  bool all_pass = true;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    if (only && static_cast<std::size_t>(only) != i + 1) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = kCriteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    all_pass &= v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << kCriteria[i].first << " -- "
              << v.detail << fmt(" [%.1f s]", seconds_since(t0)) << std::endl;
  }
  return all_pass ? 0 : 1;
}
