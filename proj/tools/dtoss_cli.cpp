// Command-line front end: dataset generation, distributed index construction,
// query batches, CEPS planning, ICEPS replay and oracle checks.
//
// Every report carries the root seed. Files go to --out-dir, which defaults
// to $DTOSS_OUTPUT_DIR and then to the working directory. With --stdout the
// machine-readable output goes to stdout and the human summary to stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dtoss/dtoss.hpp"
#include "dtoss/io.hpp"

namespace fs = std::filesystem;
using namespace dtoss;

namespace {

struct Common {
  std::uint64_t seed = 1;
  std::size_t workers = default_workers();
  bool to_stdout = false;
  std::string out_dir;
  double extent = kDefaultExtent;
};

struct BuildFlags {
  std::string objects;
  std::size_t nodes = 8;
  std::size_t candidates_per_pivot = 250;
  std::optional<std::size_t> trials;
  std::optional<double> lambda;
  double replicate = 0.05;
  std::size_t k = 3;
  std::size_t fanout = 16;
  bool random_partitioning = false;
  bool no_hierarchy = false;
  std::string accuracy_test = "tight";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Root seed")->capture_default_str();
  app->add_option("--workers", c.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_flag("--stdout", c.to_stdout, "Write machine-readable output to stdout");
  app->add_option("--out-dir", c.out_dir, "Output directory (default: $DTOSS_OUTPUT_DIR or .)");
  app->add_option("--extent", c.extent, "Side of the square space")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_build(CLI::App* app, BuildFlags& b) {
  app->add_option("--objects", b.objects, "Object file (.bin or .csv)")->required()->check(CLI::ExistingFile);
  app->add_option("--nodes", b.nodes, "Simulated nodes")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--candidates-per-pivot", b.candidates_per_pivot, "Pivot candidate sample per partition")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--trials", b.trials, "Pivot election trials (default: sample / partitions)");
  auto* lambda = app->add_option("--lambda", b.lambda, "Fixed replication distance")->check(CLI::NonNegativeNumber);
  app->add_option("--replicate", b.replicate, "Tune lambda to replicate this fraction of objects")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0))
      ->excludes(lambda);
  app->add_option("--k", b.k, "Z-order neighbors per side for approximate cells")->capture_default_str();
  app->add_option("--fanout", b.fanout, "Hierarchy fanout")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  app->add_flag("--random-partitioning", b.random_partitioning, "Keep the random placement");
  app->add_flag("--no-hierarchy", b.no_hierarchy, "Skip Voronoi hierarchies");
  app->add_option("--accuracy-test", b.accuracy_test, "tight or coarse")
      ->capture_default_str()
      ->check(CLI::IsMember({"tight", "coarse"}));
}

ConstructionConfig make_config(const Common& c, const BuildFlags& b) {
  ConstructionConfig cfg;
  cfg.seed = c.seed;
  cfg.extent = c.extent;
  cfg.candidates_per_pivot = b.candidates_per_pivot;
  cfg.election_trials = b.trials;
  if (b.lambda) {
    cfg.lambda = *b.lambda;
  } else {
    cfg.replicate_fraction = b.replicate;
  }
  cfg.k = b.k;
  cfg.fanout = b.fanout;
  cfg.random_partitioning = b.random_partitioning;
  cfg.build_hierarchies = !b.no_hierarchy;
  cfg.workers = c.workers;
  cfg.accuracy_test = b.accuracy_test == "coarse" ? AccuracyTest::coarse : AccuracyTest::tight;
  return cfg;
}

fs::path out_dir(const Common& c) {
  fs::path dir = c.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("DTOSS_OUTPUT_DIR");
    dir = env && *env ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
  if (!out) throw Error("write failed: " + path.string());
}

/// Machine output to stdout under --stdout, otherwise to a file.
void emit(const Common& c, const std::string& name, const std::string& body) {
  if (c.to_stdout) {
    std::cout << body;
    return;
  }
  write_file(out_dir(c) / name, body);
}

std::ostream& human(const Common& c) { return c.to_stdout ? std::cerr : std::cout; }

void header(const Common& c, const std::string& command) {
  human(c) << "dtoss " << command << "  seed=" << c.seed << "  workers=" << c.workers << "\n";
}

std::vector<ObjectRecord> load_objects(const Common& c, const std::string& path) {
  auto objs = io::read_objects(path);
  if (objs.empty()) throw Error("no objects in " + path);
  for (const auto& o : objs)
    if (!in_extent(o.location, c.extent)) throw Error("object " + std::to_string(o.id) + " lies outside the extent");
  const std::size_t moved = jitter_duplicates(objs, c.extent, c.seed);
  if (moved) human(c) << "separated " << moved << " duplicate locations\n";
  return objs;
}

std::string json_text(const io::Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// gen

struct GenFlags {
  std::string kind = "uniform";
  std::size_t count = 100000;
  std::size_t hotspots = 10;
  double sigma = 2e7;
  std::size_t partitions = 100;
  std::size_t buckets = ceps::kDefaultBuckets;
  double amplitude = 100;
  double base = 100;
  bool antiphase = false;
  double sf = 1.0;
  std::size_t total = 1000000;
  std::string input;
  std::string output;
};

int run_gen(const Common& c, const GenFlags& g) {
  header(c, "gen");
  const bool patterns = g.kind == "cosine" || g.kind == "zipf";
  std::string name = g.output.empty() ? (patterns ? "patterns.csv" : "objects.csv") : g.output;
  std::ostringstream body;
  if (patterns) {
    std::vector<ceps::AccessPattern> ps;
    if (g.kind == "cosine") {
      const auto shifts = g.antiphase ? antiphase_shifts(g.partitions, g.buckets) : random_shifts(g.partitions, g.buckets, c.seed);
      ps = gen_cosine_patterns(shifts, g.buckets, g.amplitude, g.base);
    } else {
      ps = gen_zipf_workload(g.partitions, g.buckets, g.sf, g.total, c.seed);
    }
    io::write_patterns_csv(body, ps);
    human(c) << "patterns: " << ps.size() << " x " << g.buckets << " buckets\n";
  } else {
    std::vector<ObjectRecord> objs;
    if (g.kind == "uniform") {
      objs = gen_uniform(g.count, c.extent, c.seed);
    } else if (g.kind == "hotspot") {
      HotspotSpec spec;
      spec.count = g.hotspots;
      spec.sigma = g.sigma;
      spec.extent = c.extent;
      objs = gen_hotspots(g.count, spec, c.seed);
    } else {
      if (g.input.empty()) throw CLI::ValidationError("--input", "required for check-ins");
      const auto ev = load_checkins(g.input);
      for (std::size_t i = 0; i < ev.size(); ++i) objs.push_back({i, checkin_location(ev[i], c.extent)});
    }
    if (io::is_csv_path(name) || c.to_stdout) {
      io::write_objects_csv(body, objs);
    } else {
      io::write_objects_binary(body, objs);
    }
    human(c) << "objects: " << objs.size() << "\n";
  }
  emit(c, name, body.str());
  if (!c.to_stdout) human(c) << "wrote " << (out_dir(c) / name).string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// build

int run_build(const Common& c, const BuildFlags& b, const std::string& format) {
  header(c, "build");
  const auto objs = load_objects(c, b.objects);
  const auto [index, rep] = run_construction(objs, b.nodes, make_config(c, b));
  std::ostringstream csv;
  io::write_report_csv(csv, rep);
  io::Json j = io::to_json(rep);
  j["plan"] = io::to_json(index.plan);
  if (c.to_stdout) {
    std::cout << (format == "json" ? json_text(j) : csv.str());
  } else {
    if (format != "json") write_file(out_dir(c) / "build_report.csv", csv.str());
    if (format != "csv") write_file(out_dir(c) / "build_report.json", json_text(j));
  }
  auto& h = human(c);
  h << "objects=" << objs.size() << " nodes=" << b.nodes << " lambda=" << io::detail::num(rep.lambda) << "\n";
  h << "shuffled=" << rep.shuffled_objects << " replicated=" << rep.replicated_objects
    << " inaccurate=" << rep.inaccurate_cells << " fix_messages=" << rep.fix_messages << "\n";
  h << "messages=" << rep.total_messages << " bytes=" << rep.total_bytes << "\n";
  for (const auto& ph : rep.phases)
    h << "  " << ph.name << ": " << ph.messages << " messages, " << ph.wall_seconds << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// query

struct QueryFlags {
  std::string type = "range";
  std::string selectivity = "small";
  std::optional<double> radius;
  std::size_t k = 8;
  std::size_t queries = 1000;
  double warmup = 0.5;
  double measure = 2.0;
};

int run_query_cmd(const Common& c, const BuildFlags& b, const QueryFlags& qf) {
  header(c, "query");
  const auto objs = load_objects(c, b.objects);
  auto cfg = make_config(c, b);
  const auto index = run_construction(objs, b.nodes, cfg).first;
  if (qf.type == "knn" && qf.k > objs.size()) throw Error("k exceeds object count");

  std::mt19937_64 rng(detail::mix_seed(c.seed, 7));
  std::uniform_real_distribution<double> u(0.0, c.extent);
  static const std::map<std::string, Selectivity> presets{
      {"small", Selectivity::small}, {"medium", Selectivity::medium}, {"large", Selectivity::large}};
  std::vector<QuerySpec> batch;
  for (std::size_t i = 0; i < qf.queries; ++i) {
    QuerySpec s;
    s.q = {u(rng), u(rng)};
    if (qf.type == "knn") {
      s.type = QueryType::knn;
      s.k = qf.k;
    } else if (qf.radius) {
      s.type = QueryType::range;
      s.radius = *qf.radius;
    } else {
      s.type = QueryType::selectivity;
      s.radius = selectivity_fraction(presets.at(qf.selectivity));
    }
    batch.push_back(s);
  }
  const auto results = run_batch(index, batch, c.workers);

  std::ostringstream out;
  out << "seed,query,type,x,y,param,results,messages,ids\n";
  std::size_t messages = 0, hits = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& s = batch[i];
    messages += results[i].messages;
    hits += results[i].objects.size();
    out << c.seed << ',' << i << ',' << qf.type << ',' << io::detail::num(s.q.x) << ',' << io::detail::num(s.q.y)
        << ',' << (s.type == QueryType::knn ? std::to_string(s.k) : io::detail::num(effective_radius(s, c.extent)))
        << ',' << results[i].objects.size() << ',' << results[i].messages << ',';
    for (std::size_t j = 0; j < results[i].objects.size(); ++j) out << (j ? ";" : "") << results[i].objects[j].id;
    out << '\n';
  }

  std::ostringstream tp;
  tp << "seed,type,queries,messages,warmup_queries,measured_queries,seconds,throughput,messages_per_query\n";
  tp << c.seed << ',' << qf.type << ',' << batch.size() << ',' << messages;
  double qps = 0.0;
  if (qf.measure > 0.0 && !batch.empty()) {
    const auto rep = measure_throughput(index, batch, qf.warmup, qf.measure);
    qps = rep.throughput();
    tp << ',' << rep.warmup_queries << ',' << rep.measured_queries << ',' << io::detail::num(rep.measured_seconds)
       << ',' << io::detail::num(rep.throughput()) << ',' << io::detail::num(rep.messages_per_query()) << '\n';
  } else {
    tp << ",0,0,0,0,0\n";
  }
  if (c.to_stdout) {
    std::cout << out.str();
  } else {
    write_file(out_dir(c) / "query_results.csv", out.str());
    write_file(out_dir(c) / "throughput.csv", tp.str());
  }
  human(c) << "queries=" << batch.size() << " results=" << hits << " messages=" << messages
           << " throughput=" << qps << " q/s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ceps and iceps

struct CepsFlags {
  std::string objects;
  std::string patterns;
  std::size_t leaf_capacity = 1000;
  std::string model = "timezone";
  double per_object = 1.0;
  std::size_t buckets = ceps::kDefaultBuckets;
  double tier_capacity = 10000;
  double tier_cost = 0.1;
  std::size_t tiers = 5;
  bool no_tabu = false;
  std::size_t tabu_size = 50;
  double eta = 10.0;
  std::size_t stop = 100;
  std::size_t max_iterations = 100000;
  double hours = 24.0;
  std::size_t grid_capacity = 100000;
  bool baselines = false;
  // iceps
  std::vector<double> ratios{0.01, 0.05, 0.10};
  std::vector<double> skews{0.0, 1.0};
  std::string mode = "both";
  std::size_t num_groups = 10;
};

void add_ceps(CLI::App* app, CepsFlags& f) {
  app->add_option("--objects", f.objects, "Object file (.bin or .csv)")->required()->check(CLI::ExistingFile);
  app->add_option("--leaf-capacity", f.leaf_capacity, "Objects per small partition")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--model", f.model, "Leaf pattern model: timezone or flat")
      ->capture_default_str()
      ->check(CLI::IsMember({"timezone", "flat"}));
  app->add_option("--per-object", f.per_object, "Mean accesses per object per bucket")->capture_default_str();
  app->add_option("--buckets", f.buckets, "Buckets per day")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--tier-capacity", f.tier_capacity, "Smallest tier capacity")->capture_default_str();
  app->add_option("--tier-cost", f.tier_cost, "Smallest tier hourly cost")->capture_default_str();
  app->add_option("--tiers", f.tiers, "Tier count (each doubles the previous)")->capture_default_str();
  app->add_option("--num-groups", f.num_groups, "Flatness groups for incremental placement")->capture_default_str();
}

ceps::TierLadder ladder_of(const CepsFlags& f) { return ceps::TierLadder::doubling(f.tier_capacity, f.tier_cost, f.tiers); }

ceps::PatternModel model_of(const Common& c, const CepsFlags& f) {
  if (f.model == "flat") {
    const double rate = f.per_object;
    const std::size_t b = f.buckets;
    return [rate, b](const ceps::Rect&, std::size_t count) { return std::vector<double>(b, double(count) * rate); };
  }
  return timezone_pattern_model(c.extent, f.buckets, f.per_object);
}

int run_ceps(const Common& c, const CepsFlags& f) {
  header(c, "ceps");
  const auto objs = load_objects(c, f.objects);
  const auto leaves = ceps::build_small_partitions(objs, f.leaf_capacity, c.extent);
  std::vector<ceps::AccessPattern> patterns;
  if (!f.patterns.empty()) {
    std::ifstream in(f.patterns);
    if (!in) throw Error("cannot open " + f.patterns);
    patterns = io::read_patterns_csv(in, f.buckets);
    if (patterns.size() != leaves.size())
      throw Error("pattern file has " + std::to_string(patterns.size()) + " partitions, expected " +
                  std::to_string(leaves.size()));
  } else {
    const auto model = model_of(c, f);
    for (std::size_t i = 0; i < leaves.size(); ++i)
      patterns.push_back({static_cast<ceps::PartitionKey>(i), model(leaves[i].rect, leaves[i].objects.size())});
  }
  const auto ladder = ladder_of(f);
  ceps::CepsOptions opt;
  opt.tabu = !f.no_tabu;
  opt.tabu_params.tabu_size = f.tabu_size;
  if (f.eta > 0.0) {
    opt.tabu_params.eta = f.eta;
  } else {
    opt.tabu_params.eta.reset();
  }
  opt.tabu_params.stop_s = f.stop;
  opt.tabu_params.max_iterations = f.max_iterations;
  opt.tabu_params.seed = c.seed;
  const auto clustering = ceps::ceps_plan(patterns, ladder, opt);

  std::vector<ceps::CostReport> costs{ceps::cost_report(clustering, f.hours, opt.tabu ? "ceps_plus" : "ceps_minus")};
  if (f.baselines) {
    const auto placed = ceps::place_patterns(leaves, patterns);
    ceps::GridParams gp;
    gp.extent = c.extent;
    gp.grid_capacity = f.grid_capacity;
    gp.horizon_hours = f.hours;
    gp.seed = c.seed;
    costs.push_back(ceps::baseline_gp(placed, ladder, gp));
    costs.push_back(ceps::baseline_gp_r(placed, ladder, gp));
    costs.push_back(ceps::baseline_gp_aas(placed, ladder, gp));
  }
  io::Json j = io::to_json(clustering);
  j["seed"] = c.seed;
  j["small_partitions"] = leaves.size();
  std::ostringstream cost_csv;
  io::write_cost_csv(cost_csv, costs);
  if (c.to_stdout) {
    std::cout << cost_csv.str();
  } else {
    write_file(out_dir(c) / "clustering.json", json_text(j));
    std::ostringstream with_seed;
    with_seed << "# seed=" << c.seed << "\n" << cost_csv.str();
    write_file(out_dir(c) / "cost.csv", with_seed.str());
  }
  human(c) << "small partitions=" << leaves.size() << " servers=" << costs[0].servers.size() << "\n";
  for (const auto& r : costs) human(c) << "  " << r.method << ": cost " << r.cost << " (" << r.servers.size() << " servers)\n";
  return 0;
}

int run_iceps(const Common& c, const CepsFlags& f) {
  header(c, "iceps");
  const auto objs = load_objects(c, f.objects);
  const auto ladder = ladder_of(f);
  const auto model = model_of(c, f);
  auto fresh = [&] {
    ceps::PrKdTree tree(c.extent, f.leaf_capacity);
    for (const auto& o : objs) tree.insert(o);
    std::vector<ceps::AccessPattern> ps;
    for (const auto& l : tree.leaves()) ps.push_back({l.id, model(l.rect, l.objects.size())});
    ceps::CepsOptions opt;
    opt.tabu = false;
    auto clustering = ceps::ceps_plan(ps, ladder, opt);
    return ceps::IcepsState(std::move(tree), std::move(clustering), model, {f.num_groups});
  };
  ObjectId next_id = 0;
  for (const auto& o : objs) next_id = std::max(next_id, o.id + 1);

  std::ostringstream out;
  out << "seed,mode,ratio,sf,requests,transferred,initial_objects,transfer_ratio,splits,merges,replaced,new_clusters\n";
  auto row = [&](const char* mode, double ratio, double sf, const ceps::TransferReport& r) {
    out << c.seed << ',' << mode << ',' << io::detail::num(ratio) << ',' << io::detail::num(sf) << ',' << r.requests << ','
        << r.transferred << ',' << r.initial_objects << ',' << io::detail::num(r.ratio()) << ',' << r.splits << ','
        << r.merges << ',' << r.replaced << ',' << r.new_clusters << '\n';
    human(c) << "  " << mode << " ratio=" << ratio << " sf=" << sf << ": transfer ratio " << r.ratio() << "\n";
  };
  for (double sf : f.skews) {
    for (double ratio : f.ratios) {
      const auto n = static_cast<std::size_t>(std::llround(ratio * double(objs.size())));
      auto base = fresh();
      const std::uint64_t rs = detail::mix_seed(c.seed, static_cast<std::uint64_t>(ratio * 1e6) * 31 + static_cast<std::uint64_t>(sf * 1e3));
      const auto inserts = ceps::gen_insert_requests(base.tree(), n, sf, rs, next_id);
      if (f.mode != "update") row("insert", ratio, sf, base.apply(inserts));
      if (f.mode != "insert") {
        auto st = fresh();
        row("update", ratio, sf, st.apply(ceps::as_updates(inserts, objs, rs + 1)));
      }
    }
  }
  emit(c, "iceps.csv", out.str());
  return 0;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleFlags {
  std::size_t points = 2000;
  std::size_t nodes = 4;
  std::optional<double> replicate;
  std::size_t queries = 200;
  std::string objects;
};

int run_oracle(const Common& c, const OracleFlags& f) {
  header(c, "oracle");
  std::vector<ObjectRecord> objs =
      f.objects.empty() ? gen_uniform(f.points, c.extent, c.seed) : load_objects(c, f.objects);
  if (f.objects.empty()) jitter_duplicates(objs, c.extent, c.seed);
  ConstructionConfig cfg;
  cfg.seed = c.seed;
  cfg.extent = c.extent;
  cfg.workers = c.workers;
  cfg.replicate_fraction = f.replicate;
  cfg.candidates_per_pivot = std::max<std::size_t>(1, std::min<std::size_t>(250, objs.size() / f.nodes));
  const auto index = run_construction(objs, f.nodes, cfg).first;

  // Object ids are arbitrary; the oracle works on positions.
  std::vector<Point> pts;
  std::map<ObjectId, std::size_t> pos;
  for (const auto& o : objs) {
    pos[o.id] = pts.size();
    pts.push_back(o.location);
  }
  const auto oracle = brute_force_voronoi(pts, c.extent);
  const double tol = geometric_epsilon(c.extent);
  std::size_t cells = 0, cell_mismatch = 0;
  for (const auto& part : index.partitions) {
    for (std::size_t i = 0; i < part.lvd.primary_count; ++i) {
      ++cells;
      const auto& cell = part.lvd.cells[i];
      if (cell.status != CellStatus::accurate || !same_vertex_set(cell, oracle[pos.at(part.lvd.objects[i].id)], tol))
        ++cell_mismatch;
    }
  }
  if (cells != objs.size()) cell_mismatch += objs.size() > cells ? objs.size() - cells : cells - objs.size();

  std::mt19937_64 rng(detail::mix_seed(c.seed, 11));
  std::uniform_real_distribution<double> u(0.0, c.extent);
  const double r = selectivity_radius(selectivity_fraction(Selectivity::large), c.extent);
  const std::size_t k = std::min<std::size_t>(8, objs.size());
  std::size_t range_mismatch = 0, knn_mismatch = 0;
  for (std::size_t t = 0; t < f.queries; ++t) {
    const Point q{u(rng), u(rng)};
    const NodeId from = static_cast<NodeId>(t % index.owner.size());
    std::vector<ObjectId> want;
    std::vector<std::pair<double, ObjectId>> by_dist;
    for (const auto& o : objs) {
      if (dist(q, o.location) <= r) want.push_back(o.id);
      by_dist.push_back({dist(q, o.location), o.id});
    }
    std::sort(want.begin(), want.end());
    std::sort(by_dist.begin(), by_dist.end());
    std::vector<ObjectId> got;
    for (const auto& o : range_query(index, q, r, from).objects) got.push_back(o.id);
    range_mismatch += got != want;
    const auto kn = knn_query(index, q, k, from).objects;
    bool same = kn.size() == k;
    for (std::size_t i = 0; same && i < k; ++i) same = kn[i].id == by_dist[i].second;
    knn_mismatch += !same;
  }

  std::ostringstream out;
  out << "seed,check,cases,mismatches\n";
  out << c.seed << ",voronoi," << objs.size() << ',' << cell_mismatch << '\n';
  out << c.seed << ",range," << f.queries << ',' << range_mismatch << '\n';
  out << c.seed << ",knn," << f.queries << ',' << knn_mismatch << '\n';
  emit(c, "oracle.csv", out.str());
  const bool ok = cell_mismatch == 0 && range_mismatch == 0 && knn_mismatch == 0;
  human(c) << "voronoi mismatches=" << cell_mismatch << " range mismatches=" << range_mismatch
           << " knn mismatches=" << knn_mismatch << "\n"
           << (ok ? "oracle: equal\n" : "oracle: MISMATCH\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed Voronoi spatial index and elastic partition placement"};
  app.require_subcommand(1);
  Common common;

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate objects or access patterns");
  add_common(gen_cmd, common);
  gen_cmd->add_option("--kind", gen.kind, "uniform, hotspot, checkins, cosine or zipf")
      ->capture_default_str()
      ->check(CLI::IsMember({"uniform", "hotspot", "checkins", "cosine", "zipf"}));
  gen_cmd->add_option("--count", gen.count, "Objects")->capture_default_str();
  gen_cmd->add_option("--hotspots", gen.hotspots, "Hotspot count")->capture_default_str();
  gen_cmd->add_option("--sigma", gen.sigma, "Hotspot standard deviation")->capture_default_str();
  gen_cmd->add_option("--partitions", gen.partitions, "Pattern rows")->capture_default_str();
  gen_cmd->add_option("--buckets", gen.buckets, "Buckets per day")->capture_default_str();
  gen_cmd->add_option("--amplitude", gen.amplitude, "Cosine amplitude")->capture_default_str();
  gen_cmd->add_option("--base", gen.base, "Cosine base level")->capture_default_str();
  gen_cmd->add_flag("--antiphase", gen.antiphase, "Alternate 0 and half-day phases");
  gen_cmd->add_option("--sf", gen.sf, "Zipf skew factor")->capture_default_str();
  gen_cmd->add_option("--total", gen.total, "Total accesses for zipf patterns")->capture_default_str();
  gen_cmd->add_option("--input", gen.input, "Check-in CSV")->check(CLI::ExistingFile);
  gen_cmd->add_option("--output", gen.output, "Output file name");

  BuildFlags build;
  std::string format = "both";
  auto* build_cmd = app.add_subcommand("build", "Run one distributed construction cycle");
  add_common(build_cmd, common);
  add_build(build_cmd, build);
  build_cmd->add_option("--format", format, "csv, json or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json", "both"}));

  QueryFlags query;
  auto* query_cmd = app.add_subcommand("query", "Run a range or kNN batch and measure throughput");
  add_common(query_cmd, common);
  add_build(query_cmd, build);
  query_cmd->add_option("--type", query.type, "range or knn")->capture_default_str()->check(CLI::IsMember({"range", "knn"}));
  query_cmd->add_option("--selectivity", query.selectivity, "small, medium or large")
      ->capture_default_str()
      ->check(CLI::IsMember({"small", "medium", "large"}));
  query_cmd->add_option("--radius", query.radius, "Absolute radius (overrides selectivity)")
      ->check(CLI::NonNegativeNumber);
  query_cmd->add_option("--knn", query.k, "Neighbors per kNN query")->capture_default_str()->check(CLI::PositiveNumber);
  query_cmd->add_option("--queries", query.queries, "Batch size")->capture_default_str();
  query_cmd->add_option("--warmup", query.warmup, "Warm-up seconds")->capture_default_str();
  query_cmd->add_option("--measure", query.measure, "Measurement seconds (0 skips throughput)")->capture_default_str();

  CepsFlags cf;
  auto* ceps_cmd = app.add_subcommand("ceps", "Plan small-partition placement and report cost");
  add_common(ceps_cmd, common);
  add_ceps(ceps_cmd, cf);
  ceps_cmd->add_option("--patterns", cf.patterns, "Pattern CSV, one partition per small partition")
      ->check(CLI::ExistingFile);
  ceps_cmd->add_flag("--no-tabu", cf.no_tabu, "Agglomerative clustering only");
  ceps_cmd->add_option("--tabu-size", cf.tabu_size, "Tabu list length")->capture_default_str();
  ceps_cmd->add_option("--eta", cf.eta, "Flatness filter in percent (0 disables)")->capture_default_str();
  ceps_cmd->add_option("--stop", cf.stop, "Iterations without improvement before stopping")->capture_default_str();
  ceps_cmd->add_option("--max-iterations", cf.max_iterations, "Tabu iteration cap")->capture_default_str();
  ceps_cmd->add_option("--hours", cf.hours, "Billing horizon")->capture_default_str();
  ceps_cmd->add_option("--grid-capacity", cf.grid_capacity, "Objects per grid cell for baselines")->capture_default_str();
  ceps_cmd->add_flag("--baselines", cf.baselines, "Also price GP, GP-R and GP-AAS");

  auto* iceps_cmd = app.add_subcommand("iceps", "Replay insert and update streams against a placement");
  add_common(iceps_cmd, common);
  add_ceps(iceps_cmd, cf);
  iceps_cmd->add_option("--ratios", cf.ratios, "Request counts as fractions of the dataset")->capture_default_str();
  iceps_cmd->add_option("--sf", cf.skews, "Zipf skew factors for insert locations")->capture_default_str();
  iceps_cmd->add_option("--mode", cf.mode, "insert, update or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"insert", "update", "both"}));

  OracleFlags oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "Check the index against brute-force oracles");
  add_common(oracle_cmd, common);
  oracle_cmd->add_option("--points", oracle.points, "Uniform points to generate")->capture_default_str();
  oracle_cmd->add_option("--nodes", oracle.nodes, "Simulated nodes")->capture_default_str()->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--replicate", oracle.replicate, "Replicated fraction")->check(CLI::Range(0.0, 1.0));
  oracle_cmd->add_option("--queries", oracle.queries, "Range and kNN queries to check")->capture_default_str();
  oracle_cmd->add_option("--objects", oracle.objects, "Use this object file instead")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen_cmd) return run_gen(common, gen);
    if (*build_cmd) return run_build(common, build, format);
    if (*query_cmd) return run_query_cmd(common, build, query);
    if (*ceps_cmd) return run_ceps(common, cf);
    if (*iceps_cmd) return run_iceps(common, cf);
    if (*oracle_cmd) return run_oracle(common, oracle);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
