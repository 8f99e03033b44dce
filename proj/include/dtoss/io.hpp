#pragma once

// File formats: object files (binary little-endian or CSV), JSON for plans,
// reports and clusterings, CSV for reports, patterns and costs.

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dtoss/ceps/baselines.hpp"
#include "dtoss/ceps/clustering.hpp"
#include "dtoss/cluster_sim.hpp"
#include "dtoss/error.hpp"
#include "dtoss/local_index.hpp"
#include "dtoss/partitioner.hpp"

namespace dtoss::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Objects.

inline constexpr std::size_t kObjectRecordBytes = 24;

namespace detail {

inline void put_u64(unsigned char* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

inline std::uint64_t get_u64(const unsigned char* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(in[i]) << (8 * i);
  return v;
}

inline std::uint64_t bits(double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  return v;
}

inline double from_bits(std::uint64_t v) {
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

/// Shortest text that reads back to the same double.
inline std::string num(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace detail

inline void write_objects_binary(std::ostream& out, std::span<const ObjectRecord> objects) {
  std::array<unsigned char, kObjectRecordBytes> rec;
  for (const auto& o : objects) {
    detail::put_u64(rec.data(), o.id);
    detail::put_u64(rec.data() + 8, detail::bits(o.location.x));
    detail::put_u64(rec.data() + 16, detail::bits(o.location.y));
    out.write(reinterpret_cast<const char*>(rec.data()), rec.size());
  }
}

inline std::vector<ObjectRecord> read_objects_binary(std::istream& in) {
  std::vector<ObjectRecord> out;
  std::array<unsigned char, kObjectRecordBytes> rec;
  for (;;) {
    in.read(reinterpret_cast<char*>(rec.data()), rec.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    if (got != rec.size()) throw Error("truncated object file");
    out.push_back({detail::get_u64(rec.data()),
                   {detail::from_bits(detail::get_u64(rec.data() + 8)),
                    detail::from_bits(detail::get_u64(rec.data() + 16))}});
  }
  return out;
}

inline void write_objects_csv(std::ostream& out, std::span<const ObjectRecord> objects) {
  out << "id,x,y\n";
  for (const auto& o : objects) out << o.id << ',' << detail::num(o.location.x) << ',' << detail::num(o.location.y) << '\n';
}

inline std::vector<ObjectRecord> read_objects_csv(std::istream& in) {
  std::vector<ObjectRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv(line);
    if (lineno == 1 && !f.empty() && f[0] == "id") continue;
    if (f.size() != 3) throw Error("malformed object at line " + std::to_string(lineno));
    try {
      out.push_back({std::stoull(f[0]), {std::stod(f[1]), std::stod(f[2])}});
    } catch (const std::logic_error&) {
      throw Error("malformed object at line " + std::to_string(lineno));
    }
  }
  return out;
}

inline bool is_csv_path(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

inline std::vector<ObjectRecord> read_objects(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return is_csv_path(path) ? read_objects_csv(in) : read_objects_binary(in);
}

inline void write_objects(const std::string& path, std::span<const ObjectRecord> objects) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  if (is_csv_path(path)) write_objects_csv(out, objects);
  else write_objects_binary(out, objects);
}

// ---------------------------------------------------------------------------
// Partition plans.

inline Json to_json(const PartitionPlan& plan) {
  Json j;
  j["extent"] = plan.extent;
  j["lambda"] = plan.lambda;
  j["seed"] = plan.pivot_set.seed;
  Json pivots = Json::array();
  for (const Point& p : plan.pivot_set.pivots) pivots.push_back({p.x, p.y});
  j["pivots"] = pivots;
  j["adjacency"] = plan.adjacency;
  return j;
}

inline PartitionPlan plan_from_json(const Json& j) {
  PivotSet ps;
  ps.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& p : j.at("pivots")) ps.pivots.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return make_plan(std::move(ps), j.at("extent").get<double>(), j.at("lambda").get<double>());
}

// ---------------------------------------------------------------------------
// Construction reports.

inline Json to_json(const ConstructionReport& r, bool include_timing = true) {
  Json j;
  j["seed"] = r.seed;
  j["nodes"] = r.nodes;
  j["objects"] = r.objects;
  j["lambda"] = r.lambda;
  j["total_messages"] = r.total_messages;
  j["total_bytes"] = r.total_bytes;
  j["messages_sent"] = r.messages_sent;
  j["messages_received"] = r.messages_received;
  j["shuffled_objects"] = r.shuffled_objects;
  j["replica_copies"] = r.replica_copies;
  j["replicated_objects"] = r.replicated_objects;
  j["inaccurate_cells"] = r.inaccurate_cells;
  j["inaccurate_without_replication"] = r.inaccurate_without_replication;
  j["ir_requests"] = r.ir_requests;
  j["fix_messages"] = r.fix_messages;
  j["fix_objects"] = r.fix_objects;
  j["alpha"] = r.alpha();
  j["beta"] = r.beta();
  j["partition_size_cv"] = r.partition_size_cv();
  j["partition_sizes"] = r.partition_sizes;
  Json phases = Json::array();
  for (const auto& p : r.phases) {
    Json ph;
    ph["phase"] = p.name;
    if (include_timing) ph["seconds"] = p.wall_seconds;
    ph["messages"] = p.messages;
    ph["bytes"] = p.bytes;
    phases.push_back(ph);
  }
  j["phases"] = phases;
  return j;
}

inline void write_report_csv(std::ostream& out, const ConstructionReport& r, bool include_timing = true) {
  out << "seed,phase," << (include_timing ? "seconds," : "") << "messages,bytes\n";
  for (const auto& p : r.phases) {
    out << r.seed << ',' << p.name << ',';
    if (include_timing) out << detail::num(p.wall_seconds) << ',';
    out << p.messages << ',' << p.bytes << '\n';
  }
}

// ---------------------------------------------------------------------------
// Clusterings, patterns and costs.

inline Json to_json(const ceps::Clustering& c) {
  Json j;
  j["buckets"] = c.buckets();
  j["fitness"] = c.fitness();
  Json tiers = Json::array();
  for (const auto& t : c.ladder().tiers()) tiers.push_back({{"tier", t.id}, {"capacity", t.capacity}, {"cost_per_hour", t.cost_per_hour}});
  j["tiers"] = tiers;
  Json clusters = Json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& cl = c.cluster(i);
    if (cl.empty()) continue;
    Json e;
    e["cluster"] = clusters.size();
    e["members"] = cl.members;
    e["tier"] = c.ladder().covering_or_throw(cl.peak);
    e["peak"] = cl.peak;
    e["idle"] = c.idle(i);
    e["flatness"] = c.flatness_of(i);
    clusters.push_back(e);
  }
  j["clusters"] = clusters;
  return j;
}

/// Reads `partition_id,bucket_index,count` rows; missing cells are zero.
/// The bucket count is the largest index + 1 unless `buckets` is given.
inline std::vector<ceps::AccessPattern> read_patterns_csv(std::istream& in, std::size_t buckets = 0) {
  std::map<ceps::PartitionKey, std::map<std::size_t, double>> cells;
  std::string line;
  std::size_t lineno = 0, max_bucket = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv(line);
    if (lineno == 1 && !f.empty() && f[0] == "partition_id") continue;
    auto fail = [&] { return Error("malformed pattern row at line " + std::to_string(lineno)); };
    if (f.size() != 3) throw fail();
    try {
      const auto p = static_cast<ceps::PartitionKey>(std::stoul(f[0]));
      const std::size_t b = std::stoull(f[1]);
      const double v = std::stod(f[2]);
      if (v < 0) throw fail();
      cells[p][b] += v;
      max_bucket = std::max(max_bucket, b);
    } catch (const std::logic_error&) {
      throw fail();
    }
  }
  if (buckets == 0) buckets = cells.empty() ? 0 : max_bucket + 1;
  if (!cells.empty() && max_bucket >= buckets) throw Error("bucket index out of range");
  std::vector<ceps::AccessPattern> out;
  for (const auto& [p, row] : cells) {
    ceps::AccessPattern ap{p, std::vector<double>(buckets, 0.0)};
    for (const auto& [b, v] : row) ap.buckets[b] = v;
    out.push_back(std::move(ap));
  }
  return out;
}

inline void write_patterns_csv(std::ostream& out, std::span<const ceps::AccessPattern> patterns) {
  out << "partition_id,bucket_index,count\n";
  for (const auto& p : patterns)
    for (std::size_t t = 0; t < p.buckets.size(); ++t)
      out << p.partition << ',' << t << ',' << detail::num(p.buckets[t]) << '\n';
}

inline void write_cost_csv(std::ostream& out, std::span<const ceps::CostReport> reports) {
  out << "method,servers,horizon_hours,cost\n";
  for (const auto& r : reports)
    out << r.method << ',' << r.servers.size() << ',' << detail::num(r.horizon_hours) << ',' << detail::num(r.cost) << '\n';
}

}  // namespace dtoss::io
