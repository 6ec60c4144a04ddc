#ifndef IRMKIT_IO_HPP
#define IRMKIT_IO_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "irmkit/errors.hpp"
#include "irmkit/evaluate.hpp"
#include "irmkit/model.hpp"
#include "irmkit/netstats.hpp"
#include "irmkit/partition.hpp"
#include "irmkit/sampler.hpp"

namespace irmkit {

using json = nlohmann::json;

// Partitions serialize as their canonical label array.
inline json to_json(const Partition& p) { return json(p.labels()); }

inline Partition partition_from_json(const json& j) {
  if (!j.is_array()) throw DataError("partition must be a JSON array of labels");
  return Partition(j.get<std::vector<BlockLabel>>());
}

template <class T>
json to_json(const BlockMatrix<T>& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const BlockStats& s) {
  json j;
  j["kind"] = std::string(to_string(s.kind));
  j["family"] = s.poisson ? "gamma-poisson" : "beta-bernoulli";
  j["n"] = s.row_sizes;
  if (s.bipartite()) j["n_col"] = s.col_sizes;
  j["M"] = json::array();
  j["Mbar"] = json::array();
  for (std::size_t c = 0; c < s.channels(); ++c) {
    j["M"].push_back(to_json(s.links[c]));
    j["Mbar"].push_back(to_json(s.mbar[c]));
  }
  return j;
}

inline json to_json(const ChainConfig& c) {
  const char* init = c.init == InitKind::Singletons ? "singletons"
                     : c.init == InitKind::OneBlock ? "one"
                                                    : "crp";
  return {{"sweeps", c.sweeps}, {"burn_in", c.burn_in}, {"thin", c.thin}, {"seed", c.seed},
          {"init", init},       {"chains", c.chains},   {"fixed_scan", c.fixed_scan}};
}

inline json to_json(const ModelSpec& spec) {
  json j;
  j["kind"] = std::string(to_string(spec.kind));
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, BetaBernoulli>) {
          j["family"] = "beta-bernoulli";
          j["a"] = f.a;
          j["b"] = f.b;
        } else {
          j["family"] = "gamma-poisson";
          j["shape"] = f.shape;
          j["rate"] = f.rate;
        }
      },
      spec.obs);
  j["A"] = spec.crp.A;
  if (spec.kind == GraphKind::Bipartite) j["A_col"] = spec.crp_col.A;
  j["tying"] = spec.tying == Tying::SharedPhi ? "shared" : "per-network";
  return j;
}

inline json to_json(const Sample& s) {
  json j = {{"sweep", s.sweep}, {"logp", s.logp}, {"K", s.K}, {"z", to_json(s.z)}};
  if (s.w) {
    j["K_col"] = s.K_col;
    j["w"] = to_json(*s.w);
  }
  return j;
}

// Newline-delimited JSON: a header record, then one record per sample.
inline void write_trace(std::ostream& out, const Trace& t, const ModelSpec& spec,
                        std::uint64_t data_checksum) {
  json header = {{"type", "header"},
                 {"chain", t.chain},
                 {"chain_seed", t.seed},
                 {"config", to_json(t.config)},
                 {"model", to_json(spec)},
                 {"data_checksum", data_checksum}};
  out << header.dump() << '\n';
  for (const Sample& s : t.samples) out << to_json(s).dump() << '\n';
}

inline Trace read_trace(std::istream& in) {
  Trace t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.contains("type") && j["type"] == "header") {
      t.chain = j.at("chain").get<std::size_t>();
      t.seed = j.at("chain_seed").get<std::uint64_t>();
      const json& c = j.at("config");
      t.config.sweeps = c.at("sweeps");
      t.config.burn_in = c.at("burn_in");
      t.config.thin = c.at("thin");
      t.config.seed = c.at("seed");
      t.config.chains = c.at("chains");
      t.config.fixed_scan = c.at("fixed_scan");
      const std::string init = c.at("init");
      t.config.init = init == "one" ? InitKind::OneBlock : init == "crp" ? InitKind::CrpDraw : InitKind::Singletons;
      header = true;
      continue;
    }
    Sample s;
    s.sweep = j.at("sweep");
    s.logp = j.at("logp");
    s.K = j.at("K");
    s.z = partition_from_json(j.at("z"));
    if (j.contains("w")) {
      s.w = partition_from_json(j.at("w"));
      s.K_col = j.at("K_col");
    }
    t.samples.push_back(std::move(s));
  }
  if (!header) throw DataError("trace has no header record");
  return t;
}

inline json to_json(const PpcStatistic& s) {
  auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  return {{"name", s.name},         {"observed", num(s.observed)}, {"quantile", num(s.quantile)},
          {"lo95", num(s.lo95)},    {"hi95", num(s.hi95)},         {"lo50", num(s.lo50)},
          {"hi50", num(s.hi50)},    {"undefined", s.undefined},    {"ensemble", s.ensemble}};
}

inline json to_json(const PpcReport& r) {
  json j = {{"replicates", r.replicates}, {"statistics", json::array()}};
  for (const auto& s : r.statistics) j["statistics"].push_back(to_json(s));
  return j;
}

namespace detail {
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
}  // namespace detail

inline void write_ppc_csv(std::ostream& out, const PpcReport& r) {
  out << "statistic,observed,quantile,lo95,hi95,lo50,hi50,n,undefined\n";
  for (const auto& s : r.statistics) {
    out << s.name << ',' << detail::fmt(s.observed) << ',' << detail::fmt(s.quantile) << ','
        << detail::fmt(s.lo95) << ',' << detail::fmt(s.hi95) << ',' << detail::fmt(s.lo50) << ','
        << detail::fmt(s.hi50) << ',' << s.ensemble.size() << ',' << s.undefined << '\n';
  }
}

inline void write_stats_csv(std::ostream& out, const NetCharacteristics& c) {
  out << "N,L,degree_mean,degree_std,clustering,cpl,n_components\n";
  out << c.nodes << ',' << c.links << ',' << detail::fmt(c.degree_mean) << ',' << detail::fmt(c.degree_std)
      << ',' << detail::fmt(c.clustering) << ',' << detail::fmt(c.cpl) << ',' << c.components << '\n';
}

// 64-bit FNV-1a of a file's bytes.
inline std::uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace irmkit

#endif  // IRMKIT_IO_HPP
