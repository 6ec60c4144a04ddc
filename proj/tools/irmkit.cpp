// irmkit: fit, evaluate and simulate infinite relational models of networks.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 usage, 3 data, 4 numeric.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "irmkit/irmkit.hpp"

namespace fs = std::filesystem;
using namespace irmkit;

#ifndef IRMKIT_VERSION
#define IRMKIT_VERSION "unknown"
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct DataOptions {
  std::vector<std::string> graphs;
  std::string kind = "undirected";
  bool weighted = false;
  bool one_indexed = false;
  std::string self_loops = "reject";
};

struct ModelOptions {
  double a = 1.0;
  double b = 1.0;
  double shape = 1.0;
  double rate = 1.0;
  double A = 1.0;
  std::optional<double> A_col;
  std::string tying = "shared";
};

struct ChainOptions {
  std::size_t sweeps = 500;
  std::size_t burn_in = 250;
  std::size_t thin = 1;
  std::size_t chains = 5;
  std::string init = "singletons";
  bool fixed_scan = false;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string out;
};

// Everything a run needs to write its manifest.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  fs::path dir;
  json config = json::object();
  json inputs = json::object();
  json timings = json::object();
  Clock::time_point start = Clock::now();
};

void add_data_options(CLI::App& app, DataOptions& d, bool required_graph = true) {
  auto* g = app.add_option("--graph", d.graphs, "edge list file; repeat for multiple networks on shared nodes");
  if (required_graph) g->required();
  app.add_option("--kind", d.kind, "undirected, directed or bipartite")
      ->check(CLI::IsMember({"undirected", "directed", "bipartite"}));
  app.add_flag("--weighted", d.weighted, "integer link weights with the Gamma-Poisson model");
  app.add_flag("--one-indexed", d.one_indexed, "node indices in the files start at 1");
  app.add_option("--self-loops", d.self_loops, "reject or drop self-loops")
      ->check(CLI::IsMember({"reject", "drop"}));
}

void add_model_options(CLI::App& app, ModelOptions& m) {
  app.add_option("--a", m.a, "Beta prior, links");
  app.add_option("--b", m.b, "Beta prior, non-links");
  app.add_option("--shape", m.shape, "Gamma prior shape (weighted)");
  app.add_option("--rate", m.rate, "Gamma prior rate (weighted)");
  app.add_option("--A", m.A, "CRP concentration");
  app.add_option("--A-col", m.A_col, "CRP concentration of the column partition (bipartite)");
  app.add_option("--tying", m.tying, "shared or per-network link parameters for multiple graphs")
      ->check(CLI::IsMember({"shared", "per-network"}));
}

void add_chain_options(CLI::App& app, ChainOptions& c) {
  app.add_option("--sweeps", c.sweeps, "total sweeps per chain, burn-in included");
  app.add_option("--burnin", c.burn_in, "discarded sweeps");
  app.add_option("--thin", c.thin, "keep every thin-th sample after burn-in");
  app.add_option("--chains", c.chains, "independent chains");
  app.add_option("--init", c.init, "singletons, one or crp")->check(CLI::IsMember({"singletons", "one", "crp"}));
  app.add_flag("--fixed-scan", c.fixed_scan, "visit nodes in index order instead of a random permutation");
}

void add_run_options(CLI::App& app, RunOptions& r) {
  app.add_option("--seed", r.seed, "master seed (drawn and recorded when omitted)");
  app.add_option("--threads", r.threads, "worker threads (default: hardware concurrency)")->envname("IRMKIT_THREADS");
  app.add_option("--out", r.out, "output directory (default runs/<command>-<seed>)");
}

GraphKind graph_kind(const DataOptions& d) { return parse_graph_kind(d.kind); }

std::vector<Graph> load_graphs(const DataOptions& d, Run& run) {
  LoadOptions opt;
  opt.kind = graph_kind(d);
  opt.weighted = d.weighted;
  opt.one_indexed = d.one_indexed;
  opt.self_loops = d.self_loops == "drop" ? SelfLoopPolicy::Drop : SelfLoopPolicy::Reject;
  std::vector<Graph> graphs;
  for (const auto& path : d.graphs) {
    std::size_t dropped = 0;
    graphs.push_back(load_edge_list(path, opt, &dropped));
    run.inputs[path] = {{"fnv1a64", hex(file_checksum(path))},
                        {"nodes", graphs.back().n_rows()},
                        {"links", graphs.back().num_edges()},
                        {"dropped_self_loops", dropped}};
    if (graphs.back().kind() == GraphKind::Bipartite) run.inputs[path]["col_nodes"] = graphs.back().n_cols();
  }
  return graphs;
}

ModelSpec model_spec(const DataOptions& d, const ModelOptions& m) {
  ModelSpec spec;
  spec.kind = graph_kind(d);
  if (d.weighted) {
    spec.obs = GammaPoisson{m.shape, m.rate};
  } else {
    spec.obs = BetaBernoulli{m.a, m.b};
  }
  validate(spec.obs);
  spec.crp = CrpParam(m.A);
  spec.crp_col = CrpParam(m.A_col.value_or(m.A));
  spec.tying = m.tying == "per-network" ? Tying::PerNetworkPhi : Tying::SharedPhi;
  return spec;
}

ChainConfig chain_config(const ChainOptions& c, std::uint64_t seed) {
  ChainConfig cfg;
  cfg.sweeps = c.sweeps;
  cfg.burn_in = c.burn_in;
  cfg.thin = c.thin;
  cfg.chains = c.chains;
  cfg.seed = seed;
  cfg.fixed_scan = c.fixed_scan;
  cfg.init = c.init == "one" ? InitKind::OneBlock : c.init == "crp" ? InitKind::CrpDraw : InitKind::Singletons;
  cfg.validate();
  return cfg;
}

// Resolves seed, threads and output directory; the recorded argv carries
// the resolved seed so that the manifest command reproduces the run.
Run start_run(const std::string& command, const std::vector<std::string>& argv, const RunOptions& r) {
  Run run;
  run.command = command;
  run.argv = argv;
  if (r.seed) {
    run.seed = *r.seed;
  } else {
    std::random_device rd;
    run.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    run.argv.push_back("--seed");
    run.argv.push_back(std::to_string(run.seed));
  }
  run.threads = r.threads > 0 ? r.threads : std::max(1u, std::thread::hardware_concurrency());
  run.dir = r.out.empty() ? fs::path("runs") / (command + "-" + std::to_string(run.seed)) : fs::path(r.out);
  return run;
}

std::ofstream open_out(const Run& run, const std::string& name) {
  std::error_code ec;
  fs::create_directories(run.dir, ec);
  if (ec) throw DataError("cannot create output directory '" + run.dir.string() + "': " + ec.message());
  std::ofstream out(run.dir / name);
  if (!out) throw DataError("cannot write '" + (run.dir / name).string() + "'");
  return out;
}

void write_manifest(Run& run) {
  run.timings["total_seconds"] = seconds_since(run.start);
  json m = {{"command", run.command},   {"argv", run.argv},       {"seed", run.seed},
            {"threads", run.threads},   {"version", IRMKIT_VERSION}, {"config", run.config},
            {"inputs", run.inputs},     {"timings", run.timings}};
  open_out(run, "manifest.json") << m.dump(2) << '\n';
}

std::uint64_t data_checksum(const std::vector<Graph>& graphs) {
  std::uint64_t h = 0;
  for (const Graph& g : graphs) h = splitmix64(h ^ g.checksum());
  return h;
}

void write_traces(const Run& run, const std::vector<Trace>& traces, const ModelSpec& spec, std::uint64_t checksum) {
  for (const Trace& t : traces) {
    auto out = open_out(run, "chain" + std::to_string(t.chain) + ".ndjson");
    write_trace(out, t, spec, checksum);
  }
}

void report_posterior(const Run& run, const std::vector<Trace>& traces) {
  const auto pk = posterior_K(traces);
  std::size_t total = 0;
  for (const auto& t : traces) total += t.samples.size();
  std::cout << "posterior K (" << traces.size() << " chains, " << total << " samples)\n";
  auto csv = open_out(run, "posterior_k.csv");
  csv << "K,mass\n";
  for (const auto& [k, p] : pk) {
    std::cout << "  K=" << std::setw(3) << k << "  " << std::fixed << std::setprecision(3) << p << '\n';
    csv << k << ',' << detail::fmt(p) << '\n';
  }
  std::cout.unsetf(std::ios::fixed);

  const BestSample best = best_sample(traces);
  std::cout << "best sample: chain " << best.chain << ", sweep " << best.sample.sweep << ", logp "
            << std::setprecision(10) << best.sample.logp << ", K=" << best.sample.K;
  if (best.sample.w) std::cout << ", K_col=" << best.sample.K_col;
  std::cout << "\n  block sizes:";
  for (auto n : best.sample.z.sizes()) std::cout << ' ' << n;
  std::cout << '\n';
  json j = to_json(best.sample);
  j["chain"] = best.chain;
  open_out(run, "best.json") << j.dump() << '\n';
}

std::vector<Trace> fit_chains(Run& run, const ObservedNetwork& net, const ModelSpec& spec, const ChainConfig& cfg) {
  const auto t0 = Clock::now();
  auto traces = run_chains(net, spec, cfg, run.threads);
  run.timings["sampling_seconds"] = seconds_since(t0);
  json per_chain = json::array();
  for (const auto& t : traces) {
    double s = 0;
    for (double x : t.sweep_seconds) s += x;
    per_chain.push_back(s);
  }
  run.timings["chain_seconds"] = per_chain;
  return traces;
}

void record_model(Run& run, const ModelSpec& spec, const ChainConfig& cfg) {
  run.config["model"] = to_json(spec);
  run.config["chain"] = to_json(cfg);
}

int cmd_fit(const DataOptions& d, const ModelOptions& m, const ChainOptions& c, Run& run) {
  const auto graphs = load_graphs(d, run);
  const ModelSpec spec = model_spec(d, m);
  const ChainConfig cfg = chain_config(c, run.seed);
  record_model(run, spec, cfg);
  const ObservedNetwork net(graphs);
  validate(net, spec);
  const auto traces = fit_chains(run, net, spec, cfg);
  write_traces(run, traces, spec, data_checksum(graphs));
  report_posterior(run, traces);
  write_manifest(run);
  std::cout << "wrote " << run.dir.string() << '\n';
  return 0;
}

int cmd_predict(const DataOptions& d, const ModelOptions& m, const ChainOptions& c, double fraction, Run& run) {
  if (d.graphs.size() != 1) throw UsageError("predict takes exactly one --graph");
  const auto graphs = load_graphs(d, run);
  const Graph& g = graphs[0];
  const ModelSpec spec = model_spec(d, m);
  const ChainConfig cfg = chain_config(c, run.seed);
  record_model(run, spec, cfg);
  run.config["holdout"] = fraction;

  Rng rng(derive_seed(run.seed, stream::kHoldout));
  const HoldoutSplit split = make_holdout(g, fraction, rng);
  const ObservedNetwork net(g, split.mask);
  validate(net, spec);
  const auto traces = fit_chains(run, net, spec, cfg);
  write_traces(run, traces, spec, data_checksum(graphs));

  std::vector<Dyad> dyads = split.hidden_links;
  dyads.insert(dyads.end(), split.hidden_nonlinks.begin(), split.hidden_nonlinks.end());
  const auto rho = predict_links(traces, net, spec, dyads);
  const std::size_t n_links = split.hidden_links.size();
  auto csv = open_out(run, "predictions.csv");
  csv << "i,j,rho,truth\n";
  for (std::size_t t = 0; t < dyads.size(); ++t) {
    csv << dyads[t].i << ',' << dyads[t].j << ',' << detail::fmt(rho[t]) << ',' << (t < n_links ? 1 : 0) << '\n';
  }
  const std::vector<double> pos(rho.begin(), rho.begin() + static_cast<std::ptrdiff_t>(n_links));
  const std::vector<double> neg(rho.begin() + static_cast<std::ptrdiff_t>(n_links), rho.end());
  const double area = auc(pos, neg);

  // Per-chain AUC as well, since chains are separate restarts.
  json per_chain = json::array();
  for (const Trace& t : traces) {
    const auto r = predict_links({t}, net, spec, dyads);
    per_chain.push_back(auc({r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n_links)},
                            {r.begin() + static_cast<std::ptrdiff_t>(n_links), r.end()}));
  }
  open_out(run, "auc.json") << json{{"auc", area},
                                    {"auc_per_chain", per_chain},
                                    {"hidden_links", n_links},
                                    {"hidden_nonlinks", split.hidden_nonlinks.size()}}
                                   .dump(2)
                            << '\n';
  std::cout << "hidden " << n_links << " links + " << split.hidden_nonlinks.size() << " non-links\n";
  std::cout << "AUC " << std::setprecision(6) << area << '\n';
  write_manifest(run);
  std::cout << "wrote " << run.dir.string() << '\n';
  return 0;
}

int cmd_ppc(const DataOptions& d, const ModelOptions& m, const ChainOptions& c, std::size_t reps, Run& run) {
  const auto graphs = load_graphs(d, run);
  const ModelSpec spec = model_spec(d, m);
  const ChainConfig cfg = chain_config(c, run.seed);
  record_model(run, spec, cfg);
  run.config["reps"] = reps;
  const ObservedNetwork net(graphs);
  validate(net, spec);
  const auto traces = fit_chains(run, net, spec, cfg);
  write_traces(run, traces, spec, data_checksum(graphs));

  const auto t0 = Clock::now();
  const PpcReport report = ppc(net, spec, traces, reps, run.seed, run.threads);
  run.timings["ppc_seconds"] = seconds_since(t0);
  open_out(run, "ppc.json") << to_json(report).dump() << '\n';
  auto csv = open_out(run, "ppc.csv");
  write_ppc_csv(csv, report);
  std::cout << report.replicates << " replicated networks\n";
  for (const auto& s : report.statistics) {
    std::cout << "  " << std::left << std::setw(12) << s.name << std::right << " observed " << std::setw(10)
              << std::setprecision(5) << s.observed << "  95% [" << s.lo95 << ", " << s.hi95 << "]  quantile "
              << s.quantile << '\n';
  }
  write_manifest(run);
  std::cout << "wrote " << run.dir.string() << '\n';
  return 0;
}

int cmd_stats(const DataOptions& d, Run& run) {
  const auto graphs = load_graphs(d, run);
  auto csv = open_out(run, "stats.csv");
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const NetCharacteristics c = characterize(graphs[i]);
    std::ostringstream row;
    write_stats_csv(row, c);
    std::string text = row.str();
    if (i > 0) text = text.substr(text.find('\n') + 1);
    csv << text;
    std::cout << text;
  }
  write_manifest(run);
  return 0;
}

int cmd_simulate(const DataOptions& d, const ModelOptions& m, std::size_t n, std::size_t n_col, Run& run) {
  const ModelSpec spec = model_spec(d, m);
  run.config["model"] = to_json(spec);
  run.config["N"] = n;
  if (spec.kind == GraphKind::Bipartite) run.config["N_col"] = n_col;
  Rng rng(derive_seed(run.seed, stream::kSimulate));
  const SimulatedNetwork sim = simulate_irm(spec, n, n_col, rng);
  {
    auto out = open_out(run, "graph.tsv");
    save_edge_list(sim.graph, out);
  }
  json truth = {{"z", to_json(sim.z)}, {"K", sim.z.num_blocks()}, {"phi", to_json(sim.phi)}};
  if (sim.w) {
    truth["w"] = to_json(*sim.w);
    truth["K_col"] = sim.w->num_blocks();
  }
  open_out(run, "truth.json") << truth.dump() << '\n';
  std::cout << "N=" << sim.graph.n_rows() << " L=" << sim.graph.num_edges() << " K=" << sim.z.num_blocks() << '\n';
  write_manifest(run);
  std::cout << "wrote " << run.dir.string() << '\n';
  return 0;
}

// "lo:hi" doubles from lo up to hi; otherwise a comma-separated list.
std::vector<std::size_t> parse_grid(const std::string& spec) {
  std::vector<std::size_t> grid;
  try {
    if (const auto colon = spec.find(':'); colon != std::string::npos) {
      const std::size_t lo = std::stoul(spec.substr(0, colon));
      const std::size_t hi = std::stoul(spec.substr(colon + 1));
      if (lo == 0 || hi < lo) throw UsageError("grid must satisfy 0 < lo <= hi");
      for (std::size_t n = lo; n <= hi; n *= 2) grid.push_back(n);
    } else {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) grid.push_back(std::stoul(item));
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const UsageError*>(&e)) throw;
    throw UsageError("cannot parse grid '" + spec + "'");
  }
  if (grid.empty()) throw UsageError("empty grid");
  return grid;
}

int cmd_bench(const ScalingConfig& base, const std::string& grid_spec, Run& run) {
  ScalingConfig cfg = base;
  cfg.seed = run.seed;
  const auto grid = parse_grid(grid_spec);
  run.config = {{"K", cfg.communities}, {"c_in", cfg.c_in},   {"c_out", cfg.c_out},
                {"warmup", cfg.warmup}, {"timed", cfg.timed}, {"grid", grid}};
  std::vector<ScalingPoint> points;
  auto csv = open_out(run, "bench.csv");
  csv << "N,L,mean_seconds,std_seconds,K\n";
  std::cout << std::setw(8) << "N" << std::setw(10) << "L" << std::setw(14) << "mean_s" << std::setw(12) << "std_s"
            << std::setw(5) << "K" << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ScalingPoint p = measure_sweeps(grid[i], cfg, i);
    points.push_back(p);
    csv << p.nodes << ',' << p.links << ',' << detail::fmt(p.mean_seconds) << ',' << detail::fmt(p.std_seconds) << ','
        << p.blocks << '\n';
    std::cout << std::setw(8) << p.nodes << std::setw(10) << p.links << std::setw(14) << std::setprecision(5)
              << p.mean_seconds << std::setw(12) << p.std_seconds << std::setw(5) << p.blocks << '\n';
  }
  if (points.size() >= 2) std::cout << "log-log slope " << std::setprecision(4) << loglog_slope(points) << '\n';
  write_manifest(run);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infinite relational models for networks"};
  app.set_version_flag("--version", IRMKIT_VERSION);
  app.require_subcommand(1);

  DataOptions data;
  ModelOptions model;
  ChainOptions chain;
  RunOptions run_opt;

  auto* fit = app.add_subcommand("fit", "sample partitions with collapsed Gibbs chains");
  add_data_options(*fit, data);
  add_model_options(*fit, model);
  add_chain_options(*fit, chain);
  add_run_options(*fit, run_opt);

  double holdout = 0.1;
  auto* predict = app.add_subcommand("predict", "hide links and non-links, refit, score the hidden dyads");
  add_data_options(*predict, data);
  add_model_options(*predict, model);
  add_chain_options(*predict, chain);
  add_run_options(*predict, run_opt);
  predict->add_option("--holdout", holdout, "fraction of links to hide");

  std::size_t reps = 20;
  ChainOptions ppc_chain;
  ppc_chain.thin = 25;
  auto* ppc_cmd = app.add_subcommand("ppc", "posterior predictive checks of network statistics");
  add_data_options(*ppc_cmd, data);
  add_model_options(*ppc_cmd, model);
  add_chain_options(*ppc_cmd, ppc_chain);
  add_run_options(*ppc_cmd, run_opt);
  ppc_cmd->add_option("--reps", reps, "replicated networks per stored sample");

  auto* stats = app.add_subcommand("stats", "degree, clustering and path-length summaries");
  add_data_options(*stats, data);
  add_run_options(*stats, run_opt);

  std::size_t sim_n = 100;
  std::size_t sim_n_col = 0;
  auto* simulate = app.add_subcommand("simulate", "draw a network from the generative model");
  add_data_options(*simulate, data, false);
  add_model_options(*simulate, model);
  add_run_options(*simulate, run_opt);
  simulate->add_option("--N", sim_n, "nodes (rows for bipartite)");
  simulate->add_option("--N-col", sim_n_col, "column nodes (bipartite)");

  ScalingConfig scaling;
  std::string grid = "1000:8000";
  auto* bench = app.add_subcommand("bench", "per-sweep time on planted-partition graphs of growing size");
  add_run_options(*bench, run_opt);
  bench->add_option("--K", scaling.communities, "planted communities");
  bench->add_option("--c-in", scaling.c_in, "within-community link rate times N");
  bench->add_option("--c-out", scaling.c_out, "between-community link rate times N");
  bench->add_option("--grid", grid, "lo:hi (doubling) or a comma-separated list of N");
  bench->add_option("--sweeps", scaling.timed, "timed sweeps per graph");
  bench->add_option("--warmup", scaling.warmup, "untimed sweeps before timing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (*fit) {
      Run run = start_run("fit", args, run_opt);
      return cmd_fit(data, model, chain, run);
    }
    if (*predict) {
      Run run = start_run("predict", args, run_opt);
      return cmd_predict(data, model, chain, holdout, run);
    }
    if (*ppc_cmd) {
      Run run = start_run("ppc", args, run_opt);
      return cmd_ppc(data, model, ppc_chain, reps, run);
    }
    if (*stats) {
      Run run = start_run("stats", args, run_opt);
      return cmd_stats(data, run);
    }
    if (*simulate) {
      Run run = start_run("simulate", args, run_opt);
      return cmd_simulate(data, model, sim_n, sim_n_col, run);
    }
    if (*bench) {
      Run run = start_run("bench", args, run_opt);
      return cmd_bench(scaling, grid, run);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
