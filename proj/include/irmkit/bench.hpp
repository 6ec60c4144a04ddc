#ifndef IRMKIT_BENCH_HPP
#define IRMKIT_BENCH_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "irmkit/random.hpp"
#include "irmkit/sampler.hpp"
#include "irmkit/simulate.hpp"

namespace irmkit {

struct ScalingPoint {
  std::size_t nodes = 0;
  std::size_t links = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;  // population std over the timed sweeps
  std::size_t blocks = 0;    // K after the last timed sweep
};

struct ScalingConfig {
  std::size_t communities = 5;
  double c_in = 50.0;
  double c_out = 2.0;
  std::size_t warmup = 5;
  std::size_t timed = 10;
  std::uint64_t seed = 0;
};

// Times Gibbs sweeps on one planted-partition graph. The chain starts from
// the planted partition so that K stays bounded and the cost per sweep
// reflects the number of links.
inline ScalingPoint measure_sweeps(std::size_t n, const ScalingConfig& cfg, std::size_t grid_index = 0) {
  Rng gen(derive_seed(cfg.seed ^ stream::kSimulate, grid_index));
  PlantedNetwork bench = simulate_benchmark(n, cfg.communities, cfg.c_in, cfg.c_out, gen);
  const ObservedNetwork net(bench.graph);
  ModelSpec spec;
  spec.kind = GraphKind::Undirected;
  const InitialState start{bench.truth, std::nullopt};
  GibbsChain chain(net, spec, derive_seed(cfg.seed, grid_index), InitKind::Singletons, false, &start);
  for (std::size_t s = 0; s < cfg.warmup; ++s) chain.sweep();

  std::vector<double> t(cfg.timed);
  for (double& secs : t) {
    const auto t0 = std::chrono::steady_clock::now();
    chain.sweep();
    secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  ScalingPoint p;
  p.nodes = n;
  p.links = bench.graph.num_edges();
  p.blocks = chain.num_blocks();
  for (double secs : t) p.mean_seconds += secs;
  p.mean_seconds /= static_cast<double>(t.size());
  for (double secs : t) p.std_seconds += (secs - p.mean_seconds) * (secs - p.mean_seconds);
  p.std_seconds = std::sqrt(p.std_seconds / static_cast<double>(t.size()));
  return p;
}

// Least-squares slope of log(mean time) against log(links).
inline double loglog_slope(const std::vector<ScalingPoint>& points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(points.size());
  for (const auto& p : points) {
    const double x = std::log(static_cast<double>(p.links));
    const double y = std::log(p.mean_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace irmkit

#endif  // IRMKIT_BENCH_HPP
