#ifndef IRMKIT_SAMPLER_HPP
#define IRMKIT_SAMPLER_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "irmkit/errors.hpp"
#include "irmkit/model.hpp"
#include "irmkit/partition.hpp"
#include "irmkit/random.hpp"

namespace irmkit {

enum class InitKind { Singletons, OneBlock, CrpDraw };

struct ChainConfig {
  std::size_t sweeps = 500;  // total sweeps, burn-in included
  std::size_t burn_in = 250;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  InitKind init = InitKind::Singletons;
  std::size_t chains = 5;
  bool fixed_scan = false;  // visit nodes 0..N-1 instead of a fresh permutation per sweep

  void validate() const {
    if (burn_in >= sweeps) throw UsageError("burn-in must be smaller than the number of sweeps");
    if (thin < 1) throw UsageError("thinning interval must be at least 1");
    if (chains < 1) throw UsageError("at least one chain is required");
  }
};

struct Sample {
  std::size_t sweep = 0;
  Partition z;
  std::optional<Partition> w;  // bipartite column partition
  double logp = 0.0;
  std::size_t K = 0;
  std::size_t K_col = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Trace {
  std::size_t chain = 0;
  std::uint64_t seed = 0;
  ChainConfig config;
  std::vector<Sample> samples;
  std::vector<double> sweep_seconds;  // wall time of every sweep; not part of equality
};

inline bool same_samples(const Trace& a, const Trace& b) {
  return a.chain == b.chain && a.seed == b.seed && a.samples == b.samples;
}

// Optional explicit starting state (overrides ChainConfig::init).
struct InitialState {
  Partition z;
  std::optional<Partition> w;
};

// One collapsed Gibbs chain. Between sweeps the labels are canonical and
// the block statistics are compact; within a sweep, emptied labels are
// recycled through a free list.
class GibbsChain {
 public:
  GibbsChain(const ObservedNetwork& net, const ModelSpec& spec, std::uint64_t seed,
             InitKind init = InitKind::Singletons, bool fixed_scan = false,
             const InitialState* start = nullptr)
      : net_(&net), spec_(spec), rng_(seed), fixed_scan_(fixed_scan) {
    validate(net, spec);
    const bool bip = net.kind() == GraphKind::Bipartite;
    Partition z;
    Partition w;
    if (start) {
      z = start->z;
      if (bip) {
        if (!start->w) throw UsageError("bipartite start state needs a column partition");
        w = *start->w;
      }
    } else {
      z = initial(net.n_rows(), init, spec.crp);
      if (bip) w = initial(net.n_cols(), init, spec.crp_col);
    }
    stats_ = compute_block_stats(net, spec, z, bip ? &w : nullptr);
    z_ = z.labels();
    if (bip) w_ = w.labels();
  }

  const ObservedNetwork& network() const { return *net_; }
  const ModelSpec& spec() const { return spec_; }
  bool bipartite() const { return net_->kind() == GraphKind::Bipartite; }

  // Resamples every node once from its full conditional. Bipartite chains
  // visit all row nodes, then all column nodes.
  void sweep() {
    sweep_side(Side::Row);
    if (bipartite()) sweep_side(Side::Col);
    canonicalize();
  }

  Partition partition() const { return Partition(z_); }
  std::optional<Partition> col_partition() const {
    return bipartite() ? std::optional<Partition>(Partition(w_)) : std::nullopt;
  }
  std::size_t num_blocks() const { return stats_.row_blocks(); }
  std::size_t num_col_blocks() const { return stats_.col_blocks(); }

  // Statistics maintained incrementally; canonical between sweeps.
  const BlockStats& block_stats() const { return stats_; }

  double joint_log_prob() const { return irmkit::joint_log_prob(stats_, spec_); }

  Rng& rng() { return rng_; }

 private:
  Partition initial(std::size_t n, InitKind init, CrpParam crp) {
    switch (init) {
      case InitKind::Singletons: return Partition::singletons(n);
      case InitKind::OneBlock: return Partition::one_block(n);
      case InitKind::CrpDraw: return crp_sample(n, crp, rng_);
    }
    return Partition::singletons(n);
  }

  void sweep_side(Side side) {
    const bool bip = bipartite();
    std::vector<BlockLabel>& own = side == Side::Row ? z_ : w_;
    const std::vector<BlockLabel>& opp = bip ? (side == Side::Row ? w_ : z_) : z_;
    const std::size_t n = own.size();

    order_.resize(n);
    std::iota(order_.begin(), order_.end(), NodeIndex{0});
    if (!fixed_scan_) rng_.shuffle(order_);

    // Active labels on both sides; free labels for reuse on this side.
    std::vector<BlockLabel> active = nonempty(stats_.sizes(side));
    std::vector<BlockLabel> free_labels;
    const Side opp_side = side == Side::Row ? Side::Col : Side::Row;

    for (NodeIndex v : order_) {
      const BlockLabel from = own[v];
      const auto opp_sizes = bip ? stats_.sizes(opp_side) : stats_.sizes(side);
      collect_node_links(*net_, spec_, opp, opp_sizes,
                         bip ? std::nullopt : std::optional<BlockLabel>(from), v, side, links_);
      remove_assignment(stats_, links_, from, side);
      if (stats_.sizes(side)[from] == 0) {
        active.erase(std::find(active.begin(), active.end(), from));
        free_labels.push_back(from);
      }
      const std::vector<BlockLabel>& targets = bip ? opp_active(opp_side) : active;
      gibbs_assignment_log_weights(stats_, links_, spec_, side, active, targets, logw_);
      const std::size_t pick = rng_.categorical_log(logw_);
      BlockLabel to;
      if (pick < active.size()) {
        to = active[pick];
      } else {
        if (!free_labels.empty()) {
          to = free_labels.back();
          free_labels.pop_back();
        } else {
          to = stats_.add_block(side);
        }
        active.push_back(to);
      }
      apply_assignment(stats_, links_, to, side);
      own[v] = to;
    }
  }

  const std::vector<BlockLabel>& opp_active(Side opp_side) {
    opp_active_ = nonempty(stats_.sizes(opp_side));
    return opp_active_;
  }

  static std::vector<BlockLabel> nonempty(std::span<const std::int64_t> sizes) {
    std::vector<BlockLabel> out;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (sizes[k] > 0) out.push_back(static_cast<BlockLabel>(k));
    }
    return out;
  }

  // Relabels both sides canonically and compacts the statistics.
  void canonicalize() {
    const auto row_map = relabel(z_, stats_.row_sizes.size());
    std::vector<BlockLabel> col_map;
    if (bipartite()) col_map = relabel(w_, stats_.col_sizes.size());
    const std::vector<BlockLabel>& cmap = bipartite() ? col_map : row_map;

    BlockStats next;
    next.kind = stats_.kind;
    next.poisson = stats_.poisson;
    next.log_weight_factorial = stats_.log_weight_factorial;
    next.row_sizes = compact_sizes(stats_.row_sizes, row_map);
    if (bipartite()) next.col_sizes = compact_sizes(stats_.col_sizes, col_map);
    const std::size_t kr = next.row_blocks();
    const std::size_t kc = next.col_blocks();
    for (std::size_t c = 0; c < stats_.channels(); ++c) {
      BlockMatrix<std::int64_t> m(kr, kc);
      BlockMatrix<std::int64_t> mb(kr, kc);
      for (std::size_t k = 0; k < row_map.size(); ++k) {
        if (row_map[k] == kNewBlock) continue;
        for (std::size_t l = 0; l < cmap.size(); ++l) {
          if (cmap[l] == kNewBlock) continue;
          m(row_map[k], cmap[l]) = stats_.links[c](k, l);
          mb(row_map[k], cmap[l]) = stats_.mbar[c](k, l);
        }
      }
      next.links.push_back(std::move(m));
      next.mbar.push_back(std::move(mb));
    }
    stats_ = std::move(next);
  }

  // Canonical relabelling by first occurrence; returns old -> new
  // (kNewBlock for unused labels).
  static std::vector<BlockLabel> relabel(std::vector<BlockLabel>& labels, std::size_t n_labels) {
    std::vector<BlockLabel> map(n_labels, kNewBlock);
    BlockLabel next = 0;
    for (BlockLabel& l : labels) {
      if (map[l] == kNewBlock) map[l] = next++;
      l = map[l];
    }
    return map;
  }

  static std::vector<std::int64_t> compact_sizes(const std::vector<std::int64_t>& sizes,
                                                 const std::vector<BlockLabel>& map) {
    std::size_t k = 0;
    for (BlockLabel m : map) k += m != kNewBlock;
    std::vector<std::int64_t> out(k);
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (map[i] != kNewBlock) out[map[i]] = sizes[i];
    }
    return out;
  }

  const ObservedNetwork* net_;
  ModelSpec spec_;
  Rng rng_;
  bool fixed_scan_;
  std::vector<BlockLabel> z_;
  std::vector<BlockLabel> w_;
  BlockStats stats_;
  NodeLinks links_;
  std::vector<double> logw_;
  std::vector<NodeIndex> order_;
  std::vector<BlockLabel> opp_active_;
};

// Runs one chain with the seed in cfg. Sweeps are numbered from 1; sweep s
// is stored when s > burn_in and (s - burn_in) is a multiple of thin.
inline Trace run_chain(const ObservedNetwork& net, const ModelSpec& spec, const ChainConfig& cfg,
                       std::size_t chain_index = 0, const InitialState* start = nullptr) {
  cfg.validate();
  Trace trace;
  trace.chain = chain_index;
  trace.seed = cfg.seed;
  trace.config = cfg;
  GibbsChain chain(net, spec, cfg.seed, cfg.init, cfg.fixed_scan, start);
  trace.sweep_seconds.reserve(cfg.sweeps);
  for (std::size_t s = 1; s <= cfg.sweeps; ++s) {
    const auto t0 = std::chrono::steady_clock::now();
    chain.sweep();
    trace.sweep_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (s > cfg.burn_in && (s - cfg.burn_in) % cfg.thin == 0) {
      Sample sample;
      sample.sweep = s;
      sample.z = chain.partition();
      sample.w = chain.col_partition();
      sample.logp = chain.joint_log_prob();
      sample.K = chain.num_blocks();
      sample.K_col = net.kind() == GraphKind::Bipartite ? chain.num_col_blocks() : 0;
      trace.samples.push_back(std::move(sample));
    }
  }
  return trace;
}

// Seed of chain k: derive_seed(master, k).
inline std::uint64_t chain_seed(std::uint64_t master, std::size_t chain) {
  return derive_seed(master, chain);
}

// Runs `f(i)` for i in [0, count) on up to `threads` workers. Exceptions
// are rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& f) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

// Independent chains from seeds derived from cfg.seed. Output order and
// content do not depend on the number of threads.
inline std::vector<Trace> run_chains(const ObservedNetwork& net, const ModelSpec& spec,
                                     const ChainConfig& cfg, std::size_t threads = 1,
                                     const InitialState* start = nullptr) {
  cfg.validate();
  std::vector<Trace> traces(cfg.chains);
  parallel_for(cfg.chains, threads, [&](std::size_t k) {
    ChainConfig c = cfg;
    c.seed = chain_seed(cfg.seed, k);
    traces[k] = run_chain(net, spec, c, k, start);
    traces[k].config.seed = cfg.seed;
  });
  return traces;
}

struct BestSample {
  std::size_t chain = 0;
  std::size_t index = 0;  // position within the chain's samples
  Sample sample;
};

// Highest joint log probability over all stored samples; ties go to the
// earlier chain, then the earlier sweep.
inline BestSample best_sample(const std::vector<Trace>& traces) {
  std::optional<BestSample> best;
  for (std::size_t c = 0; c < traces.size(); ++c) {
    for (std::size_t i = 0; i < traces[c].samples.size(); ++i) {
      const Sample& s = traces[c].samples[i];
      if (!best || s.logp > best->sample.logp) best = BestSample{c, i, s};
    }
  }
  if (!best) throw UsageError("no samples to choose from");
  return *best;
}

}  // namespace irmkit

#endif  // IRMKIT_SAMPLER_HPP
