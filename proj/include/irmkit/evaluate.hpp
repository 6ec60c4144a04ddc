#ifndef IRMKIT_EVALUATE_HPP
#define IRMKIT_EVALUATE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "irmkit/errors.hpp"
#include "irmkit/graph.hpp"
#include "irmkit/model.hpp"
#include "irmkit/netstats.hpp"
#include "irmkit/random.hpp"
#include "irmkit/sampler.hpp"
#include "irmkit/simulate.hpp"

namespace irmkit {

struct HoldoutSplit {
  std::vector<Dyad> hidden_links;
  std::vector<Dyad> hidden_nonlinks;
  DyadMask mask;
};

// round-half-even(fraction * L).
inline std::size_t holdout_count(std::size_t links, double fraction) {
  const double x = fraction * static_cast<double>(links);
  const double lo = std::floor(x);
  const double diff = x - lo;
  double r = lo;
  if (diff > 0.5 || (diff == 0.5 && std::fmod(lo, 2.0) != 0.0)) r = lo + 1.0;
  return static_cast<std::size_t>(r);
}

namespace detail {

inline Dyad dyad_at(const Graph& g, std::uint64_t t) {
  const std::uint64_t n = g.n_rows();
  switch (g.kind()) {
    case GraphKind::Bipartite:
      return {static_cast<NodeIndex>(t / g.n_cols()), static_cast<NodeIndex>(t % g.n_cols())};
    case GraphKind::Directed: {
      const std::uint64_t i = t / (n - 1);
      std::uint64_t j = t % (n - 1);
      if (j >= i) ++j;
      return {static_cast<NodeIndex>(i), static_cast<NodeIndex>(j)};
    }
    case GraphKind::Undirected: {
      // Row i of the strict upper triangle starts at i*n - i*(i+1)/2.
      std::uint64_t i = static_cast<std::uint64_t>(
          (2.0 * n - 1.0 - std::sqrt((2.0 * n - 1.0) * (2.0 * n - 1.0) - 8.0 * t)) / 2.0);
      auto start = [n](std::uint64_t r) { return r * n - r * (r + 1) / 2; };
      while (i > 0 && start(i) > t) --i;
      while (start(i + 1) <= t) ++i;
      return {static_cast<NodeIndex>(i), static_cast<NodeIndex>(i + 1 + (t - start(i)))};
    }
  }
  return {};
}

}  // namespace detail

// Hides round-half-even(fraction * L) links, sampled uniformly without
// replacement, and the same number of non-links drawn uniformly from all
// non-linked dyads.
inline HoldoutSplit make_holdout(const Graph& g, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("holdout fraction must lie in (0, 1)");
  const std::size_t count = holdout_count(g.num_edges(), fraction);
  if (count == 0) throw UsageError("holdout fraction selects no links");
  const std::uint64_t universe = dyad_universe(g);
  const std::uint64_t nonlinks = universe - g.num_edges();
  if (nonlinks < count) throw DataError("not enough non-links for a balanced holdout");

  HoldoutSplit split;
  std::vector<std::size_t> idx(g.num_edges());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(idx.size() - i));
    std::swap(idx[i], idx[j]);
    const Edge& e = g.edges()[idx[i]];
    split.hidden_links.push_back({e.i, e.j});
  }

  if (nonlinks * 2 >= universe) {
    // Rejection sampling over the whole dyad universe.
    std::vector<Dyad> chosen;
    while (split.hidden_nonlinks.size() < count) {
      const Dyad d = detail::dyad_at(g, rng.index(universe));
      if (g.has_edge(d.i, d.j)) continue;
      if (std::find(split.hidden_nonlinks.begin(), split.hidden_nonlinks.end(), d) !=
          split.hidden_nonlinks.end()) {
        continue;
      }
      split.hidden_nonlinks.push_back(d);
    }
  } else {
    std::vector<Dyad> pool;
    pool.reserve(nonlinks);
    for (std::uint64_t t = 0; t < universe; ++t) {
      const Dyad d = detail::dyad_at(g, t);
      if (!g.has_edge(d.i, d.j)) pool.push_back(d);
    }
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
      std::swap(pool[i], pool[j]);
      split.hidden_nonlinks.push_back(pool[i]);
    }
  }
  std::vector<Dyad> hidden = split.hidden_links;
  hidden.insert(hidden.end(), split.hidden_nonlinks.begin(), split.hidden_nonlinks.end());
  split.mask = DyadMask(g, std::move(hidden));
  return split;
}

// Posterior predictive link probability of each (hidden) dyad, averaged
// over every stored sample. Counts come from the observed dyads only.
inline std::vector<double> predict_links(const std::vector<Trace>& traces, const ObservedNetwork& net,
                                         const ModelSpec& spec, const std::vector<Dyad>& dyads) {
  for (const Dyad& d : dyads) {
    if (!net.mask().contains(d.i, d.j)) {
      throw UsageError("dyad (" + std::to_string(d.i) + "," + std::to_string(d.j) +
                       ") was observed; only hidden dyads can be predicted");
    }
  }
  std::vector<double> rho(dyads.size(), 0.0);
  std::size_t total = 0;
  for (const Trace& t : traces) {
    for (const Sample& s : t.samples) {
      const BlockStats stats = compute_block_stats(net, spec, s.z, s.w ? &*s.w : nullptr);
      const Partition& cols = s.w ? *s.w : s.z;
      for (std::size_t d = 0; d < dyads.size(); ++d) {
        rho[d] += predictive_mean(stats, spec.obs, s.z.label(dyads[d].i), cols.label(dyads[d].j));
      }
      ++total;
    }
  }
  if (total == 0) throw UsageError("no posterior samples");
  for (double& r : rho) r /= static_cast<double>(total);
  return rho;
}

// Area under the ROC curve via the Mann-Whitney rank sum (ties get average
// ranks): P(link score > non-link score) + P(tie) / 2.
inline double auc(const std::vector<double>& links, const std::vector<double>& nonlinks) {
  if (links.empty() || nonlinks.empty()) throw UsageError("AUC needs both links and non-links");
  struct Item {
    double score;
    bool link;
  };
  std::vector<Item> all;
  all.reserve(links.size() + nonlinks.size());
  for (double s : links) all.push_back({s, true});
  for (double s : nonlinks) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (all[t].link) rank_sum += avg_rank;
    }
    i = j;
  }
  const double n1 = static_cast<double>(links.size());
  const double n0 = static_cast<double>(nonlinks.size());
  return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

// Empirical distribution of the number of (row) blocks, pooled over chains.
inline std::map<std::size_t, double> posterior_K(const std::vector<Trace>& traces) {
  std::map<std::size_t, double> mass;
  std::size_t total = 0;
  for (const Trace& t : traces) {
    for (const Sample& s : t.samples) {
      mass[s.K] += 1.0;
      ++total;
    }
  }
  if (total == 0) throw UsageError("no posterior samples");
  for (auto& [k, p] : mass) p /= static_cast<double>(total);
  return mass;
}

// Draws one network from the posterior predictive given a sampled
// partition: each dyad independently from its block pair's predictive
// distribution (Bernoulli, or a Gamma-Poisson mixture for weights).
inline Graph replicate_network(const ObservedNetwork& net, const ModelSpec& spec, const Sample& sample,
                               Rng& rng) {
  const BlockStats stats = compute_block_stats(net, spec, sample.z, sample.w ? &*sample.w : nullptr);
  const Partition* w = sample.w ? &*sample.w : nullptr;
  if (const auto* gp = std::get_if<GammaPoisson>(&spec.obs)) {
    return sample_poisson_graph(
        spec.kind, sample.z, w,
        [&](std::size_t k, std::size_t l) {
          return rng.gamma(static_cast<double>(stats.links[0](k, l)) + gp->shape,
                           static_cast<double>(stats.mbar[0](k, l)) + gp->rate);
        },
        rng);
  }
  BlockMatrix<double> prob(stats.row_blocks(), stats.col_blocks());
  for (std::size_t k = 0; k < stats.row_blocks(); ++k) {
    for (std::size_t l = 0; l < stats.col_blocks(); ++l) {
      prob(k, l) = predictive_mean(stats, spec.obs, static_cast<BlockLabel>(k), static_cast<BlockLabel>(l));
    }
  }
  return sample_block_graph(spec.kind, sample.z, w, prob, rng);
}

struct PpcStatistic {
  std::string name;
  double observed = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> ensemble;  // defined replicate values only
  std::size_t undefined = 0;     // replicates where the statistic is undefined
  double quantile = std::numeric_limits<double>::quiet_NaN();
  double lo95 = std::numeric_limits<double>::quiet_NaN();
  double hi95 = std::numeric_limits<double>::quiet_NaN();
  double lo50 = std::numeric_limits<double>::quiet_NaN();
  double hi50 = std::numeric_limits<double>::quiet_NaN();

  bool inside95() const { return observed >= lo95 && observed <= hi95; }
  bool inside50() const { return observed >= lo50 && observed <= hi50; }
};

struct PpcReport {
  std::size_t replicates = 0;
  std::vector<PpcStatistic> statistics;

  const PpcStatistic& at(const std::string& name) const {
    for (const auto& s : statistics) {
      if (s.name == name) return s;
    }
    throw UsageError("no statistic '" + name + "' in report");
  }
};

// Linear-interpolation sample quantile of sorted values.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Fraction of the ensemble below the observed value, ties counted half.
inline double empirical_quantile(const std::vector<double>& values, double observed) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  double below = 0.0;
  for (double v : values) {
    if (v < observed) {
      below += 1.0;
    } else if (v == observed) {
      below += 0.5;
    }
  }
  return below / static_cast<double>(values.size());
}

inline PpcStatistic summarize_statistic(std::string name, double observed, const std::vector<double>& values) {
  PpcStatistic s;
  s.name = std::move(name);
  s.observed = observed;
  for (double v : values) {
    if (std::isnan(v)) {
      ++s.undefined;
    } else {
      s.ensemble.push_back(v);
    }
  }
  std::vector<double> sorted = s.ensemble;
  std::sort(sorted.begin(), sorted.end());
  s.quantile = empirical_quantile(sorted, observed);
  s.lo95 = sorted_quantile(sorted, 0.025);
  s.hi95 = sorted_quantile(sorted, 0.975);
  s.lo50 = sorted_quantile(sorted, 0.25);
  s.hi50 = sorted_quantile(sorted, 0.75);
  return s;
}

// Posterior predictive check: `reps` replicates per stored sample,
// conditioned on the observed network (layer 0 of net). Replicate r of
// sample s of chain c uses the seed derive_seed(seed ^ kReplicate, flat
// index), so results do not depend on the thread count. Directed and
// bipartite graphs report degree statistics only.
inline PpcReport ppc(const ObservedNetwork& net, const ModelSpec& spec, const std::vector<Trace>& traces,
                     std::size_t reps, std::uint64_t seed, std::size_t threads = 1) {
  if (reps == 0) throw UsageError("need at least one replicate per sample");
  std::vector<const Sample*> samples;
  for (const Trace& t : traces) {
    for (const Sample& s : t.samples) samples.push_back(&s);
  }
  if (samples.empty()) throw UsageError("no posterior samples");
  const std::size_t total = samples.size() * reps;
  std::vector<NetCharacteristics> rep_stats(total);
  parallel_for(total, threads, [&](std::size_t idx) {
    Rng rng(derive_seed(seed ^ stream::kReplicate, idx));
    const Graph g = replicate_network(net, spec, *samples[idx / reps], rng);
    rep_stats[idx] = characterize(g);
  });

  const NetCharacteristics obs = characterize(net.layer(0));
  auto column = [&](auto member) {
    std::vector<double> v(total);
    for (std::size_t i = 0; i < total; ++i) v[i] = rep_stats[i].*member;
    return v;
  };
  PpcReport report;
  report.replicates = total;
  report.statistics.push_back(summarize_statistic("degree_mean", obs.degree_mean, column(&NetCharacteristics::degree_mean)));
  report.statistics.push_back(summarize_statistic("degree_std", obs.degree_std, column(&NetCharacteristics::degree_std)));
  if (net.kind() == GraphKind::Undirected) {
    report.statistics.push_back(summarize_statistic("clustering", obs.clustering, column(&NetCharacteristics::clustering)));
    report.statistics.push_back(summarize_statistic("cpl", obs.cpl, column(&NetCharacteristics::cpl)));
  }
  return report;
}

}  // namespace irmkit

#endif  // IRMKIT_EVALUATE_HPP
