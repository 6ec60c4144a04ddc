#ifndef IRMKIT_SIMULATE_HPP
#define IRMKIT_SIMULATE_HPP

#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "irmkit/block_matrix.hpp"
#include "irmkit/errors.hpp"
#include "irmkit/graph.hpp"
#include "irmkit/model.hpp"
#include "irmkit/netstats.hpp"
#include "irmkit/partition.hpp"
#include "irmkit/random.hpp"

namespace irmkit {

namespace detail {

inline std::vector<std::vector<NodeIndex>> members_of(const Partition& p) {
  std::vector<std::vector<NodeIndex>> out(p.num_blocks());
  for (std::size_t v = 0; v < p.size(); ++v) out[p.label(static_cast<NodeIndex>(v))].push_back(static_cast<NodeIndex>(v));
  return out;
}

// Calls fn(i, j) for every modelled dyad between row block k and column
// block l: unordered pairs for undirected (k <= l), ordered otherwise.
// `pick(count, fn_t)` decides which linear indices t in [0, count) to visit.
template <class Pick, class Fn>
void visit_block_dyads(GraphKind kind, const std::vector<NodeIndex>& rk,
                       const std::vector<NodeIndex>& cl, bool same_block, Pick&& pick, Fn&& fn) {
  const std::uint64_t nr = rk.size();
  const std::uint64_t nc = cl.size();
  if (!same_block || kind == GraphKind::Bipartite) {
    pick(nr * nc, [&](std::uint64_t t) { fn(rk[t / nc], cl[t % nc]); });
  } else if (kind == GraphKind::Undirected) {
    UpperTriangleCursor cursor(nr);
    pick(nr * (nr - (nr > 0)) / 2, [&](std::uint64_t t) {
      const Dyad d = cursor.seek(t);
      fn(rk[d.i], rk[d.j]);
    });
  } else {
    pick(nr * (nr - (nr > 0)), [&](std::uint64_t t) {
      const std::uint64_t a = t / (nr - 1);
      std::uint64_t b = t % (nr - 1);
      if (b >= a) ++b;
      fn(rk[a], rk[b]);
    });
  }
}

template <class Fn>
void for_each_block_pair(GraphKind kind, std::size_t kr, std::size_t kc, Fn&& fn) {
  for (std::size_t k = 0; k < kr; ++k) {
    for (std::size_t l = kind == GraphKind::Undirected ? k : 0; l < kc; ++l) fn(k, l);
  }
}

}  // namespace detail

// Draws a binary graph with independent Bernoulli(prob(z_i, w_j)) dyads.
// Cost is proportional to the number of links drawn plus K^2.
inline Graph sample_block_graph(GraphKind kind, const Partition& z, const Partition* w,
                                const BlockMatrix<double>& prob, Rng& rng) {
  const Partition& cols = kind == GraphKind::Bipartite ? *w : z;
  const auto rm = detail::members_of(z);
  const auto cm = detail::members_of(cols);
  std::vector<Edge> edges;
  detail::for_each_block_pair(kind, rm.size(), cm.size(), [&](std::size_t k, std::size_t l) {
    const double p = prob(k, l);
    detail::visit_block_dyads(
        kind, rm[k], cm[l], k == l,
        [&](std::uint64_t count, auto&& visit) { rng.bernoulli_subset(count, p, visit); },
        [&](NodeIndex i, NodeIndex j) { edges.push_back({i, j, 1}); });
  });
  return Graph(kind, z.size(), cols.size(), std::move(edges));
}

// Draws integer weights x_ij ~ Poisson(rate(z_i, w_j)); every dyad is visited.
template <class RateFn>
Graph sample_poisson_graph(GraphKind kind, const Partition& z, const Partition* w, RateFn&& rate,
                           Rng& rng) {
  const Partition& cols = kind == GraphKind::Bipartite ? *w : z;
  const auto rm = detail::members_of(z);
  const auto cm = detail::members_of(cols);
  std::vector<Edge> edges;
  detail::for_each_block_pair(kind, rm.size(), cm.size(), [&](std::size_t k, std::size_t l) {
    detail::visit_block_dyads(
        kind, rm[k], cm[l], k == l,
        [](std::uint64_t count, auto&& visit) {
          for (std::uint64_t t = 0; t < count; ++t) visit(t);
        },
        [&](NodeIndex i, NodeIndex j) {
          const std::int64_t x = rng.poisson(rate(k, l));
          if (x > 0) edges.push_back({i, j, static_cast<std::uint32_t>(x)});
        });
  });
  return Graph(kind, z.size(), cols.size(), std::move(edges), true);
}

struct SimulatedNetwork {
  Graph graph;
  Partition z;
  std::optional<Partition> w;  // bipartite column partition
  BlockMatrix<double> phi;     // link probabilities, or Poisson rates
};

// Forward simulation of the generative model: partition(s) from the CRP,
// one parameter per block pair from the prior, then independent dyads.
// n_col is used only for bipartite models.
inline SimulatedNetwork simulate_irm(const ModelSpec& spec, std::size_t n, std::size_t n_col, Rng& rng) {
  validate(spec.obs);
  SimulatedNetwork out;
  out.z = crp_sample(n, spec.crp, rng);
  const bool bip = spec.kind == GraphKind::Bipartite;
  if (bip) out.w = crp_sample(n_col, spec.crp_col, rng);
  const std::size_t kr = out.z.num_blocks();
  const std::size_t kc = bip ? out.w->num_blocks() : kr;
  out.phi = BlockMatrix<double>(kr, kc);
  detail::for_each_block_pair(spec.kind, kr, kc, [&](std::size_t k, std::size_t l) {
    const double v = std::visit(
        [&](const auto& fam) {
          using F = std::decay_t<decltype(fam)>;
          if constexpr (std::is_same_v<F, BetaBernoulli>) {
            return rng.beta(fam.a, fam.b);
          } else {
            return rng.gamma(fam.shape, fam.rate);
          }
        },
        spec.obs);
    out.phi(k, l) = v;
    if (spec.kind == GraphKind::Undirected) out.phi(l, k) = v;
  });
  const Partition* w = bip ? &*out.w : nullptr;
  if (is_poisson(spec.obs)) {
    out.graph = sample_poisson_graph(spec.kind, out.z, w,
                                     [&](std::size_t k, std::size_t l) { return out.phi(k, l); }, rng);
  } else {
    out.graph = sample_block_graph(spec.kind, out.z, w, out.phi, rng);
  }
  return out;
}

struct PlantedNetwork {
  Graph graph;
  Partition truth;
};

// Planted-partition benchmark: node v belongs to community v mod K, and
// dyads link with probability c_in/N inside a community and c_out/N between
// communities, so the expected link count grows linearly in N.
inline PlantedNetwork simulate_benchmark(std::size_t n, std::size_t k, double c_in, double c_out, Rng& rng) {
  if (n == 0 || k == 0) throw UsageError("benchmark needs N >= 1 and K >= 1");
  const double p_in = c_in / static_cast<double>(n);
  const double p_out = c_out / static_cast<double>(n);
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw UsageError("benchmark link probability c/N must lie in [0, 1]");
  }
  std::vector<BlockLabel> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<BlockLabel>(v % k);
  PlantedNetwork out{{}, Partition(labels)};
  const std::size_t kk = out.truth.num_blocks();
  BlockMatrix<double> prob(kk, kk, p_out);
  for (std::size_t b = 0; b < kk; ++b) prob(b, b) = p_in;
  out.graph = sample_block_graph(GraphKind::Undirected, out.truth, nullptr, prob, rng);
  return out;
}

inline double expected_benchmark_links(std::size_t n, std::size_t k, double c_in, double c_out) {
  std::vector<double> sizes(std::min(n, k), 0.0);
  for (std::size_t v = 0; v < n; ++v) sizes[v % k] += 1.0;
  double within = 0.0;
  double total = 0.0;
  for (double s : sizes) {
    within += s * (s - 1.0) / 2.0;
    total += s;
  }
  const double all = total * (total - 1.0) / 2.0;
  return (within * c_in + (all - within) * c_out) / static_cast<double>(n);
}

// Exponential-family view of the Bernoulli likelihood for fixed partition:
// log p(X | z, phi) = natural . stats - log_normalizer, with stats the
// per-block-pair link counts and natural the log-odds.
struct ErgmForm {
  std::vector<std::int64_t> stats;
  std::vector<double> natural;
  double log_normalizer = 0.0;
};

inline ErgmForm to_ergm_form(const BlockStats& s, const BlockMatrix<double>& phi, std::size_t channel = 0) {
  if (s.poisson) throw UsageError("the ERGM form applies to the Beta-Bernoulli model");
  if (phi.rows() != s.row_blocks() || phi.cols() != s.col_blocks()) {
    throw DataError("link-probability matrix does not match the block statistics");
  }
  ErgmForm out;
  for_each_block_pair(s, [&](std::size_t k, std::size_t l) {
    const double p = phi(k, l);
    if (!(p > 0.0 && p < 1.0)) throw NumericError("log-odds undefined for link probability 0 or 1");
    const std::int64_t m = s.links[channel](k, l);
    const std::int64_t pairs = m + s.mbar[channel](k, l);
    out.stats.push_back(m);
    out.natural.push_back(std::log(p / (1.0 - p)));
    out.log_normalizer -= static_cast<double>(pairs) * std::log1p(-p);
  });
  return out;
}

}  // namespace irmkit

#endif  // IRMKIT_SIMULATE_HPP
