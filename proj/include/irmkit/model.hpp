#ifndef IRMKIT_MODEL_HPP
#define IRMKIT_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "irmkit/block_matrix.hpp"
#include "irmkit/errors.hpp"
#include "irmkit/graph.hpp"
#include "irmkit/partition.hpp"
#include "irmkit/special.hpp"

namespace irmkit {

// Beta(a, b) prior on link probabilities, Bernoulli links.
struct BetaBernoulli {
  double a = 1.0;
  double b = 1.0;

  // Mbar holds non-link counts for this family.
  static constexpr bool kCountsNonLinks = true;

  // log B(m + a, mbar + b) - log B(a, b); zero for an empty block pair.
  double log_evidence(std::int64_t m, std::int64_t mbar) const {
    if (m == 0 && mbar == 0) return 0.0;
    return log_beta(static_cast<double>(m) + a, static_cast<double>(mbar) + b) - log_beta(a, b);
  }

  // Change in log evidence when a block pair gains (dm, dmbar).
  double log_evidence_delta(std::int64_t m, std::int64_t mbar, std::int64_t dm,
                            std::int64_t dmbar) const {
    if (dm == 0 && dmbar == 0) return 0.0;
    return log_beta(static_cast<double>(m + dm) + a, static_cast<double>(mbar + dmbar) + b) -
           log_beta(static_cast<double>(m) + a, static_cast<double>(mbar) + b);
  }

  double predictive_mean(std::int64_t m, std::int64_t mbar) const {
    return (static_cast<double>(m) + a) / (static_cast<double>(m + mbar) + a + b);
  }
};

// Gamma(shape, rate) prior on Poisson rates of integer edge weights. For
// this family M holds weight sums and Mbar the number of observed dyads.
struct GammaPoisson {
  double shape = 1.0;
  double rate = 1.0;

  static constexpr bool kCountsNonLinks = false;

  // shape log rate - log Gamma(shape) + log Gamma(S + shape) - (S + shape) log(P + rate),
  // without the per-dyad -log(x!) terms (kept globally in BlockStats).
  double log_evidence(std::int64_t sum, std::int64_t pairs) const {
    if (sum == 0 && pairs == 0) return 0.0;
    const double s = static_cast<double>(sum) + shape;
    return shape * std::log(rate) - log_gamma(shape) + log_gamma(s) -
           s * std::log(static_cast<double>(pairs) + rate);
  }

  double log_evidence_delta(std::int64_t sum, std::int64_t pairs, std::int64_t dsum,
                            std::int64_t dpairs) const {
    if (dsum == 0 && dpairs == 0) return 0.0;
    const double s0 = static_cast<double>(sum) + shape;
    const double s1 = static_cast<double>(sum + dsum) + shape;
    return log_gamma(s1) - s1 * std::log(static_cast<double>(pairs + dpairs) + rate) -
           log_gamma(s0) + s0 * std::log(static_cast<double>(pairs) + rate);
  }

  // Posterior mean rate.
  double predictive_mean(std::int64_t sum, std::int64_t pairs) const {
    return (static_cast<double>(sum) + shape) / (static_cast<double>(pairs) + rate);
  }
};

using ObsHyper = std::variant<BetaBernoulli, GammaPoisson>;

inline bool is_poisson(const ObsHyper& h) { return std::holds_alternative<GammaPoisson>(h); }

inline void validate(const ObsHyper& h) {
  std::visit(
      [](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, BetaBernoulli>) {
          if (!(f.a > 0.0 && f.b > 0.0)) throw UsageError("Beta hyperparameters must be positive");
        } else {
          if (!(f.shape > 0.0 && f.rate > 0.0)) {
            throw UsageError("Gamma hyperparameters must be positive");
          }
        }
      },
      h);
}

// How several networks on one node set share link parameters.
enum class Tying { SharedPhi, PerNetworkPhi };

struct ModelSpec {
  GraphKind kind = GraphKind::Undirected;
  ObsHyper obs = BetaBernoulli{};
  CrpParam crp{};      // all nodes, or the row side of a bipartite graph
  CrpParam crp_col{};  // column side of a bipartite graph
  Tying tying = Tying::SharedPhi;
};

// One or more networks on a shared node set, together with the dyads whose
// values are hidden. Adjacency here excludes masked dyads.
class ObservedNetwork {
 public:
  explicit ObservedNetwork(Graph g, DyadMask mask = {})
      : ObservedNetwork(std::vector<Graph>{std::move(g)}, std::move(mask)) {}

  explicit ObservedNetwork(std::vector<Graph> layers, DyadMask mask = {})
      : layers_(std::move(layers)), mask_(std::move(mask)) {
    if (layers_.empty()) throw DataError("no networks supplied");
    for (const Graph& g : layers_) {
      if (g.kind() != layers_[0].kind() || g.n_rows() != layers_[0].n_rows() ||
          g.n_cols() != layers_[0].n_cols()) {
        throw DataError("networks must share kind and node set");
      }
    }
    for (const Graph& g : layers_) {
      if (!mask_.empty()) {
        rows_.push_back(filtered(g, Side::Row));
        if (g.kind() != GraphKind::Undirected) cols_.push_back(filtered(g, Side::Col));
      }
      for (const Edge& e : g.edges()) {
        if (mask_.empty() || !mask_.contains(e.i, e.j)) {
          log_weight_factorial_ += log_gamma(static_cast<double>(e.w) + 1.0);
        }
      }
    }
  }

  GraphKind kind() const { return layers_[0].kind(); }
  std::size_t n_rows() const { return layers_[0].n_rows(); }
  std::size_t n_cols() const { return layers_[0].n_cols(); }
  std::size_t num_layers() const { return layers_.size(); }
  const Graph& layer(std::size_t l = 0) const { return layers_.at(l); }
  const std::vector<Graph>& layers() const { return layers_; }
  const DyadMask& mask() const { return mask_; }

  // Observed links of node n in one layer.
  std::span<const Neighbor> links(std::size_t layer, NodeIndex n, Side side) const {
    if (mask_.empty()) return layers_[layer].neighbors(n, side);
    if (side == Side::Col && kind() != GraphKind::Undirected) return cols_[layer].at(n);
    return rows_[layer].at(n);
  }

  std::span<const NodeIndex> hidden(NodeIndex n, Side side) const { return mask_.partners(n, side); }

  // Sum over observed links (all layers) of log(w!).
  double log_weight_factorial() const { return log_weight_factorial_; }

  bool has_non_unit_weights() const {
    for (const Graph& g : layers_) {
      for (const Edge& e : g.edges()) {
        if (e.w != 1) return true;
      }
    }
    return false;
  }

 private:
  detail::Csr<Neighbor> filtered(const Graph& g, Side side) const {
    const std::size_t n = g.num_nodes(side);
    std::vector<std::pair<NodeIndex, Neighbor>> entries;
    for (NodeIndex v = 0; v < n; ++v) {
      for (const Neighbor& u : g.neighbors(v, side)) {
        const bool hidden = side == Side::Row ? mask_.contains(v, u.node) : mask_.contains(u.node, v);
        if (!hidden) entries.push_back({v, u});
      }
    }
    return detail::build_csr<Neighbor>(n, entries);
  }

  std::vector<Graph> layers_;
  DyadMask mask_;
  std::vector<detail::Csr<Neighbor>> rows_;
  std::vector<detail::Csr<Neighbor>> cols_;
  double log_weight_factorial_ = 0.0;
};

inline void validate(const ObservedNetwork& net, const ModelSpec& spec) {
  validate(spec.obs);
  if (net.kind() != spec.kind) throw DataError("graph kind does not match the model");
  if (!is_poisson(spec.obs) && net.has_non_unit_weights()) {
    throw DataError("the Beta-Bernoulli model requires unit edge weights");
  }
}

inline std::size_t num_channels(const ObservedNetwork& net, const ModelSpec& spec) {
  return spec.tying == Tying::PerNetworkPhi ? net.num_layers() : 1;
}
inline std::size_t layers_per_channel(const ObservedNetwork& net, const ModelSpec& spec) {
  return spec.tying == Tying::PerNetworkPhi ? 1 : net.num_layers();
}
inline std::size_t channel_of(std::size_t layer, const ModelSpec& spec) {
  return spec.tying == Tying::PerNetworkPhi ? layer : 0;
}

// Sufficient statistics of a partitioned network. links(c)(k, l) is m_{k,l}
// (weight sum for Poisson); mbar(c)(k, l) is the non-link count (observed
// dyad count for Poisson). Undirected matrices are kept symmetric; the
// evidence sums over k <= l only. Labels with size 0 may appear transiently
// inside a sampler and carry all-zero counts.
struct BlockStats {
  GraphKind kind = GraphKind::Undirected;
  bool poisson = false;
  std::vector<std::int64_t> row_sizes;
  std::vector<std::int64_t> col_sizes;  // bipartite only
  std::vector<BlockMatrix<std::int64_t>> links;
  std::vector<BlockMatrix<std::int64_t>> mbar;
  double log_weight_factorial = 0.0;

  bool bipartite() const { return kind == GraphKind::Bipartite; }
  std::size_t row_blocks() const { return row_sizes.size(); }
  std::size_t col_blocks() const { return bipartite() ? col_sizes.size() : row_sizes.size(); }
  std::size_t channels() const { return links.size(); }
  std::span<const std::int64_t> sizes(Side side) const {
    return side == Side::Col && bipartite() ? col_sizes : row_sizes;
  }
  std::vector<std::int64_t>& sizes(Side side) {
    return side == Side::Col && bipartite() ? col_sizes : row_sizes;
  }

  // Appends an empty block on the given side and returns its label.
  BlockLabel add_block(Side side = Side::Row) {
    auto& sz = sizes(side);
    sz.push_back(0);
    for (std::size_t c = 0; c < links.size(); ++c) {
      links[c].resize(row_blocks(), col_blocks());
      mbar[c].resize(row_blocks(), col_blocks());
    }
    return static_cast<BlockLabel>(sz.size() - 1);
  }

  friend bool operator==(const BlockStats& a, const BlockStats& b) {
    return a.kind == b.kind && a.poisson == b.poisson && a.row_sizes == b.row_sizes &&
           a.col_sizes == b.col_sizes && a.links == b.links && a.mbar == b.mbar;
  }
};

namespace detail {

inline std::int64_t base_pairs(GraphKind kind, std::int64_t nk, std::int64_t nl, bool same) {
  if (kind == GraphKind::Bipartite || !same) return nk * nl;
  return kind == GraphKind::Undirected ? nk * (nk - 1) / 2 : nk * (nk - 1);
}

inline void require_partitions(const ObservedNetwork& net, const Partition& z, const Partition* w) {
  if (z.size() != net.n_rows()) throw DataError("partition length does not match node count");
  if (net.kind() == GraphKind::Bipartite) {
    if (!w) throw DataError("bipartite model needs a column partition");
    if (w->size() != net.n_cols()) throw DataError("column partition length does not match");
  }
}

}  // namespace detail

// Exact block statistics over observed dyads, computed from scratch.
inline BlockStats compute_block_stats(const ObservedNetwork& net, const ModelSpec& spec,
                                      const Partition& z, const Partition* w = nullptr) {
  detail::require_partitions(net, z, w);
  const GraphKind kind = net.kind();
  const bool bip = kind == GraphKind::Bipartite;
  const Partition& cols = bip ? *w : z;

  BlockStats s;
  s.kind = kind;
  s.poisson = is_poisson(spec.obs);
  s.row_sizes = z.sizes();
  if (bip) s.col_sizes = w->sizes();
  if (s.poisson) s.log_weight_factorial = net.log_weight_factorial();
  const std::size_t kr = s.row_blocks();
  const std::size_t kc = s.col_blocks();
  const std::size_t channels = num_channels(net, spec);
  const std::int64_t lpc = static_cast<std::int64_t>(layers_per_channel(net, spec));

  BlockMatrix<std::int64_t> pairs(kr, kc);
  for (std::size_t k = 0; k < kr; ++k) {
    for (std::size_t l = 0; l < kc; ++l) {
      pairs(k, l) = detail::base_pairs(kind, s.row_sizes[k], cols.sizes()[l], !bip && k == l);
    }
  }
  auto bump = [&](BlockMatrix<std::int64_t>& m, BlockLabel k, BlockLabel l, std::int64_t v) {
    m(k, l) += v;
    if (kind == GraphKind::Undirected && k != l) m(l, k) += v;
  };
  for (const Dyad& d : net.mask().dyads()) bump(pairs, z.label(d.i), cols.label(d.j), -1);

  s.links.assign(channels, BlockMatrix<std::int64_t>(kr, kc));
  for (std::size_t layer = 0; layer < net.num_layers(); ++layer) {
    auto& m = s.links[channel_of(layer, spec)];
    for (const Edge& e : net.layer(layer).edges()) {
      if (!net.mask().empty() && net.mask().contains(e.i, e.j)) continue;
      bump(m, z.label(e.i), cols.label(e.j), static_cast<std::int64_t>(e.w));
    }
  }
  s.mbar.assign(channels, BlockMatrix<std::int64_t>(kr, kc));
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t k = 0; k < kr; ++k) {
      for (std::size_t l = 0; l < kc; ++l) {
        const std::int64_t p = lpc * pairs(k, l);
        s.mbar[c](k, l) = s.poisson ? p : p - s.links[c](k, l);
      }
    }
  }
  return s;
}

inline BlockStats compute_block_stats(const Graph& g, const ModelSpec& spec, const Partition& z,
                                      const Partition* w = nullptr, const DyadMask& mask = {}) {
  return compute_block_stats(ObservedNetwork(g, mask), spec, z, w);
}

// Visits every block pair that carries its own parameter: k <= l for
// undirected statistics, all ordered pairs otherwise.
template <class Fn>
void for_each_block_pair(const BlockStats& s, Fn&& fn) {
  for (std::size_t k = 0; k < s.row_blocks(); ++k) {
    const std::size_t l0 = s.kind == GraphKind::Undirected ? k : 0;
    for (std::size_t l = l0; l < s.col_blocks(); ++l) fn(k, l);
  }
}

// Collapsed log p(X | partition), link parameters integrated out.
inline double log_marginal_likelihood(const BlockStats& s, const ObsHyper& h) {
  return std::visit(
      [&](const auto& fam) {
        double total = 0.0;
        for (std::size_t c = 0; c < s.channels(); ++c) {
          for_each_block_pair(s, [&](std::size_t k, std::size_t l) {
            total += fam.log_evidence(s.links[c](k, l), s.mbar[c](k, l));
          });
        }
        if (s.poisson) total -= s.log_weight_factorial;
        return total;
      },
      h);
}

inline double crp_log_prob_nonempty(std::span<const std::int64_t> sizes, double A) {
  std::vector<std::int64_t> nonempty;
  nonempty.reserve(sizes.size());
  for (auto n : sizes) {
    if (n > 0) nonempty.push_back(n);
  }
  return crp_log_prob(nonempty, A);
}

// log p(X, partition) from block statistics (empty labels ignored).
inline double joint_log_prob(const BlockStats& s, const ModelSpec& spec) {
  double lp = crp_log_prob_nonempty(s.row_sizes, spec.crp.A) + log_marginal_likelihood(s, spec.obs);
  if (s.bipartite()) lp += crp_log_prob_nonempty(s.col_sizes, spec.crp_col.A);
  return lp;
}

inline double joint_log_prob(const ObservedNetwork& net, const ModelSpec& spec, const Partition& z,
                             const Partition* w = nullptr) {
  return joint_log_prob(compute_block_stats(net, spec, z, w), spec);
}

// Links and observed dyads from one node into each block of the opposite
// side, per channel. Index [c * labels + l].
//  - undirected: out_* only (adjacency is symmetric)
//  - directed: out_* for n -> l, in_* for l -> n
//  - bipartite row node: out_* over column blocks; column node: in_* over row blocks
struct NodeLinks {
  std::size_t channels = 0;
  std::size_t labels = 0;
  std::vector<std::int64_t> out_links, out_pairs, in_links, in_pairs;

  void reset(std::size_t n_channels, std::size_t n_labels) {
    channels = n_channels;
    labels = n_labels;
    for (auto* v : {&out_links, &out_pairs, &in_links, &in_pairs}) v->assign(channels * labels, 0);
  }
  std::size_t at(std::size_t c, std::size_t l) const { return c * labels + l; }
};

// Fills r for node n whose current block is `exclude` on the same side (so
// that its own slot is not counted as a partner). Cost O(labels + degree).
inline void collect_node_links(const ObservedNetwork& net, const ModelSpec& spec,
                               std::span<const BlockLabel> target_labels,
                               std::span<const std::int64_t> target_sizes,
                               std::optional<BlockLabel> exclude, NodeIndex n, Side side,
                               NodeLinks& r) {
  const std::size_t channels = num_channels(net, spec);
  const std::int64_t lpc = static_cast<std::int64_t>(layers_per_channel(net, spec));
  r.reset(channels, target_sizes.size());
  const GraphKind kind = net.kind();
  const bool want_out = kind != GraphKind::Bipartite || side == Side::Row;
  const bool want_in = kind == GraphKind::Directed || (kind == GraphKind::Bipartite && side == Side::Col);

  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t l = 0; l < r.labels; ++l) {
      std::int64_t nl = target_sizes[l];
      if (exclude && *exclude == l) --nl;
      if (want_out) r.out_pairs[r.at(c, l)] = lpc * nl;
      if (want_in) r.in_pairs[r.at(c, l)] = lpc * nl;
    }
  }
  auto walk = [&](Side walk_side, std::vector<std::int64_t>& links, std::vector<std::int64_t>& pairs) {
    for (std::size_t layer = 0; layer < net.num_layers(); ++layer) {
      const std::size_t c = channel_of(layer, spec);
      for (const Neighbor& u : net.links(layer, n, walk_side)) {
        links[r.at(c, target_labels[u.node])] += u.weight;
      }
    }
    for (NodeIndex v : net.hidden(n, walk_side)) {
      const BlockLabel l = target_labels[v];
      for (std::size_t c = 0; c < channels; ++c) pairs[r.at(c, l)] -= lpc;
    }
  };
  if (kind == GraphKind::Bipartite) {
    if (side == Side::Row) {
      walk(Side::Row, r.out_links, r.out_pairs);
    } else {
      walk(Side::Col, r.in_links, r.in_pairs);
    }
  } else {
    walk(Side::Row, r.out_links, r.out_pairs);
    if (kind == GraphKind::Directed) walk(Side::Col, r.in_links, r.in_pairs);
  }
}

// Public form: link counts of node n treated as removed from partition p
// (or, for a bipartite column node, counted against the row partition).
inline NodeLinks node_block_link_counts(const ObservedNetwork& net, const ModelSpec& spec,
                                        const Partition& z, NodeIndex n,
                                        const Partition* w = nullptr, Side side = Side::Row) {
  detail::require_partitions(net, z, w);
  NodeLinks r;
  if (net.kind() == GraphKind::Bipartite) {
    const Partition& targets = side == Side::Row ? *w : z;
    collect_node_links(net, spec, targets.labels(), targets.sizes(), std::nullopt, n, side, r);
  } else {
    collect_node_links(net, spec, z.labels(), z.sizes(), z.label(n), n, Side::Row, r);
  }
  return r;
}

namespace detail {

inline std::int64_t mbar_delta(bool poisson, std::int64_t links, std::int64_t pairs) {
  return poisson ? pairs : pairs - links;
}

// Adds sign * r to the counts of block `k` on `side`.
inline void shift_counts(BlockStats& s, const NodeLinks& r, BlockLabel k, Side side, int sign) {
  const GraphKind kind = s.kind;
  for (std::size_t c = 0; c < r.channels; ++c) {
    auto& m = s.links[c];
    auto& mb = s.mbar[c];
    for (std::size_t l = 0; l < r.labels; ++l) {
      const std::size_t i = r.at(c, l);
      if (kind == GraphKind::Bipartite) {
        if (side == Side::Row) {
          m(k, l) += sign * r.out_links[i];
          mb(k, l) += sign * mbar_delta(s.poisson, r.out_links[i], r.out_pairs[i]);
        } else {
          m(l, k) += sign * r.in_links[i];
          mb(l, k) += sign * mbar_delta(s.poisson, r.in_links[i], r.in_pairs[i]);
        }
        continue;
      }
      const std::int64_t dm = r.out_links[i];
      const std::int64_t db = mbar_delta(s.poisson, r.out_links[i], r.out_pairs[i]);
      if (kind == GraphKind::Undirected) {
        m(k, l) += sign * dm;
        mb(k, l) += sign * db;
        if (l != k) {
          m(l, k) += sign * dm;
          mb(l, k) += sign * db;
        }
      } else {
        const std::int64_t im = r.in_links[i];
        const std::int64_t ib = mbar_delta(s.poisson, r.in_links[i], r.in_pairs[i]);
        m(k, l) += sign * dm;
        mb(k, l) += sign * db;
        m(l, k) += sign * im;
        mb(l, k) += sign * ib;
      }
    }
  }
}

}  // namespace detail

// Adds a node with link counts r to block `target` (kNewBlock appends a
// block). r must have been computed with the node excluded. Returns the
// label used. O(labels) per channel.
inline BlockLabel apply_assignment(BlockStats& s, const NodeLinks& r, BlockLabel target,
                                   Side side = Side::Row) {
  if (target == kNewBlock) target = s.add_block(side);
  if (target >= s.sizes(side).size()) throw UsageError("assignment target is not a block");
  ++s.sizes(side)[target];
  detail::shift_counts(s, r, target, side, +1);
  return target;
}

// Inverse of apply_assignment; the block may become empty (size 0).
inline void remove_assignment(BlockStats& s, const NodeLinks& r, BlockLabel from,
                              Side side = Side::Row) {
  --s.sizes(side)[from];
  detail::shift_counts(s, r, from, side, -1);
}

namespace detail {

template <class Family>
void gibbs_kernel(const Family& fam, const BlockStats& s, const NodeLinks& r, double log_new,
                  Side side, std::span<const BlockLabel> candidates,
                  std::span<const BlockLabel> targets, std::vector<double>& out) {
  constexpr bool poisson = !Family::kCountsNonLinks;
  const GraphKind kind = s.kind;
  const auto sizes = s.sizes(side);
  out.resize(candidates.size() + 1);

  for (std::size_t ci = 0; ci <= candidates.size(); ++ci) {
    const bool fresh = ci == candidates.size();
    const BlockLabel k = fresh ? kNewBlock : candidates[ci];
    double lw = fresh ? log_new : std::log(static_cast<double>(sizes[k]));
    for (std::size_t c = 0; c < r.channels; ++c) {
      const auto& m = s.links[c];
      const auto& mb = s.mbar[c];
      for (BlockLabel l : targets) {
        const std::size_t i = r.at(c, l);
        const std::int64_t ol = kind == GraphKind::Bipartite && side == Side::Col ? 0 : r.out_links[i];
        const std::int64_t ob = kind == GraphKind::Bipartite && side == Side::Col
                                    ? 0
                                    : mbar_delta(poisson, r.out_links[i], r.out_pairs[i]);
        if (kind == GraphKind::Undirected || (kind == GraphKind::Bipartite && side == Side::Row)) {
          lw += fresh ? fam.log_evidence_delta(0, 0, ol, ob)
                      : fam.log_evidence_delta(m(k, l), mb(k, l), ol, ob);
          continue;
        }
        const std::int64_t il = r.in_links[i];
        const std::int64_t ib = mbar_delta(poisson, r.in_links[i], r.in_pairs[i]);
        if (kind == GraphKind::Bipartite) {
          lw += fresh ? fam.log_evidence_delta(0, 0, il, ib)
                      : fam.log_evidence_delta(m(l, k), mb(l, k), il, ib);
        } else if (fresh) {
          lw += fam.log_evidence_delta(0, 0, ol, ob) + fam.log_evidence_delta(0, 0, il, ib);
        } else if (l == k) {
          lw += fam.log_evidence_delta(m(k, k), mb(k, k), ol + il, ob + ib);
        } else {
          lw += fam.log_evidence_delta(m(k, l), mb(k, l), ol, ob) +
                fam.log_evidence_delta(m(l, k), mb(l, k), il, ib);
        }
      }
    }
    out[ci] = lw;
  }
}

}  // namespace detail

// Unnormalized log conditional weights for reassigning a removed node:
// entry i for block candidates[i], the last entry for a new block. `targets`
// lists the nonempty blocks on the opposite side (the same side unless
// bipartite). Differences between entries equal differences of the joint
// log probability of the completed partitions.
inline void gibbs_assignment_log_weights(const BlockStats& stats_without_node, const NodeLinks& r,
                                         const ModelSpec& spec, Side side,
                                         std::span<const BlockLabel> candidates,
                                         std::span<const BlockLabel> targets,
                                         std::vector<double>& out) {
  const double A = side == Side::Col && spec.kind == GraphKind::Bipartite ? spec.crp_col.A : spec.crp.A;
  std::visit(
      [&](const auto& fam) {
        detail::gibbs_kernel(fam, stats_without_node, r, std::log(A), side, candidates, targets, out);
      },
      spec.obs);
}

inline std::vector<double> gibbs_assignment_log_weights(const BlockStats& stats_without_node,
                                                        const NodeLinks& r, const ModelSpec& spec,
                                                        Side side = Side::Row) {
  std::vector<BlockLabel> candidates;
  std::vector<BlockLabel> targets;
  const auto own = stats_without_node.sizes(side);
  const Side other = side == Side::Row ? Side::Col : Side::Row;
  const auto opp = stats_without_node.bipartite() ? stats_without_node.sizes(other) : own;
  for (std::size_t k = 0; k < own.size(); ++k) {
    if (own[k] > 0) candidates.push_back(static_cast<BlockLabel>(k));
  }
  for (std::size_t l = 0; l < opp.size(); ++l) {
    if (opp[l] > 0) targets.push_back(static_cast<BlockLabel>(l));
  }
  std::vector<double> out;
  gibbs_assignment_log_weights(stats_without_node, r, spec, side, candidates, targets, out);
  return out;
}

// Posterior mean of the link parameter of block pair (k, l) in a channel.
inline double predictive_mean(const BlockStats& s, const ObsHyper& h, BlockLabel k, BlockLabel l,
                              std::size_t channel = 0) {
  return std::visit(
      [&](const auto& fam) { return fam.predictive_mean(s.links[channel](k, l), s.mbar[channel](k, l)); },
      h);
}

}  // namespace irmkit

#endif  // IRMKIT_MODEL_HPP
