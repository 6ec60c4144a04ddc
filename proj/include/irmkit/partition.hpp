#ifndef IRMKIT_PARTITION_HPP
#define IRMKIT_PARTITION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "irmkit/errors.hpp"
#include "irmkit/graph.hpp"
#include "irmkit/random.hpp"
#include "irmkit/special.hpp"

namespace irmkit {

using BlockLabel = std::uint32_t;

// Sentinel target for move_node: open a new block.
inline constexpr BlockLabel kNewBlock = std::numeric_limits<BlockLabel>::max();

// CRP concentration.
struct CrpParam {
  double A = 1.0;

  CrpParam() = default;
  explicit CrpParam(double concentration) : A(concentration) {
    if (!(concentration > 0.0) || !std::isfinite(concentration)) {
      throw UsageError("CRP concentration must be positive");
    }
  }
};

// A set partition of nodes 0..N-1 in canonical form: block labels are
// 0..K-1, numbered in order of each block's first node.
class Partition {
 public:
  Partition() = default;

  // Canonicalizes an arbitrary labelling.
  explicit Partition(std::span<const BlockLabel> labels) : labels_(labels.size()) {
    BlockLabel max_raw = 0;
    for (BlockLabel raw : labels) max_raw = std::max(max_raw, raw);
    if (max_raw <= 2 * labels.size() + 64) {
      std::vector<BlockLabel> canon(static_cast<std::size_t>(max_raw) + 1, kNewBlock);
      assign(labels, [&](BlockLabel raw) -> BlockLabel& { return canon[raw]; });
    } else {
      std::unordered_map<BlockLabel, BlockLabel> canon;
      assign(labels, [&](BlockLabel raw) -> BlockLabel& {
        return canon.try_emplace(raw, kNewBlock).first->second;
      });
    }
  }
  explicit Partition(const std::vector<BlockLabel>& labels)
      : Partition(std::span<const BlockLabel>(labels)) {}
  Partition(std::initializer_list<BlockLabel> labels)
      : Partition(std::vector<BlockLabel>(labels)) {}

  static Partition singletons(std::size_t n) {
    std::vector<BlockLabel> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<BlockLabel>(i);
    return Partition(z);
  }
  static Partition one_block(std::size_t n) { return Partition(std::vector<BlockLabel>(n, 0)); }

  std::size_t size() const { return labels_.size(); }
  std::size_t num_blocks() const { return sizes_.size(); }
  BlockLabel label(NodeIndex n) const { return labels_.at(n); }
  const std::vector<BlockLabel>& labels() const { return labels_; }
  const std::vector<std::int64_t>& sizes() const { return sizes_; }

  friend bool operator==(const Partition& a, const Partition& b) { return a.labels_ == b.labels_; }

 private:
  template <class Lookup>
  void assign(std::span<const BlockLabel> labels, Lookup&& slot) {
    for (std::size_t n = 0; n < labels.size(); ++n) {
      BlockLabel& canon = slot(labels[n]);
      if (canon == kNewBlock) {
        canon = static_cast<BlockLabel>(sizes_.size());
        sizes_.push_back(0);
      }
      labels_[n] = canon;
      ++sizes_[canon];
    }
  }

  std::vector<BlockLabel> labels_;
  std::vector<std::int64_t> sizes_;
};

// log p(partition) under CRP(A):
//   log Gamma(A) + K log A - log Gamma(A + N) + sum_k log Gamma(n_k).
inline double crp_log_prob(std::span<const std::int64_t> sizes, double A) {
  std::int64_t n = 0;
  double lp = 0.0;
  for (std::int64_t nk : sizes) {
    lp += log_gamma(static_cast<double>(nk));
    n += nk;
  }
  if (n == 0) return 0.0;
  return lp + log_gamma(A) + static_cast<double>(sizes.size()) * std::log(A) -
         log_gamma(A + static_cast<double>(n));
}

inline double crp_log_prob(const Partition& p, CrpParam crp) {
  return crp_log_prob(p.sizes(), crp.A);
}

// Seating weights for one extra node: (n_1, ..., n_K, A), unnormalized.
inline std::vector<double> conditional_weights(std::span<const std::int64_t> sizes_without_node,
                                               CrpParam crp) {
  std::vector<double> w;
  w.reserve(sizes_without_node.size() + 1);
  for (std::int64_t nk : sizes_without_node) w.push_back(static_cast<double>(nk));
  w.push_back(crp.A);
  return w;
}

// Sequential seating. Labels come out canonical by construction.
inline Partition crp_sample(std::size_t n, CrpParam crp, Rng& rng) {
  std::vector<BlockLabel> z(n);
  std::vector<std::int64_t> sizes;
  std::vector<double> logw;
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = conditional_weights(sizes, crp);
    logw.resize(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) logw[k] = std::log(w[k]);
    const std::size_t k = rng.categorical_log(logw);
    if (k == sizes.size()) sizes.push_back(0);
    ++sizes[k];
    z[i] = static_cast<BlockLabel>(k);
  }
  return Partition(z);
}

struct MoveResult {
  Partition partition;
  // remap[old] = label of the same block afterwards; nullopt if it emptied.
  std::vector<std::optional<BlockLabel>> remap;
  // Label the moved node ended up in.
  BlockLabel target = 0;
};

// Reassigns node n to an existing block or to kNewBlock and restores
// canonical labels. O(N).
inline MoveResult move_node(const Partition& p, NodeIndex n, BlockLabel target) {
  if (n >= p.size()) throw UsageError("node " + std::to_string(n) + " out of range");
  if (target != kNewBlock && target >= p.num_blocks()) {
    throw UsageError("move target " + std::to_string(target) + " is not a block");
  }
  const BlockLabel fresh = static_cast<BlockLabel>(p.num_blocks());
  std::vector<BlockLabel> raw = p.labels();
  raw[n] = target == kNewBlock ? fresh : target;
  MoveResult out{Partition(raw), std::vector<std::optional<BlockLabel>>(p.num_blocks()), 0};
  for (std::size_t v = 0; v < raw.size(); ++v) {
    if (raw[v] < p.num_blocks()) out.remap[raw[v]] = out.partition.label(static_cast<NodeIndex>(v));
  }
  out.target = out.partition.label(n);
  return out;
}

}  // namespace irmkit

#endif  // IRMKIT_PARTITION_HPP
