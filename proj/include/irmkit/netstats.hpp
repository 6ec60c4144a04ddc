#ifndef IRMKIT_NETSTATS_HPP
#define IRMKIT_NETSTATS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "irmkit/errors.hpp"
#include "irmkit/graph.hpp"
#include "irmkit/random.hpp"

namespace irmkit {

struct DegreeStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct PathLengthSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();  // NaN when no pair is connected
  std::uint64_t reachable_pairs = 0;
  std::size_t components = 0;
};

struct NetCharacteristics {
  std::size_t nodes = 0;
  std::size_t links = 0;
  double degree_mean = 0.0;
  double degree_std = 0.0;
  double clustering = std::numeric_limits<double>::quiet_NaN();
  double cpl = std::numeric_limits<double>::quiet_NaN();
  std::size_t components = 0;
};

namespace detail {

inline DegreeStats moments(const std::vector<double>& xs) {
  DegreeStats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(xs.size()));
  return s;
}

inline void require_undirected(const Graph& g, const char* what) {
  if (g.kind() != GraphKind::Undirected) {
    throw UsageError(std::string(what) + " is defined for undirected graphs only");
  }
}

}  // namespace detail

// Degree mean/std. Directed graphs use total (in + out) degree; bipartite
// graphs report the requested side.
inline DegreeStats degree_stats(const Graph& g, Side side = Side::Row) {
  const std::size_t n = g.num_nodes(side);
  std::vector<double> deg(n);
  for (NodeIndex v = 0; v < n; ++v) {
    double d = static_cast<double>(g.degree(v, side));
    if (g.kind() == GraphKind::Directed) d += static_cast<double>(g.degree(v, Side::Col));
    deg[v] = d;
  }
  return detail::moments(deg);
}

// Mean local clustering coefficient; nodes of degree < 2 contribute 0.
inline double clustering_coefficient(const Graph& g) {
  detail::require_undirected(g, "clustering coefficient");
  const std::size_t n = g.n_rows();
  if (n == 0) return 0.0;
  std::vector<char> mark(n, 0);
  double total = 0.0;
  for (NodeIndex v = 0; v < n; ++v) {
    const auto nb = g.neighbors(v);
    const std::size_t d = nb.size();
    if (d < 2) continue;
    for (const auto& u : nb) mark[u.node] = 1;
    std::uint64_t closed = 0;
    for (const auto& u : nb) {
      for (const auto& w : g.neighbors(u.node)) {
        if (w.node > u.node && mark[w.node]) ++closed;
      }
    }
    for (const auto& u : nb) mark[u.node] = 0;
    total += static_cast<double>(closed) / (static_cast<double>(d) * static_cast<double>(d - 1) / 2.0);
  }
  return total / static_cast<double>(n);
}

// BFS from every node; averages over connected unordered pairs only.
inline PathLengthSummary path_length_summary(const Graph& g) {
  detail::require_undirected(g, "characteristic path length");
  const std::size_t n = g.n_rows();
  PathLengthSummary out;
  std::vector<std::int64_t> dist(n, -1);
  std::vector<NodeIndex> frontier;
  std::vector<char> seen(n, 0);
  double sum = 0.0;
  for (NodeIndex s = 0; s < n; ++s) {
    if (!seen[s]) ++out.components;
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    frontier.assign(1, s);
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      const NodeIndex v = frontier[head];
      seen[v] = 1;
      for (const auto& u : g.neighbors(v)) {
        if (dist[u.node] >= 0) continue;
        dist[u.node] = dist[v] + 1;
        frontier.push_back(u.node);
        if (u.node > s) {
          sum += static_cast<double>(dist[u.node]);
          ++out.reachable_pairs;
        }
      }
    }
  }
  if (out.reachable_pairs > 0) out.mean = sum / static_cast<double>(out.reachable_pairs);
  return out;
}

inline double characteristic_path_length(const Graph& g) {
  const auto s = path_length_summary(g);
  if (s.reachable_pairs == 0) throw NumericError("characteristic path length of an edgeless graph");
  return s.mean;
}

// All characteristics defined for the graph's kind; clustering and path
// length stay NaN for directed and bipartite graphs.
inline NetCharacteristics characterize(const Graph& g) {
  NetCharacteristics c;
  c.nodes = g.kind() == GraphKind::Bipartite ? g.n_rows() + g.n_cols() : g.n_rows();
  c.links = g.num_edges();
  const auto d = degree_stats(g);
  c.degree_mean = d.mean;
  c.degree_std = d.std;
  if (g.kind() == GraphKind::Undirected) {
    c.clustering = clustering_coefficient(g);
    const auto p = path_length_summary(g);
    c.cpl = p.mean;
    c.components = p.components;
  }
  return c;
}

// Walks the strict upper triangle of an n x n matrix in row-major order,
// advancing to the pair with a given (increasing) linear index.
class UpperTriangleCursor {
 public:
  explicit UpperTriangleCursor(std::uint64_t n) : n_(n) {}

  Dyad seek(std::uint64_t t) {
    while (t >= row_start_ + (n_ - 1 - row_)) {
      row_start_ += n_ - 1 - row_;
      ++row_;
    }
    const std::uint64_t j = row_ + 1 + (t - row_start_);
    return {static_cast<NodeIndex>(row_), static_cast<NodeIndex>(j)};
  }

 private:
  std::uint64_t n_;
  std::uint64_t row_ = 0;
  std::uint64_t row_start_ = 0;
};

// G(n, phi): every one of the n(n-1)/2 dyads is a link independently.
inline Graph erdos_renyi(std::size_t n, double phi, Rng& rng) {
  if (!(phi >= 0.0 && phi <= 1.0)) throw UsageError("connection probability must lie in [0, 1]");
  std::vector<Edge> edges;
  UpperTriangleCursor cursor(n);
  rng.bernoulli_subset(dyad_universe(GraphKind::Undirected, n, n), phi, [&](std::uint64_t t) {
    const Dyad d = cursor.seek(t);
    edges.push_back({d.i, d.j, 1});
  });
  return Graph::undirected(n, std::move(edges));
}

}  // namespace irmkit

#endif  // IRMKIT_NETSTATS_HPP
