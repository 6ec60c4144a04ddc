#ifndef IRMKIT_GRAPH_HPP
#define IRMKIT_GRAPH_HPP

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "irmkit/errors.hpp"

namespace irmkit {

using NodeIndex = std::uint32_t;

enum class GraphKind { Undirected, Directed, Bipartite };

// Which adjacency of a node to walk. Row: out-links (directed) or the
// row-to-column links of a bipartite graph. Col: in-links, or the
// column-to-row links. Undirected graphs have one symmetric adjacency.
enum class Side { Row, Col };

inline std::string_view to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::Undirected: return "undirected";
    case GraphKind::Directed: return "directed";
    case GraphKind::Bipartite: return "bipartite";
  }
  return "?";
}

inline GraphKind parse_graph_kind(std::string_view s) {
  if (s == "undirected") return GraphKind::Undirected;
  if (s == "directed") return GraphKind::Directed;
  if (s == "bipartite") return GraphKind::Bipartite;
  throw UsageError("unknown graph kind '" + std::string(s) + "'");
}

struct Edge {
  NodeIndex i = 0;
  NodeIndex j = 0;
  std::uint32_t w = 1;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Dyad {
  NodeIndex i = 0;
  NodeIndex j = 0;
  friend bool operator==(const Dyad&, const Dyad&) = default;
  friend auto operator<=>(const Dyad&, const Dyad&) = default;
};

struct Neighbor {
  NodeIndex node = 0;
  std::uint32_t weight = 1;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

namespace detail {

// Compressed adjacency: neighbors of node v are items[offsets[v] .. offsets[v+1]).
template <class T>
struct Csr {
  std::vector<std::size_t> offsets;
  std::vector<T> items;

  std::span<const T> at(std::size_t v) const {
    return {items.data() + offsets[v], offsets[v + 1] - offsets[v]};
  }
};

template <class T, class Key, class Value>
Csr<T> build_csr(std::size_t n, const std::vector<std::pair<Key, Value>>& entries) {
  Csr<T> csr;
  csr.offsets.assign(n + 1, 0);
  for (const auto& e : entries) ++csr.offsets[e.first + 1];
  for (std::size_t v = 0; v < n; ++v) csr.offsets[v + 1] += csr.offsets[v];
  csr.items.resize(entries.size());
  std::vector<std::size_t> fill(csr.offsets.begin(), csr.offsets.end() - 1);
  for (const auto& e : entries) csr.items[fill[e.first]++] = e.second;
  return csr;
}

}  // namespace detail

// Immutable sparse network. Undirected edges are stored once with i < j;
// edges are sorted and free of duplicate dyads.
class Graph {
 public:
  Graph() = default;

  Graph(GraphKind kind, std::size_t n_rows, std::size_t n_cols, std::vector<Edge> edges,
        bool weighted = false)
      : kind_(kind), n_rows_(n_rows), n_cols_(kind == GraphKind::Bipartite ? n_cols : n_rows),
        weighted_(weighted) {
    if (kind != GraphKind::Bipartite && n_cols != n_rows) {
      throw DataError("non-bipartite graph must be square");
    }
    for (Edge& e : edges) {
      if (e.i >= n_rows_ || e.j >= n_cols_) {
        throw DataError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                        ") out of range");
      }
      if (kind != GraphKind::Bipartite && e.i == e.j) {
        throw DataError("self-loop at node " + std::to_string(e.i));
      }
      if (!weighted && e.w > 1) {
        throw DataError("binary graph has edge weight " + std::to_string(e.w));
      }
      if (kind == GraphKind::Undirected && e.i > e.j) std::swap(e.i, e.j);
    }
    std::sort(edges.begin(), edges.end());
    std::vector<Edge> unique;
    unique.reserve(edges.size());
    for (const Edge& e : edges) {
      if (!unique.empty() && unique.back().i == e.i && unique.back().j == e.j) {
        if (unique.back().w != e.w) {
          throw DataError("duplicate dyad (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                          ") with conflicting weights");
        }
        continue;
      }
      unique.push_back(e);
    }
    std::erase_if(unique, [](const Edge& e) { return e.w == 0; });
    edges_ = std::move(unique);
    build_adjacency();
  }

  static Graph undirected(std::size_t n, std::vector<Edge> edges) {
    return Graph(GraphKind::Undirected, n, n, std::move(edges));
  }
  static Graph directed(std::size_t n, std::vector<Edge> edges) {
    return Graph(GraphKind::Directed, n, n, std::move(edges));
  }
  static Graph bipartite(std::size_t n_rows, std::size_t n_cols, std::vector<Edge> edges) {
    return Graph(GraphKind::Bipartite, n_rows, n_cols, std::move(edges));
  }

  GraphKind kind() const { return kind_; }
  bool weighted() const { return weighted_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t num_nodes(Side side = Side::Row) const {
    return side == Side::Row ? n_rows_ : n_cols_;
  }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const Neighbor> neighbors(NodeIndex n, Side side = Side::Row) const {
    if (n >= num_nodes(side)) throw DataError("node index " + std::to_string(n) + " out of range");
    if (side == Side::Col && kind_ != GraphKind::Undirected) return col_adj_.at(n);
    return row_adj_.at(n);
  }

  std::size_t degree(NodeIndex n, Side side = Side::Row) const { return neighbors(n, side).size(); }

  // Weight of dyad (i, j), 0 when absent. Undirected lookups are symmetric.
  std::uint32_t weight(NodeIndex i, NodeIndex j) const {
    const auto adj = neighbors(i, Side::Row);
    auto it = std::lower_bound(adj.begin(), adj.end(), j,
                               [](const Neighbor& a, NodeIndex v) { return a.node < v; });
    return (it != adj.end() && it->node == j) ? it->weight : 0;
  }
  bool has_edge(NodeIndex i, NodeIndex j) const { return weight(i, j) != 0; }

  bool is_valid_dyad(NodeIndex i, NodeIndex j) const {
    if (i >= n_rows_ || j >= n_cols_) return false;
    return kind_ == GraphKind::Bipartite || i != j;
  }

  // FNV-1a over kind, dimensions and the canonical edge list.
  std::uint64_t checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xFF;
        h *= 0x100000001b3ULL;
      }
    };
    mix(static_cast<std::uint64_t>(kind_));
    mix(n_rows_);
    mix(n_cols_);
    for (const Edge& e : edges_) {
      mix(e.i);
      mix(e.j);
      mix(e.w);
    }
    return h;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.kind_ == b.kind_ && a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ &&
           a.edges_ == b.edges_;
  }

 private:
  void build_adjacency() {
    std::vector<std::pair<NodeIndex, Neighbor>> rows;
    std::vector<std::pair<NodeIndex, Neighbor>> cols;
    rows.reserve(edges_.size() * (kind_ == GraphKind::Undirected ? 2 : 1));
    for (const Edge& e : edges_) {
      rows.push_back({e.i, {e.j, e.w}});
      if (kind_ == GraphKind::Undirected) {
        rows.push_back({e.j, {e.i, e.w}});
      } else {
        cols.push_back({e.j, {e.i, e.w}});
      }
    }
    auto by_node = [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second.node < b.second.node;
    };
    std::sort(rows.begin(), rows.end(), by_node);
    std::sort(cols.begin(), cols.end(), by_node);
    row_adj_ = detail::build_csr<Neighbor>(n_rows_, rows);
    if (kind_ != GraphKind::Undirected) col_adj_ = detail::build_csr<Neighbor>(n_cols_, cols);
  }

  GraphKind kind_ = GraphKind::Undirected;
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  bool weighted_ = false;
  std::vector<Edge> edges_;
  detail::Csr<Neighbor> row_adj_{{0}, {}};
  detail::Csr<Neighbor> col_adj_{{0}, {}};
};

// Number of modelled dyads: N(N-1)/2 undirected, N(N-1) directed,
// n_rows * n_cols bipartite. Self-dyads are never modelled.
inline std::uint64_t dyad_universe(GraphKind kind, std::uint64_t n_rows, std::uint64_t n_cols) {
  switch (kind) {
    case GraphKind::Undirected: return n_rows * (n_rows - (n_rows > 0 ? 1 : 0)) / 2;
    case GraphKind::Directed: return n_rows * (n_rows - (n_rows > 0 ? 1 : 0));
    case GraphKind::Bipartite: return n_rows * n_cols;
  }
  return 0;
}

inline std::uint64_t dyad_universe(const Graph& g) {
  return dyad_universe(g.kind(), g.n_rows(), g.n_cols());
}

// Set of dyads whose link status is treated as unobserved.
class DyadMask {
 public:
  DyadMask() = default;

  DyadMask(const Graph& g, std::vector<Dyad> hidden) : kind_(g.kind()) {
    for (Dyad& d : hidden) {
      if (!g.is_valid_dyad(d.i, d.j)) {
        throw DataError("masked dyad (" + std::to_string(d.i) + "," + std::to_string(d.j) +
                        ") is not a valid dyad");
      }
      if (kind_ == GraphKind::Undirected && d.i > d.j) std::swap(d.i, d.j);
    }
    std::sort(hidden.begin(), hidden.end());
    hidden.erase(std::unique(hidden.begin(), hidden.end()), hidden.end());
    dyads_ = std::move(hidden);

    std::vector<std::pair<NodeIndex, NodeIndex>> rows;
    std::vector<std::pair<NodeIndex, NodeIndex>> cols;
    for (const Dyad& d : dyads_) {
      rows.push_back({d.i, d.j});
      if (kind_ == GraphKind::Undirected) {
        rows.push_back({d.j, d.i});
      } else {
        cols.push_back({d.j, d.i});
      }
    }
    std::sort(rows.begin(), rows.end());
    std::sort(cols.begin(), cols.end());
    rows_ = detail::build_csr<NodeIndex>(g.n_rows(), rows);
    cols_ = detail::build_csr<NodeIndex>(kind_ == GraphKind::Undirected ? 0 : g.n_cols(), cols);
  }

  bool empty() const { return dyads_.empty(); }
  std::size_t size() const { return dyads_.size(); }
  const std::vector<Dyad>& dyads() const { return dyads_; }

  bool contains(NodeIndex i, NodeIndex j) const {
    if (kind_ == GraphKind::Undirected && i > j) std::swap(i, j);
    return std::binary_search(dyads_.begin(), dyads_.end(), Dyad{i, j});
  }

  // Masked partners of node n on the given side (same convention as
  // Graph::neighbors). Empty when nothing is masked.
  std::span<const NodeIndex> partners(NodeIndex n, Side side = Side::Row) const {
    if (dyads_.empty()) return {};
    if (side == Side::Col && kind_ != GraphKind::Undirected) return cols_.at(n);
    return rows_.at(n);
  }

 private:
  GraphKind kind_ = GraphKind::Undirected;
  std::vector<Dyad> dyads_;
  detail::Csr<NodeIndex> rows_{{0}, {}};
  detail::Csr<NodeIndex> cols_{{0}, {}};
};

enum class SelfLoopPolicy { Reject, Drop };

struct LoadOptions {
  GraphKind kind = GraphKind::Undirected;
  bool weighted = false;
  bool one_indexed = false;
  SelfLoopPolicy self_loops = SelfLoopPolicy::Reject;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r') ++end;
    if (end > pos) out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

inline std::int64_t parse_int(std::string_view tok, std::size_t line_no, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw DataError("line " + std::to_string(line_no) + ": " + what + " '" + std::string(tok) +
                    "' is not an integer");
  }
  return v;
}

}  // namespace detail

// Parses "i j [w]" lines. '#' starts a comment line; "%N rows [cols]" fixes
// the node counts, otherwise they are inferred as max index + 1.
inline Graph parse_edge_list(std::istream& in, const LoadOptions& opt,
                             std::size_t* dropped_self_loops = nullptr) {
  std::vector<Edge> edges;
  std::optional<std::size_t> header_rows;
  std::optional<std::size_t> header_cols;
  std::int64_t max_row = -1;
  std::int64_t max_col = -1;
  std::size_t dropped = 0;
  const std::int64_t shift = opt.one_indexed ? 1 : 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = detail::split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok[0] == "%N") {
      if (tok.size() < 2 || tok.size() > 3) {
        throw DataError("line " + std::to_string(line_no) + ": malformed %N header");
      }
      const auto rows = detail::parse_int(tok[1], line_no, "node count");
      const auto cols = tok.size() == 3 ? detail::parse_int(tok[2], line_no, "node count") : rows;
      if (rows < 0 || cols < 0) throw DataError("line " + std::to_string(line_no) + ": negative node count");
      header_rows = static_cast<std::size_t>(rows);
      header_cols = static_cast<std::size_t>(cols);
      continue;
    }
    if (tok.size() < 2 || tok.size() > 3) {
      throw DataError("line " + std::to_string(line_no) + ": expected 'i j' or 'i j w'");
    }
    const std::int64_t i = detail::parse_int(tok[0], line_no, "node index") - shift;
    const std::int64_t j = detail::parse_int(tok[1], line_no, "node index") - shift;
    if (i < 0 || j < 0) throw DataError("line " + std::to_string(line_no) + ": negative node index");
    std::int64_t w = 1;
    if (tok.size() == 3) {
      w = detail::parse_int(tok[2], line_no, "weight");
      if (w < 0) throw DataError("line " + std::to_string(line_no) + ": negative weight");
      if (!opt.weighted && w != 1) {
        throw DataError("line " + std::to_string(line_no) +
                        ": weight other than 1 in an unweighted graph");
      }
    }
    if (i > 0xFFFFFFFELL || j > 0xFFFFFFFELL || w > 0xFFFFFFFFLL) {
      throw DataError("line " + std::to_string(line_no) + ": value too large");
    }
    if (opt.kind != GraphKind::Bipartite && i == j) {
      if (opt.self_loops == SelfLoopPolicy::Drop) {
        ++dropped;
        continue;
      }
      throw DataError("line " + std::to_string(line_no) + ": self-loop at node " + std::to_string(i));
    }
    max_row = std::max(max_row, opt.kind == GraphKind::Bipartite ? i : std::max(i, j));
    max_col = std::max(max_col, opt.kind == GraphKind::Bipartite ? j : std::max(i, j));
    edges.push_back({static_cast<NodeIndex>(i), static_cast<NodeIndex>(j),
                     static_cast<std::uint32_t>(w)});
  }
  if (dropped_self_loops) *dropped_self_loops = dropped;

  std::size_t n_rows = static_cast<std::size_t>(max_row + 1);
  std::size_t n_cols = static_cast<std::size_t>(max_col + 1);
  if (header_rows) {
    if (*header_rows < n_rows || *header_cols < n_cols) {
      throw DataError("%N header is smaller than the largest node index");
    }
    n_rows = *header_rows;
    n_cols = *header_cols;
  }
  if (opt.kind != GraphKind::Bipartite) {
    n_rows = n_cols = std::max(n_rows, n_cols);
  }
  return Graph(opt.kind, n_rows, n_cols, std::move(edges), opt.weighted);
}

inline Graph load_edge_list(const std::filesystem::path& path, const LoadOptions& opt,
                            std::size_t* dropped_self_loops = nullptr) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list '" + path.string() + "'");
  return parse_edge_list(in, opt, dropped_self_loops);
}

// Writes the graph in the same format load_edge_list reads (0-based, with a
// %N header so isolated nodes survive a round trip).
inline void save_edge_list(const Graph& g, std::ostream& out) {
  out << "%N " << g.n_rows();
  if (g.kind() == GraphKind::Bipartite) out << ' ' << g.n_cols();
  out << '\n';
  for (const Edge& e : g.edges()) {
    out << e.i << '\t' << e.j;
    if (g.weighted()) out << '\t' << e.w;
    out << '\n';
  }
}

inline void save_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save_edge_list(g, out);
}

}  // namespace irmkit

#endif  // IRMKIT_GRAPH_HPP
