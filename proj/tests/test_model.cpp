#include <cmath>

#include <gtest/gtest.h>

#include "irmkit/model.hpp"
#include "irmkit/simulate.hpp"
#include "oracle.hpp"

using namespace irmkit;

namespace {

ModelSpec bernoulli(GraphKind kind, double a = 1, double b = 1, double A = 1) {
  ModelSpec s;
  s.kind = kind;
  s.obs = BetaBernoulli{a, b};
  s.crp = CrpParam(A);
  s.crp_col = CrpParam(A);
  return s;
}

ModelSpec poisson(GraphKind kind, double shape = 1, double rate = 1) {
  ModelSpec s = bernoulli(kind);
  s.obs = GammaPoisson{shape, rate};
  return s;
}

Graph random_graph(GraphKind kind, std::size_t nr, std::size_t nc, double p, Rng& rng,
                   bool weighted = false) {
  std::vector<Edge> edges;
  if (kind != GraphKind::Bipartite) nc = nr;
  for (NodeIndex i = 0; i < nr; ++i) {
    for (NodeIndex j = 0; j < nc; ++j) {
      if (kind != GraphKind::Bipartite && i == j) continue;
      if (kind == GraphKind::Undirected && j < i) continue;
      if (rng.bernoulli(p)) {
        const auto w = weighted ? static_cast<std::uint32_t>(1 + rng.index(4)) : 1u;
        edges.push_back({i, j, w});
      }
    }
  }
  return Graph(kind, nr, kind == GraphKind::Bipartite ? nc : nr, std::move(edges), weighted);
}

Partition random_partition(std::size_t n, std::size_t max_k, Rng& rng) {
  std::vector<BlockLabel> z(n);
  for (auto& l : z) l = static_cast<BlockLabel>(rng.index(max_k));
  return Partition(z);
}

DyadMask random_mask(const Graph& g, double p, Rng& rng) {
  std::vector<Dyad> hidden;
  for (NodeIndex i = 0; i < g.n_rows(); ++i)
    for (NodeIndex j = 0; j < g.n_cols(); ++j)
      if (g.is_valid_dyad(i, j) && rng.bernoulli(p)) hidden.push_back({i, j});
  return DyadMask(g, hidden);
}

oracle::Dense dense(const Graph& g) {
  oracle::Dense x(g.n_rows(), std::vector<int>(g.n_rows(), 0));
  for (const Edge& e : g.edges()) {
    x[e.i][e.j] = 1;
    if (g.kind() == GraphKind::Undirected) x[e.j][e.i] = 1;
  }
  return x;
}

oracle::Labels labels(const Partition& p) { return {p.labels().begin(), p.labels().end()}; }

}  // namespace

TEST(BlockStats, Examples) {
  const ModelSpec spec = bernoulli(GraphKind::Undirected);
  const Graph k3 = Graph::undirected(3, {{0, 1}, {1, 2}, {0, 2}});
  auto s = compute_block_stats(k3, spec, Partition{0, 0, 0});
  EXPECT_EQ(s.links[0](0, 0), 3);
  EXPECT_EQ(s.mbar[0](0, 0), 0);
  EXPECT_EQ(s.row_sizes[0], 3);

  s = compute_block_stats(Graph::undirected(2, {{0, 1}}), spec, Partition{0, 1});
  EXPECT_EQ(s.links[0](0, 1), 1);
  EXPECT_EQ(s.mbar[0](0, 1), 0);

  const Graph p3 = Graph::undirected(3, {{0, 1}, {1, 2}});
  s = compute_block_stats(p3, spec, Partition{0, 1, 1});
  EXPECT_EQ(s.links[0](0, 1), 1);  // only (0,1) crosses; (1,2) is inside block 1
  EXPECT_EQ(s.mbar[0](0, 1), 1);   // (0,2)
  EXPECT_EQ(s.links[0](1, 1), 1);
  EXPECT_EQ(s.mbar[0](1, 1), 0);
  // The literal example: P3 with {0},{1,2} read as node 1 alone in block 0
  // (path 1-0-2 relabelled), i.e. partition {1},{0,2}.
  s = compute_block_stats(p3, spec, Partition{1, 0, 1});
  EXPECT_EQ(s.links[0](0, 1), 2);
  EXPECT_EQ(s.mbar[0](0, 1), 0);
  EXPECT_EQ(s.links[0](0, 0), 0);
  EXPECT_EQ(s.mbar[0](0, 0), 1);
}

TEST(BlockStats, FullyObservedPairCounts) {
  Rng rng(1);
  for (GraphKind kind : {GraphKind::Undirected, GraphKind::Directed, GraphKind::Bipartite}) {
    const Graph g = random_graph(kind, 12, 9, 0.3, rng);
    const Partition z = random_partition(g.n_rows(), 4, rng);
    const Partition w = random_partition(g.n_cols(), 3, rng);
    const auto s = compute_block_stats(g, bernoulli(kind), z, kind == GraphKind::Bipartite ? &w : nullptr);
    const auto& cols = kind == GraphKind::Bipartite ? w : z;
    for (std::size_t k = 0; k < s.row_blocks(); ++k) {
      for (std::size_t l = 0; l < s.col_blocks(); ++l) {
        const std::int64_t nk = z.sizes()[k], nl = cols.sizes()[l];
        std::int64_t expect = nk * nl;
        if (kind == GraphKind::Undirected && k == l) expect = nk * (nk - 1) / 2;
        if (kind == GraphKind::Directed && k == l) expect = nk * (nk - 1);
        EXPECT_EQ(s.links[0](k, l) + s.mbar[0](k, l), expect);
      }
    }
  }
}

TEST(BlockStats, DimensionMismatch) {
  const Graph g = Graph::undirected(3, {{0, 1}});
  EXPECT_THROW(compute_block_stats(g, bernoulli(GraphKind::Undirected), Partition{0, 0}), DataError);
  const Graph b = Graph::bipartite(2, 3, {{0, 1}});
  EXPECT_THROW(compute_block_stats(b, bernoulli(GraphKind::Bipartite), Partition{0, 0}), DataError);
}

TEST(MarginalLikelihood, Examples) {
  const ModelSpec spec = bernoulli(GraphKind::Undirected);
  const Graph edge = Graph::undirected(2, {{0, 1}});
  EXPECT_NEAR(log_marginal_likelihood(compute_block_stats(edge, spec, Partition{0, 0}), spec.obs),
              std::log(0.5), 1e-14);
  const Graph k3 = Graph::undirected(3, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_NEAR(log_marginal_likelihood(compute_block_stats(k3, spec, Partition{0, 0, 0}), spec.obs),
              std::log(0.25), 1e-14);

  const ModelSpec ps = poisson(GraphKind::Undirected);
  const Graph w1(GraphKind::Undirected, 2, 2, {{0, 1, 1}}, true);
  EXPECT_NEAR(log_marginal_likelihood(compute_block_stats(w1, ps, Partition{0, 0}), ps.obs),
              std::log(0.25), 1e-14);
  // x = 3 under Gamma(1,1): int lambda^3 e^{-2 lambda} / 3! = 3!/2^4/3! = 1/16.
  const Graph w3(GraphKind::Undirected, 2, 2, {{0, 1, 3}}, true);
  EXPECT_NEAR(log_marginal_likelihood(compute_block_stats(w3, ps, Partition{0, 0}), ps.obs),
              std::log(1.0 / 16), 1e-14);
}

TEST(MarginalLikelihood, PoissonEvidenceNormalizesOverCounts) {
  // Single dyad, Gamma(2, 0.5): sum_x p(x) = 1.
  const ModelSpec ps = poisson(GraphKind::Undirected, 2.0, 0.5);
  double total = 0.0;
  for (std::uint32_t x = 0; x < 400; ++x) {
    const Graph g(GraphKind::Undirected, 2, 2, {{0, 1, x}}, true);
    total += std::exp(log_marginal_likelihood(compute_block_stats(g, ps, Partition{0, 0}), ps.obs));
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(MarginalLikelihood, MatchesQuadratureOnAllSmallGraphs) {
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{2.0, 3.0}, std::pair{0.7, 1.3}}) {
    for (unsigned n = 2; n <= 4; ++n) {
      const unsigned dyads = n * (n - 1) / 2;
      const ModelSpec spec = bernoulli(GraphKind::Undirected, a, b);
      for (unsigned mask = 0; mask < (1u << dyads); ++mask) {
        std::vector<Edge> edges;
        unsigned bit = 0;
        for (NodeIndex i = 0; i < n; ++i)
          for (NodeIndex j = i + 1; j < n; ++j, ++bit)
            if (mask & (1u << bit)) edges.push_back({i, j, 1});
        const Graph g = Graph::undirected(n, edges);
        for (const auto& z : oracle::set_partitions(n)) {
          const Partition p(std::vector<BlockLabel>(z.begin(), z.end()));
          const double lml = log_marginal_likelihood(compute_block_stats(g, spec, p), spec.obs);
          EXPECT_NEAR(std::exp(lml), oracle::evidence_by_quadrature(dense(g), z, false, a, b), 1e-8);
        }
      }
    }
  }
}

TEST(MarginalLikelihood, EvidenceSumsToOneOverGraphs) {
  for (unsigned n = 2; n <= 4; ++n) {
    const unsigned dyads = n * (n - 1) / 2;
    for (const auto& z : oracle::set_partitions(n)) {
      const Partition p(std::vector<BlockLabel>(z.begin(), z.end()));
      for (GraphKind kind : {GraphKind::Undirected, GraphKind::Directed}) {
        const unsigned d = kind == GraphKind::Undirected ? dyads : 2 * dyads;
        const ModelSpec spec = bernoulli(kind, 1.5, 0.5);
        double total = 0.0;
        for (unsigned mask = 0; mask < (1u << d); ++mask) {
          std::vector<Edge> edges;
          unsigned bit = 0;
          for (NodeIndex i = 0; i < n; ++i)
            for (NodeIndex j = 0; j < n; ++j) {
              if (i == j || (kind == GraphKind::Undirected && j < i)) continue;
              if (mask & (1u << bit)) edges.push_back({i, j, 1});
              ++bit;
            }
          const Graph g(kind, n, n, edges);
          total += std::exp(log_marginal_likelihood(compute_block_stats(g, spec, p), spec.obs));
        }
        EXPECT_NEAR(total, 1.0, 1e-10);
      }
    }
  }
}

TEST(JointLogProb, Examples) {
  const ModelSpec spec = bernoulli(GraphKind::Undirected);
  const ObservedNetwork edge(Graph::undirected(2, {{0, 1}}));
  EXPECT_NEAR(joint_log_prob(edge, spec, Partition{0, 0}), std::log(0.25), 1e-14);
  const ObservedNetwork none(Graph::undirected(2, {}));
  EXPECT_NEAR(joint_log_prob(none, spec, Partition{0, 1}), std::log(0.25), 1e-14);
}

TEST(JointLogProb, MatchesEnumerationOracleAtN4) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = random_graph(GraphKind::Undirected, 4, 4, 0.5, rng);
    const ModelSpec spec = bernoulli(GraphKind::Undirected, 1.0, 1.0, 0.5 + trial * 0.3);
    const ObservedNetwork net(g);
    const auto parts = oracle::set_partitions(4);
    ASSERT_EQ(parts.size(), 15u);
    for (const auto& z : parts) {
      const double expect = std::log(oracle::crp_prob(z, spec.crp.A)) +
                            oracle::log_evidence(dense(g), z, false, 1.0, 1.0);
      EXPECT_NEAR(joint_log_prob(net, spec, Partition(std::vector<BlockLabel>(z.begin(), z.end()))), expect,
                  1e-10);
    }
  }
}

TEST(JointLogProb, DirectedMatchesOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Graph g = random_graph(GraphKind::Directed, 5, 5, 0.4, rng);
    const ModelSpec spec = bernoulli(GraphKind::Directed, 0.5, 2.0, 1.3);
    const ObservedNetwork net(g);
    for (const auto& z : oracle::set_partitions(5)) {
      const double expect = std::log(oracle::crp_prob(z, 1.3)) + oracle::log_evidence(dense(g), z, true, 0.5, 2.0);
      EXPECT_NEAR(joint_log_prob(net, spec, Partition(std::vector<BlockLabel>(z.begin(), z.end()))), expect,
                  1e-10);
    }
  }
}

TEST(JointLogProb, InvariantUnderNodePermutation) {
  Rng rng(77);
  for (GraphKind kind : {GraphKind::Undirected, GraphKind::Directed}) {
    const Graph g = random_graph(kind, 10, 10, 0.3, rng);
    const Partition z = random_partition(10, 3, rng);
    std::vector<NodeIndex> perm(10);
    std::iota(perm.begin(), perm.end(), 0u);
    rng.shuffle(perm);
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) edges.push_back({perm[e.i], perm[e.j], 1});
    std::vector<BlockLabel> zp(10);
    for (NodeIndex v = 0; v < 10; ++v) zp[perm[v]] = z.label(v);
    const ModelSpec spec = bernoulli(kind, 2, 1, 0.7);
    EXPECT_NEAR(joint_log_prob(ObservedNetwork(g), spec, z),
                joint_log_prob(ObservedNetwork(Graph(kind, 10, 10, edges)), spec, Partition(zp)), 1e-10);
  }
}

TEST(JointLogProb, MaskedDyadsDoNotMatter) {
  Rng rng(5);
  const Graph g = random_graph(GraphKind::Undirected, 9, 9, 0.4, rng);
  const DyadMask mask = random_mask(g, 0.2, rng);
  ASSERT_FALSE(mask.empty());
  // Flip every masked dyad.
  std::vector<Edge> flipped;
  for (const Edge& e : g.edges())
    if (!mask.contains(e.i, e.j)) flipped.push_back(e);
  for (const Dyad& d : mask.dyads())
    if (!g.has_edge(d.i, d.j)) flipped.push_back({d.i, d.j, 1});
  const Graph h = Graph::undirected(9, flipped);
  const ModelSpec spec = bernoulli(GraphKind::Undirected);
  const Partition z = random_partition(9, 3, rng);
  const ObservedNetwork a(g, mask), b(h, DyadMask(h, mask.dyads()));
  EXPECT_NEAR(joint_log_prob(a, spec, z), joint_log_prob(b, spec, z), 1e-12);
  // And the masked evidence matches the oracle that skips those dyads.
  EXPECT_NEAR(log_marginal_likelihood(compute_block_stats(a, spec, z), spec.obs),
              oracle::log_evidence(dense(g), labels(z), false, 1, 1,
                                   [&](unsigned i, unsigned j) { return mask.contains(i, j); }),
              1e-10);
}

TEST(JointLogProb, SharedPhiOfTwoCopiesDoublesCounts) {
  Rng rng(6);
  const Graph g = random_graph(GraphKind::Undirected, 8, 8, 0.35, rng);
  const Partition z = random_partition(8, 3, rng);
  const ModelSpec spec = bernoulli(GraphKind::Undirected, 1.2, 0.8);
  const auto single = compute_block_stats(ObservedNetwork(g), spec, z);
  const auto twice = compute_block_stats(ObservedNetwork(std::vector<Graph>{g, g}), spec, z);
  double expect = 0.0;
  for_each_block_pair(single, [&](std::size_t k, std::size_t l) {
    const double m = 2.0 * single.links[0](k, l), mb = 2.0 * single.mbar[0](k, l);
    if (m + mb > 0) expect += log_beta(m + 1.2, mb + 0.8) - log_beta(1.2, 0.8);
  });
  EXPECT_NEAR(log_marginal_likelihood(twice, spec.obs), expect, 1e-10);

  ModelSpec per = spec;
  per.tying = Tying::PerNetworkPhi;
  const auto separate = compute_block_stats(ObservedNetwork(std::vector<Graph>{g, g}), per, z);
  EXPECT_EQ(separate.channels(), 2u);
  EXPECT_NEAR(log_marginal_likelihood(separate, per.obs), 2 * log_marginal_likelihood(single, spec.obs), 1e-10);
}

TEST(JointLogProb, RejectsWeightsUnderBernoulli) {
  const Graph g(GraphKind::Undirected, 2, 2, {{0, 1, 2}}, true);
  EXPECT_THROW(validate(ObservedNetwork(g), bernoulli(GraphKind::Undirected)), DataError);
}

TEST(NodeLinks, Examples) {
  const ModelSpec spec = bernoulli(GraphKind::Undirected);
  const ObservedNetwork k3(Graph::undirected(3, {{0, 1}, {1, 2}, {0, 2}}));
  // Node 0 in its own block, {1,2} in the other.
  auto r = node_block_link_counts(k3, spec, Partition{0, 1, 1}, 0);
  EXPECT_EQ(r.out_links[1], 2);
  EXPECT_EQ(r.out_pairs[1], 2);
  EXPECT_EQ(r.out_pairs[0], 0);

  const ObservedNetwork iso(Graph::undirected(3, {{1, 2}}));
  r = node_block_link_counts(iso, spec, Partition{0, 1, 1}, 0);
  EXPECT_EQ(r.out_links[0] + r.out_links[1], 0);

  const ObservedNetwork p3(Graph::undirected(3, {{0, 1}, {1, 2}}));
  r = node_block_link_counts(p3, spec, Partition{0, 1, 2}, 1);
  EXPECT_EQ(r.out_links[0], 1);
  EXPECT_EQ(r.out_links[2], 1);

  const ModelSpec ds = bernoulli(GraphKind::Directed);
  const ObservedNetwork d(Graph::directed(3, {{0, 1}, {2, 0}}));
  r = node_block_link_counts(d, ds, Partition{0, 1, 2}, 0);
  EXPECT_EQ(r.out_links[1], 1);
  EXPECT_EQ(r.in_links[2], 1);
  EXPECT_EQ(r.in_links[1], 0);
}

namespace {

// Checks weight differences against joint probabilities of the completed
// partitions for every node of a random instance.
void check_gibbs_weights(const ObservedNetwork& net, const ModelSpec& spec, const Partition& z,
                         const Partition* w) {
  const bool bip = net.kind() == GraphKind::Bipartite;
  for (Side side : bip ? std::vector<Side>{Side::Row, Side::Col} : std::vector<Side>{Side::Row}) {
    const Partition& own = side == Side::Row ? z : *w;
    for (NodeIndex n = 0; n < own.size(); ++n) {
      BlockStats s = compute_block_stats(net, spec, z, w);
      const NodeLinks r = node_block_link_counts(net, spec, z, n, w, side);
      remove_assignment(s, r, own.label(n), side);
      const auto logw = gibbs_assignment_log_weights(s, r, spec, side);
      // Candidate order: nonempty labels ascending, then new.
      std::vector<BlockLabel> targets;
      for (BlockLabel k = 0; k < own.num_blocks(); ++k)
        if (s.sizes(side)[k] > 0) targets.push_back(k);
      targets.push_back(kNewBlock);
      ASSERT_EQ(targets.size(), logw.size());
      std::vector<double> joint;
      for (BlockLabel k : targets) {
        const Partition moved = move_node(own, n, k).partition;
        joint.push_back(side == Side::Row ? joint_log_prob(net, spec, moved, w)
                                          : joint_log_prob(net, spec, z, &moved));
      }
      for (std::size_t i = 1; i < targets.size(); ++i) {
        EXPECT_NEAR(logw[i] - logw[0], joint[i] - joint[0], 1e-10)
            << "node " << n << " side " << (side == Side::Row ? "row" : "col");
      }
    }
  }
}

}  // namespace

TEST(GibbsWeights, MatchJointDifferences) {
  Rng rng(2718);
  for (int trial = 0; trial < 30; ++trial) {
    const GraphKind kind = std::array{GraphKind::Undirected, GraphKind::Directed, GraphKind::Bipartite}[trial % 3];
    const bool pois = (trial / 3) % 2 == 1;
    const std::size_t n = 2 + rng.index(7), nc = 2 + rng.index(6);
    const Graph g = random_graph(kind, n, nc, 0.4, rng, pois);
    const DyadMask mask = trial % 4 == 0 ? random_mask(g, 0.2, rng) : DyadMask{};
    ModelSpec spec = pois ? poisson(kind, 1.5, 0.7) : bernoulli(kind, 0.8, 1.7, 0.9);
    spec.crp_col = CrpParam(2.1);
    const ObservedNetwork net(g, mask);
    const Partition z = random_partition(g.n_rows(), 3, rng);
    const Partition w = random_partition(g.n_cols(), 3, rng);
    check_gibbs_weights(net, spec, z, kind == GraphKind::Bipartite ? &w : nullptr);
  }
}

TEST(GibbsWeights, MultiNetwork) {
  Rng rng(99);
  for (Tying tying : {Tying::SharedPhi, Tying::PerNetworkPhi}) {
    std::vector<Graph> layers;
    for (int l = 0; l < 3; ++l) layers.push_back(random_graph(GraphKind::Directed, 7, 7, 0.3, rng));
    ModelSpec spec = bernoulli(GraphKind::Directed, 1, 2, 1.5);
    spec.tying = tying;
    const ObservedNetwork net(layers, random_mask(layers[0], 0.1, rng));
    check_gibbs_weights(net, spec, random_partition(7, 3, rng), nullptr);
  }
}

TEST(GibbsWeights, SmallExactCases) {
  // N = 2 with an edge, node 1 removed from block {0,1}: weights are
  // (log 1 + log B(2,1)/B(1,1), log A + log B(2,1)/B(1,1)), where the new
  // block gets the crossing pair and "together" the within pair.
  const ModelSpec spec = bernoulli(GraphKind::Undirected);
  const ObservedNetwork net(Graph::undirected(2, {{0, 1}}));
  const Partition together{0, 0};
  BlockStats s = compute_block_stats(net, spec, together);
  const NodeLinks r = node_block_link_counts(net, spec, together, 1);
  remove_assignment(s, r, 0);
  const auto lw = gibbs_assignment_log_weights(s, r, spec);
  ASSERT_EQ(lw.size(), 2u);
  EXPECT_NEAR(lw[0] - lw[1], joint_log_prob(net, spec, together) - joint_log_prob(net, spec, Partition{0, 1}),
              1e-14);
  EXPECT_NEAR(lw[0], std::log(0.5), 1e-14);

  // A block with no observed dyads toward the node contributes exactly 0.
  const ObservedNetwork masked(Graph::undirected(2, {}), DyadMask(Graph::undirected(2, {}), {{0, 1}}));
  BlockStats ms = compute_block_stats(masked, spec, together);
  const NodeLinks mr = node_block_link_counts(masked, spec, together, 1);
  remove_assignment(ms, mr, 0);
  const auto mw = gibbs_assignment_log_weights(ms, mr, spec);
  EXPECT_EQ(mw[0], 0.0);       // log n_k = log 1, likelihood delta 0
  EXPECT_EQ(mw[1], std::log(1.0));
}

TEST(ApplyAssignment, RemoveThenReAddIsIdentity) {
  Rng rng(8);
  const ObservedNetwork net(random_graph(GraphKind::Undirected, 15, 15, 0.3, rng));
  const ModelSpec spec = bernoulli(GraphKind::Undirected);
  const Partition z = random_partition(15, 4, rng);
  const BlockStats before = compute_block_stats(net, spec, z);
  for (NodeIndex n = 0; n < 15; ++n) {
    BlockStats s = before;
    const NodeLinks r = node_block_link_counts(net, spec, z, n);
    remove_assignment(s, r, z.label(n));
    EXPECT_EQ(apply_assignment(s, r, z.label(n)), z.label(n));
    EXPECT_EQ(s, before);
  }
}

TEST(ApplyAssignment, NewBlockGetsNodeLinks) {
  const ObservedNetwork net(Graph::undirected(3, {{0, 1}, {0, 2}}));
  const ModelSpec spec = bernoulli(GraphKind::Undirected);
  const Partition z{0, 0, 0};
  BlockStats s = compute_block_stats(net, spec, z);
  const NodeLinks r = node_block_link_counts(net, spec, z, 0);
  remove_assignment(s, r, 0);
  const BlockLabel k = apply_assignment(s, r, kNewBlock);
  EXPECT_EQ(k, 1u);
  EXPECT_EQ(s.links[0](1, 0), 2);
  EXPECT_EQ(s.links[0](0, 1), 2);
  EXPECT_EQ(s.links[0](0, 0), 0);
  EXPECT_EQ(s.mbar[0](0, 0), 1);
  EXPECT_EQ(s.mbar[0](1, 1), 0);
  EXPECT_EQ(s.row_sizes, (std::vector<std::int64_t>{2, 1}));
}

TEST(ApplyAssignment, RandomMovesMatchScratch) {
  Rng rng(123);
  for (GraphKind kind : {GraphKind::Undirected, GraphKind::Directed, GraphKind::Bipartite}) {
    for (bool pois : {false, true}) {
      const Graph g = random_graph(kind, 30, 25, 0.2, rng, pois);
      const ModelSpec spec = pois ? poisson(kind) : bernoulli(kind);
      const ObservedNetwork net(g, random_mask(g, 0.05, rng));
      std::vector<BlockLabel> z = random_partition(30, 5, rng).labels();
      std::vector<BlockLabel> w = random_partition(g.n_cols(), 4, rng).labels();
      const bool bip = kind == GraphKind::Bipartite;
      Partition wp(w);
      BlockStats s = compute_block_stats(net, spec, Partition(z), bip ? &wp : nullptr);
      // Work directly on raw labels; empty blocks stay as zero slots.
      for (int move = 0; move < 1000; ++move) {
        const Side side = bip && rng.bernoulli(0.5) ? Side::Col : Side::Row;
        auto& own = side == Side::Row ? z : w;
        const auto& opp = bip ? (side == Side::Row ? w : z) : z;
        const NodeIndex n = static_cast<NodeIndex>(rng.index(own.size()));
        NodeLinks r;
        collect_node_links(net, spec, opp, s.sizes(bip ? (side == Side::Row ? Side::Col : Side::Row) : side),
                           bip ? std::nullopt : std::optional<BlockLabel>(own[n]), n, side, r);
        remove_assignment(s, r, own[n], side);
        BlockLabel to = static_cast<BlockLabel>(rng.index(s.sizes(side).size() + 1));
        if (to == s.sizes(side).size()) to = kNewBlock;
        own[n] = apply_assignment(s, r, to, side);
      }
      // Compare against scratch stats under the same raw labelling by
      // padding the scratch result with the empty labels.
      const Partition zc(z), wc(w);
      const BlockStats scratch = compute_block_stats(net, spec, zc, bip ? &wc : nullptr);
      auto canon = [](const std::vector<BlockLabel>& raw, std::size_t nlabels) {
        std::vector<BlockLabel> map(nlabels, kNewBlock);
        BlockLabel next = 0;
        for (BlockLabel l : raw)
          if (map[l] == kNewBlock) map[l] = next++;
        return map;
      };
      const auto rm = canon(z, s.row_sizes.size());
      const auto cm = bip ? canon(w, s.col_sizes.size()) : rm;
      for (std::size_t k = 0; k < rm.size(); ++k) {
        for (std::size_t l = 0; l < cm.size(); ++l) {
          if (rm[k] == kNewBlock || cm[l] == kNewBlock) {
            EXPECT_EQ(s.links[0](k, l), 0);
            EXPECT_EQ(s.mbar[0](k, l), 0);
            continue;
          }
          EXPECT_EQ(s.links[0](k, l), scratch.links[0](rm[k], cm[l]));
          EXPECT_EQ(s.mbar[0](k, l), scratch.mbar[0](rm[k], cm[l]));
        }
      }
    }
  }
}

TEST(ErgmForm, Examples) {
  const ModelSpec spec = bernoulli(GraphKind::Undirected);
  const Graph g = Graph::undirected(4, {{0, 1}, {1, 2}, {2, 3}});
  const Partition z{0, 0, 1, 1};
  const BlockStats s = compute_block_stats(g, spec, z);
  BlockMatrix<double> half(2, 2, 0.5);
  for (double t : to_ergm_form(s, half).natural) EXPECT_EQ(t, 0.0);
  BlockMatrix<double> q(2, 2, 0.75);
  for (double t : to_ergm_form(s, q).natural) EXPECT_NEAR(t, std::log(3.0), 1e-15);

  BlockMatrix<double> phi(2, 2);
  phi(0, 0) = 0.3;
  phi(0, 1) = phi(1, 0) = 0.1;
  phi(1, 1) = 0.8;
  const auto f = to_ergm_form(s, phi);
  double dot = 0.0;
  for (std::size_t i = 0; i < f.stats.size(); ++i) dot += f.natural[i] * static_cast<double>(f.stats[i]);
  double direct = 0.0;
  for_each_block_pair(s, [&](std::size_t k, std::size_t l) {
    direct += s.links[0](k, l) * std::log(phi(k, l)) + s.mbar[0](k, l) * std::log(1 - phi(k, l));
  });
  EXPECT_NEAR(dot - f.log_normalizer, direct, 1e-12);

  BlockMatrix<double> bad(2, 2, 1.0);
  EXPECT_THROW(to_ergm_form(s, bad), NumericError);
}
