#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "gad/errors.hpp"
#include "gad/graph.hpp"
#include "gad/log.hpp"
#include "oracles.hpp"

using namespace gad;

namespace {

std::vector<NodeId> row(const SparseGraph& g, NodeId i) {
  const auto r = g.neighbors(i);
  return {r.begin(), r.end()};
}

double value_at(const NormalizedAdjacency& adj, NodeId i, NodeId j) {
  const auto r = adj.pattern.neighbors(i);
  const auto it = std::lower_bound(r.begin(), r.end(), j);
  if (it == r.end() || *it != j) return 0.0;
  return adj.values[adj.pattern.row_offsets()[i] + (it - r.begin())];
}

}  // namespace

TEST(BuildFromEdges, SingleEdge) {
  const std::vector<Edge> e{{0, 1}};
  const SparseGraph g = build_from_edges(e, 2);
  EXPECT_EQ(row(g, 0), std::vector<NodeId>{1});
  EXPECT_EQ(row(g, 1), std::vector<NodeId>{0});
  EXPECT_EQ(g.edge_count(), 1u);
}

TEST(BuildFromEdges, DuplicatesAndReversesCollapse) {
  const std::vector<Edge> e{{0, 1}, {1, 0}, {0, 1}};
  const std::vector<Edge> single{{0, 1}};
  EXPECT_EQ(build_from_edges(e, 2), build_from_edges(single, 2));
  EXPECT_EQ(build_from_edges(e, 2).edge_count(), 1u);
}

TEST(BuildFromEdges, EmptyGraph) {
  const SparseGraph g = build_from_edges({}, 3);
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(g.edge_count(), 0u);
  for (NodeId i = 0; i < 3; ++i) EXPECT_TRUE(g.neighbors(i).empty());
}

TEST(BuildFromEdges, SelfLoopKeptOnce) {
  const std::vector<Edge> e{{1, 1}, {0, 1}, {1, 1}};
  const SparseGraph g = build_from_edges(e, 2);
  EXPECT_EQ(row(g, 1), (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.self_loop_count(), 1u);
  EXPECT_EQ(g.row_offsets().back(), 2 * g.edge_count() - g.self_loop_count());
}

TEST(BuildFromEdges, OutOfRangeNamesPair) {
  const std::vector<Edge> e{{0, 1}, {2, 5}};
  try {
    build_from_edges(e, 3);
    FAIL() << "expected InputError";
  } catch (const InputError& err) {
    EXPECT_NE(std::string(err.what()).find("(2,5)"), std::string::npos);
  }
}

TEST(BuildFromEdges, InvariantsOnRandomGraphs) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    const SparseGraph g = oracle::random_graph(n, 0.2, rng, 0.1);
    std::size_t loops = 0;
    for (NodeId i = 0; i < n; ++i) {
      const auto r = g.neighbors(i);
      EXPECT_TRUE(std::is_sorted(r.begin(), r.end()));
      EXPECT_EQ(std::adjacent_find(r.begin(), r.end()), r.end());
      for (NodeId j : r) {
        EXPECT_LT(j, n);
        EXPECT_TRUE(g.has_edge(j, i));
        loops += i == j;
      }
    }
    EXPECT_EQ(g.row_offsets()[n], 2 * g.edge_count() - loops);
    // mirror() points at the reverse entry.
    for (NodeId i = 0; i < n; ++i)
      for (std::size_t p = g.row_offsets()[i]; p < g.row_offsets()[i + 1]; ++p)
        EXPECT_EQ(g.col_indices()[g.mirror()[p]], i);
  }
}

TEST(BuildFromEdges, IdempotentUnderPermutationAndDuplication) {
  Rng rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    std::vector<Edge> edges;
    for (int k = 0; k < 60; ++k)
      edges.emplace_back(static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n)));
    const SparseGraph base = build_from_edges(edges, n);

    std::vector<Edge> shuffled = edges;
    for (std::size_t k = 0; k < edges.size() / 2; ++k) {
      const auto& [a, b] = edges[rng.below(edges.size())];
      shuffled.emplace_back(rng.unit() < 0.5 ? Edge{a, b} : Edge{b, a});
    }
    for (std::size_t k = shuffled.size(); k > 1; --k) std::swap(shuffled[k - 1], shuffled[rng.below(k)]);
    const SparseGraph again = build_from_edges(shuffled, n);
    EXPECT_EQ(base.row_offsets(), again.row_offsets());
    EXPECT_EQ(base.col_indices(), again.col_indices());
  }
}

TEST(ComputeDegrees, Examples) {
  const std::vector<Edge> k3{{0, 1}, {1, 2}, {0, 2}};
  EXPECT_EQ(compute_degrees(build_from_edges(k3, 3)), (DegreeVector{2, 2, 2}));
  const std::vector<Edge> star{{0, 1}, {0, 2}};
  EXPECT_EQ(compute_degrees(build_from_edges(star, 3)), (DegreeVector{2, 1, 1}));
  EXPECT_EQ(compute_degrees(build_from_edges(star, 4))[3], 0u);
}

TEST(SymmetricNormalize, TriangleWithoutSelfLoops) {
  const std::vector<Edge> k3{{0, 1}, {1, 2}, {0, 2}};
  const auto adj = symmetric_normalize(build_from_edges(k3, 3), false);
  for (double v : adj.values) EXPECT_DOUBLE_EQ(v, 0.5);
  EXPECT_EQ(adj.values.size(), 6u);
}

TEST(SymmetricNormalize, EdgeWithSelfLoops) {
  const std::vector<Edge> e{{0, 1}};
  const auto adj = symmetric_normalize(build_from_edges(e, 2), true);
  EXPECT_EQ(adj.values.size(), 4u);
  for (double v : adj.values) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(SymmetricNormalize, Star) {
  const std::vector<Edge> star{{0, 1}, {0, 2}};
  const auto adj = symmetric_normalize(build_from_edges(star, 3), false);
  EXPECT_DOUBLE_EQ(value_at(adj, 0, 1), 1.0 / std::sqrt(2.0));
}

TEST(SymmetricNormalize, IsolatedNodeWarnsAndKeepsEmptyRow) {
  const std::vector<Edge> e{{0, 1}};
  ScopedWarningCapture warnings;
  const auto adj = symmetric_normalize(build_from_edges(e, 3), false);
  EXPECT_TRUE(adj.pattern.neighbors(2).empty());
  EXPECT_FALSE(warnings.empty());
}

TEST(SymmetricNormalize, MatchesDenseOracle) {
  Rng rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    const SparseGraph g = oracle::random_graph(n, rng.uniform(0.02, 0.4), rng, 0.05);
    for (bool loops : {false, true}) {
      ScopedWarningCapture quiet;
      const auto adj = symmetric_normalize(g, loops);
      auto dense = oracle::dense_adjacency(g);
      if (loops) dense = oracle::add_identity(dense);
      const auto expect = oracle::normalize(dense);
      for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = 0; j < n; ++j) {
          const double v = value_at(adj, i, j);
          EXPECT_NEAR(v, expect[i][j], 1e-12);
          EXPECT_EQ(v, value_at(adj, j, i));
          if (v != 0.0) {
            EXPECT_GT(v, 0.0);
            EXPECT_LE(v, 1.0);
          }
        }
      }
    }
  }
}

TEST(SymmetricNormalize, SpectralRadiusAtMostOne) {
  Rng rng(14);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng.below(30);
    const SparseGraph g = oracle::random_graph(n, 0.3, rng);
    // Connectivity by BFS.
    std::vector<bool> seen(n, false);
    std::vector<NodeId> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId u : g.neighbors(v))
        if (!seen[u]) seen[u] = true, stack.push_back(u);
    }
    if (std::count(seen.begin(), seen.end(), false) > 0) continue;
    ++checked;

    const auto m = oracle::normalize(oracle::dense_adjacency(g));
    // Power iteration on M^2 bounds |lambda|^2 without sign cancellation.
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(0.1, 1.0);
    double est = 0.0;
    for (int it = 0; it < 500; ++it) {
      std::vector<double> y(n, 0.0), w(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) y[i] += m[i][j] * x[j];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w[i] += m[i][j] * y[j];
      double norm = 0.0;
      for (double v : w) norm += v * v;
      norm = std::sqrt(norm);
      double xnorm = 0.0;
      for (double v : x) xnorm += v * v;
      est = norm / std::sqrt(xnorm);
      for (std::size_t i = 0; i < n; ++i) x[i] = w[i] / norm;
    }
    EXPECT_LE(std::sqrt(est), 1.0 + 1e-9);
  }
  EXPECT_GT(checked, 10);
}

TEST(SelfLoops, AddAndRemove) {
  const std::vector<Edge> e{{0, 1}, {2, 2}};
  const SparseGraph g = build_from_edges(e, 3);
  const SparseGraph with = with_self_loops(g);
  for (NodeId i = 0; i < 3; ++i) EXPECT_TRUE(with.has_self_loop(i));
  EXPECT_EQ(with.edge_count(), 4u);
  const SparseGraph without = without_self_loops(with);
  EXPECT_EQ(without.self_loop_count(), 0u);
  EXPECT_EQ(without.edge_count(), 1u);
}

TEST(SparseGraph, RejectsAsymmetricCsr) {
  EXPECT_THROW(SparseGraph(2, {0, 1, 1}, {1}), InputError);
  EXPECT_THROW(SparseGraph(2, {0, 2, 2}, {1, 0}), InputError);
}
