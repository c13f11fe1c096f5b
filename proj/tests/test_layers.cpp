#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "gad/errors.hpp"
#include "gad/grad_check.hpp"
#include "gad/layers.hpp"
#include "gad/log.hpp"
#include "oracles.hpp"

using namespace gad;

namespace {

GATLayerParams random_gat(std::size_t din, std::size_t dout, Rng& rng, double slope,
                          Activation act) {
  GATLayerParams p;
  p.weight = oracle::random_matrix(din, dout, rng);
  p.attention = oracle::random_vector(2 * dout, rng);
  p.leaky_slope = slope;
  p.out_activation = act;
  return p;
}

oracle::Act to_oracle(const Activation& a) {
  return a.kind == ActivationKind::relu ? oracle::Act::relu : oracle::Act::identity;
}

// Scalar objective sum(out .* r) with a fixed random r keeps gradients O(1).
double weighted_sum(const DenseMatrix& out, const DenseMatrix& r) {
  double s = 0.0;
  for (std::size_t k = 0; k < out.data().size(); ++k) s += out.data()[k] * r.data()[k];
  return s;
}

SparseGraph permute(const SparseGraph& g, const std::vector<NodeId>& perm) {
  std::vector<Edge> e;
  for (const auto& [i, j] : g.edges()) e.emplace_back(perm[i], perm[j]);
  return build_from_edges(e, g.num_nodes());
}

DenseMatrix permute_rows(const DenseMatrix& m, const std::vector<NodeId>& perm) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) out(perm[i], c) = m(i, c);
  return out;
}

}  // namespace

TEST(GatForward, ZeroAttentionIsNeighborhoodMean) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(15);
    const SparseGraph g = with_self_loops(oracle::random_graph(n, 0.3, rng));
    auto p = random_gat(4, 3, rng, 0.2, Activation::identity());
    std::fill(p.attention.begin(), p.attention.end(), 0.0);
    const auto h = oracle::random_matrix(n, 4, rng);
    GATCache cache;
    const auto out = gat_forward(g, h, p, &cache);
    const auto wh = oracle::matmul(h, p.weight);
    for (NodeId i = 0; i < n; ++i) {
      const auto nbrs = g.neighbors(i);
      for (std::size_t k = g.row_offsets()[i]; k < g.row_offsets()[i + 1]; ++k)
        EXPECT_NEAR(cache.alpha[k], 1.0 / static_cast<double>(nbrs.size()), 1e-15);
      for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (NodeId j : nbrs) mean += wh(j, c);
        mean /= static_cast<double>(nbrs.size());
        EXPECT_NEAR(out(i, c), mean, 1e-12);
      }
    }
  }
}

TEST(GatForward, SingleNodeIdentity) {
  const std::vector<Edge> loop{{0, 0}};
  const SparseGraph g = build_from_edges(loop, 1);
  GATLayerParams p;
  p.weight = DenseMatrix::identity(3);
  p.attention = {0.3, -0.1, 0.7, 1.0, 2.0, -0.5};
  p.out_activation = Activation::identity();
  const auto h = DenseMatrix::from_rows({{1.5, -2.0, 0.25}});
  EXPECT_EQ(gat_forward(g, h, p), h);
}

TEST(GatForward, MatchesNaiveOracle) {
  Rng rng(32);
  for (int seed = 0; seed < 50; ++seed) {
    const std::size_t n = 6;
    const SparseGraph g = with_self_loops(oracle::random_graph(n, 0.4, rng));
    for (double slope : {0.2, 1.0}) {
      for (Activation act : {Activation::relu(), Activation::identity()}) {
        const auto p = random_gat(5, 4, rng, slope, act);
        const auto h = oracle::random_matrix(n, 5, rng);
        const auto expect = oracle::gat_layer(oracle::dense_adjacency(g), h, p.weight, p.attention,
                                              slope, to_oracle(act));
        EXPECT_LE(max_abs_diff(gat_forward(g, h, p), expect), 1e-12);
      }
    }
  }
}

TEST(GatForward, NeighborlessNodeIsConfigError) {
  const std::vector<Edge> e{{0, 1}};
  const SparseGraph g = build_from_edges(e, 3);
  Rng rng(33);
  const auto p = random_gat(2, 2, rng, 0.2, Activation::relu());
  try {
    gat_forward(g, oracle::random_matrix(3, 2, rng), p);
    FAIL();
  } catch (const ConfigError& err) {
    EXPECT_NE(std::string(err.what()).find("self"), std::string::npos);
  }
}

TEST(GatForward, ShapeMismatch) {
  const std::vector<Edge> e{{0, 1}};
  const SparseGraph g = build_from_edges(e, 2);
  Rng rng(34);
  const auto p = random_gat(3, 2, rng, 0.2, Activation::relu());
  EXPECT_THROW(gat_forward(g, oracle::random_matrix(2, 4, rng), p), InputError);
  EXPECT_THROW(gat_forward(g, oracle::random_matrix(3, 3, rng), p), InputError);
}

TEST(GatForward, AttentionSumsToOne) {
  Rng rng(35);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(30);
    const SparseGraph g = with_self_loops(oracle::random_graph(n, 0.2, rng));
    const auto p = random_gat(4, 4, rng, 0.2, Activation::relu());
    GATCache cache;
    gat_forward(g, oracle::random_matrix(n, 4, rng), p, &cache);
    for (NodeId i = 0; i < n; ++i) {
      const std::size_t b = g.row_offsets()[i], e = g.row_offsets()[i + 1];
      double sum = 0.0;
      for (std::size_t k = b; k < e; ++k) {
        EXPECT_GT(cache.alpha[k], 0.0);
        // A lone neighbor takes all the weight.
        if (e - b > 1) EXPECT_LT(cache.alpha[k], 1.0);
        else EXPECT_EQ(cache.alpha[k], 1.0);
        sum += cache.alpha[k];
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(GatForward, PermutationEquivariant) {
  Rng rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.below(20);
    const SparseGraph g = with_self_loops(oracle::random_graph(n, 0.25, rng));
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    for (std::size_t k = n; k > 1; --k) std::swap(perm[k - 1], perm[rng.below(k)]);
    const auto p = random_gat(4, 3, rng, 0.2, Activation::relu());
    const auto h = oracle::random_matrix(n, 4, rng);
    const auto out = gat_forward(g, h, p);
    const auto out_perm = gat_forward(permute(g, perm), permute_rows(h, perm), p);
    EXPECT_LE(max_abs_diff(permute_rows(out, perm), out_perm), 1e-12);
  }
}

TEST(GatBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(37);
  const SparseGraph g = with_self_loops(oracle::random_graph(8, 0.3, rng));
  const auto p = random_gat(3, 2, rng, 0.2, Activation::relu());
  GATCache cache;
  gat_forward(g, oracle::random_matrix(8, 3, rng), p, &cache);
  const auto grads = gat_backward(cache, DenseMatrix(8, 2));
  EXPECT_EQ(squared_norm(grads.weight), 0.0);
  EXPECT_EQ(squared_norm(grads.input), 0.0);
  for (double v : grads.attention) EXPECT_EQ(v, 0.0);
}

TEST(GatBackward, ShapeMismatch) {
  Rng rng(38);
  const SparseGraph g = with_self_loops(oracle::random_graph(4, 0.5, rng));
  const auto p = random_gat(3, 2, rng, 0.2, Activation::relu());
  GATCache cache;
  gat_forward(g, oracle::random_matrix(4, 3, rng), p, &cache);
  EXPECT_THROW(gat_backward(cache, DenseMatrix(4, 3)), InputError);
}

class GatGradient : public ::testing::TestWithParam<int> {};

TEST_P(GatGradient, MatchesCentralDifferences) {
  Rng rng(1000 + GetParam());
  const std::size_t n = 7;
  const SparseGraph g = with_self_loops(oracle::random_graph(n, 0.35, rng));
  for (double slope : {0.2, 1.0}) {
    for (Activation act : {Activation::identity(), Activation::relu()}) {
      const auto base = random_gat(4, 3, rng, slope, act);
      const auto h0 = oracle::random_matrix(n, 4, rng);
      const auto r = oracle::random_matrix(n, 3, rng);

      const DifferentiableFn wrt_w = [&](const DenseMatrix& w, DenseMatrix* grad) {
        auto p = base;
        p.weight = w;
        GATCache cache;
        const auto out = gat_forward(g, h0, p, &cache);
        if (grad) *grad = gat_backward(cache, r).weight;
        return weighted_sum(out, r);
      };
      EXPECT_LT(grad_check(wrt_w, base.weight).max_rel_error, 1e-4);

      const DifferentiableFn wrt_h = [&](const DenseMatrix& h, DenseMatrix* grad) {
        GATCache cache;
        const auto out = gat_forward(g, h, base, &cache);
        if (grad) *grad = gat_backward(cache, r).input;
        return weighted_sum(out, r);
      };
      EXPECT_LT(grad_check(wrt_h, h0).max_rel_error, 1e-4);

      // When every segment's logits share a sign, the attention nonlinearity
      // is linear on each segment, a_src shifts a whole segment equally and
      // its gradient is identically zero. The relative check would then only
      // see round-off, so the a_src block is checked for zero instead.
      const std::size_t d = base.out_dim();
      bool sign_uniform = true;
      {
        GATCache cache;
        gat_forward(g, h0, base, &cache);
        for (NodeId i = 0; i < n; ++i) {
          const std::size_t b = g.row_offsets()[i], e = g.row_offsets()[i + 1];
          for (std::size_t k = b + 1; k < e; ++k)
            if ((cache.raw_logit[k] > 0.0) != (cache.raw_logit[b] > 0.0) && slope != 1.0)
              sign_uniform = false;
        }
      }
      const std::size_t first = sign_uniform ? d : 0;
      const DifferentiableFn wrt_a = [&](const DenseMatrix& a, DenseMatrix* grad) {
        auto p = base;
        std::copy(a.data().begin(), a.data().end(), p.attention.begin() + first);
        GATCache cache;
        const auto out = gat_forward(g, h0, p, &cache);
        if (grad) {
          const auto ga = gat_backward(cache, r).attention;
          *grad = DenseMatrix(1, ga.size() - first);
          std::copy(ga.begin() + first, ga.end(), grad->data().begin());
        }
        return weighted_sum(out, r);
      };
      DenseMatrix a0(1, base.attention.size() - first);
      std::copy(base.attention.begin() + first, base.attention.end(), a0.data().begin());
      EXPECT_LT(grad_check(wrt_a, a0).max_rel_error, 1e-4);
      if (first > 0) {
        GATCache cache;
        gat_forward(g, h0, base, &cache);
        const auto ga = gat_backward(cache, r).attention;
        for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(ga[k], 0.0, 1e-12);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, GatGradient, ::testing::Range(0, 20));

TEST(GatBackward, ZeroAttentionStillHasAttentionGradient) {
  Rng rng(39);
  const SparseGraph g = with_self_loops(oracle::random_graph(6, 0.5, rng));
  auto base = random_gat(3, 2, rng, 0.2, Activation::identity());
  std::fill(base.attention.begin(), base.attention.end(), 0.0);
  const auto h0 = oracle::random_matrix(6, 3, rng);
  const auto r = oracle::random_matrix(6, 2, rng);
  const DifferentiableFn wrt_a = [&](const DenseMatrix& a, DenseMatrix* grad) {
    auto p = base;
    p.attention = a.data();
    GATCache cache;
    const auto out = gat_forward(g, h0, p, &cache);
    if (grad) {
      const auto ga = gat_backward(cache, r).attention;
      *grad = DenseMatrix(1, ga.size());
      grad->data() = ga;
    }
    return weighted_sum(out, r);
  };
  DenseMatrix a0(1, 4);
  // Step off the leaky-relu kink at zero.
  for (double& v : a0.data()) v = 1e-3;
  const auto report = grad_check(wrt_a, a0);
  EXPECT_LT(report.max_rel_error, 1e-4);
  DenseMatrix grad;
  wrt_a(DenseMatrix(1, 4), &grad);
  EXPECT_GT(squared_norm(grad), 0.0);
}

TEST(GcnForward, SelfLoopOnlyIdentity) {
  const SparseGraph g = with_self_loops(build_from_edges({}, 4));
  const auto adj = symmetric_normalize(g, false);
  GCNLayerParams p{DenseMatrix::identity(3), Activation::identity()};
  Rng rng(41);
  const auto h = oracle::random_matrix(4, 3, rng);
  EXPECT_EQ(gcn_forward(adj, h, p), h);
}

TEST(GcnForward, ZeroInputGivesZeroOutput) {
  Rng rng(42);
  const auto adj = symmetric_normalize(oracle::random_graph(6, 0.5, rng), true);
  GCNLayerParams p{oracle::random_matrix(3, 2, rng), Activation::relu()};
  EXPECT_EQ(squared_norm(gcn_forward(adj, DenseMatrix(6, 3), p)), 0.0);
}

TEST(GcnForward, MatchesDenseOracle) {
  Rng rng(43);
  for (int seed = 0; seed < 50; ++seed) {
    const SparseGraph g = oracle::random_graph(10, 0.3, rng);
    const auto adj = symmetric_normalize(g, true);
    const auto dense = oracle::normalize(oracle::add_identity(oracle::dense_adjacency(g)));
    for (Activation act : {Activation::relu(), Activation::identity()}) {
      GCNLayerParams p{oracle::random_matrix(4, 3, rng), act};
      const auto h = oracle::random_matrix(10, 4, rng);
      EXPECT_LE(max_abs_diff(gcn_forward(adj, h, p), oracle::gcn_layer(dense, h, p.weight, to_oracle(act))),
                1e-12);
    }
  }
}

TEST(GcnForward, PermutationEquivariant) {
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.below(20);
    const SparseGraph g = oracle::random_graph(n, 0.25, rng);
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    for (std::size_t k = n; k > 1; --k) std::swap(perm[k - 1], perm[rng.below(k)]);
    GCNLayerParams p{oracle::random_matrix(4, 3, rng), Activation::relu()};
    const auto h = oracle::random_matrix(n, 4, rng);
    const auto out = gcn_forward(symmetric_normalize(g, true), h, p);
    const auto out_perm = gcn_forward(symmetric_normalize(permute(g, perm), true), permute_rows(h, perm), p);
    EXPECT_LE(max_abs_diff(permute_rows(out, perm), out_perm), 1e-12);
  }
}

TEST(GcnBackward, ZeroUpstream) {
  Rng rng(45);
  const auto adj = symmetric_normalize(oracle::random_graph(6, 0.5, rng), true);
  GCNLayerParams p{oracle::random_matrix(3, 2, rng), Activation::relu()};
  GCNCache cache;
  gcn_forward(adj, oracle::random_matrix(6, 3, rng), p, &cache);
  const auto grads = gcn_backward(cache, DenseMatrix(6, 2));
  EXPECT_EQ(squared_norm(grads.weight), 0.0);
  EXPECT_EQ(squared_norm(grads.input), 0.0);
}

TEST(GcnBackward, LinearWeightGradientClosedForm) {
  Rng rng(46);
  const SparseGraph g = oracle::random_graph(9, 0.3, rng);
  const auto adj = symmetric_normalize(g, true);
  GCNLayerParams p{oracle::random_matrix(4, 3, rng), Activation::identity()};
  const auto h = oracle::random_matrix(9, 4, rng);
  const auto up = oracle::random_matrix(9, 3, rng);
  GCNCache cache;
  gcn_forward(adj, h, p, &cache);
  const auto ah = oracle::matmul(oracle::to_matrix(oracle::normalize(oracle::add_identity(oracle::dense_adjacency(g)))), h);
  EXPECT_LE(max_abs_diff(gcn_backward(cache, up).weight, oracle::matmul(transpose(ah), up)), 1e-12);
}

class GcnGradient : public ::testing::TestWithParam<int> {};

TEST_P(GcnGradient, MatchesCentralDifferences) {
  Rng rng(2000 + GetParam());
  const std::size_t n = 8;
  const auto adj = symmetric_normalize(oracle::random_graph(n, 0.35, rng), true);
  for (Activation act : {Activation::identity(), Activation::relu()}) {
    GCNLayerParams base{oracle::random_matrix(4, 3, rng), act};
    const auto h0 = oracle::random_matrix(n, 4, rng);
    const auto r = oracle::random_matrix(n, 3, rng);
    const DifferentiableFn wrt_w = [&](const DenseMatrix& w, DenseMatrix* grad) {
      auto p = base;
      p.weight = w;
      GCNCache cache;
      const auto out = gcn_forward(adj, h0, p, &cache);
      if (grad) *grad = gcn_backward(cache, r).weight;
      return weighted_sum(out, r);
    };
    EXPECT_LT(grad_check(wrt_w, base.weight).max_rel_error, 1e-4);
    const DifferentiableFn wrt_h = [&](const DenseMatrix& h, DenseMatrix* grad) {
      GCNCache cache;
      const auto out = gcn_forward(adj, h, base, &cache);
      if (grad) *grad = gcn_backward(cache, r).input;
      return weighted_sum(out, r);
    };
    EXPECT_LT(grad_check(wrt_h, h0).max_rel_error, 1e-4);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, GcnGradient, ::testing::Range(0, 20));
