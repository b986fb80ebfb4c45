#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "kgrec/ppr.hpp"
#include "support/test_support.hpp"

namespace kgrec {
namespace {

using testing::EdgeList;

double linf(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(Ppr, SelfLoopKeepsAllMass) {
  TransitionView g(1, {{0, 0}});
  EXPECT_NEAR(ppr_power(g, 0)[0], 1.0, 1e-12);
  TransitionView lone(1, {});
  EXPECT_NEAR(ppr_power(lone, 0)[0], 1.0, 1e-12);
  EXPECT_NEAR(ppr_push(lone, 0)[0], 1.0, 1e-5);
}

TEST(Ppr, TwoNodeCycleClosedForm) {
  TransitionView g(2, {{0, 1}, {1, 0}});
  const double a = 0.2;
  auto p = ppr_power(g, 0, a);
  EXPECT_NEAR(p[0], 1.0 / (2.0 - a), 1e-9);
  EXPECT_NEAR(p[1], (1.0 - a) / (2.0 - a), 1e-9);
  auto q = ppr_push(g, 0, a, 1e-8);
  EXPECT_LT(testing::l1(p.scores, q.scores), 1e-6);
}

TEST(Ppr, LargeEpsLeavesOnlyStart) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 20;
    TransitionView g(n, testing::random_edges(rng, n, 0.2));
    const std::uint32_t s = rng() % n;
    for (double eps : {1.0, 1.5, 10.0}) {
      auto p = ppr_push(g, s, 0.2, eps);
      for (std::uint32_t v = 0; v < n; ++v)
        if (v != s) {
          EXPECT_EQ(p[v], 0.0);
        }
      EXPECT_LE(p.total(), 1.0);
    }
  }
}

TEST(Ppr, RejectsBadArguments) {
  TransitionView g(2, {{0, 1}});
  for (double a : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    EXPECT_THROW(ppr_power(g, 0, a), InvalidArgument);
    EXPECT_THROW(ppr_push(g, 0, a), InvalidArgument);
  }
  EXPECT_THROW(ppr_power(g, 2), InvalidArgument);
  EXPECT_THROW(ppr_push(g, 0, 0.2, 0.0), InvalidArgument);
  EXPECT_THROW(TransitionView(2, {{0, 2}}), InvalidArgument);
}

TEST(Ppr, MaxIterFlagsNonConvergence) {
  TransitionView g(3, {{0, 1}, {1, 2}, {2, 0}});
  auto p = ppr_power(g, 0, 0.01, 1e-15, 3);
  EXPECT_FALSE(p.converged);
  EXPECT_EQ(p.iterations, 3u);
  EXPECT_TRUE(ppr_power(g, 0).converged);
}

TEST(Ppr, PowerMatchesDenseSolve) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    const double density = std::uniform_real_distribution<>(0.0, 0.3)(rng);
    EdgeList edges = testing::random_edges(rng, n, density);
    const std::uint32_t s = rng() % n;
    const double alpha = std::uniform_real_distribution<>(0.05, 0.9)(rng);
    TransitionView g(n, edges);
    auto p = ppr_power(g, s, alpha);
    ASSERT_TRUE(p.converged);
    auto oracle = testing::dense_ppr(n, edges, s, alpha);
    EXPECT_LT(testing::l1(p.scores, oracle), 1e-8) << "trial " << trial;
  }
}

TEST(Ppr, PushWithinResidualBoundOfPower) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    TransitionView g(n, testing::random_edges(rng, n, 0.15));
    const std::uint32_t s = rng() % n;
    for (double eps : {1e-3, 1e-6}) {
      auto power = ppr_power(g, s);
      auto push = ppr_push(g, s, 0.2, eps);
      const double bound = eps * static_cast<double>(std::max<std::size_t>(g.max_out_degree(), 1));
      EXPECT_LE(linf(power.scores, push.scores), bound) << "trial " << trial << " eps " << eps;
      EXPECT_LE(push.total(), 1.0 + 1e-12);
    }
  }
}

TEST(Ppr, Invariants) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    TransitionView g(n, testing::random_edges(rng, n, 0.1));
    const std::uint32_t s = rng() % n;
    auto p = ppr_power(g, s);
    auto q = ppr_push(g, s);
    for (std::size_t v = 0; v < n; ++v) {
      EXPECT_GE(p[v], 0.0);
      EXPECT_GE(q[v], 0.0);
    }
    EXPECT_NEAR(p.total(), 1.0, 1e-9);
    EXPECT_LE(q.total(), 1.0 + 1e-12);
    // the start node always keeps at least the restart share
    EXPECT_GE(p[s], 0.2 - 1e-12);
  }
}

TEST(Ppr, PathDecaysWithDistance) {
  // 0 -> 1 -> 2 -> ... -> 7, last node dangling
  EdgeList edges;
  for (std::uint32_t i = 0; i + 1 < 8; ++i) edges.emplace_back(i, i + 1);
  TransitionView g(8, edges);
  auto p = ppr_power(g, 0);
  for (std::size_t i = 0; i + 1 < 8; ++i) EXPECT_GT(p[i], p[i + 1]);
}

TEST(Ppr, TreeStartDominates) {
  EdgeList edges = {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {2, 6}};
  TransitionView g(7, edges);
  auto p = ppr_power(g, 0);
  for (std::size_t v = 1; v < 7; ++v) EXPECT_GT(p[0], p[v]);
  EXPECT_NEAR(p[1], p[2], 1e-12);
  EXPECT_NEAR(p[3], p[6], 1e-12);
}

TEST(Ppr, BitwiseDeterministic) {
  std::mt19937 rng(3);
  TransitionView g(30, testing::random_edges(rng, 30, 0.2));
  for (auto method : {PprMethod::power, PprMethod::push}) {
    PprParams params;
    params.method = method;
    auto a = personalized_pagerank(g, 4, params);
    auto b = personalized_pagerank(g, 4, params);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(std::memcmp(a.scores.data(), b.scores.data(), a.size() * sizeof(double)), 0);
  }
}

TEST(Ppr, ProofGraphView) {
  auto kg = testing::fig4_with_likes();
  auto pg = ground(parse_literal("willLike(alice,E,M)"), movie_rules(), kg, {4, 20000});
  auto g = TransitionView::from_proof_graph(pg);
  ASSERT_EQ(g.size(), pg.size());
  std::size_t total = 0;
  for (std::uint32_t u = 0; u < g.size(); ++u) total += g.out_degree(u);
  EXPECT_EQ(total, pg.edges().size());
  auto p = ppr_power(g, pg.start());
  auto oracle = testing::dense_ppr(pg.size(), testing::proof_graph_edges(pg), pg.start(), 0.2);
  EXPECT_LT(testing::l1(p.scores, oracle), 1e-8);
}

}  // namespace
}  // namespace kgrec
