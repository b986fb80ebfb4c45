#pragma once

// Personalized PageRank with restart to a single start node.
//
// The walk at node u restarts with probability alpha and otherwise follows
// one of u's out-edges uniformly. Nodes without out-edges send all their
// mass back to the start node, so the transition matrix is row-stochastic.

#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "kgrec/error.hpp"
#include "kgrec/grounding.hpp"

namespace kgrec {

// Out-adjacency in CSR form. Parallel edges count with multiplicity.
class TransitionView {
 public:
  TransitionView() = default;

  TransitionView(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges)
      : offsets_(n + 1, 0) {
    for (const auto& [from, to] : edges) {
      if (from >= n || to >= n) throw InvalidArgument("edge endpoint out of range");
      ++offsets_[from + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    targets_.resize(edges.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [from, to] : edges) targets_[fill[from]++] = to;
  }

  static TransitionView from_proof_graph(const ProofGraph& pg) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(pg.edges().size());
    for (std::uint32_t n = 0; n < pg.size(); ++n)
      for (auto e : pg.nodes()[n].out) edges.emplace_back(n, pg.edges()[e].to);
    return TransitionView(pg.size(), edges);
  }

  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  std::span<const std::uint32_t> out(std::uint32_t u) const {
    return {targets_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }

  std::size_t out_degree(std::uint32_t u) const { return offsets_[u + 1] - offsets_[u]; }

  std::size_t max_out_degree() const {
    std::size_t m = 0;
    for (std::uint32_t u = 0; u < size(); ++u) m = std::max(m, out_degree(u));
    return m;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
};

enum class PprMethod { power, push };

struct PprParams {
  double alpha = 0.2;
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  double eps = 1e-6;
  PprMethod method = PprMethod::power;
};

struct ScoreVector {
  std::vector<double> scores;
  bool converged = true;
  std::size_t iterations = 0;  // power sweeps or push operations

  double operator[](std::size_t i) const { return scores[i]; }
  std::size_t size() const noexcept { return scores.size(); }
  double total() const {
    double s = 0;
    for (double x : scores) s += x;
    return s;
  }
};

namespace detail {

inline void check_ppr_args(const TransitionView& g, std::uint32_t start, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (start >= g.size()) throw InvalidArgument("start node out of range");
}

}  // namespace detail

// Power iteration on p = alpha*e_start + (1-alpha)*P^T p. Stops once the
// contraction bound guarantees L1 distance < tol from the fixed point.
inline ScoreVector ppr_power(const TransitionView& g, std::uint32_t start, double alpha = 0.2,
                             double tol = 1e-8, std::size_t max_iter = 1000) {
  detail::check_ppr_args(g, start, alpha);
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
  const std::size_t n = g.size();
  const double keep = 1.0 - alpha;
  ScoreVector result;
  result.scores.assign(n, 0.0);
  result.scores[start] = 1.0;
  result.converged = false;
  std::vector<double> next(n);
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    double to_start = alpha;
    for (std::uint32_t u = 0; u < n; ++u) {
      const double mass = result.scores[u];
      if (mass == 0.0) continue;
      auto out = g.out(u);
      if (out.empty()) {
        to_start += keep * mass;
        continue;
      }
      const double share = keep * mass / static_cast<double>(out.size());
      for (std::uint32_t v : out) next[v] += share;
    }
    next[start] += to_start;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) delta += std::abs(next[i] - result.scores[i]);
    result.scores.swap(next);
    result.iterations = it + 1;
    if (delta * keep / alpha < tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

inline ScoreVector ppr_power(const TransitionView& g, std::uint32_t start, const PprParams& p) {
  return ppr_power(g, start, p.alpha, p.tol, p.max_iter);
}

// Local push. On return every node's residual is below eps times its
// effective out-degree (1 for dangling nodes) and the residuals sum to at
// most eps, which bounds the L1 distance to the exact vector. Scores sum to
// at most 1.
inline ScoreVector ppr_push(const TransitionView& g, std::uint32_t start, double alpha = 0.2,
                            double eps = 1e-6) {
  detail::check_ppr_args(g, start, alpha);
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const std::size_t n = g.size();
  const double keep = 1.0 - alpha;
  auto degree = [&g](std::uint32_t u) {
    return static_cast<double>(std::max<std::size_t>(g.out_degree(u), 1));
  };
  ScoreVector result;
  result.scores.assign(n, 0.0);
  std::vector<double> residual(n, 0.0);
  std::vector<char> queued(n, 0);
  std::deque<std::uint32_t> queue;
  residual[start] = 1.0;
  if (residual[start] >= eps * degree(start)) {
    queue.push_back(start);
    queued[start] = 1;
  }
  auto add = [&](std::uint32_t v, double amount) {
    residual[v] += amount;
    if (!queued[v] && residual[v] >= eps * degree(v)) {
      queued[v] = 1;
      queue.push_back(v);
    }
  };
  while (!queue.empty()) {
    const std::uint32_t u = queue.front();
    queue.pop_front();
    queued[u] = 0;
    const double mass = residual[u];
    if (mass < eps * degree(u)) continue;
    residual[u] = 0.0;
    result.scores[u] += alpha * mass;
    ++result.iterations;
    auto out = g.out(u);
    if (out.empty()) {
      add(start, keep * mass);
      continue;
    }
    const double share = keep * mass / static_cast<double>(out.size());
    for (std::uint32_t v : out) add(v, share);
  }
  // Sweep below-threshold residuals until the outstanding total fits in eps.
  auto outstanding = [&residual] {
    double r = 0.0;
    for (double x : residual) r += x;
    return r;
  };
  while (outstanding() > eps) {
    for (std::uint32_t u = 0; u < n; ++u) {
      const double mass = residual[u];
      if (mass == 0.0) continue;
      residual[u] = 0.0;
      result.scores[u] += alpha * mass;
      ++result.iterations;
      auto out = g.out(u);
      if (out.empty()) {
        residual[start] += keep * mass;
        continue;
      }
      const double share = keep * mass / static_cast<double>(out.size());
      for (std::uint32_t v : out) residual[v] += share;
    }
  }
  return result;
}

inline ScoreVector ppr_push(const TransitionView& g, std::uint32_t start, const PprParams& p) {
  return ppr_push(g, start, p.alpha, p.eps);
}

inline ScoreVector personalized_pagerank(const TransitionView& g, std::uint32_t start,
                                         const PprParams& p) {
  return p.method == PprMethod::push ? ppr_push(g, start, p) : ppr_power(g, start, p);
}

}  // namespace kgrec
