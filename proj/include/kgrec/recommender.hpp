#pragma once

// Explained recommendations: ground the like and dislike queries for a user,
// score every (reason entity, movie) binding by the Personalized PageRank
// mass of its solution state, then consolidate per movie.
//
// By default each feedback fact is grounded and ranked on its own and the
// masses are summed, so a new fact never takes mass away from the others.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "kgrec/error.hpp"
#include "kgrec/grounding.hpp"
#include "kgrec/kg_store.hpp"
#include "kgrec/ppr.hpp"
#include "kgrec/rules.hpp"

namespace kgrec {

// per_fact grounds and ranks the query once per active feedback fact of the
// matching polarity and sums the pair scores; query runs a single PPR over
// the proof graph of the whole query.
enum class PairScoring { per_fact, query };

inline const char* to_string(PairScoring s) { return s == PairScoring::query ? "query" : "per-fact"; }

inline std::optional<PairScoring> parse_pair_scoring(std::string_view s) {
  if (s == "per-fact") return PairScoring::per_fact;
  if (s == "query") return PairScoring::query;
  return std::nullopt;
}

struct EngineParams {
  GroundingLimits limits;
  PprParams ppr;
  PairScoring scoring = PairScoring::per_fact;
};

struct PairScore {
  std::string entity;
  std::string movie;
  double score = 0.0;
  Polarity polarity = Polarity::like;

  friend bool operator==(const PairScore&, const PairScore&) = default;
};

struct Reason {
  std::string entity;
  double contribution = 0.0;  // negative for dislike reasons
  Polarity polarity = Polarity::like;

  friend bool operator==(const Reason&, const Reason&) = default;
};

struct Recommendation {
  std::string movie;
  double net_score = 0.0;
  std::vector<Reason> reasons;  // by |contribution| descending, then entity id

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

inline const char* query_predicate(Polarity p) {
  return p == Polarity::like ? "willLike" : "willDislike";
}

inline Literal pair_query(const std::string& user, Polarity p) {
  return Literal{query_predicate(p),
                 {Term::constant(user), Term::variable("E"), Term::variable("M")}};
}

namespace detail {

using PairMass = std::map<std::pair<std::string, std::string>, double>;

inline void add_pair_mass(const ProofGraph& pg, const KnowledgeGraph& kg, const PprParams& ppr,
                          PairMass& mass) {
  const ScoreVector scores =
      personalized_pagerank(TransitionView::from_proof_graph(pg), pg.start(), ppr);
  for (std::uint32_t n : pg.solution_nodes()) {
    const auto& data = pg.nodes()[n].data;
    const TermCode e = data[1], m = data[2];
    if (is_var_code(e) || is_var_code(m) || !pg.symbols().is_entity(m)) continue;
    if (!kg.entities()[static_cast<EntityIndex>(m)].is_movie()) continue;
    mass[{pg.symbols().name(e), pg.symbols().name(m)}] += scores[n];
  }
}

inline std::vector<PairScore> to_pair_scores(const PairMass& mass, Polarity polarity) {
  std::vector<PairScore> out;
  for (const auto& [key, score] : mass)
    if (score > 0.0) out.push_back({key.first, key.second, score, polarity});
  std::stable_sort(out.begin(), out.end(),
                   [](const PairScore& a, const PairScore& b) { return a.score > b.score; });
  return out;
}

}  // namespace detail

// Assigns each solution state of the grounded query its PPR mass.
inline std::vector<PairScore> score_pairs(const ProofGraph& pg, const KnowledgeGraph& kg,
                                          const PprParams& ppr, Polarity polarity) {
  detail::PairMass mass;
  detail::add_pair_mass(pg, kg, ppr, mass);
  return detail::to_pair_scores(mass, polarity);
}

// Scored (entity, movie) pairs for willLike(user,E,M) or willDislike(user,E,M),
// highest score first, ties by (entity, movie).
inline std::vector<PairScore> rank_pairs(const std::string& user, Polarity polarity,
                                         const KnowledgeGraph& kg, const RuleSet& rules,
                                         const EngineParams& params = {}) {
  if (!kg.has_user(user)) throw UnknownEntity(user, "user");
  const Literal query = pair_query(user, polarity);
  if (params.scoring == PairScoring::query)
    return score_pairs(ground(query, rules, kg, params.limits), kg, params.ppr, polarity);
  detail::PairMass mass;
  for (const FeedbackFact& fact : kg.feedback().facts(user)) {
    if (polarity_of(fact.predicate) != polarity) continue;
    FeedbackStore single;
    single.apply(fact);
    detail::add_pair_mass(ground(query, rules, kg, single, params.limits), kg, params.ppr, mass);
  }
  return detail::to_pair_scores(mass, polarity);
}

namespace detail {

inline void sort_reasons(std::vector<Reason>& reasons) {
  std::sort(reasons.begin(), reasons.end(), [](const Reason& a, const Reason& b) {
    const double x = std::abs(a.contribution), y = std::abs(b.contribution);
    if (x != y) return x > y;
    return a.entity < b.entity;
  });
}

// movie -> sorted reasons; like and dislike mass for the same entity net out.
inline std::map<std::string, std::vector<Reason>> group_reasons(
    const std::vector<PairScore>& likes, const std::vector<PairScore>& dislikes) {
  std::map<std::string, std::map<std::string, double>> by_movie;
  for (const PairScore& p : likes) {
    if (p.polarity != Polarity::like)
      throw InvalidArgument("dislike pair (" + p.entity + ", " + p.movie + ") in the like list");
    by_movie[p.movie][p.entity] += p.score;
  }
  for (const PairScore& p : dislikes) {
    if (p.polarity != Polarity::dislike)
      throw InvalidArgument("like pair (" + p.entity + ", " + p.movie + ") in the dislike list");
    by_movie[p.movie][p.entity] -= p.score;
  }
  std::map<std::string, std::vector<Reason>> out;
  for (const auto& [movie, entities] : by_movie) {
    std::vector<Reason> reasons;
    for (const auto& [entity, c] : entities) {
      if (c == 0.0) continue;
      reasons.push_back({entity, c, c < 0.0 ? Polarity::dislike : Polarity::like});
    }
    sort_reasons(reasons);
    out.emplace(movie, std::move(reasons));
  }
  return out;
}

// Signed sum of contributions in reason order.
inline double net_of(const std::vector<Reason>& reasons) {
  double net = 0.0;
  for (const Reason& r : reasons) net += r.contribution;
  return net;
}

}  // namespace detail

inline std::vector<Recommendation> consolidate(const std::vector<PairScore>& likes,
                                               const std::vector<PairScore>& dislikes,
                                               const std::set<std::string>& exclusions = {}) {
  std::vector<Recommendation> out;
  for (auto& [movie, reasons] : detail::group_reasons(likes, dislikes)) {
    if (exclusions.contains(movie)) continue;
    const double net = detail::net_of(reasons);
    if (!(net > 0.0)) continue;
    out.push_back({movie, net, std::move(reasons)});
  }
  std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.net_score != b.net_score) return a.net_score > b.net_score;
    return a.movie < b.movie;
  });
  return out;
}

// Top-k movies for the user, excluding movies the user already gave
// movie-level feedback on.
inline std::vector<Recommendation> recommend(const std::string& user, std::size_t k,
                                             const KnowledgeGraph& kg, const RuleSet& rules,
                                             const EngineParams& params = {}) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  auto likes = rank_pairs(user, Polarity::like, kg, rules, params);
  auto dislikes = rank_pairs(user, Polarity::dislike, kg, rules, params);
  auto recs = consolidate(likes, dislikes, kg.feedback().consumed_movies(user));
  if (recs.size() > k) recs.resize(k);
  return recs;
}

// The reasons attached to `movie` after consolidation. Unlike recommend(),
// this is not subject to exclusion or net-score suppression, so already
// consumed or net-negative movies can still be explained.
inline std::vector<Reason> explain(const std::string& user, const std::string& movie,
                                   const KnowledgeGraph& kg, const RuleSet& rules,
                                   const EngineParams& params = {}) {
  const Entity& m = kg.entity(movie);
  if (!m.is_movie()) throw KindMismatch("'" + movie + "' is a " + m.kind_label() + ", not a movie");
  auto keep = [&movie](std::vector<PairScore> pairs) {
    std::erase_if(pairs, [&movie](const PairScore& p) { return p.movie != movie; });
    return pairs;
  };
  auto grouped = detail::group_reasons(keep(rank_pairs(user, Polarity::like, kg, rules, params)),
                                       keep(rank_pairs(user, Polarity::dislike, kg, rules, params)));
  auto it = grouped.find(movie);
  return it == grouped.end() ? std::vector<Reason>{} : std::move(it->second);
}

}  // namespace kgrec
