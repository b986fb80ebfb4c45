#pragma once

// Query grounding: leftmost-goal resolution of a query against a rule
// program and the knowledge graph, producing a memoized proof graph.
//
// A proof state is (pending goals, current instantiation of the query's
// arguments). States are stored in canonical form: fully substituted, with
// variables renumbered by order of first appearance, so two derivations that
// reach the same state share one node.
//
// Depth counts rule resolutions only. Resolving a builtin goal against a KG
// fact is free, so `max_depth` bounds the number of rule applications on a
// path; with the movie rules the default of 6 admits similarity chains of up
// to three links.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kgrec/error.hpp"
#include "kgrec/kg_store.hpp"
#include "kgrec/rules.hpp"

namespace kgrec {

struct GroundingLimits {
  std::size_t max_depth = 6;
  std::size_t max_nodes = 20000;
};

// Term codes inside the proof graph: >= 0 is a symbol, < 0 is variable -1-k.
using TermCode = std::int32_t;

inline constexpr bool is_var_code(TermCode t) noexcept { return t < 0; }
inline constexpr std::int32_t var_index(TermCode t) noexcept { return -1 - t; }
inline constexpr TermCode var_code(std::int32_t k) noexcept { return -1 - k; }

// Interned constants. Codes [0, entity_count) coincide with EntityIndex;
// later codes are symbols that are not entities (e.g. users known only from
// feedback).
class SymbolTable {
 public:
  SymbolTable() = default;
  explicit SymbolTable(const EntityTable& entities) : entities_(&entities) {}

  std::size_t entity_count() const noexcept { return entities_ ? entities_->size() : 0; }
  std::size_t size() const noexcept { return entity_count() + extra_.size(); }

  bool is_entity(TermCode c) const noexcept {
    return c >= 0 && static_cast<std::size_t>(c) < entity_count();
  }

  std::optional<TermCode> find(std::string_view name) const {
    if (entities_)
      if (auto i = entities_->find(name)) return static_cast<TermCode>(*i);
    auto it = extra_index_.find(std::string(name));
    if (it == extra_index_.end()) return std::nullopt;
    return it->second;
  }

  TermCode intern(std::string_view name) {
    if (auto c = find(name)) return *c;
    const auto code = static_cast<TermCode>(size());
    extra_.emplace_back(name);
    extra_index_.emplace(std::string(name), code);
    return code;
  }

  const std::string& name(TermCode c) const {
    if (is_entity(c)) return (*entities_)[static_cast<EntityIndex>(c)].id;
    return extra_.at(static_cast<std::size_t>(c) - entity_count());
  }

 private:
  const EntityTable* entities_ = nullptr;
  std::vector<std::string> extra_;
  std::unordered_map<std::string, TermCode> extra_index_;
};

// What justified a proof-graph edge: a rule (index into the RuleSet) or a
// ground builtin fact.
struct EdgeLabel {
  static constexpr std::size_t kBuiltin = std::numeric_limits<std::size_t>::max();

  std::size_t rule = kBuiltin;
  Literal fact;  // set when rule == kBuiltin

  bool is_rule() const noexcept { return rule != kBuiltin; }
};

struct ProofEdge {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  EdgeLabel label;
};

// Decoded view of a proof-graph node.
struct ProofState {
  std::vector<Literal> goals;
  std::vector<Term> bindings;  // query arguments under the state's substitution

  bool is_solution() const noexcept { return goals.empty(); }
};

// Holds a pointer into the KG's entity table for symbol names; the graph
// must not outlive the KnowledgeGraph it was grounded against.
class ProofGraph {
 public:
  struct Node {
    std::vector<TermCode> data;  // query args, then goals as (predicate, args...)
    std::uint32_t depth = 0;
    bool expanded = false;
    bool frontier = false;  // left unexpanded by the depth limit
    std::vector<std::uint32_t> out;  // indices into edges()
  };

  std::uint32_t start() const noexcept { return 0; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<ProofEdge>& edges() const noexcept { return edges_; }
  const Literal& query() const noexcept { return query_; }
  const SymbolTable& symbols() const noexcept { return symbols_; }

  // True if max_depth or max_nodes cut off part of the search.
  bool truncated() const noexcept { return truncated_; }

  bool is_solution(std::uint32_t n) const { return nodes_[n].data.size() == query_.arity(); }

  const std::vector<std::uint32_t>& solution_nodes() const noexcept { return solutions_; }

  std::vector<std::uint32_t> successors(std::uint32_t n) const {
    std::vector<std::uint32_t> out;
    out.reserve(nodes_[n].out.size());
    for (auto e : nodes_[n].out) out.push_back(edges_[e].to);
    return out;
  }

  std::size_t arity_of(std::int32_t predicate) const {
    return arities_[static_cast<std::size_t>(predicate)];
  }
  const std::string& predicate_name(std::int32_t predicate) const {
    return predicates_[static_cast<std::size_t>(predicate)];
  }

  Term decode(TermCode t) const {
    if (is_var_code(t)) return Term::variable("_" + std::to_string(var_index(t)));
    return Term::constant(symbols_.name(t));
  }

  ProofState state(std::uint32_t n) const {
    ProofState s;
    const auto& d = nodes_[n].data;
    const std::size_t qa = query_.arity();
    for (std::size_t i = 0; i < qa; ++i) s.bindings.push_back(decode(d[i]));
    for (std::size_t i = qa; i < d.size();) {
      Literal l;
      const auto p = d[i++];
      l.predicate = predicate_name(p);
      for (std::size_t k = 0; k < arity_of(p); ++k) l.args.push_back(decode(d[i++]));
      s.goals.push_back(std::move(l));
    }
    return s;
  }

  // Pending goals rendered as text; "true" for a solution state.
  std::string goals_text(std::uint32_t n) const {
    ProofState s = state(n);
    if (s.goals.empty()) return "true";
    std::string out;
    for (std::size_t i = 0; i < s.goals.size(); ++i) {
      if (i) out += ", ";
      out += to_string(s.goals[i]);
    }
    return out;
  }

 private:
  friend class Grounder;

  Literal query_;
  SymbolTable symbols_;
  std::vector<std::string> predicates_;
  std::vector<std::size_t> arities_;
  std::vector<Node> nodes_;
  std::vector<ProofEdge> edges_;
  std::vector<std::uint32_t> solutions_;
  bool truncated_ = false;
};

namespace detail {

struct CodeVectorHash {
  std::size_t operator()(const std::vector<TermCode>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (TermCode t : v) {
      h ^= static_cast<std::uint32_t>(t);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Index positions of the builtins in the predicate table.
enum BuiltinId : std::int32_t {
  kLink = 0,
  kIsMovie,
  kLikesEntity,
  kLikesMovie,
  kDislikesEntity,
  kDislikesMovie,
  kBuiltinCount
};

inline FeedbackPredicate feedback_predicate_of(std::int32_t builtin) {
  switch (builtin) {
    case kLikesEntity: return FeedbackPredicate::likes_entity;
    case kLikesMovie: return FeedbackPredicate::likes_movie;
    case kDislikesEntity: return FeedbackPredicate::dislikes_entity;
    default: return FeedbackPredicate::dislikes_movie;
  }
}

// Union-find style substitution over variable indices.
class Substitution {
 public:
  static constexpr TermCode kUnbound = std::numeric_limits<TermCode>::min();

  void reset(std::size_t vars) { slots_.assign(vars, kUnbound); }

  TermCode deref(TermCode t) const {
    while (is_var_code(t)) {
      const TermCode next = slots_[static_cast<std::size_t>(var_index(t))];
      if (next == kUnbound) return t;
      t = next;
    }
    return t;
  }

  bool unify(TermCode a, TermCode b) {
    a = deref(a);
    b = deref(b);
    if (a == b) return true;
    if (is_var_code(a)) {
      slots_[static_cast<std::size_t>(var_index(a))] = b;
      return true;
    }
    if (is_var_code(b)) {
      slots_[static_cast<std::size_t>(var_index(b))] = a;
      return true;
    }
    return false;
  }

 private:
  std::vector<TermCode> slots_;
};

}  // namespace detail

class Grounder {
 public:
  Grounder(const Literal& query, const RuleSet& rules, const KnowledgeGraph& kg,
           GroundingLimits limits)
      : Grounder(query, rules, kg, kg.feedback(), limits) {}

  // Resolves the feedback builtins against `feedback` instead of the KG's own
  // store.
  Grounder(const Literal& query, const RuleSet& rules, const KnowledgeGraph& kg,
           const FeedbackStore& feedback, GroundingLimits limits)
      : rules_(rules), kg_(kg), feedback_(feedback), limits_(limits) {
    if (limits.max_depth == 0 || limits.max_nodes == 0)
      throw InvalidArgument("grounding limits must be positive");
    g_.query_ = query;
    g_.symbols_ = SymbolTable(kg.entities());
    for (const auto& b : kBuiltins) add_predicate(std::string(b.name), b.arity);
    compile_rules();
    compile_query();
  }

  ProofGraph run() {
    std::deque<std::uint32_t> queue;
    add_node(std::move(start_data_), 0);
    queue.push_back(0);
    while (!queue.empty()) {
      const std::uint32_t u = queue.front();
      queue.pop_front();
      if (g_.nodes_[u].expanded) continue;
      expand(u, queue);
    }
    return std::move(g_);
  }

 private:
  struct CompiledLiteral {
    std::int32_t predicate = 0;
    std::vector<TermCode> args;
  };

  struct CompiledRule {
    std::size_t index = 0;
    CompiledLiteral head;
    std::vector<CompiledLiteral> body;
    std::int32_t var_count = 0;
  };

  std::int32_t add_predicate(const std::string& name, std::size_t arity) {
    auto [it, inserted] = predicate_ids_.emplace(name, static_cast<std::int32_t>(g_.predicates_.size()));
    if (inserted) {
      g_.predicates_.push_back(name);
      g_.arities_.push_back(arity);
      by_head_.emplace_back();
    }
    return it->second;
  }

  TermCode constant_code(const std::string& name) {
    auto c = g_.symbols_.find(name);
    if (c) return *c;
    if (!kg_.has_user(name) && !feedback_.has_user(name)) throw UnknownEntity(name);
    return g_.symbols_.intern(name);
  }

  CompiledLiteral compile(const Literal& l, std::unordered_map<std::string, std::int32_t>& vars) {
    CompiledLiteral out;
    auto arity = rules_.arity(l.predicate);
    if (!arity) throw UnknownPredicate("unknown predicate '" + l.predicate + "'");
    if (*arity != l.arity())
      throw ArityError("predicate '" + l.predicate + "' has arity " + std::to_string(*arity) +
                       ", got " + std::to_string(l.arity()));
    out.predicate = add_predicate(l.predicate, l.arity());
    for (const Term& t : l.args) {
      if (t.is_variable()) {
        auto [it, _] = vars.emplace(t.name, static_cast<std::int32_t>(vars.size()));
        out.args.push_back(var_code(it->second));
      } else {
        out.args.push_back(constant_code(t.name));
      }
    }
    return out;
  }

  void compile_rules() {
    // Register heads first so body references resolve regardless of order.
    for (const Rule& r : rules_.rules()) add_predicate(r.head.predicate, r.head.arity());
    for (std::size_t i = 0; i < rules_.size(); ++i) {
      const Rule& r = rules_.rules()[i];
      std::unordered_map<std::string, std::int32_t> vars;
      CompiledRule cr;
      cr.index = i;
      cr.head = compile(r.head, vars);
      for (const Literal& l : r.body) {
        if (!is_builtin(l.predicate) && !rules_.defines(l.predicate))
          throw UnknownPredicate("predicate '" + l.predicate + "' has no rules and is not builtin");
        cr.body.push_back(compile(l, vars));
      }
      cr.var_count = static_cast<std::int32_t>(vars.size());
      by_head_[static_cast<std::size_t>(cr.head.predicate)].push_back(compiled_.size());
      compiled_.push_back(std::move(cr));
    }
  }

  void compile_query() {
    const Literal& q = g_.query_;
    if (!is_builtin(q.predicate) && !rules_.defines(q.predicate))
      throw UnknownPredicate("unknown query predicate '" + q.predicate + "'");
    std::unordered_map<std::string, std::int32_t> vars;
    CompiledLiteral cq = compile(q, vars);
    std::vector<TermCode> data = cq.args;
    data.push_back(cq.predicate);
    data.insert(data.end(), cq.args.begin(), cq.args.end());
    start_data_ = canonical(std::move(data));
  }

  // Renumbers variables by first appearance.
  static std::vector<TermCode> canonical(std::vector<TermCode> data) {
    std::vector<std::pair<TermCode, TermCode>> map;
    for (auto& t : data) {
      if (!is_var_code(t)) continue;
      auto it = std::find_if(map.begin(), map.end(), [t](const auto& p) { return p.first == t; });
      if (it == map.end()) {
        map.emplace_back(t, var_code(static_cast<std::int32_t>(map.size())));
        t = map.back().second;
      } else {
        t = it->second;
      }
    }
    return data;
  }

  std::size_t query_arity() const { return g_.query_.arity(); }

  // Number of distinct variables in a canonical state.
  static std::int32_t var_count(const std::vector<TermCode>& data, std::size_t qa,
                                const std::vector<std::size_t>& arities) {
    std::int32_t n = 0;
    auto visit = [&n](TermCode t) {
      if (is_var_code(t)) n = std::max(n, var_index(t) + 1);
    };
    for (std::size_t i = 0; i < qa; ++i) visit(data[i]);
    for (std::size_t i = qa; i < data.size();) {
      const auto p = static_cast<std::size_t>(data[i++]);
      for (std::size_t k = 0; k < arities[p]; ++k) visit(data[i++]);
    }
    return n;
  }

  std::optional<std::uint32_t> add_node(std::vector<TermCode> data, std::uint32_t depth) {
    if (g_.nodes_.size() >= limits_.max_nodes) {
      g_.truncated_ = true;
      return std::nullopt;
    }
    const auto id = static_cast<std::uint32_t>(g_.nodes_.size());
    index_.emplace(data, id);
    ProofGraph::Node node;
    node.data = std::move(data);
    node.depth = depth;
    g_.nodes_.push_back(std::move(node));
    return id;
  }

  // Links u to the (possibly new) child state; `cost` is 0 for builtins and
  // 1 for rule steps.
  void connect(std::uint32_t u, std::vector<TermCode> data, std::uint32_t cost, EdgeLabel label,
               std::deque<std::uint32_t>& queue,
               std::unordered_set<std::uint32_t>& children) {
    data = canonical(std::move(data));
    const std::uint32_t depth = g_.nodes_[u].depth + cost;
    std::uint32_t v;
    if (auto it = index_.find(data); it != index_.end()) {
      v = it->second;
      auto& node = g_.nodes_[v];
      if (!node.expanded && depth < node.depth) {
        node.depth = depth;
        if (cost == 0) queue.push_front(v);
        else queue.push_back(v);
      }
    } else {
      auto id = add_node(std::move(data), depth);
      if (!id) return;
      v = *id;
      if (cost == 0) queue.push_front(v);
      else queue.push_back(v);
    }
    if (!children.insert(v).second) return;
    g_.nodes_[u].out.push_back(static_cast<std::uint32_t>(g_.edges_.size()));
    g_.edges_.push_back({u, v, std::move(label)});
  }

  void expand(std::uint32_t u, std::deque<std::uint32_t>& queue) {
    const std::size_t qa = query_arity();
    const std::vector<TermCode> data = g_.nodes_[u].data;
    if (data.size() == qa) {
      g_.nodes_[u].expanded = true;
      g_.solutions_.push_back(u);
      return;
    }
    const std::int32_t pred = data[qa];
    const std::size_t arity = g_.arities_[static_cast<std::size_t>(pred)];
    const std::vector<TermCode> goal(data.begin() + static_cast<std::ptrdiff_t>(qa + 1),
                                     data.begin() + static_cast<std::ptrdiff_t>(qa + 1 + arity));
    const std::size_t rest_begin = qa + 1 + arity;
    const std::int32_t nvars = var_count(data, qa, g_.arities_);
    std::unordered_set<std::uint32_t> children;

    if (pred < detail::kBuiltinCount) {
      g_.nodes_[u].expanded = true;
      for_each_fact(pred, goal, [&](const std::vector<TermCode>& fact) {
        subst_.reset(static_cast<std::size_t>(nvars));
        for (std::size_t k = 0; k < arity; ++k)
          if (!subst_.unify(goal[k], fact[k])) return;
        std::vector<TermCode> child;
        child.reserve(data.size() - arity - 1);
        for (std::size_t i = 0; i < qa; ++i) child.push_back(subst_.deref(data[i]));
        append_goals(child, data, rest_begin, data.size());
        EdgeLabel label;
        label.fact.predicate = g_.predicates_[static_cast<std::size_t>(pred)];
        for (TermCode c : fact) label.fact.args.push_back(Term::constant(g_.symbols_.name(c)));
        connect(u, std::move(child), 0, std::move(label), queue, children);
      });
      return;
    }

    if (g_.nodes_[u].depth + 1 > limits_.max_depth) {
      g_.nodes_[u].frontier = true;
      if (!by_head_[static_cast<std::size_t>(pred)].empty()) g_.truncated_ = true;
      g_.nodes_[u].expanded = true;
      return;
    }
    g_.nodes_[u].expanded = true;
    for (std::size_t ri : by_head_[static_cast<std::size_t>(pred)]) {
      const CompiledRule& r = compiled_[ri];
      subst_.reset(static_cast<std::size_t>(nvars + r.var_count));
      auto rename = [nvars](TermCode t) { return is_var_code(t) ? var_code(nvars + var_index(t)) : t; };
      bool ok = true;
      for (std::size_t k = 0; k < arity && ok; ++k) ok = subst_.unify(goal[k], rename(r.head.args[k]));
      if (!ok) continue;
      std::vector<TermCode> child;
      for (std::size_t i = 0; i < qa; ++i) child.push_back(subst_.deref(data[i]));
      for (const CompiledLiteral& b : r.body) {
        child.push_back(b.predicate);
        for (TermCode t : b.args) child.push_back(subst_.deref(rename(t)));
      }
      append_goals(child, data, rest_begin, data.size());
      EdgeLabel label;
      label.rule = r.index;
      connect(u, std::move(child), 1, std::move(label), queue, children);
    }
  }

  void append_goals(std::vector<TermCode>& out, const std::vector<TermCode>& data,
                    std::size_t begin, std::size_t end) const {
    for (std::size_t i = begin; i < end;) {
      const auto p = data[i++];
      out.push_back(p);
      for (std::size_t k = 0; k < g_.arities_[static_cast<std::size_t>(p)]; ++k)
        out.push_back(subst_.deref(data[i++]));
    }
  }

  // Enumerates ground facts of a builtin compatible with the constants in
  // `goal`. Variables in the goal are free; repeated variables are filtered
  // by unification at the call site.
  template <class F>
  void for_each_fact(std::int32_t pred, const std::vector<TermCode>& goal, F&& emit) {
    const auto& adj = kg_.adjacency();
    const auto& sym = g_.symbols_;
    std::vector<TermCode> fact(goal.size());
    switch (pred) {
      case detail::kLink: {
        const TermCode a = goal[0], b = goal[1];
        if (!is_var_code(a)) {
          if (!sym.is_entity(a)) return;
          for (EntityIndex t : adj.link_targets(static_cast<EntityIndex>(a))) {
            if (!is_var_code(b) && b != static_cast<TermCode>(t)) continue;
            fact = {a, static_cast<TermCode>(t)};
            emit(fact);
          }
        } else if (!is_var_code(b)) {
          if (!sym.is_entity(b)) return;
          for (EntityIndex t : adj.link_targets(static_cast<EntityIndex>(b))) {
            fact = {static_cast<TermCode>(t), b};
            emit(fact);
          }
        } else {
          for (EntityIndex v = 0; v < adj.node_count(); ++v)
            for (EntityIndex t : adj.link_targets(v)) {
              fact = {static_cast<TermCode>(v), static_cast<TermCode>(t)};
              emit(fact);
            }
        }
        return;
      }
      case detail::kIsMovie: {
        const TermCode x = goal[0];
        const auto& entities = kg_.entities();
        if (!is_var_code(x)) {
          if (sym.is_entity(x) && entities[static_cast<EntityIndex>(x)].is_movie()) {
            fact = {x};
            emit(fact);
          }
          return;
        }
        for (EntityIndex v = 0; v < entities.size(); ++v)
          if (entities[v].is_movie()) {
            fact = {static_cast<TermCode>(v)};
            emit(fact);
          }
        return;
      }
      default: {
        const FeedbackPredicate fp = detail::feedback_predicate_of(pred);
        const auto& store = feedback_;
        std::vector<TermCode> users;
        if (!is_var_code(goal[0])) {
          users.push_back(goal[0]);
        } else {
          for (const auto& name : store.users()) users.push_back(g_.symbols_.intern(name));
        }
        for (TermCode user : users) {
          for (const auto& target : store.targets(g_.symbols_.name(user), fp)) {
            const TermCode t = g_.symbols_.intern(target);
            if (!is_var_code(goal[1]) && goal[1] != t) continue;
            fact = {user, t};
            emit(fact);
          }
        }
        return;
      }
    }
  }

  const RuleSet& rules_;
  const KnowledgeGraph& kg_;
  const FeedbackStore& feedback_;
  GroundingLimits limits_;
  ProofGraph g_;
  std::unordered_map<std::string, std::int32_t> predicate_ids_;
  std::vector<std::vector<std::size_t>> by_head_;
  std::vector<CompiledRule> compiled_;
  std::vector<TermCode> start_data_;
  std::unordered_map<std::vector<TermCode>, std::uint32_t, detail::CodeVectorHash> index_;
  detail::Substitution subst_;
};

// Grounds `query` into a proof graph. Hitting a limit is not an error; the
// returned graph reports truncated() instead.
inline ProofGraph ground(const Literal& query, const RuleSet& rules, const KnowledgeGraph& kg,
                         GroundingLimits limits = {}) {
  return Grounder(query, rules, kg, limits).run();
}

inline ProofGraph ground(const Literal& query, const RuleSet& rules, const KnowledgeGraph& kg,
                         const FeedbackStore& feedback, GroundingLimits limits = {}) {
  return Grounder(query, rules, kg, feedback, limits).run();
}

struct Solution {
  std::uint32_t node = 0;
  std::vector<Term> values;  // one per requested variable

  friend bool operator==(const Solution&, const Solution&) = default;
};

// Bindings of `vars` at every solution state, ordered by bound values.
inline std::vector<Solution> solutions(const ProofGraph& pg, const std::vector<std::string>& vars) {
  const Literal& q = pg.query();
  std::vector<std::size_t> positions;
  for (const auto& v : vars) {
    auto it = std::find_if(q.args.begin(), q.args.end(),
                           [&](const Term& t) { return t.is_variable() && t.name == v; });
    if (it == q.args.end()) throw InvalidArgument("'" + v + "' is not a variable of the query");
    positions.push_back(static_cast<std::size_t>(it - q.args.begin()));
  }
  std::vector<Solution> out;
  for (std::uint32_t n : pg.solution_nodes()) {
    Solution s;
    s.node = n;
    for (std::size_t p : positions) s.values.push_back(pg.decode(pg.nodes()[n].data[p]));
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const Solution& a, const Solution& b) {
    return std::tie(a.values, a.node) < std::tie(b.values, b.node);
  });
  return out;
}

namespace detail {

inline std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

// Graphviz rendering. Node labels show pending goals; solution nodes are
// double circles labelled with the query's bindings.
inline void write_dot(std::ostream& os, const ProofGraph& pg, const RuleSet& rules) {
  os << "digraph proof {\n";
  os << "  node [shape=box, fontname=\"Helvetica\"];\n";
  for (std::uint32_t n = 0; n < pg.size(); ++n) {
    os << "  n" << n << " [label=\"";
    if (pg.is_solution(n)) {
      ProofState s = pg.state(n);
      std::string text;
      for (std::size_t i = 0; i < s.bindings.size(); ++i) {
        const Term& qt = pg.query().args[i];
        if (!qt.is_variable()) continue;
        if (!text.empty()) text += ", ";
        text += qt.name + "=" + to_string(s.bindings[i]);
      }
      os << detail::dot_escape(text.empty() ? "true" : text) << "\", shape=doublecircle";
    } else {
      os << detail::dot_escape(pg.goals_text(n)) << "\"";
      if (n == pg.start()) os << ", style=bold";
      if (pg.nodes()[n].frontier) os << ", style=dashed";
    }
    os << "];\n";
  }
  for (const ProofEdge& e : pg.edges()) {
    std::string label = e.label.is_rule() ? "rule " + std::to_string(e.label.rule + 1) + ": " +
                                                to_string(rules.rules()[e.label.rule].head)
                                          : to_string(e.label.fact);
    os << "  n" << e.from << " -> n" << e.to << " [label=\"" << detail::dot_escape(label)
       << "\"];\n";
  }
  os << "}\n";
}

inline std::string to_dot(const ProofGraph& pg, const RuleSet& rules) {
  std::ostringstream os;
  write_dot(os, pg, rules);
  return os.str();
}

}  // namespace kgrec
