#pragma once

// Knowledge-graph storage: typed entities, a symmetric adjacency index and
// the per-user feedback fact store consumed by the recommendation rules.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgrec/error.hpp"

namespace kgrec {

using EntityIndex = std::uint32_t;

enum class EntityKind { movie, person, genre, user, other };

inline std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::movie: return "movie";
    case EntityKind::person: return "person";
    case EntityKind::genre: return "genre";
    case EntityKind::user: return "user";
    case EntityKind::other: return "other";
  }
  return "other";
}

inline std::optional<EntityKind> parse_entity_kind(std::string_view text) {
  if (text == "movie") return EntityKind::movie;
  if (text == "person") return EntityKind::person;
  if (text == "genre") return EntityKind::genre;
  if (text == "user") return EntityKind::user;
  if (text == "other") return EntityKind::other;
  return std::nullopt;
}

// Ids are TSV-safe: non-empty, no tab, CR or LF.
inline bool is_valid_entity_id(std::string_view id) {
  return !id.empty() && id.find_first_of("\t\r\n") == std::string_view::npos;
}

struct Entity {
  std::string id;
  std::string name;
  EntityKind kind = EntityKind::other;
  std::string tag;  // only meaningful for EntityKind::other

  bool is_movie() const noexcept { return kind == EntityKind::movie; }
  // "other" or "other:<tag>"
  std::string kind_label() const {
    if (kind == EntityKind::other && !tag.empty()) return "other:" + tag;
    return std::string(to_string(kind));
  }

  friend bool operator==(const Entity&, const Entity&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    auto tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

inline std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace detail

// Entities sorted by id; the index of an entity is its rank in id order, so
// every structure keyed by EntityIndex is ordered by id as well.
class EntityTable {
 public:
  EntityTable() = default;

  explicit EntityTable(std::vector<Entity> entities) : entities_(std::move(entities)) {
    std::sort(entities_.begin(), entities_.end(),
              [](const Entity& a, const Entity& b) { return a.id < b.id; });
    index_.reserve(entities_.size());
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      auto [it, inserted] = index_.emplace(entities_[i].id, static_cast<EntityIndex>(i));
      if (!inserted) throw DuplicateEntity("duplicate entity id '" + entities_[i].id + "'");
    }
  }

  std::size_t size() const noexcept { return entities_.size(); }
  bool empty() const noexcept { return entities_.empty(); }

  const Entity& operator[](EntityIndex i) const { return entities_[i]; }
  const std::vector<Entity>& entities() const noexcept { return entities_; }

  std::optional<EntityIndex> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  EntityIndex at(std::string_view id) const {
    if (auto i = find(id)) return *i;
    throw UnknownEntity(std::string(id));
  }

  bool contains(std::string_view id) const { return find(id).has_value(); }

  std::size_t count(EntityKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        entities_.begin(), entities_.end(), [kind](const Entity& e) { return e.kind == kind; }));
  }

 private:
  std::vector<Entity> entities_;
  std::unordered_map<std::string, EntityIndex> index_;
};

// Reads `id<TAB>kind<TAB>name` lines. Blank lines are skipped.
inline EntityTable load_entities(std::istream& in, const std::string& source = "entities") {
  std::vector<Entity> entities;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::strip_cr(raw);
    if (line.empty()) continue;
    auto fields = detail::split_tabs(line);
    if (fields.size() != 3)
      throw ParseError(source, line_no, 0,
                       "expected 3 tab-separated fields (id, kind, name), got " +
                           std::to_string(fields.size()));
    if (!is_valid_entity_id(fields[0])) throw ParseError(source, line_no, 1, "empty entity id");
    Entity e;
    e.id = std::string(fields[0]);
    std::string_view kind = fields[1];
    if (kind.starts_with("other:") && kind.size() > 6) {
      e.kind = EntityKind::other;
      e.tag = std::string(kind.substr(6));
    } else if (auto k = parse_entity_kind(kind)) {
      e.kind = *k;
    } else {
      throw ParseError(source, line_no, 2, "unknown entity kind '" + std::string(kind) + "'");
    }
    e.name = std::string(fields[2]);
    auto [it, inserted] = first_line.emplace(e.id, line_no);
    if (!inserted)
      throw DuplicateEntity(source + ":" + std::to_string(line_no) + ": duplicate entity id '" +
                            e.id + "' (first defined on line " + std::to_string(it->second) +
                            ")");
    entities.push_back(std::move(e));
  }
  return EntityTable(std::move(entities));
}

enum class Direction { outgoing, incoming };

struct Edge {
  EntityIndex src = 0;
  std::uint32_t relation = 0;
  EntityIndex dst = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Neighbor {
  EntityIndex node = 0;
  std::uint32_t relation = 0;
  Direction direction = Direction::outgoing;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Symmetric adjacency: an edge a -r-> b is listed under a (outgoing) and
// under b (incoming). Relation labels are kept for display only.
class AdjacencyIndex {
 public:
  AdjacencyIndex() = default;

  AdjacencyIndex(std::size_t node_count, std::vector<std::string> relations,
                 std::vector<Edge> edges)
      : relations_(std::move(relations)), edges_(std::move(edges)), lists_(node_count) {
    std::sort(edges_.begin(), edges_.end(), [this](const Edge& a, const Edge& b) {
      return std::tie(a.src, relations_[a.relation], a.dst) <
             std::tie(b.src, relations_[b.relation], b.dst);
    });
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (const Edge& e : edges_) {
      lists_[e.src].push_back({e.dst, e.relation, Direction::outgoing});
      lists_[e.dst].push_back({e.src, e.relation, Direction::incoming});
    }
    link_targets_.resize(node_count);
    for (std::size_t v = 0; v < node_count; ++v) {
      auto& list = lists_[v];
      std::sort(list.begin(), list.end(), [this](const Neighbor& a, const Neighbor& b) {
        return std::tie(a.node, relations_[a.relation], a.direction) <
               std::tie(b.node, relations_[b.relation], b.direction);
      });
      auto& targets = link_targets_[v];
      for (const Neighbor& n : list)
        if (targets.empty() || targets.back() != n.node) targets.push_back(n.node);
    }
  }

  std::size_t node_count() const noexcept { return lists_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::string& relation_name(std::uint32_t r) const { return relations_[r]; }

  const std::vector<Neighbor>& neighbors(EntityIndex v) const { return lists_[v]; }

  // Distinct neighbor nodes, ascending; the extension of link(v, _).
  const std::vector<EntityIndex>& link_targets(EntityIndex v) const { return link_targets_[v]; }

  bool linked(EntityIndex a, EntityIndex b) const {
    const auto& t = link_targets_[a];
    return std::binary_search(t.begin(), t.end(), b);
  }

 private:
  std::vector<std::string> relations_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> lists_;
  std::vector<std::vector<EntityIndex>> link_targets_;
};

// Reads `src<TAB>relation<TAB>dst` lines; duplicate lines collapse.
inline AdjacencyIndex load_edges(std::istream& in, const EntityTable& entities,
                                 const std::string& source = "edges") {
  std::vector<std::string> relations;
  std::unordered_map<std::string, std::uint32_t> relation_ids;
  std::vector<Edge> edges;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::strip_cr(raw);
    if (line.empty()) continue;
    auto fields = detail::split_tabs(line);
    if (fields.size() != 3)
      throw ParseError(source, line_no, 0,
                       "expected 3 tab-separated fields (src, relation, dst), got " +
                           std::to_string(fields.size()));
    if (fields[1].empty()) throw ParseError(source, line_no, 2, "empty relation label");
    auto src = entities.find(fields[0]);
    if (!src)
      throw UnknownEntity(std::string(fields[0]), source + ":" + std::to_string(line_no));
    auto dst = entities.find(fields[2]);
    if (!dst)
      throw UnknownEntity(std::string(fields[2]), source + ":" + std::to_string(line_no));
    auto [it, inserted] =
        relation_ids.emplace(std::string(fields[1]), static_cast<std::uint32_t>(relations.size()));
    if (inserted) relations.emplace_back(fields[1]);
    edges.push_back({*src, it->second, *dst});
  }
  return AdjacencyIndex(entities.size(), std::move(relations), std::move(edges));
}

enum class FeedbackPredicate { likes_entity, dislikes_entity, likes_movie, dislikes_movie };
enum class Polarity { like, dislike };

inline constexpr FeedbackPredicate kFeedbackPredicates[] = {
    FeedbackPredicate::likes_entity, FeedbackPredicate::dislikes_entity,
    FeedbackPredicate::likes_movie, FeedbackPredicate::dislikes_movie};

inline std::string_view to_string(FeedbackPredicate p) {
  switch (p) {
    case FeedbackPredicate::likes_entity: return "likesEntity";
    case FeedbackPredicate::dislikes_entity: return "dislikesEntity";
    case FeedbackPredicate::likes_movie: return "likesMovie";
    case FeedbackPredicate::dislikes_movie: return "dislikesMovie";
  }
  return "likesEntity";
}

inline std::string_view to_string(Polarity p) { return p == Polarity::like ? "like" : "dislike"; }

inline std::optional<FeedbackPredicate> parse_feedback_predicate(std::string_view name) {
  for (auto p : kFeedbackPredicates)
    if (to_string(p) == name) return p;
  return std::nullopt;
}

inline Polarity polarity_of(FeedbackPredicate p) {
  return (p == FeedbackPredicate::likes_entity || p == FeedbackPredicate::likes_movie)
             ? Polarity::like
             : Polarity::dislike;
}

inline bool is_movie_level(FeedbackPredicate p) {
  return p == FeedbackPredicate::likes_movie || p == FeedbackPredicate::dislikes_movie;
}

struct FeedbackFact {
  std::string user;
  FeedbackPredicate predicate = FeedbackPredicate::likes_entity;
  std::string target;
  std::int64_t timestamp = 0;

  friend bool operator==(const FeedbackFact&, const FeedbackFact&) = default;
};

// Active user preferences. For each (user, target) only one polarity is
// active; a fact of the opposite polarity with a timestamp not older than the
// current one replaces every active predicate for that pair. Older facts of
// the opposite polarity are stale and ignored.
//
// Not internally synchronized: callers serialize writes against reads.
class FeedbackStore {
 public:
  // Returns false if the fact was stale and therefore not applied.
  bool apply(const FeedbackFact& fact) {
    auto& entry = users_[fact.user][fact.target];
    const Polarity pol = polarity_of(fact.predicate);
    if (entry.mask == 0 || entry.polarity != pol) {
      if (entry.mask != 0 && fact.timestamp < entry.timestamp) return false;
      entry.mask = 0;
      entry.polarity = pol;
    }
    entry.mask |= bit(fact.predicate);
    entry.timestamp = std::max(entry.timestamp, fact.timestamp);
    return true;
  }

  bool has_user(std::string_view user) const { return users_.contains(std::string(user)); }

  std::vector<std::string> users() const {
    std::vector<std::string> out;
    out.reserve(users_.size());
    for (const auto& [u, _] : users_) out.push_back(u);
    return out;
  }

  std::size_t user_count() const noexcept { return users_.size(); }

  // Targets of active facts, ascending by id.
  std::vector<std::string> targets(std::string_view user, FeedbackPredicate p) const {
    std::vector<std::string> out;
    auto it = users_.find(std::string(user));
    if (it == users_.end()) return out;
    for (const auto& [target, entry] : it->second)
      if (entry.mask & bit(p)) out.push_back(target);
    return out;
  }

  bool holds(std::string_view user, FeedbackPredicate p, std::string_view target) const {
    auto it = users_.find(std::string(user));
    if (it == users_.end()) return false;
    auto jt = it->second.find(std::string(target));
    return jt != it->second.end() && (jt->second.mask & bit(p));
  }

  std::optional<Polarity> polarity(std::string_view user, std::string_view target) const {
    auto it = users_.find(std::string(user));
    if (it == users_.end()) return std::nullopt;
    auto jt = it->second.find(std::string(target));
    if (jt == it->second.end() || jt->second.mask == 0) return std::nullopt;
    return jt->second.polarity;
  }

  // Movies the user gave movie-level feedback on, of either polarity.
  std::set<std::string> consumed_movies(std::string_view user) const {
    std::set<std::string> out;
    auto it = users_.find(std::string(user));
    if (it == users_.end()) return out;
    const unsigned movie_bits =
        bit(FeedbackPredicate::likes_movie) | bit(FeedbackPredicate::dislikes_movie);
    for (const auto& [target, entry] : it->second)
      if (entry.mask & movie_bits) out.insert(target);
    return out;
  }

  // Active facts of one user, ordered by (target, predicate).
  std::vector<FeedbackFact> facts(std::string_view user) const {
    std::vector<FeedbackFact> out;
    auto it = users_.find(std::string(user));
    if (it == users_.end()) return out;
    for (const auto& [target, entry] : it->second)
      for (auto p : kFeedbackPredicates)
        if (entry.mask & bit(p)) out.push_back({it->first, p, target, entry.timestamp});
    return out;
  }

  // Every active fact, ordered by (user, target, predicate).
  std::vector<FeedbackFact> facts() const {
    std::vector<FeedbackFact> out;
    for (const auto& [user, targets] : users_)
      for (const auto& [target, entry] : targets)
        for (auto p : kFeedbackPredicates)
          if (entry.mask & bit(p)) out.push_back({user, p, target, entry.timestamp});
    return out;
  }

 private:
  struct Entry {
    Polarity polarity = Polarity::like;
    unsigned mask = 0;
    std::int64_t timestamp = 0;
  };

  static unsigned bit(FeedbackPredicate p) { return 1u << static_cast<unsigned>(p); }

  std::map<std::string, std::map<std::string, Entry>> users_;
};

struct Link {
  std::string neighbor;
  std::string relation;
  Direction direction = Direction::outgoing;

  friend bool operator==(const Link&, const Link&) = default;
};

// Entities and adjacency are fixed at construction; only the feedback store
// changes afterwards.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(EntityTable entities, AdjacencyIndex adjacency)
      : entities_(std::move(entities)), adjacency_(std::move(adjacency)) {
    if (adjacency_.node_count() != entities_.size())
      throw InvalidArgument("adjacency index does not match entity table");
  }

  const EntityTable& entities() const noexcept { return entities_; }
  const AdjacencyIndex& adjacency() const noexcept { return adjacency_; }
  FeedbackStore& feedback() noexcept { return feedback_; }
  const FeedbackStore& feedback() const noexcept { return feedback_; }

  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::size_t edge_count() const noexcept { return adjacency_.edge_count(); }

  const Entity& entity(std::string_view id) const { return entities_[entities_.at(id)]; }
  bool contains(std::string_view id) const { return entities_.contains(id); }

  // A user is known if declared in the entity table or has recorded feedback.
  bool has_user(std::string_view id) const {
    if (auto i = entities_.find(id); i && entities_[*i].kind == EntityKind::user) return true;
    return feedback_.has_user(id);
  }

 private:
  EntityTable entities_;
  AdjacencyIndex adjacency_;
  FeedbackStore feedback_;
};

inline KnowledgeGraph load_graph(std::istream& entities_in, std::istream& edges_in,
                                 const std::string& entities_source = "entities",
                                 const std::string& edges_source = "edges") {
  EntityTable table = load_entities(entities_in, entities_source);
  AdjacencyIndex adjacency = load_edges(edges_in, table, edges_source);
  return KnowledgeGraph(std::move(table), std::move(adjacency));
}

// Sorted by neighbor id, then relation; both edge directions included.
inline std::vector<Link> neighbors(const KnowledgeGraph& kg, std::string_view id) {
  const EntityIndex v = kg.entities().at(id);
  std::vector<Link> out;
  for (const Neighbor& n : kg.adjacency().neighbors(v))
    out.push_back({kg.entities()[n.node].id, kg.adjacency().relation_name(n.relation),
                   n.direction});
  return out;
}

// Validates the fact against the entity table and applies it. Returns false
// if it was older than an active fact of the opposite polarity.
inline bool record_feedback(KnowledgeGraph& kg, const FeedbackFact& fact) {
  if (!is_valid_entity_id(fact.user)) throw InvalidArgument("invalid user id");
  auto target = kg.entities().find(fact.target);
  if (!target) throw UnknownEntity(fact.target, std::string(to_string(fact.predicate)));
  const Entity& e = kg.entities()[*target];
  if (is_movie_level(fact.predicate) && !e.is_movie())
    throw KindMismatch(std::string(to_string(fact.predicate)) + " requires a movie, but '" +
                       e.id + "' is a " + e.kind_label());
  return kg.feedback().apply(fact);
}

}  // namespace kgrec
