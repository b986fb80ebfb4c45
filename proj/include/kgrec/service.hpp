#pragma once

// HTTP facade over the recommender. Route handlers are plain member functions
// returning an ApiResponse so they can be exercised without a socket;
// mount() wires them into a cpp-httplib server under /v1.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "kgrec/error.hpp"
#include "kgrec/feedback_log.hpp"
#include "kgrec/kg_store.hpp"
#include "kgrec/recommender.hpp"
#include "kgrec/rules.hpp"

namespace kgrec {

using Json = nlohmann::ordered_json;

struct ApiResponse {
  int status = 200;
  std::string body;

  Json json() const { return Json::parse(body); }
};

inline Json reason_json(const Reason& r, const KnowledgeGraph& kg) {
  Json j;
  j["entity"] = r.entity;
  j["name"] = kg.contains(r.entity) ? kg.entity(r.entity).name : r.entity;
  j["contribution"] = r.contribution;
  j["polarity"] = std::string(to_string(r.polarity));
  return j;
}

inline Json reasons_json(const std::vector<Reason>& reasons, const KnowledgeGraph& kg) {
  Json arr = Json::array();
  for (const Reason& r : reasons) arr.push_back(reason_json(r, kg));
  return arr;
}

// The ApiRecommendation wire form.
inline Json recommendation_json(const Recommendation& rec, const KnowledgeGraph& kg) {
  Json j;
  j["movie"] = rec.movie;
  j["name"] = kg.entity(rec.movie).name;
  j["net_score"] = rec.net_score;
  j["reasons"] = reasons_json(rec.reasons, kg);
  return j;
}

inline Json recommendations_json(const std::vector<Recommendation>& recs,
                                 const KnowledgeGraph& kg) {
  Json arr = Json::array();
  for (const auto& r : recs) arr.push_back(recommendation_json(r, kg));
  return arr;
}

struct ServiceOptions {
  EngineParams params;
  std::size_t default_k = 10;
  std::size_t max_k = 100;
  std::size_t max_search_results = 20;
  std::string feedback_log;  // empty: feedback is kept in memory only
};

class SessionService {
 public:
  using Clock = std::function<std::int64_t()>;

  SessionService(KnowledgeGraph kg, RuleSet rules, ServiceOptions options = {},
                 Clock clock = system_seconds)
      : kg_(std::move(kg)),
        rules_(std::move(rules)),
        options_(std::move(options)),
        clock_(std::move(clock)) {
    if (!options_.feedback_log.empty()) {
      std::ifstream in(options_.feedback_log);
      if (in) replay_feedback(in, kg_, options_.feedback_log);
      for (const auto& f : kg_.feedback().facts()) last_ts_ = std::max(last_ts_, f.timestamp);
      log_ = FeedbackLog(options_.feedback_log);
    }
  }

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  static std::int64_t system_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  // POST /v1/users/{uid}/feedback
  ApiResponse post_feedback(const std::string& uid, std::string_view body) {
    if (!is_valid_entity_id(uid)) return error(400, "invalid user id");
    Json j = Json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return error(400, "body must be a JSON object");
    auto pred = j.find("predicate");
    auto target = j.find("target");
    if (pred == j.end() || !pred->is_string() || target == j.end() || !target->is_string())
      return error(400, "body requires string fields 'predicate' and 'target'");
    auto p = parse_feedback_predicate(pred->get<std::string>());
    if (!p) return error(400, "unknown predicate '" + pred->get<std::string>() + "'");

    std::unique_lock lock(mutex_);
    // Timestamps never go backwards, so arrival order decides replacement.
    last_ts_ = std::max(last_ts_, clock_());
    FeedbackFact fact{uid, *p, target->get<std::string>(), last_ts_};
    auto t = kg_.entities().find(fact.target);
    if (!t) return error(404, "unknown entity '" + fact.target + "'");
    if (is_movie_level(fact.predicate) && !kg_.entities()[*t].is_movie())
      return error(422, std::string(to_string(fact.predicate)) + " requires a movie, but '" +
                            fact.target + "' is a " + kg_.entities()[*t].kind_label());
    try {
      log_.append(fact);
      record_feedback(kg_, fact);
    } catch (const Error& e) {
      return error(500, e.what());
    }
    return {204, ""};
  }

  // GET /v1/users/{uid}/recommendations?k=N
  ApiResponse get_recommendations(const std::string& uid,
                                  const std::optional<std::string>& k_param = std::nullopt) const {
    std::size_t k = options_.default_k;
    if (k_param) {
      auto parsed = parse_k(*k_param);
      if (!parsed) return error(400, "k must be an integer in [1, " + std::to_string(options_.max_k) + "]");
      k = *parsed;
    }
    std::shared_lock lock(mutex_);
    if (!kg_.has_user(uid)) return ok(Json::array());
    try {
      return ok(recommendations_json(recommend(uid, k, kg_, rules_, options_.params), kg_));
    } catch (const Error& e) {
      return error(500, e.what());
    }
  }

  // GET /v1/users/{uid}/explanations/{movie}
  ApiResponse get_explanation(const std::string& uid, const std::string& movie) const {
    std::shared_lock lock(mutex_);
    auto m = kg_.entities().find(movie);
    if (!m) return error(404, "unknown movie '" + movie + "'");
    if (!kg_.entities()[*m].is_movie()) return error(422, "'" + movie + "' is not a movie");
    if (!kg_.has_user(uid)) return ok(Json::array());
    try {
      return ok(reasons_json(explain(uid, movie, kg_, rules_, options_.params), kg_));
    } catch (const Error& e) {
      return error(500, e.what());
    }
  }

  // GET /v1/entities?q=prefix&kind=kind
  ApiResponse search_entities(const std::optional<std::string>& q,
                              const std::optional<std::string>& kind = std::nullopt) const {
    if (!q || q->empty()) return error(400, "query parameter 'q' is required");
    std::optional<EntityKind> want;
    if (kind && !kind->empty()) {
      want = parse_entity_kind(*kind);
      if (!want) return error(400, "unknown kind '" + *kind + "'");
    }
    Json arr = Json::array();
    for (const Entity* e : search(*q, want)) {
      Json j;
      j["id"] = e->id;
      j["name"] = e->name;
      j["kind"] = e->kind_label();
      arr.push_back(std::move(j));
    }
    return ok(arr);
  }

  // Case-insensitive name-prefix matches, sorted by name then id.
  std::vector<const Entity*> search(std::string_view prefix, std::optional<EntityKind> kind) const {
    std::vector<const Entity*> hits;
    for (const Entity& e : kg_.entities().entities()) {
      if (kind && e.kind != *kind) continue;
      if (starts_with_icase(e.name, prefix)) hits.push_back(&e);
    }
    std::sort(hits.begin(), hits.end(), [](const Entity* a, const Entity* b) {
      return std::tie(a->name, a->id) < std::tie(b->name, b->id);
    });
    if (hits.size() > options_.max_search_results) hits.resize(options_.max_search_results);
    return hits;
  }

  ApiResponse health() const {
    std::shared_lock lock(mutex_);
    std::set<std::string> users;
    for (const Entity& e : kg_.entities().entities())
      if (e.kind == EntityKind::user) users.insert(e.id);
    for (auto& u : kg_.feedback().users()) users.insert(std::move(u));
    Json j;
    j["entities"] = kg_.entity_count();
    j["edges"] = kg_.edge_count();
    j["users"] = users.size();
    return ok(j);
  }

  void flush() {
    std::unique_lock lock(mutex_);
    log_.flush();
  }

  const KnowledgeGraph& graph() const noexcept { return kg_; }
  const RuleSet& rules() const noexcept { return rules_; }
  const ServiceOptions& options() const noexcept { return options_; }

  void mount(httplib::Server& server) {
    auto send = [](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      if (r.status != 204) res.set_content(r.body, "application/json");
    };
    auto param = [](const httplib::Request& req,
                    const char* name) -> std::optional<std::string> {
      if (!req.has_param(name)) return std::nullopt;
      return req.get_param_value(name);
    };
    server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, health());
    });
    server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, health());
    });
    server.Post("/v1/users/([^/]+)/feedback",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, post_feedback(req.matches[1], req.body));
                });
    server.Get("/v1/users/([^/]+)/recommendations",
               [this, send, param](const httplib::Request& req, httplib::Response& res) {
                 send(res, get_recommendations(req.matches[1], param(req, "k")));
               });
    server.Get("/v1/users/([^/]+)/explanations/([^/]+)",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, get_explanation(req.matches[1], req.matches[2]));
               });
    server.Get("/v1/entities",
               [this, send, param](const httplib::Request& req, httplib::Response& res) {
                 send(res, search_entities(param(req, "q"), param(req, "kind")));
               });
  }

 private:
  static ApiResponse ok(const Json& j) { return {200, j.dump()}; }

  static ApiResponse error(int status, const std::string& message) {
    Json j;
    j["error"] = message;
    return {status, j.dump()};
  }

  std::optional<std::size_t> parse_k(std::string_view text) const {
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    if (k < 1 || k > options_.max_k) return std::nullopt;
    return k;
  }

  static bool starts_with_icase(std::string_view s, std::string_view prefix) {
    if (prefix.size() > s.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(s[i])) !=
          std::tolower(static_cast<unsigned char>(prefix[i])))
        return false;
    return true;
  }

  KnowledgeGraph kg_;
  RuleSet rules_;
  ServiceOptions options_;
  Clock clock_;
  FeedbackLog log_;
  std::int64_t last_ts_ = 0;
  mutable std::shared_mutex mutex_;
};

}  // namespace kgrec
