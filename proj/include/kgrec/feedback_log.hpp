#pragma once

// Append-only JSONL log of feedback facts:
//   {"user":"alice","predicate":"likesEntity","target":"tom_hanks","ts":1700000000}

#include <cstdint>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "kgrec/error.hpp"
#include "kgrec/kg_store.hpp"

namespace kgrec {

inline std::string to_json_line(const FeedbackFact& fact) {
  nlohmann::ordered_json j;
  j["user"] = fact.user;
  j["predicate"] = std::string(to_string(fact.predicate));
  j["target"] = fact.target;
  j["ts"] = fact.timestamp;
  return j.dump();
}

inline FeedbackFact parse_feedback_line(std::string_view line, std::size_t line_no = 1,
                                        const std::string& source = "feedback") {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError(source, line_no, 0, "not a JSON object");
  auto str_field = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw ParseError(source, line_no, 0, std::string("missing string field '") + key + "'");
    return it->get<std::string>();
  };
  FeedbackFact fact;
  fact.user = str_field("user");
  const std::string predicate = str_field("predicate");
  auto p = parse_feedback_predicate(predicate);
  if (!p) throw ParseError(source, line_no, 0, "unknown predicate '" + predicate + "'");
  fact.predicate = *p;
  fact.target = str_field("target");
  auto ts = j.find("ts");
  if (ts == j.end() || !ts->is_number_integer())
    throw ParseError(source, line_no, 0, "missing integer field 'ts'");
  fact.timestamp = ts->get<std::int64_t>();
  if (!is_valid_entity_id(fact.user)) throw ParseError(source, line_no, 0, "invalid user id");
  return fact;
}

// Replays a log into the graph's feedback store, applying the replacement
// rule in log order. Returns the number of lines read.
inline std::size_t replay_feedback(std::istream& in, KnowledgeGraph& kg,
                                   const std::string& source = "feedback") {
  std::string line;
  std::size_t line_no = 0, applied = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    FeedbackFact fact = parse_feedback_line(line, line_no, source);
    try {
      record_feedback(kg, fact);
    } catch (const Error& e) {
      throw ParseError(source, line_no, 0, e.what());
    }
    ++applied;
  }
  return applied;
}

class FeedbackLog {
 public:
  FeedbackLog() = default;
  explicit FeedbackLog(const std::string& path)
      : path_(path), out_(path, std::ios::out | std::ios::app | std::ios::binary) {
    if (!out_) throw Error("cannot open feedback log '" + path + "' for appending");
  }

  bool is_open() const { return out_.is_open(); }
  const std::string& path() const noexcept { return path_; }

  // Writes and flushes one line; throws if the write did not reach the file.
  void append(const FeedbackFact& fact) {
    if (!out_.is_open()) return;
    out_ << to_json_line(fact) << '\n';
    out_.flush();
    if (!out_) throw Error("failed to append to feedback log '" + path_ + "'");
  }

  void flush() {
    if (out_.is_open()) out_.flush();
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace kgrec
