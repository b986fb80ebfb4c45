#pragma once

// Horn-clause rule programs over the knowledge graph.
//
//   % comment
//   sim(X,X) :- true.
//   sim(X,E) :- link(X,Z), sim(Z,E).
//
// `←` and `<-` are accepted for `:-`; a bare `head.` is a fact rule.
// Variables start with an uppercase letter or '_'; constants are
// identifiers starting with a lowercase letter or digit, or single-quoted
// strings for ids containing other characters.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgrec/error.hpp"

namespace kgrec {

struct Term {
  enum class Kind { variable, constant };

  Kind kind = Kind::constant;
  std::string name;

  static Term variable(std::string name) { return {Kind::variable, std::move(name)}; }
  static Term constant(std::string name) { return {Kind::constant, std::move(name)}; }

  bool is_variable() const noexcept { return kind == Kind::variable; }
  bool is_constant() const noexcept { return kind == Kind::constant; }

  friend auto operator<=>(const Term&, const Term&) = default;
};

struct Literal {
  std::string predicate;
  std::vector<Term> args;

  std::size_t arity() const noexcept { return args.size(); }

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

struct Rule {
  Literal head;
  std::vector<Literal> body;  // empty: `head :- true.`
  std::size_t line = 0;       // source line, 0 if built programmatically

  bool is_fact() const noexcept { return body.empty(); }

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.head == b.head && a.body == b.body;
  }
};

// Predicates resolved directly against the knowledge graph.
struct BuiltinSignature {
  std::string_view name;
  std::size_t arity;
};

inline constexpr BuiltinSignature kBuiltins[] = {
    {"link", 2},          {"isMovie", 1},       {"likesEntity", 2},
    {"likesMovie", 2},    {"dislikesEntity", 2}, {"dislikesMovie", 2},
};

inline std::optional<std::size_t> builtin_arity(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (b.name == name) return b.arity;
  return std::nullopt;
}

inline bool is_builtin(std::string_view name) { return builtin_arity(name).has_value(); }

class RuleSet {
 public:
  RuleSet() = default;

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }

  // Arity of a rule-defined predicate or builtin.
  std::optional<std::size_t> arity(std::string_view predicate) const {
    if (auto a = builtin_arity(predicate)) return a;
    auto it = arities_.find(std::string(predicate));
    if (it == arities_.end()) return std::nullopt;
    return it->second;
  }

  bool defines(std::string_view predicate) const {
    return std::any_of(rules_.begin(), rules_.end(),
                       [&](const Rule& r) { return r.head.predicate == predicate; });
  }

  // Validates and appends; throws ArityError / Error on violations.
  void add(Rule rule) {
    const std::string where = rule.line ? " (line " + std::to_string(rule.line) + ")" : "";
    if (is_builtin(rule.head.predicate))
      throw Error("rule head uses builtin predicate '" + rule.head.predicate + "'" + where);
    if (rule.head.predicate == "true") throw Error("rule head cannot be 'true'" + where);
    check_arity(rule.head, where);
    for (const Literal& l : rule.body) check_arity(l, where);
    if (!rule.body.empty()) {
      std::set<std::string> body_vars;
      for (const Literal& l : rule.body)
        for (const Term& t : l.args)
          if (t.is_variable()) body_vars.insert(t.name);
      for (const Term& t : rule.head.args)
        if (t.is_variable() && !body_vars.contains(t.name))
          throw Error("head variable " + t.name + " of '" + rule.head.predicate +
                      "' does not occur in the body" + where);
    }
    rules_.push_back(std::move(rule));
  }

  friend bool operator==(const RuleSet& a, const RuleSet& b) { return a.rules_ == b.rules_; }

 private:
  void check_arity(const Literal& l, const std::string& where) {
    if (l.predicate == "true") throw Error("'true' may only appear as a whole body" + where);
    if (auto b = builtin_arity(l.predicate)) {
      if (*b != l.arity())
        throw ArityError("builtin '" + l.predicate + "' takes " + std::to_string(*b) +
                         " arguments, got " + std::to_string(l.arity()) + where);
      return;
    }
    auto [it, inserted] = arities_.emplace(l.predicate, l.arity());
    if (!inserted && it->second != l.arity())
      throw ArityError("predicate '" + l.predicate + "' used with arity " +
                       std::to_string(l.arity()) + " but earlier with arity " +
                       std::to_string(it->second) + where);
  }

  std::vector<Rule> rules_;
  std::map<std::string, std::size_t> arities_;
};

namespace detail {

inline bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class RuleLexer {
 public:
  enum class Tok { ident, variable, quoted, lparen, rparen, comma, dot, arrow, end };

  struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t line = 1, column = 1;
  };

  RuleLexer(std::string_view text, std::string source)
      : text_(text), source_(std::move(source)) {}

  Token next() {
    skip_blank();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= text_.size()) return t;
    const char c = text_[pos_];
    if (c == '(') return single(t, Tok::lparen);
    if (c == ')') return single(t, Tok::rparen);
    if (c == ',') return single(t, Tok::comma);
    if (c == '.') return single(t, Tok::dot);
    if (text_.substr(pos_, 2) == ":-" || text_.substr(pos_, 2) == "<-") {
      advance(2);
      t.kind = Tok::arrow;
      return t;
    }
    if (text_.substr(pos_, 3) == "\xE2\x86\x90") {  // U+2190 LEFTWARDS ARROW
      pos_ += 3;
      ++column_;
      t.kind = Tok::arrow;
      return t;
    }
    if (c == '\'') return quoted(t);
    if (is_ident_char(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance(1);
      t.text = std::string(text_.substr(start, pos_ - start));
      t.kind = (std::isupper(static_cast<unsigned char>(c)) || c == '_') ? Tok::variable
                                                                         : Tok::ident;
      return t;
    }
    fail(t.line, t.column, std::string("unexpected character '") + c + "'");
  }

  [[noreturn]] void fail(std::size_t line, std::size_t column, const std::string& what) const {
    throw ParseError(source_, line, column, what);
  }

 private:
  Token single(Token& t, Tok kind) {
    advance(1);
    t.kind = kind;
    return t;
  }

  Token quoted(Token& t) {
    advance(1);
    std::string value;
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n')
        fail(t.line, t.column, "unterminated quoted constant");
      char c = text_[pos_];
      if (c == '\'') {
        advance(1);
        break;
      }
      if (c == '\\') {
        advance(1);
        if (pos_ >= text_.size()) fail(t.line, t.column, "unterminated quoted constant");
        c = text_[pos_];
        if (c != '\\' && c != '\'') fail(line_, column_, "unknown escape in quoted constant");
      }
      if (c == '\t') fail(line_, column_, "tab inside quoted constant");
      value.push_back(c);
      advance(1);
    }
    if (value.empty()) fail(t.line, t.column, "empty quoted constant");
    t.kind = Tok::quoted;
    t.text = std::move(value);
    return t;
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
      } else if (c == '\n') {
        ++pos_;
        ++line_;
        column_ = 1;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else {
        break;
      }
    }
  }

  void advance(std::size_t n) {
    pos_ += n;
    column_ += n;
  }

  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0, line_ = 1, column_ = 1;
};

class RuleParser {
 public:
  using Tok = RuleLexer::Tok;

  RuleParser(std::string_view text, std::string source) : lex_(text, std::move(source)) {
    tok_ = lex_.next();
  }

  RuleSet program() {
    RuleSet rs;
    while (tok_.kind != Tok::end) {
      const std::size_t line = tok_.line, column = tok_.column;
      Rule r;
      r.line = line;
      r.head = literal();
      if (tok_.kind == Tok::arrow) {
        shift();
        if (tok_.kind == Tok::ident && tok_.text == "true") {
          shift();
        } else {
          r.body.push_back(literal());
          while (tok_.kind == Tok::comma) {
            shift();
            r.body.push_back(literal());
          }
        }
      }
      expect(Tok::dot, "'.' at end of clause");
      try {
        rs.add(std::move(r));
      } catch (const ArityError&) {
        throw;
      } catch (const Error& e) {
        lex_.fail(line, column, e.what());
      }
    }
    return rs;
  }

  Literal single_literal() {
    Literal l = literal();
    if (tok_.kind == Tok::dot) shift();
    if (tok_.kind != Tok::end) lex_.fail(tok_.line, tok_.column, "trailing input after literal");
    return l;
  }

 private:
  Literal literal() {
    if (tok_.kind != Tok::ident || !std::islower(static_cast<unsigned char>(tok_.text[0])))
      lex_.fail(tok_.line, tok_.column, "expected predicate name");
    Literal l;
    l.predicate = tok_.text;
    shift();
    if (tok_.kind != Tok::lparen) return l;
    shift();
    if (tok_.kind == Tok::rparen) {
      shift();
      return l;
    }
    l.args.push_back(term());
    while (tok_.kind == Tok::comma) {
      shift();
      l.args.push_back(term());
    }
    expect(Tok::rparen, "')' or ','");
    return l;
  }

  Term term() {
    Term t;
    switch (tok_.kind) {
      case Tok::variable: t = Term::variable(tok_.text); break;
      case Tok::ident:
      case Tok::quoted: t = Term::constant(tok_.text); break;
      default: lex_.fail(tok_.line, tok_.column, "expected a variable or constant");
    }
    shift();
    return t;
  }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind) lex_.fail(tok_.line, tok_.column, std::string("expected ") + what);
    shift();
  }

  void shift() { tok_ = lex_.next(); }

  RuleLexer lex_;
  RuleLexer::Token tok_;
};

inline bool is_bare_constant(std::string_view s) {
  if (s.empty() || s == "true") return false;
  const auto c = static_cast<unsigned char>(s[0]);
  if (!(std::islower(c) || std::isdigit(c))) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

}  // namespace detail

inline RuleSet parse_rules(std::string_view text, const std::string& source = "rules") {
  return detail::RuleParser(text, source).program();
}

// Parses a single literal such as `willLike(alice,E,M)`.
inline Literal parse_literal(std::string_view text, const std::string& source = "query") {
  return detail::RuleParser(text, source).single_literal();
}

inline std::string to_string(const Term& t) {
  if (t.is_variable() || detail::is_bare_constant(t.name)) return t.name;
  std::string out = "'";
  for (char c : t.name) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

inline std::string to_string(const Literal& l) {
  std::string out = l.predicate;
  if (l.args.empty()) return out;
  out.push_back('(');
  for (std::size_t i = 0; i < l.args.size(); ++i) {
    if (i) out.push_back(',');
    out += to_string(l.args[i]);
  }
  out.push_back(')');
  return out;
}

inline std::string to_string(const Rule& r) {
  std::string out = to_string(r.head) + " :- ";
  if (r.body.empty()) return out + "true.";
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (i) out += ", ";
    out += to_string(r.body[i]);
  }
  return out + ".";
}

inline std::string to_string(const RuleSet& rs) {
  std::string out;
  for (const Rule& r : rs.rules()) out += to_string(r) + "\n";
  return out;
}

// The similarity, like and dislike rules used for recommendation.
inline constexpr std::string_view kMovieRules = R"(% similarity in the graph
sim(X,X) :- true.
sim(X,E) :- link(X,Z), sim(Z,E).

% predicting likes
willLike(U,E,M) :- likes(U,E), sim(E,M), isMovie(M).
likes(U,E) :- likesEntity(U,E).
likes(U,E) :- likesMovie(U,M), link(M,E).

% predicting dislikes
willDislike(U,E,M) :- dislikes(U,E), sim(E,M), isMovie(M).
dislikes(U,E) :- dislikesEntity(U,E).
dislikes(U,E) :- dislikesMovie(U,M), link(M,E).
)";

inline const RuleSet& movie_rules() {
  static const RuleSet rules = parse_rules(kMovieRules, "movie_rules");
  return rules;
}

}  // namespace kgrec
