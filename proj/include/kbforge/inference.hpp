#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kbforge/errors.hpp"
#include "kbforge/knowledge_base.hpp"
#include "kbforge/prolog_codec.hpp"
#include "kbforge/prolog_lexer.hpp"

namespace kbforge {

struct Term {
  enum class Kind { atom, variable, compound };

  Kind kind = Kind::atom;
  std::string name;  // atom text, variable name or functor
  std::vector<Term> args;

  static Term atom(std::string text) { return {Kind::atom, std::move(text), {}}; }
  static Term var(std::string name) { return {Kind::variable, std::move(name), {}}; }
  static Term compound(std::string functor, std::vector<Term> args) {
    return {Kind::compound, std::move(functor), std::move(args)};
  }

  bool is_atom() const { return kind == Kind::atom; }
  bool is_var() const { return kind == Kind::variable; }
  bool is_compound() const { return kind == Kind::compound; }

  std::string to_string() const {
    switch (kind) {
      case Kind::atom: return Atom{name}.render();
      case Kind::variable: return name;
      case Kind::compound: {
        std::string out = Atom{name}.render() + "(";
        for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + args[i].to_string();
        return out + ")";
      }
    }
    return name;
  }

  friend bool operator==(const Term&, const Term&) = default;
};

using Bindings = std::map<std::string, Term>;

/// Follows variable bindings until reaching an unbound variable or a non-variable term.
inline const Term& deref(const Term& t, const Bindings& b) {
  const Term* cur = &t;
  while (cur->is_var()) {
    const auto it = b.find(cur->name);
    if (it == b.end()) break;
    cur = &it->second;
  }
  return *cur;
}

inline bool occurs_in(const std::string& var, const Term& t, const Bindings& b) {
  const Term& d = deref(t, b);
  if (d.is_var()) return d.name == var;
  if (d.is_compound())
    for (const auto& a : d.args)
      if (occurs_in(var, a, b)) return true;
  return false;
}

/// Fully substitutes bound variables.
inline Term resolve(const Term& t, const Bindings& b) {
  const Term& d = deref(t, b);
  if (!d.is_compound()) return d;
  Term out = Term::compound(d.name, {});
  out.args.reserve(d.args.size());
  for (const auto& a : d.args) out.args.push_back(resolve(a, b));
  return out;
}

namespace detail {

inline bool unify_into(const Term& a, const Term& b, Bindings& bindings) {
  const Term& x = deref(a, bindings);
  const Term& y = deref(b, bindings);
  if (x.is_var() && y.is_var() && x.name == y.name) return true;
  if (x.is_var()) {
    if (occurs_in(x.name, y, bindings)) return false;
    bindings.emplace(x.name, y);
    return true;
  }
  if (y.is_var()) {
    if (occurs_in(y.name, x, bindings)) return false;
    bindings.emplace(y.name, x);
    return true;
  }
  if (x.kind != y.kind || x.name != y.name || x.args.size() != y.args.size()) return false;
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    // map nodes are stable, so x and y survive the inserts below
    if (!unify_into(x.args[i], y.args[i], bindings)) return false;
  }
  return true;
}

}  // namespace detail

/// Most general unifier of `a` and `b` extending `bindings` (with occurs check),
/// or nullopt when they do not unify.
inline std::optional<Bindings> unify(const Term& a, const Term& b, Bindings bindings = {}) {
  if (!detail::unify_into(a, b, bindings)) return std::nullopt;
  return bindings;
}

/// A conjunction of goals. A goal that is the atom `!` is a cut.
struct Query {
  std::vector<Term> goals;
  std::vector<std::string> variables;  // named variables in order of appearance

  static bool is_cut(const Term& g) { return g.is_atom() && g.name == "!"; }

  bool has_trailing_cut() const { return !goals.empty() && is_cut(goals.back()); }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < goals.size(); ++i) out += (i ? ", " : "") + goals[i].to_string();
    return out;
  }
};

namespace detail {

class QueryParser {
 public:
  explicit QueryParser(std::string_view text) {
    try {
      tokens_ = PrologLexer(text).tokenize();
    } catch (const ParseError& e) {
      throw QueryError(std::string("malformed query: ") + e.what());
    }
  }

  Query parse() {
    Query q;
    if (peek().kind == TokenKind::eof) throw QueryError("empty query");
    while (true) {
      q.goals.push_back(goal());
      if (peek().kind == TokenKind::comma) {
        take();
        continue;
      }
      break;
    }
    if (peek().kind == TokenKind::end) take();
    if (peek().kind != TokenKind::eof) throw QueryError("unexpected '" + peek().text + "' in query");
    q.variables = std::move(variables_);
    return q;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<std::string> variables_;
  int anonymous_ = 0;

  const Token& peek() const { return tokens_[pos_]; }
  const Token& take() { return tokens_[pos_++]; }

  Term goal() {
    const Token& t = peek();
    if (t.kind == TokenKind::cut) {
      take();
      return Term::atom("!");
    }
    if (t.kind == TokenKind::variable) throw QueryError("a variable cannot be used as a goal");
    Term g = term();
    if (g.is_var()) throw QueryError("a variable cannot be used as a goal");
    return g;
  }

  Term term() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::variable: {
        take();
        if (t.text == "_") return Term::var("_G" + std::to_string(++anonymous_));
        if (t.text[0] != '_' && std::find(variables_.begin(), variables_.end(), t.text) == variables_.end())
          variables_.push_back(t.text);
        return Term::var(t.text);
      }
      case TokenKind::integer:
        take();
        return Term::atom(t.text);
      case TokenKind::atom:
      case TokenKind::quoted_atom: {
        take();
        if (peek().kind != TokenKind::lparen) return Term::atom(t.text);
        take();
        std::vector<Term> args;
        args.push_back(term());
        while (peek().kind == TokenKind::comma) {
          take();
          args.push_back(term());
        }
        if (peek().kind != TokenKind::rparen) throw QueryError("expected ')' in query term " + t.text);
        take();
        return Term::compound(t.text, std::move(args));
      }
      default:
        throw QueryError(t.kind == TokenKind::eof ? std::string("unexpected end of query")
                                                  : "unexpected '" + t.text + "' in query");
    }
  }
};

}  // namespace detail

/// Parses `goal1, goal2, !.` style text. The trailing period is optional.
inline Query parse_query(std::string_view text) { return detail::QueryParser(text).parse(); }

/// Backward chaining over a ground fact base. Goals are resolved depth-first,
/// left to right, against facts in knowledge-base order. Unknown predicates
/// simply fail.
class InferenceEngine {
 public:
  explicit InferenceEngine(const KnowledgeBase& kb) : kb_(&kb) {
    for (std::size_t i = 0; i < kb.facts.size(); ++i) {
      const auto& f = kb.facts[i];
      index_[{f.predicate, f.arity()}].push_back(i);
    }
  }

  /// Calls `on_solution` with the projected bindings of every solution;
  /// returning false from it stops the search.
  void solve_each(const Query& query, const std::function<bool(const Bindings&)>& on_solution) const {
    if (query.goals.empty()) throw QueryError("query has no goals");
    for (const auto& g : query.goals)
      if (g.is_var()) throw QueryError("a variable cannot be used as a goal");
    Bindings b;
    search(query, 0, b, on_solution);
  }

  std::vector<Bindings> solve(const Query& query, std::optional<std::size_t> limit = std::nullopt) const {
    std::vector<Bindings> out;
    if (limit && *limit == 0) return out;
    solve_each(query, [&](const Bindings& b) {
      out.push_back(b);
      return !(limit && out.size() >= *limit);
    });
    return out;
  }

 private:
  enum class Flow { more, unwind };

  const KnowledgeBase* kb_;
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> index_;

  static Bindings project(const Query& q, const Bindings& b) {
    Bindings out;
    for (const auto& v : q.variables) out.emplace(v, resolve(Term::var(v), b));
    return out;
  }

  Flow search(const Query& q, std::size_t i, Bindings& b, const std::function<bool(const Bindings&)>& emit) const {
    if (i == q.goals.size()) return emit(project(q, b)) ? Flow::more : Flow::unwind;

    const Term& goal = deref(q.goals[i], b);
    if (Query::is_cut(goal)) {
      search(q, i + 1, b, emit);
      return Flow::unwind;  // commit: no alternatives for earlier goals
    }

    const int arity = goal.is_compound() ? static_cast<int>(goal.args.size()) : 0;
    const auto it = index_.find({goal.name, arity});
    if (it == index_.end()) return Flow::more;

    for (const auto idx : it->second) {
      const Fact& fact = kb_->facts[idx];
      Bindings next = b;
      bool ok = true;
      for (std::size_t a = 0; a < fact.args.size() && ok; ++a)
        ok = detail::unify_into(goal.args[a], Term::atom(fact.args[a].text), next);
      if (!ok) continue;
      if (search(q, i + 1, next, emit) == Flow::unwind) return Flow::unwind;
    }
    return Flow::more;
  }
};

inline std::vector<Bindings> solve(const Query& query, const KnowledgeBase& kb,
                                   std::optional<std::size_t> limit = std::nullopt) {
  return InferenceEngine(kb).solve(query, limit);
}

/// Loads a .pl file and checks knowledge-base invariants. Errors carry the path.
inline KnowledgeBase consult(const std::string& path) {
  const std::string text = read_text_file(path);
  KnowledgeBase kb;
  try {
    kb = parse_kb(text);
  } catch (const ParseError& e) {
    ParseError wrapped(path + ": " + e.what(), 0, 0);
    wrapped.line = e.line;
    wrapped.column = e.column;
    throw wrapped;
  } catch (const UnsupportedTermError& e) {
    throw UnsupportedTermError(path + ": " + e.what(), e.line);
  }
  try {
    validate_kb(kb);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return kb;
}

/// `X = plato, Y = academy` for one solution, in query variable order. `true`
/// when the query has no named variables.
inline std::string format_solution(const Query& q, const Bindings& b) {
  if (q.variables.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < q.variables.size(); ++i) {
    const auto& v = q.variables[i];
    const auto it = b.find(v);
    out += (i ? ", " : "") + v + " = " + (it == b.end() ? v : it->second.to_string());
  }
  return out;
}

}  // namespace kbforge
