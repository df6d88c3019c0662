#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "kbforge/errors.hpp"
#include "kbforge/knowledge_base.hpp"
#include "kbforge/prolog_lexer.hpp"
#include "kbforge/version.hpp"

namespace kbforge {

inline constexpr std::string_view kExplanationPrefix = " Explanation: ";

/// Header lines for a generated document. `timestamp` is written verbatim so
/// callers can pin it for reproducible output.
struct EmitOptions {
  std::string timestamp;
  std::string tool_version = std::string(kVersion);
};

/// Renders a knowledge base as a .pl document: header comments, one
/// discontiguous directive per predicate, concept/1 facts, then relation facts
/// grouped by predicate with their explanation comments.
inline std::string emit_kb(const KnowledgeBase& kb, const EmitOptions& options = {}) {
  std::ostringstream out;
  out << "% Knowledge base generated by kbforge " << options.tool_version << "\n";
  if (kb.root) out << "% Root: " << kb.root->render() << "\n";
  for (const auto& [key, value] : kb.header) {
    if (key == "Root" || key == "Generated" || key == "Tool") continue;
    out << "% " << key << ": " << sanitize_explanation(value) << "\n";
  }
  if (!options.timestamp.empty()) out << "% Generated: " << options.timestamp << "\n";

  const auto sigs = kb.signatures();
  std::vector<std::pair<std::string, int>> ordered;
  for (const auto& s : sigs)
    if (s.first == kConceptPredicate && s.second == 1) ordered.push_back(s);
  for (const auto& s : sigs)
    if (!(s.first == kConceptPredicate && s.second == 1)) ordered.push_back(s);

  if (!ordered.empty()) {
    out << "\n";
    for (const auto& [name, arity] : ordered) out << ":- discontiguous " << name << "/" << arity << ".\n";
  }
  for (const auto& d : kb.extra_directives) out << ":- " << d << ".\n";

  for (const auto& [name, arity] : ordered) {
    out << "\n";
    for (const auto& f : kb.facts) {
      if (f.predicate != name || f.arity() != arity) continue;
      if (f.explanation && !f.explanation->empty())
        out << "%" << kExplanationPrefix << sanitize_explanation(*f.explanation) << "\n";
      out << f.predicate << "(";
      for (std::size_t i = 0; i < f.args.size(); ++i) out << (i ? ", " : "") << f.args[i].render();
      out << ").\n";
    }
  }
  return out.str();
}

namespace detail {

class KbParser {
 public:
  explicit KbParser(std::string_view text) : tokens_(PrologLexer(text).tokenize()) {}

  KnowledgeBase parse() {
    KnowledgeBase kb;
    bool in_header = true;
    std::optional<std::string> pending_explanation;
    while (peek().kind != TokenKind::eof) {
      const Token& t = peek();
      if (t.kind == TokenKind::comment) {
        ++pos_;
        if (const auto body = trim(t.text); body.rfind("Explanation:", 0) == 0) {
          pending_explanation = sanitize_explanation(body.substr(12));
          in_header = false;
        } else if (in_header) {
          header_line(kb, t);
        }
        continue;
      }
      in_header = false;
      if (t.kind == TokenKind::neck) {
        directive(kb);
        pending_explanation.reset();
        continue;
      }
      Fact f = fact();
      if (pending_explanation && !pending_explanation->empty()) f.explanation = std::move(pending_explanation);
      pending_explanation.reset();
      kb.seen_hashes.insert(fact_hash(f));
      kb.facts.push_back(std::move(f));
    }
    return kb;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  const Token& peek() const { return tokens_[pos_]; }

  const Token& take() { return tokens_[pos_++]; }

  [[noreturn]] static void fail(const std::string& message, const Token& t) { throw ParseError(message, t.line, t.column); }

  const Token& expect(TokenKind kind, const char* what) {
    if (peek().kind != kind) {
      const Token& t = peek();
      fail(std::string("expected ") + what + (t.kind == TokenKind::eof ? " before end of input" : ", found '" + t.text + "'"),
           t);
    }
    return take();
  }

  static void header_line(KnowledgeBase& kb, const Token& t) {
    auto body = trim(t.text);
    const auto colon = body.find(": ");
    if (colon == std::string_view::npos) return;
    std::string key(trim(body.substr(0, colon)));
    std::string value(trim(body.substr(colon + 2)));
    if (key.empty() || key.find(' ') != std::string::npos) return;
    if (key == "Root") {
      try {
        const auto toks = PrologLexer(value).tokenize();
        if (toks.size() == 2 && (toks[0].kind == TokenKind::atom || toks[0].kind == TokenKind::quoted_atom))
          kb.root = Atom{toks[0].text};
      } catch (const ParseError&) {
        // malformed root annotation is just a comment
      }
      return;
    }
    kb.header.emplace_back(std::move(key), std::move(value));
  }

  void directive(KnowledgeBase& kb) {
    const Token& neck = take();
    if (peek().kind == TokenKind::atom && peek().text == "discontiguous") {
      take();
      while (true) {
        const Token& name = peek();
        if (name.kind != TokenKind::atom && name.kind != TokenKind::quoted_atom)
          fail("expected predicate name in discontiguous directive", name);
        take();
        expect(TokenKind::slash, "'/'");
        expect(TokenKind::integer, "arity");
        if (peek().kind != TokenKind::comma) break;
        take();
      }
      expect(TokenKind::end, "'.' after directive");
      return;
    }
    // Unknown directive: keep its tokens verbatim up to the terminating period.
    std::string raw;
    int depth = 0;
    while (!(peek().kind == TokenKind::end && depth == 0)) {
      const Token& t = peek();
      if (t.kind == TokenKind::eof) fail("unterminated directive", neck);
      if (t.kind == TokenKind::comment) {
        take();
        continue;
      }
      if (t.kind == TokenKind::lparen) ++depth;
      if (t.kind == TokenKind::rparen) --depth;
      if (t.kind == TokenKind::quoted_atom) {
        raw += Atom{t.text}.render();
      } else {
        if (t.kind == TokenKind::atom && !raw.empty() && raw.back() != '(' && raw.back() != ' ') raw += ' ';
        raw += t.text;
        if (t.kind == TokenKind::comma) raw += ' ';
      }
      take();
    }
    take();
    kb.extra_directives.push_back(raw);
  }

  Atom argument() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::atom:
        take();
        if (peek().kind == TokenKind::lparen)
          throw UnsupportedTermError("compound term '" + t.text + "(...)' is not allowed as a fact argument", t.line);
        return Atom{t.text};
      case TokenKind::quoted_atom:
      case TokenKind::integer:
        take();
        return Atom{t.text};
      case TokenKind::variable:
        throw UnsupportedTermError("variable '" + t.text + "' in a fact (facts must be ground)", t.line);
      default: fail("expected an atom argument, found '" + t.text + "'", t);
    }
  }

  Fact fact() {
    const Token& head = peek();
    if (head.kind == TokenKind::variable)
      throw UnsupportedTermError("variable '" + head.text + "' as a clause head", head.line);
    if (head.kind != TokenKind::atom && head.kind != TokenKind::quoted_atom)
      fail("expected a fact, found '" + head.text + "'", head);
    take();
    Fact f;
    f.predicate = head.text;
    f.line = head.line;
    if (peek().kind == TokenKind::lparen) {
      take();
      f.args.push_back(argument());
      while (peek().kind == TokenKind::comma) {
        take();
        f.args.push_back(argument());
      }
      expect(TokenKind::rparen, "')'");
    }
    if (peek().kind == TokenKind::neck) throw UnsupportedTermError("rules (clauses with bodies) are not supported", head.line);
    expect(TokenKind::end, "'.' at end of fact");
    if (f.args.empty()) throw UnsupportedTermError("fact '" + f.predicate + "' has arity 0; arity must be 1 or 2", head.line);
    if (f.args.size() > 2)
      throw UnsupportedTermError("fact '" + f.predicate + "' has arity " + std::to_string(f.args.size()) +
                                     "; arity must be 1 or 2",
                                 head.line);
    f.origin = f.predicate == kConceptPredicate && f.args.size() == 1 ? FactOrigin::concept_decl : FactOrigin::relation;
    return f;
  }
};

}  // namespace detail

/// Parses a .pl document. Explanation comments attach to the next fact;
/// `% Key: value` lines in the leading comment block become header entries.
/// Facts are kept exactly as written (duplicates included).
inline KnowledgeBase parse_kb(std::string_view text) { return detail::KbParser(text).parse(); }

/// Checks the invariants a generated knowledge base satisfies: no duplicate
/// facts and a concept/1 declaration for every relation argument.
inline void validate_kb(const KnowledgeBase& kb) {
  std::unordered_set<FactDigest, FactDigestHash> seen;
  for (const auto& f : kb.facts)
    if (!seen.insert(fact_hash(f)).second) throw ValidationError("duplicate fact " + f.canonical());
  const auto missing = undeclared_atoms(kb);
  if (!missing.empty()) throw ValidationError("atom " + missing.front().render() + " has no concept/1 declaration");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

inline bool is_temporal_predicate(std::string_view name) {
  return name == "published_in" || name == "born_in" || name == "died_in" || name == "created_in" ||
         name == "occurred_in";
}

inline bool is_plausible_year(std::string_view text) {
  return !text.empty() && text.size() <= 4 && std::all_of(text.begin(), text.end(), detail::is_digit);
}

/// Flags quoted atoms in temporal predicates that are not plausible years.
inline std::vector<std::string> lint_kb(const KnowledgeBase& kb) {
  std::vector<std::string> warnings;
  for (const auto& f : kb.facts) {
    if (!is_temporal_predicate(f.predicate)) continue;
    for (const auto& a : f.args)
      if (!a.is_plain() && !is_plausible_year(a.text))
        warnings.push_back("suspicious temporal value " + a.render() + " in " + f.canonical());
  }
  return warnings;
}

}  // namespace kbforge
