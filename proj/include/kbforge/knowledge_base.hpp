#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "kbforge/atom.hpp"
#include "kbforge/ontology.hpp"

namespace kbforge {

enum class FactOrigin { concept_decl, relation, backfill };

/// A ground assertion `predicate(arg1[, arg2])`.
struct Fact {
  std::string predicate;
  std::vector<Atom> args;
  std::optional<std::string> explanation;
  int source_depth = 0;
  FactOrigin origin = FactOrigin::relation;
  std::size_t line = 0;  // source line when parsed from a document

  int arity() const { return static_cast<int>(args.size()); }

  /// `predicate(arg1,arg2)`, no whitespace. Explanation is not part of it.
  std::string canonical() const {
    std::string out = predicate + "(";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ',';
      out += args[i].render();
    }
    out += ')';
    return out;
  }

  static Fact declare(Atom a, int depth = 0, FactOrigin origin = FactOrigin::concept_decl) {
    Fact f;
    f.predicate = std::string(kConceptPredicate);
    f.args = {std::move(a)};
    f.source_depth = depth;
    f.origin = origin;
    return f;
  }

  static Fact relation(std::string predicate, Atom subject, Atom object, std::optional<std::string> explanation = {},
                       int depth = 0) {
    Fact f;
    f.predicate = std::move(predicate);
    f.args = {std::move(subject), std::move(object)};
    f.explanation = std::move(explanation);
    f.source_depth = depth;
    f.origin = FactOrigin::relation;
    return f;
  }
};

/// 64-bit FNV-1a digest. Stable across runs and platforms.
struct FactDigest {
  std::uint64_t value = 0;

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
  }

  friend auto operator<=>(const FactDigest&, const FactDigest&) = default;
};

struct FactDigestHash {
  std::size_t operator()(const FactDigest& d) const noexcept { return static_cast<std::size_t>(d.value); }
};

inline FactDigest digest_of(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return FactDigest{h};
}

inline FactDigest fact_hash(const Fact& fact) { return digest_of(fact.canonical()); }

/// Collapses internal whitespace runs (including newlines) to single spaces and
/// trims, so an explanation always fits on one comment line.
inline std::string sanitize_explanation(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

struct KnowledgeBase {
  std::vector<Fact> facts;
  std::unordered_set<FactDigest, FactDigestHash> seen_hashes;
  std::optional<Atom> root;
  // Free-form `key: value` metadata carried in the document header.
  std::vector<std::pair<std::string, std::string>> header;
  // Directives other than discontiguous, preserved verbatim when parsed.
  std::vector<std::string> extra_directives;

  /// Appends `fact` unless an equal canonical rendering is already present.
  /// Returns false for a duplicate.
  bool add(Fact fact) {
    if (!seen_hashes.insert(fact_hash(fact)).second) return false;
    facts.push_back(std::move(fact));
    return true;
  }

  bool contains(const Fact& fact) const { return seen_hashes.count(fact_hash(fact)) != 0; }

  std::size_t size() const { return facts.size(); }
  bool empty() const { return facts.empty(); }

  std::vector<Atom> concepts() const {
    std::vector<Atom> out;
    for (const auto& f : facts)
      if (f.predicate == kConceptPredicate && f.arity() == 1) out.push_back(f.args.front());
    return out;
  }

  /// Predicate/arity signatures in order of first appearance.
  std::vector<std::pair<std::string, int>> signatures() const {
    std::vector<std::pair<std::string, int>> out;
    std::set<std::pair<std::string, int>> seen;
    for (const auto& f : facts) {
      auto key = std::make_pair(f.predicate, f.arity());
      if (seen.insert(key).second) out.push_back(std::move(key));
    }
    return out;
  }
};

/// Keeps the first fact (and its explanation) for every digest; order is
/// otherwise preserved. Rebuilds `seen_hashes`.
inline KnowledgeBase deduplicate(KnowledgeBase kb) {
  std::vector<Fact> kept;
  kept.reserve(kb.facts.size());
  kb.seen_hashes.clear();
  for (auto& f : kb.facts)
    if (kb.seen_hashes.insert(fact_hash(f)).second) kept.push_back(std::move(f));
  kb.facts = std::move(kept);
  return kb;
}

/// Content equality: same facts (canonical rendering + explanation) regardless
/// of order and header metadata.
inline bool same_facts(const KnowledgeBase& a, const KnowledgeBase& b) {
  if (a.facts.size() != b.facts.size()) return false;
  std::set<std::pair<std::string, std::string>> lhs, rhs;
  for (const auto& f : a.facts) lhs.emplace(f.canonical(), f.explanation.value_or(""));
  for (const auto& f : b.facts) rhs.emplace(f.canonical(), f.explanation.value_or(""));
  return lhs == rhs;
}

/// Relation arguments without a concept/1 declaration, in first-appearance order.
inline std::vector<Atom> undeclared_atoms(const KnowledgeBase& kb) {
  std::set<Atom> declared;
  for (const auto& f : kb.facts)
    if (f.predicate == kConceptPredicate && f.arity() == 1) declared.insert(f.args.front());
  std::vector<Atom> missing;
  std::set<Atom> reported;
  for (const auto& f : kb.facts) {
    if (f.predicate == kConceptPredicate) continue;
    for (const auto& a : f.args)
      if (!declared.count(a) && reported.insert(a).second) missing.push_back(a);
  }
  return missing;
}

}  // namespace kbforge
