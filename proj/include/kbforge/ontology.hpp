#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kbforge/atom.hpp"
#include "kbforge/errors.hpp"

namespace kbforge {

enum class Category { core, philosophy, literature, arts, history };

enum class Domain { philosophy, literature, arts, history, generic };

enum class OntologyMode { full, minimal };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::core: return "core";
    case Category::philosophy: return "philosophy";
    case Category::literature: return "literature";
    case Category::arts: return "arts";
    case Category::history: return "history";
  }
  return "core";
}

inline std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::philosophy: return "philosophy";
    case Domain::literature: return "literature";
    case Domain::arts: return "arts";
    case Domain::history: return "history";
    case Domain::generic: return "generic";
  }
  return "generic";
}

inline std::string_view to_string(OntologyMode m) { return m == OntologyMode::full ? "full" : "minimal"; }

inline std::optional<Domain> parse_domain(std::string_view s) {
  if (s == "philosophy") return Domain::philosophy;
  if (s == "literature") return Domain::literature;
  if (s == "arts") return Domain::arts;
  if (s == "history") return Domain::history;
  if (s == "generic") return Domain::generic;
  return std::nullopt;
}

inline std::optional<OntologyMode> parse_mode(std::string_view s) {
  if (s == "full") return OntologyMode::full;
  if (s == "minimal") return OntologyMode::minimal;
  return std::nullopt;
}

/// Category whose domain-specific block a Domain unlocks. `generic` unlocks none.
inline std::optional<Category> category_of(Domain d) {
  switch (d) {
    case Domain::philosophy: return Category::philosophy;
    case Domain::literature: return Category::literature;
    case Domain::arts: return Category::arts;
    case Domain::history: return Category::history;
    case Domain::generic: return std::nullopt;
  }
  return std::nullopt;
}

struct PredicateDef {
  std::string name;
  int arity = 2;
  Category category = Category::core;
  std::string description;

  std::string signature() const { return name + "/" + std::to_string(arity); }

  friend bool operator==(const PredicateDef& a, const PredicateDef& b) {
    return a.name == b.name && a.arity == b.arity && a.category == b.category;
  }
};

inline constexpr std::string_view kConceptPredicate = "concept";
inline constexpr std::string_view kRelatedTo = "related_to";
inline constexpr std::string_view kRelatesTo = "relates_to";

/// The controlled vocabulary: 5 core predicates and 32 domain predicates.
inline const std::vector<PredicateDef>& builtin_ontology() {
  static const std::vector<PredicateDef> defs = {
      {"concept", 1, Category::core, "Declares a concept"},
      {"related_to", 2, Category::core, "Links a concept to another"},
      {"implies", 2, Category::core, "Logical implication between concepts"},
      {"causes", 2, Category::core, "Causal relation between concepts"},
      {"relates_to", 2, Category::core, "Generic semantic relation"},

      {"response_to", 2, Category::philosophy, "Theory formulated as response to another"},
      {"school_of_thought", 2, Category::philosophy, "Philosopher belongs to school"},
      {"main_work", 2, Category::philosophy, "Main philosophical work of thinker"},
      {"lived_during", 2, Category::philosophy, "Philosopher lived during period"},
      {"developed_by", 2, Category::philosophy, "Concept developed by philosopher"},
      {"influenced_by", 2, Category::philosophy, "Philosopher/work influenced by another"},
      {"criticized_by", 2, Category::philosophy, "Theory criticized by philosopher"},

      {"written_by", 2, Category::literature, "Work written by author"},
      {"published_in", 2, Category::literature, "Work published in year"},
      {"set_in", 2, Category::literature, "Setting or period of literary work"},
      {"protagonist_of", 2, Category::literature, "Character is protagonist of work"},
      {"genre_of", 2, Category::literature, "Genre of a work"},
      {"movement", 2, Category::literature, "Work or author belongs to movement"},
      {"influenced_by", 2, Category::literature, "Work influenced by another work"},
      {"adapted_into", 2, Category::literature, "Source work adapted into another form"},

      {"created_by", 2, Category::arts, "Artwork created by artist"},
      {"created_in", 2, Category::arts, "Year or period of creation"},
      {"belongs_to", 2, Category::arts, "Artist/work belongs to movement/style"},
      {"housed_in", 2, Category::arts, "Artwork housed in location"},
      {"technique_used", 2, Category::arts, "Artistic technique applied"},
      {"commissioned_by", 2, Category::arts, "Work commissioned by patron"},
      {"trained_under", 2, Category::arts, "Artist trained under another"},
      {"influenced_by", 2, Category::arts, "Artistic influence from earlier artist"},

      {"born_in", 2, Category::history, "Person born in year/place"},
      {"died_in", 2, Category::history, "Person died in year/place"},
      {"occurred_in", 2, Category::history, "Event occurred in time period"},
      {"located_in", 2, Category::history, "Entity located in place"},
      {"preceded", 2, Category::history, "One event/entity precedes another"},
      {"succeeded", 2, Category::history, "One event/entity succeeds another"},
      {"founded_by", 2, Category::history, "Institution founded by person"},
      {"ruled_during", 2, Category::history, "Ruler ruled during period"},
      {"contemporary_of", 2, Category::history, "Temporal coexistence between people"},
  };
  return defs;
}

inline bool is_minimal_core(std::string_view name) {
  return name == "concept" || name == "related_to" || name == "implies" || name == "causes";
}

/// Predicates admitted for a (domain, mode) pair, in vocabulary order.
/// Minimal mode admits exactly concept/1, related_to/2, implies/2, causes/2.
inline std::vector<PredicateDef> admitted_predicates(Domain domain, OntologyMode mode) {
  std::vector<PredicateDef> out;
  const auto domain_category = category_of(domain);
  for (const auto& def : builtin_ontology()) {
    if (mode == OntologyMode::minimal) {
      if (def.category == Category::core && is_minimal_core(def.name)) out.push_back(def);
    } else if (def.category == Category::core || (domain_category && def.category == *domain_category)) {
      out.push_back(def);
    }
  }
  return out;
}

/// True for core-category predicates; everything else, including
/// unknown predicates, counts as domain-specific.
inline bool is_core_predicate(std::string_view name) {
  const auto& defs = builtin_ontology();
  return std::any_of(defs.begin(), defs.end(),
                     [&](const PredicateDef& d) { return d.category == Category::core && d.name == name; });
}

inline bool is_known_predicate(std::string_view name, int arity) {
  const auto& defs = builtin_ontology();
  return std::any_of(defs.begin(), defs.end(),
                     [&](const PredicateDef& d) { return d.name == name && d.arity == arity; });
}

struct AdmissionResult {
  enum class Kind { accepted, remapped, rejected };
  Kind kind = Kind::rejected;
  PredicateDef predicate;  // meaningful unless rejected
  std::string raw_label;

  bool accepted() const { return kind == Kind::accepted; }
  bool remapped() const { return kind == Kind::remapped; }
  bool rejected() const { return kind == Kind::rejected; }
};

/// Maps a relation label coming from the LLM onto the controlled vocabulary.
/// Relations are binary, so only arity-2 predicates can be accepted. Labels
/// that normalize to a plain atom outside the admitted set are remapped to
/// relates_to/2; the caller keeps the raw label in the fact's explanation.
inline AdmissionResult admit_relation(std::string_view label, Domain domain, OntologyMode mode) {
  AdmissionResult result;
  result.raw_label = std::string(label);
  if (detail::trim(label).empty()) throw NormalizationError("relation label is empty");

  const Atom atom = normalize_atom(label);
  if (!atom.is_plain()) return result;

  for (const auto& def : admitted_predicates(domain, mode)) {
    if (def.arity == 2 && def.name == atom.text) {
      result.kind = AdmissionResult::Kind::accepted;
      result.predicate = def;
      return result;
    }
  }
  const auto& defs = builtin_ontology();
  const auto relates = std::find_if(defs.begin(), defs.end(), [](const PredicateDef& d) { return d.name == kRelatesTo; });
  result.kind = AdmissionResult::Kind::remapped;
  result.predicate = *relates;
  return result;
}

namespace detail {

inline std::vector<std::string> topic_tokens(std::string_view topic) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  while (pos < topic.size()) {
    const auto cp = next_code_point(topic, pos);
    if (!cp) {
      flush();
      continue;
    }
    if (*cp < 0x80) {
      char c = static_cast<char>(*cp);
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (is_lower(c) || is_digit(c)) {
        current += c;
      } else {
        flush();
      }
    } else if (const char* fold = fold_latin1(*cp)) {
      current += fold;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

struct DomainKeywords {
  Domain domain;
  std::vector<std::string_view> words;
};

// Multi-word keywords match as a contiguous token sequence. Keywords of five
// or more letters also match as token prefixes ("philosoph" ~ "philosopher").
inline const std::array<DomainKeywords, 4>& domain_keywords() {
  static const std::array<DomainKeywords, 4> table = {{
      {Domain::philosophy,
       {"philosoph", "ethics", "metaphysic", "epistemolog", "ontology", "logic", "existential", "stoic", "stoicism",
        "plato", "aristotle", "socrates", "kant", "nietzsche", "kierkegaard", "hume", "sartre", "aquinas",
        "descartes", "spinoza", "hegel", "confucius", "thinker", "dialectic"}},
      {Domain::literature,
       {"literat", "novel", "poet", "poem", "poetry", "author", "writer", "fiction", "lovecraft", "kafka", "woolf",
        "dante", "homer", "dickinson", "tolstoy", "shelley", "borges", "shakespeare", "odyssey", "iliad", "epic",
        "dostoevsky", "cervantes", "frankenstein"}},
      {Domain::arts,
       {"art", "arts", "artist", "painting", "painter", "sculpt", "impressionis", "baroque", "cubism", "surrealis",
        "museum", "fresco", "da vinci", "michelangelo", "rembrandt", "van gogh", "picasso", "monet", "caravaggio",
        "vermeer", "gothic cathedral"}},
      {Domain::history,
       {"war", "wars", "revolution", "empire", "dynasty", "history", "historical", "battle", "kingdom", "renaissance",
        "exploration", "cold war", "civil war", "crusade", "treaty", "ancient", "medieval", "space race", "conquest",
        "republic", "reign"}},
  }};
  return table;
}

inline bool keyword_matches(const std::vector<std::string>& tokens, std::string_view keyword) {
  std::vector<std::string> parts;
  {
    std::string current;
    for (char c : keyword) {
      if (c == ' ') {
        parts.push_back(std::move(current));
        current.clear();
      } else {
        current += c;
      }
    }
    parts.push_back(std::move(current));
  }
  if (parts.size() == 1) {
    const auto& kw = parts.front();
    return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
      return t == kw || (kw.size() >= 5 && t.compare(0, kw.size(), kw) == 0);
    });
  }
  if (tokens.size() < parts.size()) return false;
  for (std::size_t i = 0; i + parts.size() <= tokens.size(); ++i) {
    if (std::equal(parts.begin(), parts.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

}  // namespace detail

/// Offline domain classification: counts keyword hits per domain; ties break
/// philosophy > literature > arts > history; no hits means generic.
inline Domain classify_domain_heuristic(std::string_view topic) {
  if (detail::trim(topic).empty()) throw Error("empty topic");
  const auto tokens = detail::topic_tokens(topic);
  Domain best = Domain::generic;
  int best_hits = 0;
  for (const auto& entry : detail::domain_keywords()) {
    int hits = 0;
    for (auto kw : entry.words) hits += detail::keyword_matches(tokens, kw) ? 1 : 0;
    if (hits > best_hits) {
      best_hits = hits;
      best = entry.domain;
    }
  }
  return best;
}

/// Maps a free-text classification answer ("Philosophy.", "history") to a
/// Domain; anything unrecognized is generic.
inline Domain domain_from_answer(std::string_view answer) {
  for (const auto& token : detail::topic_tokens(answer)) {
    if (token.rfind("philosoph", 0) == 0) return Domain::philosophy;
    if (token.rfind("literat", 0) == 0) return Domain::literature;
    if (token == "art" || token == "arts") return Domain::arts;
    if (token.rfind("histor", 0) == 0) return Domain::history;
    if (token == "generic") return Domain::generic;
  }
  return Domain::generic;
}

/// One predicate per line: `name/arity category`.
inline std::string ontology_listing() {
  std::ostringstream out;
  for (const auto& def : builtin_ontology()) out << def.signature() << ' ' << to_string(def.category) << '\n';
  return out.str();
}

}  // namespace kbforge
