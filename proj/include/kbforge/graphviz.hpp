#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kbforge/knowledge_base.hpp"
#include "kbforge/ontology.hpp"

namespace kbforge {

enum class EdgeCategory { core, domain };

struct GraphEdge {
  Atom source;
  std::string predicate;
  Atom target;
  EdgeCategory category = EdgeCategory::core;

  friend auto operator<=>(const GraphEdge&, const GraphEdge&) = default;
};

struct ConceptGraph {
  std::set<Atom> nodes;
  std::vector<GraphEdge> edges;
  std::optional<Atom> root;

  std::map<Atom, std::size_t> degrees() const {
    std::map<Atom, std::size_t> deg;
    for (const auto& n : nodes) deg[n] = 0;
    for (const auto& e : edges) {
      ++deg[e.source];
      ++deg[e.target];
    }
    return deg;
  }
};

/// concept/1 facts become nodes; every binary fact becomes an edge labeled by
/// its predicate. Edge endpoints are always added as nodes.
inline ConceptGraph kb_to_graph(const KnowledgeBase& kb) {
  ConceptGraph g;
  g.root = kb.root;
  for (const auto& f : kb.facts) {
    if (f.arity() == 1 && f.predicate == kConceptPredicate) {
      g.nodes.insert(f.args.front());
    } else if (f.arity() == 2) {
      g.nodes.insert(f.args[0]);
      g.nodes.insert(f.args[1]);
      g.edges.push_back({f.args[0], f.predicate, f.args[1],
                         is_core_predicate(f.predicate) ? EdgeCategory::core : EdgeCategory::domain});
    }
  }
  return g;
}

/// Keeps the `n` nodes of highest total degree (ties broken by atom order) plus
/// the root when present, and the edges induced by them.
inline ConceptGraph prune(const ConceptGraph& g, std::size_t n) {
  if (n < 1) throw Error("prune: node budget must be at least 1");
  if (n >= g.nodes.size()) return g;

  const auto deg = g.degrees();
  std::vector<Atom> ranked(g.nodes.begin(), g.nodes.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](const Atom& a, const Atom& b) { return deg.at(a) > deg.at(b); });

  ConceptGraph out;
  out.root = g.root;
  if (g.root && g.nodes.count(*g.root)) out.nodes.insert(*g.root);
  for (const auto& a : ranked) {
    if (out.nodes.size() >= n) break;
    out.nodes.insert(a);
  }
  for (const auto& e : g.edges)
    if (out.nodes.count(e.source) && out.nodes.count(e.target)) out.edges.push_back(e);
  return out;
}

struct DotStyle {
  std::string core_color = "#1f77b4";
  std::string domain_color = "#d62728";
  std::string root_fill = "#ffe8a3";
};

namespace detail {

inline bool is_dot_keyword(const std::string& s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  return lower == "node" || lower == "edge" || lower == "graph" || lower == "digraph" || lower == "subgraph" ||
         lower == "strict";
}

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

inline std::string dot_id(const Atom& a) {
  const auto& s = a.text;
  const bool plain = !s.empty() && !(s[0] >= '0' && s[0] <= '9') && !is_dot_keyword(s) &&
                     std::all_of(s.begin(), s.end(), [](char c) {
                       return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
                     });
  return plain ? s : dot_quote(s);
}

inline std::string node_label(const Atom& a) {
  std::string label = a.text;
  std::replace(label.begin(), label.end(), '_', ' ');
  return label;
}

}  // namespace detail

/// DOT digraph text; nodes and edges are emitted in sorted order.
inline std::string emit_dot(const ConceptGraph& g, const DotStyle& style = {}) {
  std::ostringstream out;
  out << "digraph kb {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=box, style=rounded, fontname=\"Helvetica\"];\n";
  out << "  edge [fontname=\"Helvetica\", fontsize=10];\n";
  for (const auto& n : g.nodes) {
    out << "  " << detail::dot_id(n) << " [label=" << detail::dot_quote(detail::node_label(n));
    if (g.root && n == *g.root) out << ", style=\"rounded,filled\", fillcolor=" << detail::dot_quote(style.root_fill);
    out << "];\n";
  }
  auto edges = g.edges;
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) {
    const auto& color = e.category == EdgeCategory::core ? style.core_color : style.domain_color;
    out << "  " << detail::dot_id(e.source) << " -> " << detail::dot_id(e.target)
        << " [label=" << detail::dot_quote(e.predicate) << ", color=" << detail::dot_quote(color)
        << ", fontcolor=" << detail::dot_quote(color) << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace kbforge
