#pragma once

#include <algorithm>
#include <deque>
#include <exception>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kbforge/atom.hpp"
#include "kbforge/errors.hpp"
#include "kbforge/knowledge_base.hpp"
#include "kbforge/llm_backend.hpp"
#include "kbforge/ontology.hpp"

namespace kbforge {

struct ExpansionConfig {
  std::string root;
  int breadth = 30;  // concepts requested per node
  int depth = 3;     // expansion levels below the root
  OntologyMode mode = OntologyMode::full;
  std::optional<Domain> domain_override;
  int jobs = 1;  // concurrent backend requests within one depth level

  void validate() const {
    if (detail::trim(root).empty()) throw Error("root topic is empty");
    if (breadth < 1) throw Error("breadth must be at least 1");
    if (depth < 0) throw Error("depth must be non-negative");
    if (jobs < 1) throw Error("jobs must be at least 1");
  }
};

struct ExpansionEvent {
  std::string topic;
  int depth = 0;
  std::size_t concepts_returned = 0;
  std::size_t relations_returned = 0;
  std::size_t facts_added = 0;
  std::size_t facts_total = 0;
};

struct ExpansionStats {
  std::size_t nodes_expanded = 0;
  int max_depth_reached = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t relations_remapped = 0;
  std::size_t relations_rejected = 0;
  std::size_t concepts_backfilled = 0;
};

struct ExpansionResult {
  KnowledgeBase kb;
  Domain domain = Domain::generic;
  ExpansionStats stats;
  std::vector<std::string> warnings;
};

namespace detail {

struct PendingNode {
  std::string display;  // text sent to the backend
  Atom atom;
  int depth = 0;
};

struct NodeOutcome {
  std::optional<ExpansionResponse> response;
  std::string error;
};

inline NodeOutcome query_node(LLMBackend& backend, const PendingNode& node, int breadth, Domain domain,
                              OntologyMode mode) {
  NodeOutcome out;
  try {
    out.response = parse_response(backend.expand(node.display, breadth, domain, mode), breadth);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace detail

/// Breadth-first semantic expansion from `config.root`.
///
/// Each dequeued concept that is unvisited and within `config.depth` is sent
/// to the backend. Every returned concept c' is declared with concept(c') and
/// linked with related_to(c', c) and enqueued one level deeper; every relation
/// tuple becomes one fact through the ontology admission policy. Facts are
/// deduplicated by digest, and atoms that only occur as relation arguments get
/// concept/1 declarations at the end.
///
/// All nodes of one depth level are queried as a batch (concurrently when
/// `config.jobs > 1`) and merged in enqueue order, so the result does not
/// depend on scheduling. A backend failure at the root is fatal; deeper
/// failures skip the node with a warning.
inline ExpansionResult build_knowledge_base(const ExpansionConfig& config, LLMBackend& backend,
                                            const std::function<void(const ExpansionEvent&)>& progress = {}) {
  config.validate();
  ExpansionResult result;
  auto& kb = result.kb;
  auto& stats = result.stats;

  result.domain = config.domain_override ? *config.domain_override
                                         : classify_domain(config.root, &backend, &result.warnings);

  const std::string root_display(detail::trim(config.root));
  const Atom root = normalize_atom(root_display);
  kb.root = root;
  kb.add(Fact::declare(root, 0));

  std::deque<detail::PendingNode> queue{{root_display, root, 0}};
  std::set<Atom> visited;

  auto add = [&](Fact f) -> bool {
    if (kb.add(std::move(f))) return true;
    ++stats.duplicates_dropped;
    return false;
  };

  while (!queue.empty()) {
    const int level = queue.front().depth;
    std::vector<detail::PendingNode> batch;
    while (!queue.empty() && queue.front().depth == level) {
      auto node = std::move(queue.front());
      queue.pop_front();
      if (visited.count(node.atom) || node.depth > config.depth) continue;
      visited.insert(node.atom);
      batch.push_back(std::move(node));
    }
    if (batch.empty()) continue;

    std::vector<detail::NodeOutcome> outcomes(batch.size());
    if (config.jobs > 1 && batch.size() > 1) {
      for (std::size_t start = 0; start < batch.size(); start += static_cast<std::size_t>(config.jobs)) {
        const auto stop = std::min(batch.size(), start + static_cast<std::size_t>(config.jobs));
        std::vector<std::future<detail::NodeOutcome>> futures;
        for (auto i = start; i < stop; ++i)
          futures.push_back(std::async(std::launch::async, detail::query_node, std::ref(backend), std::cref(batch[i]),
                                       config.breadth, result.domain, config.mode));
        for (auto i = start; i < stop; ++i) outcomes[i] = futures[i - start].get();
      }
    } else {
      for (std::size_t i = 0; i < batch.size(); ++i)
        outcomes[i] = detail::query_node(backend, batch[i], config.breadth, result.domain, config.mode);
    }

    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& node = batch[i];
      auto& outcome = outcomes[i];
      if (!outcome.response) {
        if (node.depth == 0) throw BackendError("expansion of root \"" + node.display + "\" failed: " + outcome.error);
        result.warnings.push_back("skipped \"" + node.display + "\" at depth " + std::to_string(node.depth) + ": " +
                                  outcome.error);
        continue;
      }
      const auto& response = *outcome.response;
      for (const auto& w : response.warnings) result.warnings.push_back(node.atom.render() + ": " + w);
      ++stats.nodes_expanded;
      stats.max_depth_reached = std::max(stats.max_depth_reached, node.depth);
      const auto before = kb.size();

      for (const auto& text : response.concepts) {
        const Atom child = normalize_atom(text);
        if (child == node.atom) {
          ++stats.self_loops_dropped;
          result.warnings.push_back("dropped self-loop related_to(" + child.render() + ", " + child.render() + ")");
          continue;
        }
        if (!visited.count(child)) queue.push_back({std::string(detail::trim(text)), child, node.depth + 1});
        add(Fact::declare(child, node.depth + 1));
        add(Fact::relation(std::string(kRelatedTo), child, node.atom, std::nullopt, node.depth + 1));
      }

      for (const auto& rel : response.relations) {
        const Atom source = normalize_atom(rel.source);
        const Atom target = normalize_atom(rel.target);
        const auto admission = admit_relation(rel.relation, result.domain, config.mode);
        if (admission.rejected()) {
          ++stats.relations_rejected;
          result.warnings.push_back("rejected relation label \"" + rel.relation + "\"");
          continue;
        }
        if (source == target) {
          ++stats.self_loops_dropped;
          result.warnings.push_back("dropped self-loop " + admission.predicate.name + "(" + source.render() + ", " +
                                    target.render() + ")");
          continue;
        }
        std::string explanation = sanitize_explanation(rel.explanation);
        if (admission.remapped()) {
          ++stats.relations_remapped;
          explanation = "[" + sanitize_explanation(rel.relation) + "]" + (explanation.empty() ? "" : " " + explanation);
        }
        add(Fact::relation(admission.predicate.name, source, target,
                           explanation.empty() ? std::nullopt : std::optional<std::string>(explanation),
                           node.depth + 1));
      }

      if (progress) {
        progress({node.display, node.depth, response.concepts.size(), response.relations.size(), kb.size() - before,
                  kb.size()});
      }
    }
  }

  for (const auto& atom : undeclared_atoms(kb)) {
    kb.add(Fact::declare(atom, 0, FactOrigin::backfill));
    ++stats.concepts_backfilled;
  }
  return result;
}

}  // namespace kbforge
