#pragma once

#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kbforge/atom.hpp"
#include "kbforge/errors.hpp"
#include "kbforge/ontology.hpp"

namespace kbforge {

struct RelationTuple {
  std::string source;
  std::string relation;
  std::string target;
  std::string explanation;

  friend bool operator==(const RelationTuple&, const RelationTuple&) = default;
};

struct ExpansionResponse {
  std::vector<std::string> concepts;
  std::vector<RelationTuple> relations;
  // Diagnostics for dropped entries. Not part of the wire format or equality.
  std::vector<std::string> warnings;

  bool empty() const { return concepts.empty() && relations.empty(); }

  friend bool operator==(const ExpansionResponse& a, const ExpansionResponse& b) {
    return a.concepts == b.concepts && a.relations == b.relations;
  }
};

/// Anything that can answer expansion and classification prompts.
class LLMBackend {
 public:
  virtual ~LLMBackend() = default;

  virtual std::string expand(const std::string& topic, int breadth, Domain domain, OntologyMode mode) = 0;
  virtual std::string classify(const std::string& topic) = 0;

  /// Identical inputs produce identical outputs.
  virtual bool deterministic() const = 0;
};

inline std::string build_prompt(std::string_view topic, int breadth, Domain domain, OntologyMode mode) {
  if (breadth < 1) throw Error("breadth must be at least 1");
  std::ostringstream p;
  p << "You are building a symbolic knowledge base about the concept \"" << topic << "\"";
  if (domain != Domain::generic) p << " in the domain of " << to_string(domain);
  p << ".\n";
  p << "List at most " << breadth << " concepts that are directly and factually related to \"" << topic
    << "\", and the labeled relations that connect them.\n";
  p << "Use only these relation predicates:";
  const auto preds = admitted_predicates(domain, mode);
  for (std::size_t i = 0; i < preds.size(); ++i) p << (i ? ", " : " ") << preds[i].name;
  p << ".\n";
  p << "Every relation must use a binary predicate and concepts named in this response or \"" << topic
    << "\" itself as source and target. Explain each relation in one sentence.\n";
  p << "Respond with a strict JSON object and nothing else, of the form:\n";
  p << R"({"concepts": ["..."], "relations": [{"source": "...", "relation": "...", "target": "...", "explanation": "..."}]})"
    << "\n";
  return p.str();
}

inline std::string build_classification_prompt(std::string_view topic) {
  std::ostringstream p;
  p << "Classify the topic \"" << topic
    << "\" into exactly one of these domains: philosophy, literature, arts, history, generic.\n"
       "Answer with the single domain word only.\n";
  return p.str();
}

namespace detail {

// Returns [begin, end) of the first balanced {...} object, honouring JSON
// string literals, or npos when none exists.
inline std::pair<std::size_t, std::size_t> find_first_object(std::string_view text) {
  const std::size_t start = text.find('{');
  if (start != std::string_view::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) return {start, i + 1};
      }
    }
  }
  return {std::string_view::npos, std::string_view::npos};
}

inline std::string_view strip_code_fences(std::string_view text) {
  auto t = trim(text);
  if (t.substr(0, 3) == "```") {
    const auto nl = t.find('\n');
    t = nl == std::string_view::npos ? std::string_view{} : t.substr(nl + 1);
    const auto close = t.rfind("```");
    if (close != std::string_view::npos) t = t.substr(0, close);
  }
  return t;
}

inline ExpansionResponse response_from_json(const nlohmann::json& doc, int breadth) {
  if (!doc.is_object()) throw SchemaError("response is not a JSON object");
  if (!doc.contains("concepts")) throw SchemaError("response is missing key \"concepts\"");
  if (!doc.contains("relations")) throw SchemaError("response is missing key \"relations\"");
  const auto& concepts = doc.at("concepts");
  const auto& relations = doc.at("relations");
  if (!concepts.is_array()) throw SchemaError("\"concepts\" is not an array");
  if (!relations.is_array()) throw SchemaError("\"relations\" is not an array");

  ExpansionResponse out;
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    const auto& c = concepts[i];
    if (!c.is_string() || trim(c.get_ref<const std::string&>()).empty()) {
      out.warnings.push_back("dropped concepts[" + std::to_string(i) + "]: not a non-empty string");
      continue;
    }
    if (static_cast<int>(out.concepts.size()) >= breadth) {
      out.warnings.push_back("truncated concepts to breadth " + std::to_string(breadth));
      break;
    }
    out.concepts.push_back(c.get<std::string>());
  }

  auto text_field = [](const nlohmann::json& obj, const char* key) -> std::optional<std::string> {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return std::nullopt;
    auto s = it->get<std::string>();
    if (trim(s).empty()) return std::nullopt;
    return s;
  };

  for (std::size_t i = 0; i < relations.size(); ++i) {
    const auto& r = relations[i];
    const std::string where = "relations[" + std::to_string(i) + "]";
    if (!r.is_object()) {
      out.warnings.push_back("dropped " + where + ": not an object");
      continue;
    }
    auto source = text_field(r, "source");
    auto relation = text_field(r, "relation");
    auto target = text_field(r, "target");
    if (!source || !relation || !target) {
      out.warnings.push_back("dropped " + where + ": missing source, relation or target");
      continue;
    }
    std::string explanation;
    if (const auto it = r.find("explanation"); it != r.end() && it->is_string()) explanation = it->get<std::string>();
    out.relations.push_back({std::move(*source), std::move(*relation), std::move(*target), std::move(explanation)});
  }
  return out;
}

}  // namespace detail

/// Tolerant extraction of an expansion from raw model output: Markdown fences
/// are stripped, the first JSON object is parsed, concepts are cut to
/// `breadth`, incomplete relation tuples are dropped (see `warnings`).
inline ExpansionResponse parse_response(std::string_view raw, int breadth) {
  if (detail::trim(raw).empty()) throw ParseError::with_raw("empty response", std::string(raw));
  if (breadth < 1) throw Error("breadth must be at least 1");
  const auto body = detail::strip_code_fences(raw);
  const auto [begin, end] = detail::find_first_object(body);
  if (begin == std::string_view::npos) throw ParseError::with_raw("no JSON object found in response", std::string(raw));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body.substr(begin, end - begin));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError::with_raw(std::string("malformed JSON: ") + e.what(), std::string(raw));
  }
  return detail::response_from_json(doc, breadth);
}

inline nlohmann::json to_json(const ExpansionResponse& r) {
  nlohmann::json relations = nlohmann::json::array();
  for (const auto& t : r.relations)
    relations.push_back(
        {{"source", t.source}, {"relation", t.relation}, {"target", t.target}, {"explanation", t.explanation}});
  return {{"concepts", r.concepts}, {"relations", std::move(relations)}};
}

inline std::string serialize_response(const ExpansionResponse& r) { return to_json(r).dump(); }

/// Fixture table for the mock backend, keyed by normalized concept atom.
struct MockFixtures {
  std::map<std::string, ExpansionResponse> responses;
  std::map<std::string, std::string> domains;  // optional classification answers

  static MockFixtures from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("fixture document must be a JSON object");
    MockFixtures fx;
    for (const auto& [key, value] : doc.items()) {
      const auto atom = normalize_atom(key).text;
      auto response = detail::response_from_json(value, std::numeric_limits<int>::max());
      fx.responses[atom] = std::move(response);
      if (const auto it = value.find("domain"); it != value.end() && it->is_string())
        fx.domains[atom] = it->get<std::string>();
    }
    return fx;
  }

  static MockFixtures load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open fixture file: " + path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError::with_raw("fixture file " + path + " is not valid JSON: " + e.what(), "");
    }
    return from_json(doc);
  }
};

/// Fixture lookup by normalized concept, truncated to `breadth`. Unknown
/// concepts yield an empty response.
inline ExpansionResponse mock_expand(const MockFixtures& fixtures, std::string_view topic, int breadth) {
  const auto it = fixtures.responses.find(normalize_atom(topic).text);
  if (it == fixtures.responses.end()) return {};
  ExpansionResponse out = it->second;
  if (breadth >= 0 && out.concepts.size() > static_cast<std::size_t>(breadth))
    out.concepts.resize(static_cast<std::size_t>(breadth));
  return out;
}

class MockBackend final : public LLMBackend {
 public:
  explicit MockBackend(MockFixtures fixtures) : fixtures_(std::move(fixtures)) {}

  std::string expand(const std::string& topic, int breadth, Domain, OntologyMode) override {
    return serialize_response(mock_expand(fixtures_, topic, breadth));
  }

  std::string classify(const std::string& topic) override {
    const auto it = fixtures_.domains.find(normalize_atom(topic).text);
    if (it == fixtures_.domains.end()) throw BackendError("mock fixture has no classification for \"" + topic + "\"");
    return it->second;
  }

  bool deterministic() const override { return true; }

  const MockFixtures& fixtures() const { return fixtures_; }

 private:
  MockFixtures fixtures_;
};

/// Classifies a topic with the backend when one is given, otherwise (or when
/// the backend fails) with the offline keyword heuristic.
inline Domain classify_domain(std::string_view topic, LLMBackend* backend, std::vector<std::string>* warnings = nullptr) {
  if (detail::trim(topic).empty()) throw Error("empty topic");
  if (!backend) return classify_domain_heuristic(topic);
  try {
    return domain_from_answer(backend->classify(std::string(detail::trim(topic))));
  } catch (const BackendError& e) {
    if (warnings) warnings->push_back(std::string("domain classification fell back to heuristic: ") + e.what());
    return classify_domain_heuristic(topic);
  }
}

}  // namespace kbforge
