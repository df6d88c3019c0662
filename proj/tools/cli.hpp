#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kbforge/http_backend.hpp"
#include "kbforge/kbforge.hpp"

namespace kbforge::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

struct BuildOptions {
  std::string topic;
  int depth = 3;
  int max_topics = 30;
  std::string output;
  bool report = false;
  std::string backend;
  std::string mode = "full";
  std::string domain;
  int jobs = 1;
  std::string timestamp;
  std::string model;
  std::string api_key_env = "KBFORGE_API_KEY";
  bool quiet = false;
};

struct VisualizeOptions {
  std::string input;
  std::size_t max_nodes = 0;
  std::string output;
  std::string core_color = DotStyle{}.core_color;
  std::string domain_color = DotStyle{}.domain_color;
};

struct QueryOptions {
  std::string input;
  std::string goal;
  std::size_t limit = 0;
};

struct SampleOptions {
  std::vector<std::string> inputs;
  std::size_t k = 10;
  std::uint64_t seed = 42;
  std::string ledger;
  bool append = false;
};

struct TestOptions {
  std::string ledger;
  double p0 = 0.8;
  double alpha = 0.05;
  std::string prior_sd;
};

struct CompareOptions {
  std::string ledger_a;
  std::string ledger_b;
  double alpha = 0.05;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Builds the backend named by `mock:<fixture.json>` or `http:<profile|url>`.
inline std::unique_ptr<LLMBackend> make_backend(const BuildOptions& opt) {
  const auto colon = opt.backend.find(':');
  const std::string kind = opt.backend.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : opt.backend.substr(colon + 1);
  if (kind == "mock") {
    if (arg.empty()) throw IoError("mock backend needs a fixture path (mock:<fixture.json>)");
    if (!std::filesystem::exists(arg)) throw IoError("fixture file not found: " + arg);
    return std::make_unique<MockBackend>(MockFixtures::load(arg));
  }
  if (kind == "http") {
    auto cfg = HttpEndpointConfig::from_profile(arg);
    if (!opt.model.empty()) cfg.model = opt.model;
    cfg.api_key_env = opt.api_key_env;
    return std::make_unique<HttpBackend>(cfg);
  }
  throw IoError("unknown backend '" + opt.backend + "' (expected mock:<fixture.json> or http:<profile>)");
}

namespace detail {

inline void write_kb_summary(std::ostream& out, const KnowledgeBase& kb) {
  std::size_t concepts = 0, explanations = 0;
  for (const auto& f : kb.facts) {
    if (f.predicate == kConceptPredicate && f.arity() == 1) ++concepts;
    if (f.explanation) ++explanations;
  }
  if (kb.root) out << "root: " << kb.root->render() << "\n";
  out << "facts: " << kb.size() << "\n";
  out << "concepts: " << concepts << "\n";
  out << "relations: " << kb.size() - concepts << "\n";
  out << "explanations: " << explanations << "\n";
  out << "predicates:\n";
  auto sigs = kb.signatures();
  std::stable_partition(sigs.begin(), sigs.end(),
                        [](const auto& s) { return s.first == kConceptPredicate && s.second == 1; });
  for (const auto& [name, arity] : sigs) {
    std::size_t count = 0;
    for (const auto& f : kb.facts)
      if (f.predicate == name && f.arity() == arity) ++count;
    out << "  " << name << "/" << arity << ": " << count << "\n";
  }
  const auto lint = lint_kb(kb);
  out << "lint warnings: " << lint.size() << "\n";
  for (const auto& w : lint) out << "  " << w << "\n";
}

inline double parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return std::stod(text);
    return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
  } catch (const std::exception&) {
    throw Error("cannot parse number '" + text + "'");
  }
}

inline std::string default_output(const Atom& root) {
  return (root.is_plain() ? root.text : std::string("knowledge_base")) + ".pl";
}

}  // namespace detail

/// Plain-text summary of a knowledge base file.
inline std::string run_report(const std::string& path) {
  const auto kb = parse_kb(read_text_file(path));
  std::ostringstream out;
  out << "kb: " << path << "\n";
  detail::write_kb_summary(out, kb);
  return out.str();
}

inline int run_build(const BuildOptions& opt, std::ostream& out, std::ostream& err) {
  ExpansionConfig config;
  config.root = opt.topic;
  config.breadth = opt.max_topics;
  config.depth = opt.depth;
  config.jobs = opt.jobs;
  const auto mode = parse_mode(opt.mode);
  if (!mode) {
    err << "error: --mode must be full or minimal\n";
    return kUsage;
  }
  config.mode = *mode;
  if (!opt.domain.empty()) {
    const auto d = parse_domain(opt.domain);
    if (!d) {
      err << "error: unknown domain '" << opt.domain << "'\n";
      return kUsage;
    }
    config.domain_override = *d;
  }
  try {
    config.validate();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  auto backend = make_backend(opt);
  auto progress = [&](const ExpansionEvent& ev) {
    if (opt.quiet) return;
    err << "[depth " << ev.depth << "] " << ev.topic << ": " << ev.concepts_returned << " concepts, "
        << ev.relations_returned << " relations, +" << ev.facts_added << " facts (" << ev.facts_total << " total)\n";
  };
  auto result = build_knowledge_base(config, *backend, progress);

  auto& kb = result.kb;
  kb.header = {{"Topic", std::string(kbforge::detail::trim(opt.topic))},
               {"Domain", std::string(to_string(result.domain))},
               {"Mode", std::string(to_string(config.mode))},
               {"Breadth", std::to_string(config.breadth)},
               {"Depth", std::to_string(config.depth)}};
  const std::string output = opt.output.empty() ? detail::default_output(*kb.root) : opt.output;
  EmitOptions emit_options;
  emit_options.timestamp = opt.timestamp.empty() ? utc_timestamp() : opt.timestamp;
  write_text_file(output, emit_kb(kb, emit_options));

  // Self-check: the file must load and answer `concept(X), !.` exactly once.
  const auto loaded = consult(output);
  const auto solutions = solve(parse_query("concept(X), !."), loaded);
  if (solutions.size() != 1) {
    err << "error: " << output << " failed validation: concept(X), ! returned " << solutions.size()
        << " solutions\n";
    return kFailure;
  }
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  for (const auto& w : lint_kb(kb)) err << "warning: " << w << "\n";

  if (opt.report) {
    std::ostringstream rep;
    rep << "kb: " << output << "\n";
    rep << "topic: " << kbforge::detail::trim(opt.topic) << "\n";
    rep << "domain: " << to_string(result.domain) << "\n";
    rep << "mode: " << to_string(config.mode) << "\n";
    rep << "breadth: " << config.breadth << "\n";
    rep << "depth: " << config.depth << "\n";
    rep << "nodes expanded: " << result.stats.nodes_expanded << "\n";
    rep << "max depth reached: " << result.stats.max_depth_reached << "\n";
    rep << "duplicates dropped: " << result.stats.duplicates_dropped << "\n";
    rep << "self-loops dropped: " << result.stats.self_loops_dropped << "\n";
    rep << "relations remapped: " << result.stats.relations_remapped << "\n";
    rep << "relations rejected: " << result.stats.relations_rejected << "\n";
    rep << "concepts backfilled: " << result.stats.concepts_backfilled << "\n";
    detail::write_kb_summary(rep, kb);
    rep << "warnings: " << result.warnings.size() << "\n";
    for (const auto& w : result.warnings) rep << "  " << w << "\n";
    const std::string report_path = output + ".report.txt";
    write_text_file(report_path, rep.str());
    out << "report: " << report_path << "\n";
  }
  out << "wrote " << output << " (" << kb.size() << " facts, domain " << to_string(result.domain) << ")\n";
  return kOk;
}

inline int run_visualize(const VisualizeOptions& opt, std::ostream& out) {
  const auto kb = consult(opt.input);
  auto graph = kb_to_graph(kb);
  if (opt.max_nodes > 0) graph = prune(graph, opt.max_nodes);
  DotStyle style;
  style.core_color = opt.core_color;
  style.domain_color = opt.domain_color;
  const auto dot = emit_dot(graph, style);
  if (opt.output.empty() || opt.output == "-") {
    out << dot;
  } else {
    write_text_file(opt.output, dot);
    out << "wrote " << opt.output << " (" << graph.nodes.size() << " nodes, " << graph.edges.size() << " edges)\n";
  }
  return kOk;
}

inline int run_query(const QueryOptions& opt, std::ostream& out) {
  const auto kb = consult(opt.input);
  const auto query = parse_query(opt.goal);
  std::optional<std::size_t> limit;
  if (opt.limit > 0) limit = opt.limit;
  const auto solutions = solve(query, kb, limit);
  if (solutions.empty()) {
    out << "false.\n";
    return kFailure;
  }
  for (const auto& s : solutions) out << format_solution(query, s) << "\n";
  return kOk;
}

inline int run_verify_sample(const SampleOptions& opt, std::ostream& out) {
  std::vector<verify::SampledAssertion> all;
  for (const auto& path : opt.inputs) {
    auto sample = verify::sample_assertions_from_file(path, opt.k, opt.seed);
    all.insert(all.end(), sample.begin(), sample.end());
  }
  verify::write_ledger(opt.ledger, all, opt.append);
  out << "sampled " << all.size() << " assertions into " << opt.ledger << "\n";
  return kOk;
}

inline int run_verify_test(const TestOptions& opt, std::ostream& out, std::ostream& err) {
  const auto records = verify::read_ledger(opt.ledger);
  const auto counts = verify::count_labels(records);
  if (counts.unlabeled) err << "warning: " << counts.unlabeled << " unlabeled records ignored\n";
  if (counts.labeled() == 0) {
    err << "error: " << opt.ledger << " has no labeled records\n";
    return kFailure;
  }
  const int n = counts.labeled();
  const auto test = verify::one_sample_prop_test(counts.correct, n, opt.p0, opt.alpha);
  const auto ci = verify::wald_ci(counts.correct, n, opt.alpha);
  const double sd = opt.prior_sd.empty() ? 1.0 / n : detail::parse_fraction(opt.prior_sd);
  const auto post = verify::bayes_posterior(counts.correct, n, sd);
  using verify::format_g6;

  out << "n: " << n << "\n";
  out << "correct: " << counts.correct << "\n";
  out << "accuracy: " << format_g6(test.p_hat()) << "\n";
  out << "H0: p <= " << format_g6(opt.p0) << ", H1: p > " << format_g6(opt.p0) << "\n";
  out << "z: " << format_g6(test.z) << "\n";
  out << "p-value: " << format_g6(test.p_value) << "\n";
  out << "decision: " << (test.reject_null ? "reject H0" : "fail to reject H0") << " at alpha = " << format_g6(opt.alpha)
      << "\n";
  out << "wald interval (" << format_g6(100.0 * (1.0 - opt.alpha)) << "%): " << format_g6(ci.center) << " +- "
      << format_g6(ci.halfwidth) << " [" << format_g6(ci.lower()) << ", " << format_g6(ci.upper()) << "]"
      << (ci.clipped_upper ? " upper bounded by 1" : "") << "\n";
  out << "posterior: N(" << format_g6(post.mean) << ", sd " << format_g6(post.sd) << ")"
      << (post.truncated ? " right-truncated at 1" : "") << "\n";
  return test.reject_null ? kOk : kFailure;
}

inline int run_verify_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err) {
  const auto a = verify::count_labels(verify::read_ledger(opt.ledger_a));
  const auto b = verify::count_labels(verify::read_ledger(opt.ledger_b));
  if (a.labeled() == 0 || b.labeled() == 0) {
    err << "error: both ledgers need labeled records\n";
    return kFailure;
  }
  using verify::format_g6;
  verify::TestReport test;
  try {
    test = verify::two_sample_prop_test(a.correct, a.labeled(), b.correct, b.labeled(), opt.alpha);
  } catch (const DegenerateError& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  out << "a: " << a.correct << "/" << a.labeled() << " = " << format_g6(static_cast<double>(a.correct) / a.labeled())
      << "\n";
  out << "b: " << b.correct << "/" << b.labeled() << " = " << format_g6(static_cast<double>(b.correct) / b.labeled())
      << "\n";
  out << "pooled: " << format_g6(test.p0) << "\n";
  out << "z: " << format_g6(test.z) << "\n";
  out << "p-value: " << format_g6(test.p_value) << "\n";
  out << "decision: " << (test.reject_null ? "reject H0 (proportions differ)" : "fail to reject H0 (no significant difference)")
      << " at alpha = " << format_g6(opt.alpha) << "\n";
  return kOk;
}

/// Entry point shared by the binary and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"kbforge: distill an LLM's knowledge of a topic into a Prolog knowledge base"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  BuildOptions build;
  auto* build_cmd = app.add_subcommand("build", "Expand a root topic into a .pl knowledge base");
  build_cmd->add_option("topic", build.topic, "Root topic")->required();
  build_cmd->add_option("--depth", build.depth, "Expansion levels below the root")->capture_default_str();
  build_cmd->add_option("--max-topics", build.max_topics, "Concepts requested per node")->capture_default_str();
  build_cmd->add_option("--output,-o", build.output, "Output .pl path (default <root>.pl)");
  build_cmd->add_flag("--report", build.report, "Also write <output>.report.txt");
  build_cmd->add_option("--backend", build.backend, "mock:<fixture.json> or http:<openai|url>")->required();
  build_cmd->add_option("--mode", build.mode, "full or minimal ontology")->capture_default_str();
  build_cmd->add_option("--domain", build.domain, "Skip classification: philosophy|literature|arts|history|generic");
  build_cmd->add_option("--jobs,-j", build.jobs, "Concurrent requests per depth level")->capture_default_str();
  build_cmd->add_option("--timestamp", build.timestamp, "Pin the header timestamp");
  build_cmd->add_option("--model", build.model, "Model name for http backends");
  build_cmd->add_option("--api-key-env", build.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  build_cmd->add_flag("--quiet,-q", build.quiet, "No progress lines");

  VisualizeOptions vis;
  auto* vis_cmd = app.add_subcommand("visualize", "Render a knowledge base as a DOT graph");
  vis_cmd->add_option("kb", vis.input, "Knowledge base .pl file")->required();
  vis_cmd->add_option("--max-nodes", vis.max_nodes, "Keep only the N highest-degree nodes");
  vis_cmd->add_option("--output,-o", vis.output, "DOT output path (default stdout)");
  vis_cmd->add_option("--core-color", vis.core_color, "Color of core-predicate edges")->capture_default_str();
  vis_cmd->add_option("--domain-color", vis.domain_color, "Color of domain-predicate edges")->capture_default_str();

  QueryOptions query;
  auto* query_cmd = app.add_subcommand("query", "Run a conjunctive query against a knowledge base");
  query_cmd->add_option("kb", query.input, "Knowledge base .pl file")->required();
  query_cmd->add_option("goal", query.goal, "Goal, e.g. \"concept(X), !.\"")->required();
  query_cmd->add_option("--limit", query.limit, "Stop after N solutions");

  auto* verify_cmd = app.add_subcommand("verify", "Statistical verification of labeled samples");
  verify_cmd->require_subcommand(1);
  SampleOptions sample;
  auto* sample_cmd = verify_cmd->add_subcommand("sample", "Sample fact lines into a labeling ledger");
  sample_cmd->add_option("kb", sample.inputs, "Knowledge base .pl files")->required();
  sample_cmd->add_option("-k", sample.k, "Lines per file")->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed, "Sampling seed")->capture_default_str();
  sample_cmd->add_option("--ledger", sample.ledger, "Ledger .jsonl path")->required();
  sample_cmd->add_flag("--append", sample.append, "Append instead of overwriting the ledger");
  TestOptions test;
  auto* test_cmd = verify_cmd->add_subcommand("test", "One-sample proportion z-test on a labeled ledger");
  test_cmd->add_option("--ledger", test.ledger, "Ledger .jsonl path")->required();
  test_cmd->add_option("--p0", test.p0, "Benchmark accuracy")->capture_default_str();
  test_cmd->add_option("--alpha", test.alpha, "Significance level")->capture_default_str();
  test_cmd->add_option("--prior-sd", test.prior_sd, "Posterior standard deviation, e.g. 1/250 (default 1/n)");
  CompareOptions compare;
  auto* compare_cmd = verify_cmd->add_subcommand("compare", "Two-proportion z-test between two ledgers");
  compare_cmd->add_option("--ledger-a", compare.ledger_a, "First ledger")->required();
  compare_cmd->add_option("--ledger-b", compare.ledger_b, "Second ledger")->required();
  compare_cmd->add_option("--alpha", compare.alpha, "Significance level")->capture_default_str();

  std::string report_path;
  auto* report_cmd = app.add_subcommand("report", "Summarize a knowledge base file");
  report_cmd->add_option("kb", report_path, "Knowledge base .pl file")->required();

  app.add_subcommand("ontology", "List the controlled predicate vocabulary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*build_cmd) return run_build(build, out, err);
    if (*vis_cmd) return run_visualize(vis, out);
    if (*query_cmd) return run_query(query, out);
    if (*sample_cmd) return run_verify_sample(sample, out);
    if (*test_cmd) return run_verify_test(test, out, err);
    if (*compare_cmd) return run_verify_compare(compare, out, err);
    if (*report_cmd) {
      out << run_report(report_path);
      return kOk;
    }
    out << ontology_listing();
    return kOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const BackendError& e) {
    err << "error: " << e.what() << "\n";
    return e.status == 0 && std::string(e.what()).find("API key") != std::string::npos ? kUsage : kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace kbforge::cli
