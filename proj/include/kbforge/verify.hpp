#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kbforge/errors.hpp"
#include "kbforge/prolog_codec.hpp"
#include "kbforge/stats.hpp"

namespace kbforge::verify {

enum class Label { unlabeled, correct, incorrect };

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::unlabeled: return "unlabeled";
    case Label::correct: return "correct";
    case Label::incorrect: return "incorrect";
  }
  return "unlabeled";
}

inline Label parse_label(std::string_view s) {
  if (s == "correct") return Label::correct;
  if (s == "incorrect") return Label::incorrect;
  if (s == "unlabeled" || s.empty()) return Label::unlabeled;
  throw Error("unknown label '" + std::string(s) + "' (expected correct, incorrect or unlabeled)");
}

struct SampledAssertion {
  std::string file;
  std::size_t line = 0;
  std::string fact;
  Label label = Label::unlabeled;

  friend bool operator==(const SampledAssertion&, const SampledAssertion&) = default;
};

namespace detail {

// Unbiased integer in [0, bound) by rejection; mt19937_64 output is fully
// specified, so the draw sequence is identical on every platform.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

}  // namespace detail

/// Line numbers (1-based) of fact clauses in a .pl document, in file order.
/// Comments, directives and blank lines never qualify.
inline std::vector<std::size_t> fact_lines(std::string_view text) {
  const auto kb = parse_kb(text);
  std::vector<std::size_t> lines;
  for (const auto& f : kb.facts)
    if (lines.empty() || lines.back() != f.line) lines.push_back(f.line);
  return lines;
}

/// Draws `k` distinct fact lines uniformly without replacement (partial
/// Fisher-Yates over mt19937_64 seeded with `seed`). Results are in draw order.
inline std::vector<SampledAssertion> sample_assertions(const std::string& file_id, std::string_view text, std::size_t k,
                                                       std::uint64_t seed) {
  auto lines = fact_lines(text);
  if (lines.size() < k)
    throw SamplingError(file_id + " has " + std::to_string(lines.size()) + " fact lines, fewer than the " +
                        std::to_string(k) + " requested");
  const auto raw = detail::split_lines(text);
  std::mt19937_64 rng(seed);
  std::vector<SampledAssertion> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(detail::bounded(rng, lines.size() - i));
    std::swap(lines[i], lines[j]);
    const auto line = lines[i];
    out.push_back({file_id, line, std::string(kbforge::detail::trim(raw.at(line - 1))), Label::unlabeled});
  }
  return out;
}

inline std::vector<SampledAssertion> sample_assertions_from_file(const std::string& path, std::size_t k,
                                                                 std::uint64_t seed) {
  return sample_assertions(path, read_text_file(path), k, seed);
}

inline nlohmann::json to_json(const SampledAssertion& a) {
  return {{"file", a.file}, {"line", a.line}, {"fact", a.fact}, {"label", std::string(to_string(a.label))}};
}

/// One JSON record per line.
inline void write_ledger(const std::string& path, const std::vector<SampledAssertion>& records, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw IoError("cannot write ledger " + path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<SampledAssertion> read_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ledger " + path);
  std::vector<SampledAssertion> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (kbforge::detail::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SampledAssertion a;
      a.file = j.value("file", "");
      a.line = j.value("line", std::size_t{0});
      a.fact = j.value("fact", "");
      a.label = parse_label(j.value("label", "unlabeled"));
      out.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("ledger ") + path + ": " + e.what(), lineno, 1);
    }
  }
  return out;
}

struct LabelCounts {
  int correct = 0;
  int incorrect = 0;
  int unlabeled = 0;

  int labeled() const { return correct + incorrect; }
};

inline LabelCounts count_labels(const std::vector<SampledAssertion>& records) {
  LabelCounts c;
  for (const auto& r : records) {
    switch (r.label) {
      case Label::correct: ++c.correct; break;
      case Label::incorrect: ++c.incorrect; break;
      case Label::unlabeled: ++c.unlabeled; break;
    }
  }
  return c;
}

struct TestReport {
  int n = 0;
  int successes = 0;
  double p0 = 0.0;  // benchmark proportion; pooled proportion for two-sample tests
  double alpha = 0.05;
  double z = 0.0;
  double p_value = 1.0;
  bool reject_null = false;

  double p_hat() const { return n ? static_cast<double>(successes) / n : 0.0; }
};

struct IntervalReport {
  double center = 0.0;
  double halfwidth = 0.0;
  bool clipped_upper = false;

  double lower() const { return std::max(0.0, center - halfwidth); }
  double upper() const { return std::min(1.0, center + halfwidth); }
};

struct PosteriorReport {
  double mean = 0.0;
  double sd = 0.0;
  bool truncated = false;  // right-truncated at 1
};

namespace detail {

inline void check_counts(int successes, int n) {
  if (n < 1) throw Error("sample size must be at least 1");
  if (successes < 0 || successes > n) throw Error("successes must lie in [0, n]");
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
}

}  // namespace detail

/// H0: p <= p0 against H1: p > p0, normal approximation with the null variance.
inline TestReport one_sample_prop_test(int successes, int n, double p0, double alpha) {
  detail::check_counts(successes, n);
  detail::check_alpha(alpha);
  if (!(p0 > 0.0 && p0 < 1.0)) throw Error("p0 must lie in (0, 1)");
  TestReport r;
  r.n = n;
  r.successes = successes;
  r.p0 = p0;
  r.alpha = alpha;
  r.z = (r.p_hat() - p0) / std::sqrt(p0 * (1.0 - p0) / n);
  r.p_value = stats::normal_upper_tail(r.z);
  r.reject_null = r.p_value < alpha;
  return r;
}

/// Wald interval p_hat +- z_{1-alpha/2} sqrt(p_hat (1 - p_hat) / n).
inline IntervalReport wald_ci(int successes, int n, double alpha) {
  detail::check_counts(successes, n);
  detail::check_alpha(alpha);
  IntervalReport r;
  r.center = static_cast<double>(successes) / n;
  r.halfwidth = stats::normal_quantile(1.0 - alpha / 2.0) * std::sqrt(r.center * (1.0 - r.center) / n);
  r.clipped_upper = r.center + r.halfwidth > 1.0;
  return r;
}

/// Two-sided pooled test of H0: p1 = p2. `z` is signed as p_hat2 - p_hat1.
inline TestReport two_sample_prop_test(int s1, int n1, int s2, int n2, double alpha) {
  detail::check_counts(s1, n1);
  detail::check_counts(s2, n2);
  detail::check_alpha(alpha);
  const double pooled = static_cast<double>(s1 + s2) / (n1 + n2);
  if (pooled <= 0.0 || pooled >= 1.0)
    throw DegenerateError("pooled proportion is " + std::to_string(pooled) + "; the test statistic has zero variance");
  TestReport r;
  r.n = n1 + n2;
  r.successes = s1 + s2;
  r.p0 = pooled;
  r.alpha = alpha;
  const double p1 = static_cast<double>(s1) / n1;
  const double p2 = static_cast<double>(s2) / n2;
  r.z = (p2 - p1) / std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
  r.p_value = std::min(1.0, 2.0 * stats::normal_upper_tail(std::fabs(r.z)));
  r.reject_null = r.p_value < alpha;
  return r;
}

/// Normal summary N(p_hat, sd) of accuracy; `sd` is a standard deviation.
inline PosteriorReport bayes_posterior(int successes, int n, double sd) {
  detail::check_counts(successes, n);
  if (!(sd > 0.0)) throw Error("posterior standard deviation must be positive");
  PosteriorReport r;
  r.mean = static_cast<double>(successes) / n;
  r.sd = sd;
  r.truncated = r.mean + 2.0 * sd > 1.0;
  return r;
}

/// 6 significant digits.
inline std::string format_g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace kbforge::verify
