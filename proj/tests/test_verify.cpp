#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "kbforge/prolog_codec.hpp"
#include "kbforge/stats.hpp"
#include "kbforge/verify.hpp"

using namespace kbforge;
using namespace kbforge::verify;
namespace fs = std::filesystem;

namespace {

// Upper-tail values from mpmath at 40 digits, rounded to 16 significant digits.
struct TailCase {
  double z;
  double tail;
};
constexpr TailCase kTail[] = {
    {0.0, 0.5},
    {1.0, 1.586552539314571e-01},
    {1.959963984540054, 2.5e-02},
    {3.0, 1.349898031630095e-03},
    {5.0, 2.866515718791939e-07},
    {7.589466384404110, 1.606127966006180e-14},
    {7.747580267412529, 4.683006492887310e-15},
    {10.0, 7.619853024160527e-24},
    {-2.0, 9.772498680518208e-01},
};

std::string fact_file(int n) {
  std::string text = "% header\n:- discontiguous concept/1.\n\n";
  for (int i = 0; i < n; ++i) text += "concept(c" + std::to_string(i) + ").\n";
  return text;
}

std::string temp_path(const std::string& name) { return (fs::temp_directory_path() / ("kbforge_verify_" + name)).string(); }

}  // namespace

TEST(NormalTail, FrozenReferenceValues) {
  for (const auto& c : kTail) {
    EXPECT_NEAR(stats::normal_upper_tail(c.z) / c.tail, 1.0, 1e-6) << c.z;
    EXPECT_NEAR(0.5 * std::erfc(c.z / std::sqrt(2.0)) / c.tail, 1.0, 1e-6) << c.z;
  }
}

TEST(NormalTail, SymmetryAndMonotonicity) {
  double prev = 1.0;
  for (double z = -8.0; z <= 8.0; z += 0.0625) {
    const double t = stats::normal_upper_tail(z);
    EXPECT_NEAR(t + stats::normal_upper_tail(-z), 1.0, 1e-12) << z;
    EXPECT_LE(t, prev) << z;
    EXPECT_NEAR(stats::normal_cdf(z), 1.0 - t, 1e-12);
    prev = t;
  }
  EXPECT_EQ(stats::normal_upper_tail(INFINITY), 0.0);
  EXPECT_EQ(stats::normal_upper_tail(-INFINITY), 1.0);
}

TEST(NormalTail, ErfcAgreesWithLibm) {
  for (double x = -6.0; x <= 26.0; x += 0.01) {
    const double ref = std::erfc(x);
    if (ref < 1e-300) continue;
    EXPECT_NEAR(stats::erfc(x) / ref, 1.0, 1e-12) << x;
  }
}

TEST(NormalQuantile, Values) {
  EXPECT_NEAR(stats::normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(stats::normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(stats::normal_quantile(0.95), 1.644853626951472, 1e-12);
  for (double p = 1e-10; p < 1.0; p = p < 0.01 ? p * 10 : p + 0.01)
    EXPECT_NEAR(stats::normal_cdf(stats::normal_quantile(p)) / p, 1.0, 1e-10) << p;
  EXPECT_THROW(stats::normal_quantile(1.5), Error);
}

TEST(OneSample, Examples) {
  const auto a = one_sample_prop_test(248, 250, 0.80, 0.05);
  EXPECT_NEAR(a.z, 7.589466384404110, 1e-9);
  EXPECT_NEAR(a.p_value / 1.606127966006180e-14, 1.0, 1e-6);
  EXPECT_TRUE(a.reject_null);
  const auto b = one_sample_prop_test(249, 250, 0.80, 0.05);
  EXPECT_NEAR(b.p_value / 4.683006492887310e-15, 1.0, 1e-6);
  EXPECT_TRUE(b.reject_null);
  const auto c = one_sample_prop_test(200, 250, 0.80, 0.05);
  EXPECT_EQ(c.z, 0.0);
  EXPECT_NEAR(c.p_value, 0.5, 1e-15);
  EXPECT_FALSE(c.reject_null);
}

TEST(OneSample, Validation) {
  EXPECT_THROW(one_sample_prop_test(1, 0, 0.8, 0.05), Error);
  EXPECT_THROW(one_sample_prop_test(11, 10, 0.8, 0.05), Error);
  EXPECT_THROW(one_sample_prop_test(5, 10, 1.0, 0.05), Error);
  EXPECT_THROW(one_sample_prop_test(5, 10, 0.8, 0.0), Error);
}

TEST(OneSample, ZScalesWithRootN) {
  // fixed p_hat: z grows as sqrt(n)
  const double z1 = one_sample_prop_test(90, 100, 0.8, 0.05).z;
  const double z4 = one_sample_prop_test(360, 400, 0.8, 0.05).z;
  EXPECT_NEAR(z4 / z1, 2.0, 1e-12);
  // p-value falls as successes rise
  double prev = 1.0;
  for (int s = 0; s <= 250; ++s) {
    const double p = one_sample_prop_test(s, 250, 0.8, 0.05).p_value;
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(TwoSample, ExamplesAndSymmetry) {
  const auto t = two_sample_prop_test(248, 250, 249, 250, 0.05);
  EXPECT_NEAR(t.p_value, 0.562528, 1e-6);
  EXPECT_FALSE(t.reject_null);
  const auto r = two_sample_prop_test(249, 250, 248, 250, 0.05);
  EXPECT_DOUBLE_EQ(r.p_value, t.p_value);
  EXPECT_DOUBLE_EQ(r.z, -t.z);
  EXPECT_EQ(two_sample_prop_test(10, 20, 10, 20, 0.05).p_value, 1.0);
  EXPECT_TRUE(two_sample_prop_test(100, 200, 180, 200, 0.05).reject_null);
  EXPECT_THROW(two_sample_prop_test(250, 250, 250, 250, 0.05), DegenerateError);
  EXPECT_THROW(two_sample_prop_test(0, 10, 0, 30, 0.05), DegenerateError);
}

TEST(Wald, Examples) {
  const auto a = wald_ci(248, 250, 0.05);
  EXPECT_NEAR(a.halfwidth, 0.0110428, 1e-6);
  EXPECT_NEAR(a.center, 0.992, 1e-15);
  EXPECT_TRUE(a.clipped_upper);
  EXPECT_EQ(a.upper(), 1.0);
  const auto b = wald_ci(249, 250, 0.05);
  EXPECT_NEAR(b.halfwidth, 0.0078242, 1e-6);
  const auto full = wald_ci(10, 10, 0.05);
  EXPECT_EQ(full.halfwidth, 0.0);
  EXPECT_FALSE(full.clipped_upper);
  const auto half = wald_ci(50, 100, 0.05);
  EXPECT_NEAR(half.lower(), 0.5 - 1.959963984540054 * 0.05, 1e-12);
}

TEST(Posterior, Examples) {
  const auto p = bayes_posterior(248, 250, 1.0 / 250);
  EXPECT_NEAR(p.mean, 0.992, 1e-15);
  EXPECT_NEAR(p.sd, 0.004, 1e-15);
  EXPECT_FALSE(p.truncated);
  EXPECT_TRUE(bayes_posterior(249, 250, 1.0 / 250).truncated);
  EXPECT_THROW(bayes_posterior(1, 2, 0.0), Error);
}

TEST(FormatG6, SixSignificantDigits) {
  EXPECT_EQ(format_g6(1.606127966006180e-14), "1.60613e-14");
  EXPECT_EQ(format_g6(0.562528), "0.562528");
  EXPECT_EQ(format_g6(0.8), "0.8");
}

TEST(Sampling, DistinctFactLinesOnly) {
  const auto text = fact_file(300);
  const auto s = sample_assertions("kb.pl", text, 10, 42);
  ASSERT_EQ(s.size(), 10u);
  std::set<std::size_t> lines;
  for (const auto& a : s) {
    lines.insert(a.line);
    EXPECT_GE(a.line, 4u);
    EXPECT_EQ(a.fact.rfind("concept(c", 0), 0u);
    EXPECT_EQ(a.label, Label::unlabeled);
  }
  EXPECT_EQ(lines.size(), 10u);
  EXPECT_EQ(sample_assertions("kb.pl", text, 10, 42), s);
  EXPECT_NE(sample_assertions("kb.pl", text, 10, 43), s);
}

TEST(Sampling, ExhaustiveAndTooFew) {
  const auto text = fact_file(10);
  const auto all = sample_assertions("kb.pl", text, 10, 7);
  std::set<std::size_t> lines;
  for (const auto& a : all) lines.insert(a.line);
  EXPECT_EQ(lines.size(), 10u);
  EXPECT_EQ(*lines.begin(), 4u);
  EXPECT_EQ(*lines.rbegin(), 13u);
  EXPECT_THROW(sample_assertions("kb.pl", text, 11, 7), SamplingError);
  EXPECT_TRUE(sample_assertions("kb.pl", text, 0, 7).empty());
}

TEST(Sampling, RoughlyUniform) {
  const auto text = fact_file(20);
  std::map<std::size_t, int> hits;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) ++hits[sample_assertions("kb.pl", text, 1, seed)[0].line];
  ASSERT_EQ(hits.size(), 20u);
  for (const auto& [line, n] : hits) EXPECT_NEAR(n, 200, 60) << line;
}

TEST(Ledger, RoundTripAndCounts) {
  const auto path = temp_path("ledger.jsonl");
  auto records = sample_assertions("kb.pl", fact_file(30), 5, 1);
  records[0].label = Label::correct;
  records[1].label = Label::incorrect;
  records[2].fact = "related_to('it''s', \"x\")";
  write_ledger(path, records, false);
  write_ledger(path, {records[3]}, true);
  const auto back = read_ledger(path);
  ASSERT_EQ(back.size(), 6u);
  EXPECT_EQ(std::vector<SampledAssertion>(back.begin(), back.begin() + 5), records);
  const auto counts = count_labels(back);
  EXPECT_EQ(counts.correct, 1);
  EXPECT_EQ(counts.incorrect, 1);
  EXPECT_EQ(counts.unlabeled, 4);
  EXPECT_EQ(counts.labeled(), 2);

  write_text_file(path, "{\"file\":\"a\",\"line\":1,\"fact\":\"x\",\"label\":\"maybe\"}\n");
  EXPECT_THROW(read_ledger(path), Error);
  write_text_file(path, "{not json\n");
  EXPECT_THROW(read_ledger(path), ParseError);
  EXPECT_THROW(read_ledger(temp_path("absent.jsonl")), IoError);
  fs::remove(path);
}
