#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "kbforge/inference.hpp"
#include "kbforge/prolog_codec.hpp"
#include "support/oracles.hpp"

using namespace kbforge;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) { return (fs::temp_directory_path() / ("kbforge_codec_" + name)).string(); }

KnowledgeBase tiny_kb() {
  KnowledgeBase kb;
  kb.root = Atom{"plato"};
  kb.add(Fact::declare(Atom{"plato"}));
  kb.add(Fact::declare(Atom{"academy"}));
  kb.add(Fact::relation("founded_by", Atom{"academy"}, Atom{"plato"}, std::string("Plato has founded the academy.")));
  return kb;
}

}  // namespace

TEST(NormalizeAtom, Examples) {
  EXPECT_EQ(normalize_atom("Theory of Forms").render(), "theory_of_forms");
  EXPECT_EQ(normalize_atom("Plato").render(), "plato");
  EXPECT_EQ(normalize_atom("Søren Kierkegaard").render(), "soren_kierkegaard");
  EXPECT_EQ(normalize_atom("1789").render(), "'1789'");
}

TEST(NormalizeAtom, Rules) {
  EXPECT_EQ(normalize_atom("  Jean-Paul   Sartre ").text, "jean_paul_sartre");
  EXPECT_EQ(normalize_atom("H.P. Lovecraft").text, "hp_lovecraft");
  EXPECT_EQ(normalize_atom("a__b--c").text, "a_b_c");
  EXPECT_EQ(normalize_atom("Übermensch").text, "ubermensch");
  EXPECT_EQ(normalize_atom("Æsir").text, "aesir");
  EXPECT_EQ(normalize_atom("Straße").text, "strasse");
  EXPECT_EQ(normalize_atom("Musée d'Orsay").text, "musee_dorsay");
  EXPECT_EQ(normalize_atom("R'lyeh").text, "rlyeh");
  EXPECT_EQ(normalize_atom("World War I").text, "world_war_i");
  EXPECT_EQ(normalize_atom("_leading").text, "leading");
  // start with a digit or empty after cleaning: quoted original
  EXPECT_EQ(normalize_atom("19th century"), (Atom{"19th century"}));
  EXPECT_EQ(normalize_atom("?\?!").render(), "'?\?!'");
  // no single-character fold exists
  EXPECT_FALSE(normalize_atom("Łódź").is_plain());
  EXPECT_FALSE(normalize_atom("東京").is_plain());
}

TEST(NormalizeAtom, EmptyInputThrows) {
  EXPECT_THROW(normalize_atom(""), NormalizationError);
  EXPECT_THROW(normalize_atom(" \t\n"), NormalizationError);
}

TEST(NormalizeAtom, IdempotentOnPlainOutput) {
  const std::vector<std::string> inputs = {"Theory of Forms", "Søren Kierkegaard", "H.P. Lovecraft", "Impression, Sunrise",
                                           "a--b", "Galleria dell'Accademia", "Mi-Go", "x_1", "Æther", "Übermensch"};
  for (const auto& in : inputs) {
    const auto once = normalize_atom(in);
    ASSERT_TRUE(once.is_plain()) << in;
    EXPECT_EQ(normalize_atom(once.text), once) << in;
  }
}

TEST(AtomRender, QuotesAndEscapes) {
  EXPECT_EQ((Atom{"it's"}).render(), "'it''s'");
  EXPECT_EQ((Atom{"a\\b"}).render(), "'a\\\\b'");
  EXPECT_EQ((Atom{"a\nb"}).render(), "'a\\nb'");
  EXPECT_EQ((Atom{"Plato"}).render(), "'Plato'");
  EXPECT_EQ((Atom{"plato_2"}).render(), "plato_2");
}

TEST(FactHash, Properties) {
  const auto a = Fact::relation("related_to", Atom{"socrates"}, Atom{"plato"});
  const auto b = Fact::relation("related_to", Atom{"plato"}, Atom{"socrates"});
  auto c = a;
  c.explanation = "teacher";
  EXPECT_EQ(fact_hash(a), fact_hash(a));
  EXPECT_NE(fact_hash(a), fact_hash(b));
  EXPECT_EQ(fact_hash(a), fact_hash(c));
  // FNV-1a 64 of the canonical text, frozen
  EXPECT_EQ(digest_of("").hex(), "cbf29ce484222325");
  EXPECT_EQ(digest_of("a").hex(), "af63dc4c8601ec8c");
}

TEST(Deduplicate, Examples) {
  KnowledgeBase kb;
  const auto f1 = Fact::declare(Atom{"a"});
  const auto f2 = Fact::relation("causes", Atom{"a"}, Atom{"b"}, std::string("first"));
  auto f2b = f2;
  f2b.explanation = "second";
  kb.facts = {f1, f2, f1, f2b};
  const auto d = deduplicate(kb);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.facts[1].explanation, "first");
  EXPECT_TRUE(deduplicate(KnowledgeBase{}).empty());
}

TEST(Deduplicate, PlantedDuplicates) {
  std::mt19937_64 rng(2024);
  KnowledgeBase kb;
  std::set<std::string> distinct;
  for (int i = 0; i < 70; ++i) {
    const auto f = Fact::relation("causes", Atom{"n" + std::to_string(i)}, Atom{"m" + std::to_string(rng() % 5)});
    kb.facts.push_back(f);
    distinct.insert(f.canonical());
  }
  for (int i = 0; i < 30; ++i) kb.facts.push_back(kb.facts[rng() % 70]);
  std::shuffle(kb.facts.begin() + 70, kb.facts.end(), rng);
  EXPECT_EQ(distinct.size(), 70u);
  EXPECT_EQ(deduplicate(kb).size(), 70u);
}

TEST(EmitKb, Examples) {
  KnowledgeBase single;
  single.add(Fact::declare(Atom{"plato"}));
  const auto text = emit_kb(single);
  EXPECT_NE(text.find(":- discontiguous concept/1."), std::string::npos);
  EXPECT_NE(text.find("concept(plato)."), std::string::npos);
  EXPECT_EQ(text.back(), '\n');

  const auto empty = emit_kb(KnowledgeBase{});
  EXPECT_EQ(parse_kb(empty).size(), 0u);
  EXPECT_EQ(empty.find(":-"), std::string::npos);

  const auto doc = emit_kb(tiny_kb());
  EXPECT_NE(doc.find("% Explanation: Plato has founded the academy.\nfounded_by(academy, plato).\n"), std::string::npos);
}

TEST(EmitKb, LayoutAndDeterminism) {
  auto kb = tiny_kb();
  kb.header = {{"Topic", "Plato"}, {"Depth", "3"}};
  EmitOptions opt;
  opt.timestamp = "2026-01-01T00:00:00Z";
  const auto doc = emit_kb(kb, opt);
  EXPECT_EQ(doc, emit_kb(kb, opt));
  EXPECT_EQ(doc,
            "% Knowledge base generated by kbforge " + std::string(kVersion) +
                "\n"
                "% Root: plato\n"
                "% Topic: Plato\n"
                "% Depth: 3\n"
                "% Generated: 2026-01-01T00:00:00Z\n"
                "\n"
                ":- discontiguous concept/1.\n"
                ":- discontiguous founded_by/2.\n"
                "\n"
                "concept(plato).\n"
                "concept(academy).\n"
                "\n"
                "% Explanation: Plato has founded the academy.\n"
                "founded_by(academy, plato).\n");
}

TEST(EmitKb, ConceptsComeFirstEvenIfAddedLater) {
  KnowledgeBase kb;
  kb.add(Fact::relation("causes", Atom{"a"}, Atom{"b"}));
  kb.add(Fact::declare(Atom{"a"}));
  kb.add(Fact::declare(Atom{"b"}));
  const auto doc = emit_kb(kb);
  EXPECT_LT(doc.find("concept(a)."), doc.find("causes(a, b)."));
  EXPECT_LT(doc.find("discontiguous concept/1"), doc.find("discontiguous causes/2"));
}

TEST(ParseKb, Examples) {
  EXPECT_EQ(parse_kb("concept(plato).\n").size(), 1u);

  const auto kb = parse_kb("% Explanation: core doctrine\ndeveloped_by(theory_of_forms, plato).\n");
  ASSERT_EQ(kb.size(), 1u);
  EXPECT_EQ(kb.facts[0].explanation, "core doctrine");
  EXPECT_EQ(kb.facts[0].canonical(), "developed_by(theory_of_forms,plato)");

  try {
    parse_kb("concept(plato)");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 1u);
  }
}

TEST(ParseKb, UnsupportedTerms) {
  EXPECT_THROW(parse_kb("concept(X).\n"), UnsupportedTermError);
  EXPECT_THROW(parse_kb("r(a, b, c).\n"), UnsupportedTermError);
  EXPECT_THROW(parse_kb("r.\n"), UnsupportedTermError);
  EXPECT_THROW(parse_kb("r(f(a), b).\n"), UnsupportedTermError);
  EXPECT_THROW(parse_kb("r(a) :- s(a).\n"), UnsupportedTermError);
}

TEST(ParseKb, SyntaxErrorsCarryPosition) {
  try {
    parse_kb("concept(a).\n\nconcept(b)\nconcept(c).\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 4u);
  }
  try {
    parse_kb("concept('unterminated).\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 1u);
  }
  EXPECT_THROW(parse_kb("concept(a))."), ParseError);
  EXPECT_THROW(parse_kb("concept(a). /* open"), ParseError);
}

TEST(ParseKb, DirectivesCommentsAndExplanations) {
  const auto kb = parse_kb(
      "% Knowledge base generated by kbforge 0.1.0\n"
      "% Root: 'Plato'\n"
      "% Topic: Plato\n"
      ":- discontiguous concept/1, causes/2.\n"
      ":- dynamic(foo/1).\n"
      "/* block\n comment */\n"
      "concept('Plato'). % trailing comment\n"
      "% Explanation: dropped by the directive below\n"
      ":- initialization(main).\n"
      "concept(b).\n"
      "%   Explanation:   spaced   \n"
      "causes('Plato', b).\n"
      "concept(1789).\n");
  ASSERT_TRUE(kb.root.has_value());
  EXPECT_EQ(kb.root->text, "Plato");
  ASSERT_EQ(kb.header.size(), 1u);
  EXPECT_EQ(kb.header[0].first, "Topic");
  EXPECT_EQ(kb.extra_directives, (std::vector<std::string>{"dynamic(foo/1)", "initialization(main)"}));
  ASSERT_EQ(kb.size(), 4u);
  EXPECT_FALSE(kb.facts[1].explanation.has_value());
  EXPECT_EQ(kb.facts[2].explanation, "spaced");
  EXPECT_EQ(kb.facts[2].line, 13u);
  EXPECT_EQ(kb.facts[3].args[0].text, "1789");
}

TEST(ParseKb, KeepsDuplicatesValidateRejects) {
  const auto kb = parse_kb("concept(a).\nconcept(a).\n");
  EXPECT_EQ(kb.size(), 2u);
  EXPECT_THROW(validate_kb(kb), ValidationError);
  EXPECT_THROW(validate_kb(parse_kb("concept(a).\ncauses(a, b).\n")), ValidationError);
  EXPECT_NO_THROW(validate_kb(parse_kb("concept(a).\nconcept(b).\ncauses(a, b).\n")));
}

TEST(Codec, RoundTripGeneratedKbs) {
  oracle::Rng rng(99);
  for (int i = 0; i < 300; ++i) {
    const auto kb = oracle::random_kb(rng);
    const auto text = emit_kb(kb);
    const auto back = parse_kb(text);
    ASSERT_TRUE(same_facts(kb, back)) << text;
    EXPECT_EQ(kb.root, back.root);
    EXPECT_EQ(emit_kb(back), text);
    EXPECT_NO_THROW(validate_kb(back));
  }
}

TEST(Lint, TemporalPredicates) {
  KnowledgeBase kb;
  kb.add(Fact::relation("published_in", Atom{"frankenstein"}, Atom{"1818"}));
  kb.add(Fact::relation("born_in", Atom{"dante"}, Atom{"florence"}));
  kb.add(Fact::relation("died_in", Atom{"aquinas"}, Atom{"12745"}));
  kb.add(Fact::relation("occurred_in", Atom{"sack_of_rome"}, Atom{"410 AD"}));
  kb.add(Fact::relation("causes", Atom{"x"}, Atom{"99999"}));
  const auto warnings = lint_kb(kb);
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_NE(warnings[0].find("12745"), std::string::npos);
  EXPECT_NE(warnings[1].find("410 AD"), std::string::npos);
  EXPECT_TRUE(is_plausible_year("1"));
  EXPECT_TRUE(is_plausible_year("1789"));
  EXPECT_FALSE(is_plausible_year("17890"));
  EXPECT_FALSE(is_plausible_year(""));
}

TEST(Consult, FileWorkflow) {
  const auto good = temp_path("good.pl");
  write_text_file(good, emit_kb(tiny_kb()));
  const auto kb = consult(good);
  EXPECT_EQ(kb.size(), 3u);
  EXPECT_EQ(solve(parse_query("concept(X), !."), kb).size(), 1u);

  EXPECT_THROW(consult(temp_path("missing.pl")), IoError);

  const auto bad = temp_path("bad.pl");
  write_text_file(bad, "concept(a).\nconcept(b).\n\n\n% note\n\nconcept(c d).\n");
  try {
    consult(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 7u);
    EXPECT_NE(std::string(e.what()).find(bad), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
  fs::remove(good);
  fs::remove(bad);
}
