#include <doctest.h>

#include <set>

#include "test_support.hpp"

using namespace lt;

TEST_SUITE("symbol_space") {

TEST_CASE("structural tokens sit outside the symbol range and round-trip by name") {
  for (Token t = 0; t >= tok::kLowest; --t) {
    CHECK(is_structural(t));
    CHECK(structural_from_name(structural_name(t)) == t);
  }
  CHECK_FALSE(is_structural(1));
  CHECK(structural_name(tok::kSep) == "<s>");
  CHECK_FALSE(structural_from_name("A").has_value());
}

TEST_CASE("derive_rng streams") {
  auto first10 = [](RngHandle r) {
    std::vector<std::uint64_t> v;
    for (int i = 0; i < 10; ++i) v.push_back(r());
    return v;
  };
  CHECK(first10(derive_rng(42, "gen", 0)) == first10(derive_rng(42, "gen", 0)));
  CHECK(first10(derive_rng(42, "gen", 0)) != first10(derive_rng(42, "gen", 1)));
  CHECK(first10(derive_rng(42, "gen", 7)) != first10(derive_rng(43, "gen", 7)));
  CHECK(first10(derive_rng(42, "gen", 7)) != first10(derive_rng(42, "gem", 7)));
  const auto base = derive_rng(1, "x", 2);
  CHECK(first10(base.fork(0)) == first10(base.fork(0)));
  CHECK(first10(base.fork(0)) != first10(base.fork(1)));
}

TEST_CASE("bounded draws stay in range and hit every value") {
  auto rng = derive_rng(3, "bounds", 0);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const int v = rng.uniform_int(5, 11);
    REQUIRE(v >= 5);
    REQUIRE(v <= 11);
    ++seen[static_cast<std::size_t>(v - 5)];
  }
  for (int c : seen) CHECK(c > 0);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("sample_split at S=100 gives disjoint canonical 44/24 sets") {
  SymbolSpaceConfig cfg;
  auto rng = derive_rng(0, "split", 0);
  const auto s = sample_split(cfg, rng, false);
  CHECK(s.math.size() == 44);
  CHECK(s.rule.size() == 24);
  CHECK(s.string.empty());
  CHECK(s.disjoint());
  CHECK(s.canonical());
  std::set<Token> all(s.math.begin(), s.math.end());
  all.insert(s.rule.begin(), s.rule.end());
  CHECK(all.size() == 68);
  CHECK(*all.begin() >= 1);
  CHECK(*all.rbegin() <= 100);
}

TEST_CASE("S=68 forces a partition of 1..68") {
  SymbolSpaceConfig cfg;
  cfg.vocab_size = 68;
  auto rng = derive_rng(5, "split", 9);
  const auto s = sample_split(cfg, rng, false);
  std::set<Token> all(s.math.begin(), s.math.end());
  all.insert(s.rule.begin(), s.rule.end());
  CHECK(all.size() == 68);
  CHECK(*all.begin() == 1);
  CHECK(*all.rbegin() == 68);
}

TEST_CASE("S=67 is a config error") {
  SymbolSpaceConfig cfg;
  cfg.vocab_size = 67;
  auto rng = derive_rng(0, "split", 0);
  CHECK_THROWS_AS(sample_split(cfg, rng, false), ConfigError);
  CHECK_THROWS_AS(cfg.validate(false), ConfigError);
  cfg.vocab_size = 68;
  CHECK_NOTHROW(cfg.validate(false));
  CHECK_THROWS_AS(cfg.validate(true), ConfigError);  // 92 needed with strings
  cfg.rule_len = {0, 3};
  CHECK_THROWS_AS(cfg.validate(false), ConfigError);
}

TEST_CASE("large vocabularies use the sparse sampler and stay valid") {
  SymbolSpaceConfig cfg;
  cfg.vocab_size = 25000;
  auto rng = derive_rng(11, "split", 0);
  const auto s = sample_split(cfg, rng, true);
  CHECK(s.math.size() == 44);
  CHECK(s.rule.size() == 24);
  CHECK(s.string.size() == 24);
  CHECK(s.disjoint());
  CHECK(s.canonical());
  CHECK(s.string.back() <= 25000);
}

TEST_CASE("sample_split is a pure function of the stream") {
  SymbolSpaceConfig cfg;
  auto a = derive_rng(8, "split", 3);
  auto b = derive_rng(8, "split", 3);
  CHECK(sample_split(cfg, a, true) == sample_split(cfg, b, true));
}

TEST_CASE("disjointness over 1e5 splits") {
  SymbolSpaceConfig cfg;
  std::uint64_t bad = 0;
  for (std::uint64_t i = 0; i < 100'000; ++i) {
    auto rng = derive_rng(i % 7, "disjoint", i);
    const auto s = sample_split(cfg, rng, (i & 1) != 0);
    if (!s.disjoint() || !s.canonical()) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("math membership frequency is 44/100 per id within 3 standard errors") {
  SymbolSpaceConfig cfg;
  constexpr int kTrials = 100'000;
  std::vector<int> hits(101, 0);
  for (int i = 0; i < kTrials; ++i) {
    auto rng = derive_rng(2024, "uniform", static_cast<std::uint64_t>(i));
    for (Token t : sample_split(cfg, rng, false).math) ++hits[static_cast<std::size_t>(t)];
  }
  const double p = 0.44;
  const double se = std::sqrt(p * (1 - p) / kTrials);
  int outside = 0;
  for (int id = 1; id <= 100; ++id) {
    const double f = static_cast<double>(hits[static_cast<std::size_t>(id)]) / kTrials;
    if (std::abs(f - p) > 3 * se) ++outside;
  }
  CHECK(outside == 0);
}

TEST_CASE("glyphs") {
  const auto& s = term_split();
  CHECK(glyph_of(s.rule[0], s) == "A");
  CHECK(glyph_of(s.rule[1], s) == "B");
  CHECK(render_glyphs(std::vector<Token>{tok::kSep}, s) == "<s>");
  CHECK_THROWS_AS(render_glyphs(std::vector<Token>{99}, s), UnknownSymbol);
  CHECK(glyph_of(s.math[0], s) == "*");
  CHECK(glyph_of(s.math[2], s) == "=");

  const auto& r = rewrite_split();
  CHECK(glyph_of(r.string[0], r) == "a");
  CHECK(glyph_of(r.math[2], r) == "-");
}

TEST_CASE("glyph rendering round-trips in both styles") {
  SymbolSpaceConfig cfg;
  cfg.vocab_size = 1000;
  cfg.n_rule = 30;  // past the alphabet: fallback glyphs
  cfg.n_math = 50;
  for (bool with_string : {false, true}) {
    auto rng = derive_rng(1, "glyph", with_string ? 1 : 0);
    const auto s = sample_split(cfg, rng, with_string);
    Sequence all;
    for (const auto* cls : {&s.math, &s.rule, &s.string}) all.insert(all.end(), cls->begin(), cls->end());
    all.push_back(tok::kSep);
    all.push_back(tok::kLBrace);
    for (auto style : {GlyphStyle::Spaced, GlyphStyle::Compact}) {
      CHECK(parse_glyphs(render_glyphs(all, s, style), s) == all);
    }
  }
}

TEST_CASE("unknown glyphs are rejected") {
  CHECK_THROWS_AS(parse_glyphs("A<bogus>", term_split()), UnknownSymbol);
  CHECK_THROWS_AS(parse_glyphs("[x3]", term_split()), UnknownSymbol);
}

}  // TEST_SUITE
