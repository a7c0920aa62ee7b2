#include <doctest.h>

#include "test_support.hpp"

using namespace lt;

TEST_SUITE("term_core") {

TEST_CASE("apply_substitution on the worked example") {
  const auto& s = term_split();
  const auto result = apply_substitution(g("A*A+B=C"), sub({{"A", "a"}, {"B", "b"}, {"C", "d+e"}}), s);
  CHECK(show(result) == "a*a+b=d+e");
}

TEST_CASE("apply_substitution identities and errors") {
  const auto& s = term_split();
  CHECK(apply_substitution(g("a+b"), Substitution{}, s) == g("a+b"));
  CHECK(show(apply_substitution(g("AB"), sub({{"A", "xy"}, {"B", "yx"}}), s)) == "xyyx");
  CHECK(verify_deduct(g("AB"), sub({{"A", "xy"}, {"B", "yx"}}), g("xyyx"), s));
  CHECK_THROWS_AS(apply_substitution(g("A+B"), sub({{"A", "x"}}), s), MissingBinding);
}

TEST_CASE("sample_substitution keys follow first occurrence") {
  const auto& s = term_split();
  SymbolSpaceConfig cfg;
  auto rng = derive_rng(0, "sub", 0);
  const auto c = sample_substitution(g("A*A+B=C"), s, cfg, rng);
  CHECK(c.keys() == g("ABC"));
  const auto one = sample_substitution(g("A+A*A-A"), s, cfg, rng);
  CHECK(one.size() == 1);
  const auto reversed = sample_substitution(g("CBCA"), s, cfg, rng);
  CHECK(reversed.keys() == g("CBA"));
  for (const auto& e : c.entries) {
    CHECK(cfg.value_len.contains(static_cast<long long>(e.value.size())));
    for (Token t : e.value) CHECK(s.is_math(t));
  }
}

TEST_CASE("rule length law is uniform on [5,20]") {
  SymbolSpaceConfig cfg;
  const auto& s = term_split();
  std::vector<std::uint64_t> counts(16, 0);
  bool all_have_rule_symbol = true;
  for (std::uint64_t i = 0; i < 10'000; ++i) {
    auto rng = derive_rng(1, "rule-len", i);
    const auto r = sample_rule(s, cfg, rng);
    ++counts.at(r.size() - 5);
    all_have_rule_symbol = all_have_rule_symbol && !distinct_rule_symbols(r, s).empty();
  }
  CHECK(all_have_rule_symbol);
  CHECK(chi2_uniform(counts) < chi2_crit_1pct(15));
}

TEST_CASE("degenerate rule length range") {
  SymbolSpaceConfig cfg;
  cfg.rule_len = {5, 5};
  for (std::uint64_t i = 0; i < 500; ++i) {
    auto rng = derive_rng(2, "rule5", i);
    CHECK(sample_rule(term_split(), cfg, rng).size() == 5);
  }
}

TEST_CASE("distinct rule sampling never repeats a symbol") {
  SymbolSpaceConfig cfg;
  cfg.rule_sampling = RuleSampling::Distinct;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    auto rng = derive_rng(3, "distinct", i);
    auto r = sample_rule(term_split(), cfg, rng);
    std::sort(r.begin(), r.end());
    CHECK(std::adjacent_find(r.begin(), r.end()) == r.end());
  }
}

TEST_CASE("value length law is uniform on [2,8]") {
  SymbolSpaceConfig cfg;
  const auto& s = term_split();
  std::vector<std::uint64_t> counts(7, 0);
  const auto rule = g("A");
  for (std::uint64_t i = 0; i < 10'000; ++i) {
    auto rng = derive_rng(4, "value-len", i);
    ++counts.at(sample_substitution(rule, s, cfg, rng).entries[0].value.size() - 2);
  }
  CHECK(chi2_uniform(counts) < chi2_crit_1pct(6));
}

TEST_CASE("generate_triple is deterministic and sound") {
  SymbolSpaceConfig cfg;
  auto a = derive_rng(0, "gen", 0);
  auto b = derive_rng(0, "gen", 0);
  const auto t1 = generate_triple(cfg, a);
  CHECK(t1 == generate_triple(cfg, b));
  CHECK(verify_deduct(t1.rule, t1.case_, t1.result, t1.split));
}

TEST_CASE("triple invariants over 1e4 triples at S=100 and S=1000") {
  for (int vocab : {100, 1000}) {
    SymbolSpaceConfig cfg;
    cfg.vocab_size = vocab;
    std::uint64_t bad = 0;
    std::size_t max_result = 0;
    std::size_t min_result = 1000;
    for (std::uint64_t i = 0; i < 10'000; ++i) {
      auto rng = derive_rng(static_cast<std::uint64_t>(vocab), "triples", i);
      const auto t = generate_triple(cfg, rng);
      if (check_triple(t, cfg)) ++bad;
      if (std::any_of(t.result.begin(), t.result.end(), [&](Token x) { return t.split.is_rule(x); })) ++bad;
      max_result = std::max(max_result, t.result.size());
      min_result = std::min(min_result, t.result.size());
    }
    CHECK(bad == 0);
    CHECK(max_result <= 180);
    CHECK(min_result >= 5);
  }
}

TEST_CASE("check_triple catches broken triples") {
  SymbolSpaceConfig cfg;
  auto rng = derive_rng(9, "broken", 0);
  auto t = generate_triple(cfg, rng);
  auto bad_result = t;
  bad_result.result.push_back(bad_result.split.math[0]);
  CHECK(check_triple(bad_result, cfg).has_value());
  auto bad_keys = t;
  bad_keys.case_.entries.push_back({t.split.rule.back(), {t.split.math[0], t.split.math[1]}});
  if (std::find(t.rule.begin(), t.rule.end(), t.split.rule.back()) == t.rule.end()) {
    CHECK(check_triple(bad_keys, cfg).has_value());
  }
  auto short_value = t;
  short_value.case_.entries[0].value.resize(1);
  short_value.result = apply_substitution(short_value.rule, short_value.case_, short_value.split);
  CHECK(check_triple(short_value, cfg).has_value());
}

TEST_CASE("twin triples share the rule") {
  SymbolSpaceConfig cfg;
  auto rng = derive_rng(7, "twin", 0);
  const auto w = generate_twin_triple(cfg, rng);
  CHECK(w.second_case.keys() == w.first.case_.keys());
  CHECK(apply_substitution(w.first.rule, w.second_case, w.first.split) == w.second_result);
}

TEST_CASE("relabelling by a bijection preserves soundness") {
  SymbolSpaceConfig cfg;
  cfg.vocab_size = 1000;
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto rng = derive_rng(10, "relabel", i);
    const auto t = generate_triple(cfg, rng);
    auto rng2 = derive_rng(11, "relabel", i);
    const auto fresh = sample_split(cfg, rng2, false);
    std::map<Token, Token> pi;
    for (std::size_t k = 0; k < 44; ++k) pi[t.split.math[k]] = fresh.math[k];
    for (std::size_t k = 0; k < 24; ++k) pi[t.split.rule[k]] = fresh.rule[k];
    auto map_seq = [&](const Sequence& s) {
      Sequence out;
      for (Token x : s) out.push_back(pi.at(x));
      return out;
    };
    Substitution c;
    for (const auto& e : t.case_.entries) c.entries.push_back({pi.at(e.key), map_seq(e.value)});
    CHECK(apply_substitution(map_seq(t.rule), c, fresh) == map_seq(t.result));
  }
}

}  // TEST_SUITE
