#include <doctest.h>

#include <set>

#include "test_support.hpp"

using namespace lt;

namespace {

std::set<Sequence> rule_set(const SolutionSet<Sequence>& s) { return {s.solutions.begin(), s.solutions.end()}; }

std::set<std::string> shown(const SolutionSet<Sequence>& s, const SymbolSplit& split = term_split()) {
  std::set<std::string> out;
  for (const auto& x : s.solutions) out.insert(show(x, split));
  return out;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("verify_deduct") {
  const auto& s = term_split();
  const auto c = sub({{"A", "a"}, {"B", "b"}, {"C", "d+e"}});
  CHECK(verify_deduct(g("A*A+B=C"), c, g("a*a+b=d+e"), s));
  CHECK_FALSE(verify_deduct(g("A*A+B=C"), c, g("a*a+b=d+f"), s));
  CHECK(verify_deduct(g("a+b"), {}, g("a+b"), s));
  CHECK_THROWS_AS(verify_deduct(g("A+D"), c, g("a+b"), s), MissingBinding);
}

TEST_CASE("abduct: worked example needs one-token values") {
  const auto& s = term_split();
  const auto wanted = sub({{"A", "a"}, {"B", "b"}, {"C", "d+e"}});
  const auto wide = solve_abduct(g("A*A+B=C"), g("a*a+b=d+e"), s, {1, 8});
  CHECK(wide.contains(wanted));
  CHECK_FALSE(wide.truncated);
  CHECK(wide.size() == 1);
  CHECK(solve_abduct(g("A*A+B=C"), g("a*a+b=d+e"), s, {2, 8}).empty());
}

TEST_CASE("abduct: segmentation counts") {
  const auto& s = term_split();
  const auto two = solve_abduct(g("AB"), g("vwxyz"), s, {2, 8});
  CHECK(two.size() == 2);
  CHECK(two.contains(sub({{"A", "vw"}, {"B", "xyz"}})));
  CHECK(two.contains(sub({{"A", "vwx"}, {"B", "yz"}})));
  const auto one = solve_abduct(g("A+A"), g("ab+ab"), s, {2, 8});
  CHECK(one.size() == 1);
  CHECK(one.contains(sub({{"A", "ab"}})));
}

TEST_CASE("induct examples") {
  const auto& s = term_split();
  const auto three = solve_induct(sub({{"A", "ab"}}), g("ab+ab"), {{1, 20}, false});
  CHECK(shown(three) == std::set<std::string>{"A+A", "A+ab", "ab+A"});
  const auto four = solve_induct(sub({{"A", "ab"}}), g("ab+ab"), {{1, 20}, true});
  CHECK(shown(four) == std::set<std::string>{"A+A", "A+ab", "ab+A", "ab+ab"});
  CHECK(solve_induct(sub({{"A", "a"}, {"B", "b"}, {"C", "d+e"}}), g("a*a+b=d+e"), {{1, 20}, false})
            .contains(g("A*A+B=C")));
  CHECK(solve_induct(sub({{"A", "xy"}}), g("zz"), {{1, 20}, false}).empty());
  (void)s;
}

TEST_CASE("induct v3 intersects two pairs") {
  const InductOptions opts{{1, 20}, false};
  const auto c1 = sub({{"A", "ab"}});
  CHECK(rule_set(solve_induct_v3(c1, g("ab+ab"), c1, g("ab+ab"), opts)) ==
        rule_set(solve_induct(c1, g("ab+ab"), opts)));
  CHECK(shown(solve_induct_v3(c1, g("ab+ab"), sub({{"A", "cd"}}), g("cd+cd"), opts)) ==
        std::set<std::string>{"A+A"});
  CHECK(solve_induct_v3(c1, g("ab+ab"), sub({{"A", "cd"}}), g("cd-cd"), opts).empty());
}

TEST_CASE("induct v3 from results alone, up to renaming") {
  const auto& s = term_split();
  const auto sols = solve_induct_v3_results(g("ab+ab"), g("cd+cd"), s, {1, 20}, {1, 8}, 100'000);
  CHECK_FALSE(sols.truncated);
  CHECK(rule_set(sols).size() == sols.size());
  CHECK(sols.contains(g("A+A")));
  CHECK(sols.contains(g("A")));
  CHECK(sols.contains(g("A+B")));
  CHECK_FALSE(sols.contains(g("B+A")));  // renaming of A+B
  CHECK(shown(solve_induct_v3_results(g("ab+ab"), g("cd+cd"), s, {3, 3}, {2, 2})) ==
        std::set<std::string>{"A+A", "A+B"});
  for (const auto& r : sols.solutions) {
    CHECK_FALSE(solve_abduct(r, g("ab+ab"), s, {1, 8}, 1).empty());
    CHECK_FALSE(solve_abduct(r, g("cd+cd"), s, {1, 8}, 1).empty());
  }
}

TEST_CASE("induct v2 enumerates rule/case pairs modulo renaming") {
  const auto& s = term_split();
  const auto sols = solve_induct_v2(g("ab+ab"), s, {3, 3}, {2, 2});
  std::set<std::string> got;
  for (const auto& [rule, c] : sols.solutions) {
    CHECK(apply_substitution(rule, c, s) == g("ab+ab"));
    got.insert(show(rule) + " " + show(encode_case(c)));
  }
  // Values are any math strings, operators included.
  CHECK(got == std::set<std::string>{"A+A {A:ab}", "A+B {A:ab, B:ab}", "aAB {A:b+, B:ab}", "ABb {A:ab, B:+a}"});
}

TEST_CASE("rewrite search") {
  const auto& s = rewrite_split();
  const std::vector<RewriteRule> swap{{g("A+B", s), g("B+A", s)}};
  CHECK_FALSE(solve_rewrite(g("a+b-c", s), swap, g("b+a-c", s), s, {1, 1}).empty());
  CHECK(solve_rewrite(g("a-b-c", s), swap, std::nullopt, s, {1, 1}).empty());

  const std::vector<RewriteRule> collapse{{g("A+A", s), g("A", s)}};
  const auto traces = solve_rewrite(g("a+a+a", s), collapse, std::nullopt, s, {1, 1});
  CHECK(traces.size() == 2);
  const auto finals = reachable_finals(g("a+a+a", s), collapse, s, {1, 1});
  CHECK(finals.size() == 1);
  CHECK(show(finals.solutions[0], s) == "a+a");
}

TEST_CASE("multi-rule chains keep their intermediate strings") {
  const auto& s = rewrite_split();
  const std::vector<RewriteRule> chain{{g("A+B", s), g("B+A", s)}, {g("A-B", s), g("B*A", s)}, {g("A*B", s), g("A", s)}};
  const auto finals = reachable_finals(g("a+b-c", s), chain, s, {1, 1});
  const auto traces = solve_rewrite(g("a+b-c", s), chain, std::nullopt, s, {1, 1});
  REQUIRE(traces.size() == 1);
  CHECK(show(traces.solutions[0][0].after, s) == "b+a-c");
  CHECK(show(traces.solutions[0][1].after, s) == "b+c*a");
  CHECK(show(traces.solutions[0][2].after, s) == "b+c");
  REQUIRE(finals.size() == 1);
  CHECK(show(finals.solutions[0], s) == "b+c");
  CHECK_FALSE(solve_rewrite(g("a+b-c", s), chain, g("b+c", s), s, {1, 1}).empty());
}

TEST_CASE("match sites honour repeats") {
  const auto& s = rewrite_split();
  const RewriteRule r{g("A+A", s), g("A", s)};
  const auto sites = match_sites(g("a+b+b", s), r, s, {1, 1});
  REQUIRE(sites.size() == 1);
  CHECK(sites[0].span == Span{2, 5});
  CHECK(show(sites[0].after, s) == "a+b");
}

TEST_CASE("induct rewrite recovers the worked rule") {
  const auto& s = rewrite_split();
  const auto sols = solve_induct_rewrite(g("a+b-c", s), g("b+a-c", s), s, SolverBounds{});
  CHECK(sols.contains(RewriteRule{g("A+B", s), g("B+A", s)}));
  for (const auto& r : sols.solutions) {
    CHECK_FALSE(solve_rewrite(g("a+b-c", s), std::vector<RewriteRule>{r}, g("b+a-c", s), s, {1, 1}).empty());
  }
}

TEST_CASE("verify_example dispatch") {
  const auto& s = term_split();
  TermTriple t{s, g("A*A+B=C"), sub({{"A", "a"}, {"B", "b"}, {"C", "d+e"}}), g("a*a+b=d+e")};
  VerifyOptions opts;
  opts.bounds.value_len = {1, 8};
  opts.bounds.rule_len = {1, 20};

  const auto deduct = verify_example(encode_example(t, TaskKind::Deduct), opts);
  CHECK(deduct.valid);
  CHECK(deduct.n_solutions == std::optional<std::size_t>(1));

  auto abduct = encode_example(t, TaskKind::Abduct);
  const auto report = verify_example(abduct, opts);
  CHECK(report.target_is_solution);
  CHECK(report.valid);

  abduct.target[3] = g("c")[0];  // {A:c, ...}
  const auto bad = verify_example(abduct, opts);
  CHECK_FALSE(bad.target_is_solution);
  CHECK_FALSE(bad.valid);

  auto garbage = encode_example(t, TaskKind::Induct);
  garbage.target.push_back(tok::kLBrace);
  const auto broken = verify_example(garbage, opts);
  CHECK_FALSE(broken.valid);
  CHECK_FALSE(broken.error.empty());
}

TEST_CASE("generated examples verify for every task") {
  for (TaskKind task : kConcreteTasks) {
    CAPTURE(to_string(task));
    CurriculumStage stage;
    stage.with_task(task);
    for (std::uint64_t i = 0; i < 300; ++i) {
      const auto pair = generate_example(stage, 5, i);
      const auto r = verify_example(pair);
      CHECK(r.valid);
      if (task == TaskKind::Deduct) CHECK(r.n_solutions == std::optional<std::size_t>(1));
    }
  }
}

TEST_CASE("raising the cap never removes solutions") {
  const auto& s = term_split();
  const auto c = sub({{"A", "ab"}, {"B", "b"}});
  const auto result = g("ab+b*ab+ab-b");
  std::vector<Sequence> previous;
  bool previous_truncated = true;
  for (std::size_t cap : {1, 2, 4, 8, 16, 64, 512}) {
    const auto sols = solve_induct(c, result, {{1, 20}, false}, cap);
    CHECK(sols.size() <= cap);
    for (const auto& p : previous) CHECK(sols.contains(p));
    if (!previous_truncated) CHECK(sols.solutions.size() == previous.size());
    previous = sols.solutions;
    previous_truncated = sols.truncated;
  }
  CHECK_FALSE(previous_truncated);
  (void)s;
}

TEST_CASE("solve_source returns encoded targets") {
  const auto& s = term_split();
  const TermTriple t{s, g("A*A+B=C"), sub({{"A", "a"}, {"B", "b"}, {"C", "d+e"}}), g("a*a+b=d+e")};
  SolverBounds b;
  b.value_len = {1, 8};
  const auto abd = solve_source(encode_example(t, TaskKind::Abduct).source, TaskKind::Abduct, b);
  REQUIRE(abd.targets.size() == 1);
  CHECK(show(abd.targets[0]) == "{A:a, B:b, C:d+e}");
  const auto ded = solve_source(encode_example(t, TaskKind::Deduct).source, TaskKind::Deduct, b);
  REQUIRE(ded.targets.size() == 1);
  CHECK(show(ded.targets[0]) == "a*a+b=d+e");
  CHECK_THROWS_AS(solve_source(g("<Rule> A <Math> a"), TaskKind::Abduct, b), ParseError);
}

// Exhaustive reference over a tiny alphabet: 3 math and 2 rule symbols.
TEST_CASE("solvers agree with brute force on a tiny alphabet") {
  const SymbolSplit tiny{{1, 2, 3}, {4, 5}, {}};
  auto all_words = [](const std::vector<Token>& alphabet, std::size_t lo, std::size_t hi) {
    std::vector<Sequence> out;
    std::vector<Sequence> level{{}};
    for (std::size_t len = 1; len <= hi; ++len) {
      std::vector<Sequence> next;
      for (const auto& w : level) {
        for (Token t : alphabet) {
          auto x = w;
          x.push_back(t);
          next.push_back(x);
        }
      }
      level = std::move(next);
      if (len >= lo) out.insert(out.end(), level.begin(), level.end());
    }
    return out;
  };
  const auto rules = all_words({1, 2, 3, 4, 5}, 1, 4);
  const auto values = all_words({1, 2, 3}, 1, 3);
  const auto results = all_words({1, 2, 3}, 1, 5);
  std::uint64_t compared = 0;

  // Abduct: every rule against a sample of results.
  for (std::size_t ri = 0; ri < rules.size(); ri += 7) {
    const auto& rule = rules[ri];
    const auto vars = distinct_rule_symbols(rule, tiny);
    for (std::size_t xi = ri % 11; xi < results.size(); xi += 13) {
      const auto& result = results[xi];
      std::set<Sequence> expected;  // encoded cases
      std::vector<std::size_t> pick(vars.size(), 0);
      while (true) {
        Substitution c;
        for (std::size_t k = 0; k < vars.size(); ++k) c.entries.push_back({vars[k], values[pick[k]]});
        if (apply_substitution(rule, c, tiny) == result) expected.insert(encode_case(c));
        std::size_t k = 0;
        while (k < pick.size() && ++pick[k] == values.size()) pick[k++] = 0;
        if (k == pick.size()) break;
      }
      const auto got = solve_abduct(rule, result, tiny, {1, 3}, 1'000'000);
      std::set<Sequence> got_enc;
      for (const auto& c : got.solutions) got_enc.insert(encode_case(c));
      CHECK(got_enc.size() == got.size());
      CHECK(got_enc == expected);
      ++compared;
    }
  }

  // Induct: cases over one or two keys against results they can produce.
  for (std::size_t vi = 0; vi < values.size(); vi += 5) {
    for (std::size_t wi = 0; wi < values.size(); wi += 9) {
      for (bool two : {false, true}) {
        Substitution c;
        c.entries.push_back({4, values[vi]});
        if (two) c.entries.push_back({5, values[wi]});
        for (std::size_t xi = (vi + wi) % 17; xi < results.size(); xi += 19) {
          const auto& result = results[xi];
          std::set<Sequence> expected;
          for (const auto& r : rules) {
            const auto used = distinct_rule_symbols(r, tiny);
            if (used.size() != c.size()) continue;
            bool keys_ok = true;
            for (Token v : used) keys_ok = keys_ok && c.find(v) != nullptr;
            if (keys_ok && apply_substitution(r, c, tiny) == result) expected.insert(r);
          }
          const auto got = solve_induct(c, result, {{1, 4}, false}, 1'000'000);
          CHECK(rule_set(got).size() == got.size());
          CHECK(rule_set(got) == expected);
          ++compared;
        }
      }
    }
  }
  CHECK(compared > 1000);
}

}  // TEST_SUITE
