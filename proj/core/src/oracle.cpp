#include "lime/oracle.hpp"

#include <algorithm>
#include <set>

#include "lime/errors.hpp"

namespace lime {

namespace {

bool matches_at(std::span<const Token> haystack, std::size_t pos, std::span<const Token> needle) {
  return pos + needle.size() <= haystack.size() &&
         std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<std::ptrdiff_t>(pos));
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return b == 0 ? a : (a + b - 1) / b; }

template <class T>
bool push_capped(SolutionSet<T>& set, T value) {
  if (set.solutions.size() >= set.enumeration_cap) {
    set.truncated = true;
    return false;
  }
  set.solutions.push_back(std::move(value));
  return true;
}

// Left-to-right segmentation of `result` against the rule pattern.
class AbductSearch {
 public:
  AbductSearch(std::span<const Token> rule, std::span<const Token> result, const SymbolSplit& split,
               IntRange value_len, std::size_t cap)
      : rule_(rule), result_(result), split_(split), value_len_(value_len) {
    out_.enumeration_cap = cap;
    vars_ = distinct_rule_symbols(rule, split);
    slot_.resize(rule.size(), -1);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const auto it = std::find(vars_.begin(), vars_.end(), rule[i]);
      if (it != vars_.end()) slot_[i] = static_cast<int>(it - vars_.begin());
    }
    bound_.assign(vars_.size(), {0, 0});
    is_bound_.assign(vars_.size(), false);
    math_run_.assign(result.size() + 1, 0);
    for (std::size_t i = result.size(); i-- > 0;) {
      math_run_[i] = split.is_math(result[i]) ? math_run_[i + 1] + 1 : 0;
    }
  }

  SolutionSet<Substitution> run() {
    dfs(0, 0);
    return std::move(out_);
  }

 private:
  bool feasible(std::size_t ri, std::size_t pos) const {
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t i = ri; i < rule_.size(); ++i) {
      const int s = slot_[i];
      if (s < 0) {
        ++lo;
        ++hi;
      } else if (is_bound_[static_cast<std::size_t>(s)]) {
        lo += bound_[static_cast<std::size_t>(s)].second;
        hi += bound_[static_cast<std::size_t>(s)].second;
      } else {
        lo += static_cast<std::size_t>(value_len_.lo);
        hi += static_cast<std::size_t>(value_len_.hi);
      }
    }
    const std::size_t remaining = result_.size() - pos;
    return remaining >= lo && remaining <= hi;
  }

  bool dfs(std::size_t ri, std::size_t pos) {
    if (ri == rule_.size()) {
      if (pos != result_.size()) return true;
      Substitution s;
      for (std::size_t v = 0; v < vars_.size(); ++v) {
        const auto [start, len] = bound_[v];
        s.entries.push_back({vars_[v], Sequence(result_.begin() + static_cast<std::ptrdiff_t>(start),
                                                result_.begin() + static_cast<std::ptrdiff_t>(start + len))});
      }
      return push_capped(out_, std::move(s));
    }
    if (!feasible(ri, pos)) return true;
    const int s = slot_[ri];
    if (s < 0) {
      if (pos < result_.size() && result_[pos] == rule_[ri]) return dfs(ri + 1, pos + 1);
      return true;
    }
    const auto v = static_cast<std::size_t>(s);
    if (is_bound_[v]) {
      const auto [start, len] = bound_[v];
      if (matches_at(result_, pos, result_.subspan(start, len))) return dfs(ri + 1, pos + len);
      return true;
    }
    const auto lo = static_cast<std::size_t>(value_len_.lo);
    const auto hi = std::min(static_cast<std::size_t>(value_len_.hi), math_run_[pos]);
    is_bound_[v] = true;
    for (std::size_t len = lo; len <= hi; ++len) {
      bound_[v] = {pos, len};
      if (!dfs(ri + 1, pos + len)) {
        is_bound_[v] = false;
        return false;
      }
    }
    is_bound_[v] = false;
    return true;
  }

  std::span<const Token> rule_;
  std::span<const Token> result_;
  const SymbolSplit& split_;
  IntRange value_len_;
  std::vector<Token> vars_;
  std::vector<int> slot_;
  std::vector<std::pair<std::size_t, std::size_t>> bound_;
  std::vector<bool> is_bound_;
  std::vector<std::size_t> math_run_;
  SolutionSet<Substitution> out_;
};

// Anti-substitution over one or two (case, result) pairs: at each position
// emit a literal token or a case key whose value matches there.
class InductSearch {
 public:
  InductSearch(std::vector<const Substitution*> cases, std::vector<std::span<const Token>> results,
               const InductOptions& options, std::size_t cap)
      : cases_(std::move(cases)), results_(std::move(results)), options_(options) {
    out_.enumeration_cap = cap;
    keys_ = cases_.front()->keys();
    used_.assign(keys_.size(), 0);
    last_match_.assign(keys_.size(), -1);
    for (const auto* c : cases_) {
      for (const auto& e : c->entries) max_value_ = std::max(max_value_, e.value.size());
    }
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      for (std::size_t p = results_[0].size(); p-- > 0;) {
        if (key_matches(k, {p, p}, /*first_only=*/true)) {
          last_match_[k] = static_cast<long>(p);
          break;
        }
      }
    }
  }

  SolutionSet<Sequence> run() {
    for (std::size_t i = 1; i < cases_.size(); ++i) {
      if (cases_[i]->keys() != keys_) return std::move(out_);
    }
    std::vector<std::size_t> pos(results_.size(), 0);
    dfs(pos);
    return std::move(out_);
  }

 private:
  bool key_matches(std::size_t k, const std::vector<std::size_t>& pos, bool first_only = false) const {
    const std::size_t n = first_only ? 1 : cases_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!matches_at(results_[i], pos[i], cases_[i]->entries[k].value)) return false;
    }
    return true;
  }

  bool is_key(Token t) const { return std::find(keys_.begin(), keys_.end(), t) != keys_.end(); }

  bool dfs(std::vector<std::size_t>& pos) {
    std::size_t remaining_max = 0;
    std::size_t remaining_min = static_cast<std::size_t>(-1);
    bool done = true;
    for (std::size_t i = 0; i < results_.size(); ++i) {
      const std::size_t r = results_[i].size() - pos[i];
      remaining_max = std::max(remaining_max, r);
      remaining_min = std::min(remaining_min, r);
      done = done && r == 0;
    }
    const std::size_t len = rule_.size();
    if (done) {
      if (!options_.rule_len.contains(static_cast<long long>(len))) return true;
      if (!options_.allow_unused_keys &&
          std::any_of(used_.begin(), used_.end(), [](int u) { return u == 0; })) {
        return true;
      }
      return push_capped(out_, rule_);
    }
    if (remaining_min == 0) return true;
    if (len + remaining_min < static_cast<std::size_t>(options_.rule_len.lo)) return true;
    if (len + ceil_div(remaining_max, std::max<std::size_t>(max_value_, 1)) >
        static_cast<std::size_t>(options_.rule_len.hi)) {
      return true;
    }
    if (!options_.allow_unused_keys) {
      std::size_t unused = 0;
      for (std::size_t k = 0; k < keys_.size(); ++k) {
        if (used_[k] != 0) continue;
        ++unused;
        if (last_match_[k] < static_cast<long>(pos[0])) return true;
      }
      if (len + unused > static_cast<std::size_t>(options_.rule_len.hi)) return true;
    }

    // Literal.
    const Token lit = results_[0][pos[0]];
    bool literal_ok = !is_key(lit);
    for (std::size_t i = 1; i < results_.size() && literal_ok; ++i) {
      literal_ok = results_[i][pos[i]] == lit;
    }
    if (literal_ok) {
      rule_.push_back(lit);
      for (auto& p : pos) ++p;
      const bool go = dfs(pos);
      for (auto& p : pos) --p;
      rule_.pop_back();
      if (!go) return false;
    }
    // Case keys.
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      if (!key_matches(k, pos)) continue;
      rule_.push_back(keys_[k]);
      ++used_[k];
      for (std::size_t i = 0; i < pos.size(); ++i) pos[i] += cases_[i]->entries[k].value.size();
      const bool go = dfs(pos);
      for (std::size_t i = 0; i < pos.size(); ++i) pos[i] -= cases_[i]->entries[k].value.size();
      --used_[k];
      rule_.pop_back();
      if (!go) return false;
    }
    return true;
  }

  std::vector<const Substitution*> cases_;
  std::vector<std::span<const Token>> results_;
  InductOptions options_;
  std::vector<Token> keys_;
  std::vector<int> used_;
  std::vector<long> last_match_;
  std::size_t max_value_ = 0;
  Sequence rule_;
  SolutionSet<Sequence> out_;
};

class InductV2Search {
 public:
  InductV2Search(std::span<const Token> result, const SymbolSplit& split, IntRange rule_len,
                 IntRange value_len, std::size_t cap)
      : result_(result), split_(split), rule_len_(rule_len), value_len_(value_len) {
    out_.enumeration_cap = cap;
    math_run_.assign(result.size() + 1, 0);
    for (std::size_t i = result.size(); i-- > 0;) {
      math_run_[i] = split.is_math(result[i]) ? math_run_[i + 1] + 1 : 0;
    }
  }

  SolutionSet<std::pair<Sequence, Substitution>> run() {
    dfs(0);
    return std::move(out_);
  }

 private:
  bool dfs(std::size_t pos) {
    const std::size_t remaining = result_.size() - pos;
    if (remaining == 0) {
      if (case_.empty() || !rule_len_.contains(static_cast<long long>(rule_.size()))) return true;
      return push_capped(out_, std::make_pair(rule_, case_));
    }
    if (rule_.size() + ceil_div(remaining, static_cast<std::size_t>(value_len_.hi)) >
        static_cast<std::size_t>(rule_len_.hi)) {
      return true;
    }
    if (!split_.is_math(result_[pos])) return true;

    rule_.push_back(result_[pos]);
    if (!dfs(pos + 1)) return false;
    rule_.pop_back();

    for (const auto& e : case_.entries) {
      if (!matches_at(result_, pos, e.value)) continue;
      rule_.push_back(e.key);
      if (!dfs(pos + e.value.size())) return false;
      rule_.pop_back();
    }

    if (case_.size() < split_.rule.size()) {
      const Token var = split_.rule[case_.size()];
      const auto hi = std::min(static_cast<std::size_t>(value_len_.hi), math_run_[pos]);
      for (auto len = static_cast<std::size_t>(value_len_.lo); len <= hi; ++len) {
        case_.entries.push_back({var, Sequence(result_.begin() + static_cast<std::ptrdiff_t>(pos),
                                               result_.begin() + static_cast<std::ptrdiff_t>(pos + len))});
        rule_.push_back(var);
        const bool go = dfs(pos + len);
        rule_.pop_back();
        case_.entries.pop_back();
        if (!go) return false;
      }
    }
    return true;
  }

  std::span<const Token> result_;
  const SymbolSplit& split_;
  IntRange rule_len_;
  IntRange value_len_;
  std::vector<std::size_t> math_run_;
  Sequence rule_;
  Substitution case_;
  SolutionSet<std::pair<Sequence, Substitution>> out_;
};

// Rules explaining two results at once when the cases are hidden. Variables
// are named in first-occurrence order, so solutions are up to renaming.
class InductV3ResultSearch {
 public:
  InductV3ResultSearch(std::span<const Token> r1, std::span<const Token> r2, const SymbolSplit& split,
                       IntRange rule_len, IntRange value_len, std::size_t cap)
      : r1_(r1), r2_(r2), split_(split), rule_len_(rule_len), value_len_(value_len) {
    out_.enumeration_cap = cap;
    run1_ = math_runs(r1);
    run2_ = math_runs(r2);
  }

  SolutionSet<Sequence> run() {
    dfs(0, 0);
    return std::move(out_);
  }

 private:
  std::vector<std::size_t> math_runs(std::span<const Token> r) const {
    std::vector<std::size_t> run(r.size() + 1, 0);
    for (std::size_t i = r.size(); i-- > 0;) run[i] = split_.is_math(r[i]) ? run[i + 1] + 1 : 0;
    return run;
  }

  bool dfs(std::size_t p1, std::size_t p2) {
    const std::size_t rem1 = r1_.size() - p1;
    const std::size_t rem2 = r2_.size() - p2;
    if (rem1 == 0 || rem2 == 0) {
      if (rem1 != rem2 || v1_.empty() || !rule_len_.contains(static_cast<long long>(rule_.size()))) {
        return true;
      }
      if (!seen_.insert(rule_).second) return true;
      return push_capped(out_, rule_);
    }
    const auto vhi = static_cast<std::size_t>(value_len_.hi);
    if (rule_.size() + ceil_div(std::max(rem1, rem2), vhi) > static_cast<std::size_t>(rule_len_.hi)) {
      return true;
    }
    if (!split_.is_math(r1_[p1]) || !split_.is_math(r2_[p2])) return true;

    if (r1_[p1] == r2_[p2]) {
      rule_.push_back(r1_[p1]);
      if (!dfs(p1 + 1, p2 + 1)) return false;
      rule_.pop_back();
    }
    for (std::size_t k = 0; k < v1_.size(); ++k) {
      if (!matches_at(r1_, p1, v1_[k]) || !matches_at(r2_, p2, v2_[k])) continue;
      rule_.push_back(split_.rule[k]);
      if (!dfs(p1 + v1_[k].size(), p2 + v2_[k].size())) return false;
      rule_.pop_back();
    }
    if (v1_.size() < split_.rule.size()) {
      const Token var = split_.rule[v1_.size()];
      const auto lo = static_cast<std::size_t>(value_len_.lo);
      const auto hi1 = std::min(vhi, run1_[p1]);
      const auto hi2 = std::min(vhi, run2_[p2]);
      for (auto l1 = lo; l1 <= hi1; ++l1) {
        for (auto l2 = lo; l2 <= hi2; ++l2) {
          v1_.emplace_back(r1_.begin() + static_cast<std::ptrdiff_t>(p1),
                           r1_.begin() + static_cast<std::ptrdiff_t>(p1 + l1));
          v2_.emplace_back(r2_.begin() + static_cast<std::ptrdiff_t>(p2),
                           r2_.begin() + static_cast<std::ptrdiff_t>(p2 + l2));
          rule_.push_back(var);
          const bool go = dfs(p1 + l1, p2 + l2);
          rule_.pop_back();
          v1_.pop_back();
          v2_.pop_back();
          if (!go) return false;
        }
      }
    }
    return true;
  }

  std::span<const Token> r1_;
  std::span<const Token> r2_;
  const SymbolSplit& split_;
  IntRange rule_len_;
  IntRange value_len_;
  std::vector<std::size_t> run1_;
  std::vector<std::size_t> run2_;
  Sequence rule_;
  std::vector<Sequence> v1_;
  std::vector<Sequence> v2_;
  std::set<Sequence> seen_;  // one rule can arise from several value choices
  SolutionSet<Sequence> out_;
};

void match_from(std::span<const Token> current, std::size_t start, std::size_t pos,
                std::size_t li, const RewriteRule& rule, const std::vector<Token>& vars,
                std::vector<std::pair<std::size_t, std::size_t>>& bound, std::vector<bool>& is_bound,
                const SymbolSplit& split, IntRange binding_len,
                std::vector<RewriteApplication>& out) {
  if (li == rule.lhs.size()) {
    RewriteApplication app;
    app.span = {start, pos};
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const auto [b, len] = bound[v];
      app.binding.entries.push_back({vars[v], Sequence(current.begin() + static_cast<std::ptrdiff_t>(b),
                                                       current.begin() + static_cast<std::ptrdiff_t>(b + len))});
    }
    app.after = apply_rewrite_at(current, rule, app.span, app.binding, split);
    out.push_back(std::move(app));
    return;
  }
  const Token t = rule.lhs[li];
  const auto it = std::find(vars.begin(), vars.end(), t);
  if (it == vars.end()) {
    if (pos < current.size() && current[pos] == t) {
      match_from(current, start, pos + 1, li + 1, rule, vars, bound, is_bound, split, binding_len, out);
    }
    return;
  }
  const auto v = static_cast<std::size_t>(it - vars.begin());
  if (is_bound[v]) {
    const auto [b, len] = bound[v];
    if (matches_at(current, pos, current.subspan(b, len))) {
      match_from(current, start, pos + len, li + 1, rule, vars, bound, is_bound, split, binding_len, out);
    }
    return;
  }
  is_bound[v] = true;
  for (auto len = static_cast<std::size_t>(binding_len.lo);
       len <= static_cast<std::size_t>(binding_len.hi) && pos + len <= current.size(); ++len) {
    if (!split.is_string(current[pos + len - 1])) break;
    bound[v] = {pos, len};
    match_from(current, start, pos + len, li + 1, rule, vars, bound, is_bound, split, binding_len, out);
  }
  is_bound[v] = false;
}

class RewriteSearch {
 public:
  RewriteSearch(std::span<const RewriteRule> rules, const std::optional<Sequence>& candidate,
                const SymbolSplit& split, IntRange binding_len, std::size_t cap)
      : rules_(rules), candidate_(candidate), split_(split), binding_len_(binding_len) {
    out_.enumeration_cap = cap;
  }

  SolutionSet<RewriteTrace> run(std::span<const Token> subject) {
    bool stop = false;
    dfs(0, Sequence(subject.begin(), subject.end()), stop);
    return std::move(out_);
  }

 private:
  bool dfs(std::size_t depth, const Sequence& current, bool& stop) {
    if (depth == rules_.size()) {
      if (candidate_ && current != *candidate_) return false;
      if (!push_capped(out_, trace_)) stop = true;
      return true;
    }
    if (dead_.count({depth, current}) != 0) return false;
    bool found = false;
    for (auto& app : match_sites(current, rules_[depth], split_, binding_len_)) {
      const Sequence next = app.after;  // trace_ may reallocate below
      trace_.push_back(std::move(app));
      found = dfs(depth + 1, next, stop) || found;
      trace_.pop_back();
      if (stop) return found;
    }
    if (!found) dead_.insert({depth, current});
    return found;
  }

  std::span<const RewriteRule> rules_;
  const std::optional<Sequence>& candidate_;
  const SymbolSplit& split_;
  IntRange binding_len_;
  RewriteTrace trace_;
  std::set<std::pair<std::size_t, Sequence>> dead_;
  SolutionSet<RewriteTrace> out_;
};

// Abstractions of subject[span]: each run of string symbols is cut into
// chunks of 1..binding_len.hi symbols; equal chunks share a variable.
void abstractions_of(std::span<const Token> window, std::size_t i, const SymbolSplit& split,
                     IntRange binding_len, Abstraction& cur, std::vector<Abstraction>& out) {
  if (i == window.size()) {
    out.push_back(cur);
    return;
  }
  const Token t = window[i];
  if (!split.is_string(t)) {
    cur.lhs.push_back(t);
    abstractions_of(window, i + 1, split, binding_len, cur, out);
    cur.lhs.pop_back();
    return;
  }
  for (std::size_t len = 1; len <= static_cast<std::size_t>(binding_len.hi) && i + len <= window.size();
       ++len) {
    if (!split.is_string(window[i + len - 1])) break;
    const Sequence chunk(window.begin() + static_cast<std::ptrdiff_t>(i),
                         window.begin() + static_cast<std::ptrdiff_t>(i + len));
    Token var = 0;
    for (const auto& e : cur.binding.entries) {
      if (e.value == chunk) var = e.key;
    }
    bool fresh = false;
    if (var == 0) {
      if (cur.binding.size() >= split.rule.size()) continue;
      var = split.rule[cur.binding.size()];
      cur.binding.entries.push_back({var, chunk});
      fresh = true;
    }
    cur.lhs.push_back(var);
    abstractions_of(window, i + len, split, binding_len, cur, out);
    cur.lhs.pop_back();
    if (fresh) cur.binding.entries.pop_back();
  }
}

// Right-hand sides over the binding's variables and math literals that
// instantiate to `middle`.
void rhs_of(std::span<const Token> middle, std::size_t pos, const Substitution& binding,
            const SymbolSplit& split, IntRange rhs_len, Sequence& cur, bool has_var,
            std::vector<Sequence>& out) {
  if (cur.size() > static_cast<std::size_t>(rhs_len.hi)) return;
  if (pos == middle.size()) {
    if (has_var && rhs_len.contains(static_cast<long long>(cur.size()))) out.push_back(cur);
    return;
  }
  if (split.is_math(middle[pos])) {
    cur.push_back(middle[pos]);
    rhs_of(middle, pos + 1, binding, split, rhs_len, cur, has_var, out);
    cur.pop_back();
  }
  for (const auto& e : binding.entries) {
    if (!matches_at(middle, pos, e.value)) continue;
    cur.push_back(e.key);
    rhs_of(middle, pos + e.value.size(), binding, split, rhs_len, cur, true, out);
    cur.pop_back();
  }
}

bool well_formed_rule(const RewriteRule& rule, const SymbolSplit& split) {
  const auto lhs_vars = distinct_rule_symbols(rule.lhs, split);
  if (lhs_vars.empty()) return false;
  auto pattern_token = [&](Token t) { return split.is_math(t) || split.is_rule(t); };
  if (!std::all_of(rule.lhs.begin(), rule.lhs.end(), pattern_token) ||
      !std::all_of(rule.rhs.begin(), rule.rhs.end(), pattern_token)) {
    return false;
  }
  for (Token v : distinct_rule_symbols(rule.rhs, split)) {
    if (std::find(lhs_vars.begin(), lhs_vars.end(), v) == lhs_vars.end()) return false;
  }
  return true;
}

bool values_admissible(const Substitution& s, const SymbolSplit& split, IntRange value_len) {
  return std::all_of(s.entries.begin(), s.entries.end(), [&](const Binding& b) {
    return value_len.contains(static_cast<long long>(b.value.size())) &&
           std::all_of(b.value.begin(), b.value.end(), [&](Token t) { return split.is_math(t); });
  });
}

bool applies_to(std::span<const Token> rule, const Substitution& s, std::span<const Token> result,
                const SymbolSplit& split) {
  try {
    const Sequence out = apply_substitution(rule, s, split);
    return std::equal(out.begin(), out.end(), result.begin(), result.end());
  } catch (const MissingBinding&) {
    return false;
  }
}

}  // namespace

bool verify_deduct(std::span<const Token> rule, const Substitution& case_,
                   std::span<const Token> candidate, const SymbolSplit& split) {
  const Sequence expected = apply_substitution(rule, case_, split);
  return std::equal(expected.begin(), expected.end(), candidate.begin(), candidate.end());
}

SolutionSet<Substitution> solve_abduct(std::span<const Token> rule, std::span<const Token> result,
                                       const SymbolSplit& split, IntRange value_len,
                                       std::size_t cap) {
  return AbductSearch(rule, result, split, value_len, cap).run();
}

SolutionSet<Sequence> solve_induct(const Substitution& case_, std::span<const Token> result,
                                   const InductOptions& options, std::size_t cap) {
  return InductSearch({&case_}, {result}, options, cap).run();
}

SolutionSet<Sequence> solve_induct_v3(const Substitution& case1, std::span<const Token> result1,
                                      const Substitution& case2, std::span<const Token> result2,
                                      const InductOptions& options, std::size_t cap) {
  return InductSearch({&case1, &case2}, {result1, result2}, options, cap).run();
}

SolutionSet<std::pair<Sequence, Substitution>> solve_induct_v2(std::span<const Token> result,
                                                               const SymbolSplit& split,
                                                               IntRange rule_len,
                                                               IntRange value_len,
                                                               std::size_t cap) {
  return InductV2Search(result, split, rule_len, value_len, cap).run();
}

SolutionSet<Sequence> solve_induct_v3_results(std::span<const Token> result1,
                                              std::span<const Token> result2, const SymbolSplit& split,
                                              IntRange rule_len, IntRange value_len, std::size_t cap) {
  return InductV3ResultSearch(result1, result2, split, rule_len, value_len, cap).run();
}

std::vector<RewriteApplication> match_sites(std::span<const Token> current, const RewriteRule& rule,
                                            const SymbolSplit& split, IntRange binding_len) {
  std::vector<RewriteApplication> out;
  const auto vars = distinct_rule_symbols(rule.lhs, split);
  std::vector<std::pair<std::size_t, std::size_t>> bound(vars.size());
  std::vector<bool> is_bound(vars.size(), false);
  for (std::size_t start = 0; start < current.size(); ++start) {
    match_from(current, start, start, 0, rule, vars, bound, is_bound, split, binding_len, out);
  }
  return out;
}

SolutionSet<RewriteTrace> solve_rewrite(std::span<const Token> subject,
                                        std::span<const RewriteRule> rules,
                                        const std::optional<Sequence>& final_candidate,
                                        const SymbolSplit& split, IntRange binding_len,
                                        std::size_t cap) {
  return RewriteSearch(rules, final_candidate, split, binding_len, cap).run(subject);
}

SolutionSet<Sequence> reachable_finals(std::span<const Token> subject,
                                       std::span<const RewriteRule> rules, const SymbolSplit& split,
                                       IntRange binding_len, std::size_t cap) {
  std::set<Sequence> level{Sequence(subject.begin(), subject.end())};
  for (const auto& rule : rules) {
    std::set<Sequence> next;
    for (const auto& s : level) {
      for (auto& app : match_sites(s, rule, split, binding_len)) next.insert(std::move(app.after));
    }
    level = std::move(next);
  }
  SolutionSet<Sequence> out;
  out.enumeration_cap = cap;
  for (const auto& s : level) {
    if (!push_capped(out, s)) break;
  }
  return out;
}

SolutionSet<RewriteRule> solve_induct_rewrite(std::span<const Token> subject,
                                              std::span<const Token> rewritten,
                                              const SymbolSplit& split, const SolverBounds& bounds,
                                              std::size_t cap) {
  SolutionSet<RewriteRule> out;
  out.enumeration_cap = cap;
  const std::size_t n = subject.size();
  const std::size_t m = rewritten.size();
  std::size_t common_prefix = 0;
  while (common_prefix < std::min(n, m) && subject[common_prefix] == rewritten[common_prefix]) {
    ++common_prefix;
  }
  std::size_t common_suffix = 0;
  while (common_suffix < std::min(n, m) &&
         subject[n - 1 - common_suffix] == rewritten[m - 1 - common_suffix]) {
    ++common_suffix;
  }
  const auto lo = static_cast<std::size_t>(bounds.span_len.lo);
  const auto hi = std::min(static_cast<std::size_t>(bounds.span_len.hi), n);
  for (std::size_t len = lo; len <= hi; ++len) {
    for (std::size_t b = 0; b + len <= n; ++b) {
      const std::size_t e = b + len;
      const std::size_t tail = n - e;
      if (b > common_prefix || tail > common_suffix || b + tail > m) continue;
      const auto window = subject.subspan(b, len);
      if (std::none_of(window.begin(), window.end(), [&](Token t) { return split.is_string(t); })) {
        continue;
      }
      const auto middle = rewritten.subspan(b, m - tail - b);
      if (!bounds.rhs_len.contains(static_cast<long long>(middle.size())) && bounds.binding_len.hi == 1) {
        // With one-symbol bindings the rhs has exactly |middle| tokens.
        continue;
      }
      std::vector<Abstraction> abstractions;
      Abstraction cur;
      abstractions_of(window, 0, split, bounds.binding_len, cur, abstractions);
      for (const auto& abs : abstractions) {
        std::vector<Sequence> rhss;
        Sequence rhs;
        rhs_of(middle, 0, abs.binding, split, bounds.rhs_len, rhs, false, rhss);
        for (auto& r : rhss) {
          RewriteRule rule{abs.lhs, std::move(r)};
          if (out.contains(rule)) continue;
          if (!push_capped(out, std::move(rule))) return out;
        }
      }
    }
  }
  return out;
}

VerificationReport verify_example(const SeqPair& pair, const VerifyOptions& options) {
  VerificationReport report;
  report.task = pair.task;
  const SolverBounds& bounds = pair.meta ? pair.meta->bounds : options.bounds;
  const SymbolSplit* known = options.known_split;
  if (known == nullptr && pair.meta) known = &split_of(pair.meta->content);

  DecodedExample d;
  try {
    d = decode_example(pair.source, pair.target, pair.task, known);
  } catch (const LimeError& e) {
    report.error = e.what();
    return report;
  }
  const SymbolSplit& split = d.header;
  const std::size_t cap = options.cap;
  auto record = [&report](const auto& set) {
    report.n_solutions = set.size();
    report.truncated = set.truncated;
  };

  switch (pair.task) {
    case TaskKind::Deduct:
      report.target_is_solution = applies_to(d.rule, d.case_, d.result, split);
      try {
        apply_substitution(d.rule, d.case_, split);
        report.n_solutions = 1;
      } catch (const MissingBinding&) {
        report.n_solutions = 0;
      }
      break;
    case TaskKind::Abduct: {
      report.target_is_solution = d.case_.keys() == distinct_rule_symbols(d.rule, split) &&
                                  values_admissible(d.case_, split, bounds.value_len) &&
                                  applies_to(d.rule, d.case_, d.result, split);
      record(solve_abduct(d.rule, d.result, split, bounds.value_len, cap));
      break;
    }
    case TaskKind::Induct: {
      const auto used = distinct_rule_symbols(d.rule, split);
      auto sorted_used = used;
      auto keys = d.case_.keys();
      std::sort(sorted_used.begin(), sorted_used.end());
      std::sort(keys.begin(), keys.end());
      report.target_is_solution = bounds.rule_len.contains(static_cast<long long>(d.rule.size())) &&
                                  sorted_used == keys && applies_to(d.rule, d.case_, d.result, split);
      record(solve_induct(d.case_, d.result, {bounds.rule_len, false}, cap));
      break;
    }
    case TaskKind::InductV2: {
      const auto used = distinct_rule_symbols(d.rule, split);
      report.target_is_solution = !used.empty() &&
                                  bounds.rule_len.contains(static_cast<long long>(d.rule.size())) &&
                                  d.case_.keys() == used &&
                                  values_admissible(d.case_, split, bounds.value_len) &&
                                  applies_to(d.rule, d.case_, d.result, split);
      record(solve_induct_v2(d.result, split, bounds.rule_len, bounds.value_len, cap));
      break;
    }
    case TaskKind::InductV3: {
      const bool shape_ok =
          bounds.rule_len.contains(static_cast<long long>(d.rule.size())) &&
          !distinct_rule_symbols(d.rule, split).empty() &&
          std::all_of(d.rule.begin(), d.rule.end(),
                      [&](Token t) { return split.is_math(t) || split.is_rule(t); });
      report.target_is_solution = shape_ok &&
                                  !solve_abduct(d.rule, d.result, split, bounds.value_len, 1).empty() &&
                                  !solve_abduct(d.rule, d.result2, split, bounds.value_len, 1).empty();
      if (pair.meta) {
        if (const auto* twin = std::get_if<TwinTriple>(&pair.meta->content)) {
          record(solve_induct_v3(twin->first.case_, d.result, twin->second_case, d.result2,
                                 {bounds.rule_len, false}, cap));
        }
      }
      break;
    }
    case TaskKind::Rewrite:
    case TaskKind::RewriteMultistep: {
      const bool rules_ok = std::all_of(d.rules.begin(), d.rules.end(),
                                        [&](const RewriteRule& r) { return well_formed_rule(r, split); });
      report.target_is_solution =
          rules_ok && !solve_rewrite(d.subject, d.rules, d.rewritten, split, bounds.binding_len, 1).empty();
      record(reachable_finals(d.subject, d.rules, split, bounds.binding_len, cap));
      break;
    }
    case TaskKind::InductRewrite: {
      const RewriteRule& rule = d.rules.front();
      report.target_is_solution =
          well_formed_rule(rule, split) && bounds.rhs_len.contains(static_cast<long long>(rule.rhs.size())) &&
          !solve_rewrite(d.subject, d.rules, d.rewritten, split, bounds.binding_len, 1).empty();
      record(solve_induct_rewrite(d.subject, d.rewritten, split, bounds, cap));
      break;
    }
    case TaskKind::Mix:
      report.error = "mix is not a concrete task";
      return report;
  }
  report.valid = report.target_is_solution;
  return report;
}

SourceSolutions solve_source(std::span<const Token> source, TaskKind task, const SolverBounds& bounds,
                             std::size_t cap, const SymbolSplit* known_split) {
  const DecodedExample d = decode_source(source, task, known_split);
  const SymbolSplit& split = d.header;
  SourceSolutions out;
  out.split = split;
  out.enumeration_cap = cap;
  auto take = [&out](auto&& set, auto&& encode) {
    out.truncated = set.truncated;
    for (const auto& s : set.solutions) out.targets.push_back(encode(s));
  };
  auto same = [](const Sequence& s) { return s; };
  switch (task) {
    case TaskKind::Deduct:
      try {
        out.targets.push_back(apply_substitution(d.rule, d.case_, split));
      } catch (const MissingBinding&) {
      }
      break;
    case TaskKind::Abduct:
      take(solve_abduct(d.rule, d.result, split, bounds.value_len, cap),
           [](const Substitution& s) { return encode_case(s); });
      break;
    case TaskKind::Induct:
      take(solve_induct(d.case_, d.result, {bounds.rule_len, false}, cap), same);
      break;
    case TaskKind::InductV2:
      take(solve_induct_v2(d.result, split, bounds.rule_len, bounds.value_len, cap),
           [](const std::pair<Sequence, Substitution>& p) {
             Sequence t = p.first;
             t.push_back(tok::kSep);
             const Sequence c = encode_case(p.second);
             t.insert(t.end(), c.begin(), c.end());
             return t;
           });
      break;
    case TaskKind::InductV3:
      take(solve_induct_v3_results(d.result, d.result2, split, bounds.rule_len, bounds.value_len, cap), same);
      break;
    case TaskKind::Rewrite:
    case TaskKind::RewriteMultistep:
      take(reachable_finals(d.subject, d.rules, split, bounds.binding_len, cap), same);
      break;
    case TaskKind::InductRewrite:
      take(solve_induct_rewrite(d.subject, d.rewritten, split, bounds, cap), [](const RewriteRule& r) {
        Sequence t = r.lhs;
        t.push_back(tok::kEquals);
        t.insert(t.end(), r.rhs.begin(), r.rhs.end());
        return t;
      });
      break;
    case TaskKind::Mix:
      throw TaskMismatch("mix is not a concrete task");
  }
  return out;
}

}  // namespace lime
