#pragma once

// Exact solvers for every task kind. Each enumerates the full solution set of
// a source up to a cap; `truncated` is set when more solutions exist than the
// cap allows.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lime/rewrite_engine.hpp"
#include "lime/task_codec.hpp"
#include "lime/term_core.hpp"

namespace lime {

inline constexpr std::size_t kDefaultEnumerationCap = 64;

template <class T>
struct SolutionSet {
  std::vector<T> solutions;
  bool truncated = false;
  std::size_t enumeration_cap = kDefaultEnumerationCap;

  std::size_t size() const noexcept { return solutions.size(); }
  bool empty() const noexcept { return solutions.empty(); }
  bool contains(const T& x) const {
    for (const auto& s : solutions) {
      if (s == x) return true;
    }
    return false;
  }
};

// Throws MissingBinding when a rule symbol of `rule` is unbound.
bool verify_deduct(std::span<const Token> rule, const Substitution& case_,
                   std::span<const Token> candidate, const SymbolSplit& split);

// All substitutions s over math symbols with value lengths in value_len such
// that apply_substitution(rule, s) == result. Keys are in first-occurrence
// order.
SolutionSet<Substitution> solve_abduct(std::span<const Token> rule, std::span<const Token> result,
                                       const SymbolSplit& split, IntRange value_len,
                                       std::size_t cap = kDefaultEnumerationCap);

struct InductOptions {
  IntRange rule_len{5, 20};
  bool allow_unused_keys = false;
};

// All rules r with |r| in rule_len and apply_substitution(r, case) == result;
// every case key must occur in r unless allow_unused_keys.
SolutionSet<Sequence> solve_induct(const Substitution& case_, std::span<const Token> result,
                                   const InductOptions& options,
                                   std::size_t cap = kDefaultEnumerationCap);

// Rules solving both (case, result) pairs at once.
SolutionSet<Sequence> solve_induct_v3(const Substitution& case1, std::span<const Token> result1,
                                      const Substitution& case2, std::span<const Token> result2,
                                      const InductOptions& options,
                                      std::size_t cap = kDefaultEnumerationCap);

// (rule, case) pairs explaining `result`, up to renaming: the i-th variable to
// appear is split.rule[i]. Every variable is used; values lie in value_len.
SolutionSet<std::pair<Sequence, Substitution>> solve_induct_v2(std::span<const Token> result,
                                                               const SymbolSplit& split,
                                                               IntRange rule_len,
                                                               IntRange value_len,
                                                               std::size_t cap = kDefaultEnumerationCap);

// Rules explaining both results when the cases are not given, up to renaming:
// the i-th variable to appear is split.rule[i].
SolutionSet<Sequence> solve_induct_v3_results(std::span<const Token> result1,
                                              std::span<const Token> result2, const SymbolSplit& split,
                                              IntRange rule_len, IntRange value_len,
                                              std::size_t cap = kDefaultEnumerationCap);

struct RewriteApplication {
  Span span;
  Substitution binding;
  Sequence after;

  friend bool operator==(const RewriteApplication&, const RewriteApplication&) = default;
};
using RewriteTrace = std::vector<RewriteApplication>;

// Every place `lhs` matches `current`; variables bind runs of string symbols
// with lengths in binding_len, consistently across repeats.
std::vector<RewriteApplication> match_sites(std::span<const Token> current, const RewriteRule& rule,
                                            const SymbolSplit& split, IntRange binding_len);

// Chains applying each rule once, in order, whose final string equals
// `final_candidate` (any final when nullopt).
SolutionSet<RewriteTrace> solve_rewrite(std::span<const Token> subject,
                                        std::span<const RewriteRule> rules,
                                        const std::optional<Sequence>& final_candidate,
                                        const SymbolSplit& split, IntRange binding_len,
                                        std::size_t cap = kDefaultEnumerationCap);

// Distinct final strings reachable by the chain.
SolutionSet<Sequence> reachable_finals(std::span<const Token> subject,
                                       std::span<const RewriteRule> rules, const SymbolSplit& split,
                                       IntRange binding_len,
                                       std::size_t cap = kDefaultEnumerationCap);

// Rewrite rules turning `subject` into `rewritten` in one step: the lhs
// abstracts every string symbol of a span (variables named from split.rule in
// first-occurrence order), the rhs re-expresses the replacement over those
// variables and math symbols.
SolutionSet<RewriteRule> solve_induct_rewrite(std::span<const Token> subject,
                                              std::span<const Token> rewritten,
                                              const SymbolSplit& split, const SolverBounds& bounds,
                                              std::size_t cap = kDefaultEnumerationCap);

struct VerifyOptions {
  SolverBounds bounds;            // used when the example carries no meta
  std::size_t cap = kDefaultEnumerationCap;
  const SymbolSplit* known_split = nullptr;
};

struct VerificationReport {
  TaskKind task = TaskKind::Deduct;
  bool valid = false;
  bool target_is_solution = false;
  std::optional<std::size_t> n_solutions;  // unknown when the source alone cannot bound it
  bool truncated = false;
  std::string error;
};

// Every admissible target of an encoded source, as encoded target sequences.
struct SourceSolutions {
  SymbolSplit split;  // classes the source was read with
  std::vector<Sequence> targets;
  bool truncated = false;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
};

// Throws ParseError when the source does not fit the task grammar.
SourceSolutions solve_source(std::span<const Token> source, TaskKind task, const SolverBounds& bounds,
                             std::size_t cap = kDefaultEnumerationCap,
                             const SymbolSplit* known_split = nullptr);

// Decodes the pair and checks the recorded target against the task's
// solver. Target admissibility is decided directly, independent of the cap.
VerificationReport verify_example(const SeqPair& pair, const VerifyOptions& options = {});

}  // namespace lime
