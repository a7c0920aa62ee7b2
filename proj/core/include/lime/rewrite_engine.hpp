#pragma once

// Rewrite tasks: a subject string over math and string symbols, a span of it
// abstracted into a rule's left-hand side, a sampled right-hand side, and the
// rewritten string. Multi-step chains fold this over the running string.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lime/symbol_space.hpp"
#include "lime/term_core.hpp"

namespace lime {

struct RewriteConfig {
  IntRange subject_len{5, 20};
  IntRange rhs_len{2, 8};
  // Lengths of candidate spans; the upper end is clipped to the string length.
  IntRange span_len{2, 8};
  // Number of string symbols one variable abstracts. The minimum must be 1.
  IntRange binding_len{1, 1};
  IntRange steps{1, 5};

  void validate() const;
  friend bool operator==(const RewriteConfig&, const RewriteConfig&) = default;
};

struct RewriteRule {
  Sequence lhs;
  Sequence rhs;

  friend bool operator==(const RewriteRule&, const RewriteRule&) = default;
};

// Half-open [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct RewriteStep {
  RewriteRule rule;
  Span span;
  Substitution binding;
  Sequence after;  // running string after this step

  friend bool operator==(const RewriteStep&, const RewriteStep&) = default;
};

struct RewriteInstance {
  SymbolSplit split;
  Sequence subject;
  std::vector<RewriteStep> steps;
  Sequence final_;

  friend bool operator==(const RewriteInstance&, const RewriteInstance&) = default;
};

struct Abstraction {
  Sequence lhs;
  Substitution binding;
};

Sequence sample_subject(const SymbolSplit& split, const RewriteConfig& config, RngHandle& rng);

// String symbols of the span become rule symbols, assigned in first-occurrence
// order from the lowest rule id upwards (A, B, ...). With a binding length
// above one, runs of string symbols are cut into chunks; equal chunks share a
// variable. Throws InvalidSpan when the span holds no string symbol.
Abstraction abstract_span(std::span<const Token> subject, Span span, const SymbolSplit& split,
                          const RewriteConfig& config, RngHandle& rng);

// Right-hand side over lhs_vars and math symbols with at least one variable.
Sequence sample_rhs(std::span<const Token> lhs_vars, const SymbolSplit& split,
                    const RewriteConfig& config, RngHandle& rng);

// Throws SpanMismatch unless current[span] is the instantiated lhs.
Sequence apply_rewrite_at(std::span<const Token> current, const RewriteRule& rule, Span span,
                          const Substitution& binding, const SymbolSplit& split);

// Spans with length in span_len (clipped) holding at least one string symbol.
std::vector<Span> candidate_spans(std::span<const Token> current, const SymbolSplit& split,
                                  const RewriteConfig& config);

RewriteInstance generate_rewrite(const SymbolSpaceConfig& symbols, const RewriteConfig& config,
                                 RngHandle& rng, IntRange n_steps);

// Folds apply_rewrite_at over the recorded steps.
Sequence replay(const RewriteInstance& instance);

// First violated RewriteInstance invariant, or nullopt.
std::optional<std::string> check_rewrite(const RewriteInstance& instance);

}  // namespace lime
