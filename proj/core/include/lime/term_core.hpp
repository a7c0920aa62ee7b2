#pragma once

// Rule / Case / Result triples and the substitution engine behind the
// deduction, abduction and induction tasks.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lime/symbol_space.hpp"

namespace lime {

struct Binding {
  Token key;
  Sequence value;

  friend bool operator==(const Binding&, const Binding&) = default;
};

// Ordered map from rule symbols to symbol strings (the Case dictionary).
struct Substitution {
  std::vector<Binding> entries;

  const Sequence* find(Token key) const noexcept;
  std::vector<Token> keys() const;
  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }

  friend bool operator==(const Substitution&, const Substitution&) = default;
};

struct TermTriple {
  SymbolSplit split;
  Sequence rule;
  Substitution case_;
  Sequence result;

  friend bool operator==(const TermTriple&, const TermTriple&) = default;
};

// One rule with two independent cases; source material for the
// two-result induction variant.
struct TwinTriple {
  TermTriple first;
  Substitution second_case;
  Sequence second_result;

  friend bool operator==(const TwinTriple&, const TwinTriple&) = default;
};

// Distinct rule symbols of `rule`, in first-occurrence order.
std::vector<Token> distinct_rule_symbols(std::span<const Token> rule, const SymbolSplit& split);

Sequence sample_rule(const SymbolSplit& split, const SymbolSpaceConfig& config, RngHandle& rng);

Substitution sample_substitution(std::span<const Token> rule, const SymbolSplit& split,
                                 const SymbolSpaceConfig& config, RngHandle& rng);

// Simultaneous replacement of every rule-symbol occurrence by its value.
// Throws MissingBinding when a rule symbol has no entry.
Sequence apply_substitution(std::span<const Token> rule, const Substitution& case_,
                            const SymbolSplit& split);

TermTriple generate_triple(const SymbolSpaceConfig& config, RngHandle& rng);

// Same rule, two cases.
TwinTriple generate_twin_triple(const SymbolSpaceConfig& config, RngHandle& rng);

// First violated TermTriple invariant, or nullopt.
std::optional<std::string> check_triple(const TermTriple& triple, const SymbolSpaceConfig& config);

}  // namespace lime
