#include "lime/term_core.hpp"

#include <algorithm>

#include "lime/errors.hpp"

namespace lime {

namespace {

constexpr int kMaxAttempts = 1000;

Token draw_from(const std::vector<Token>& a, const std::vector<Token>& b, RngHandle& rng) {
  const auto i = rng.below(a.size() + b.size());
  return i < a.size() ? a[i] : b[i - a.size()];
}

}  // namespace

const Sequence* Substitution::find(Token key) const noexcept {
  for (const auto& e : entries) {
    if (e.key == key) return &e.value;
  }
  return nullptr;
}

std::vector<Token> Substitution::keys() const {
  std::vector<Token> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.key);
  return out;
}

std::vector<Token> distinct_rule_symbols(std::span<const Token> rule, const SymbolSplit& split) {
  std::vector<Token> out;
  for (Token t : rule) {
    if (split.is_rule(t) && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

Sequence sample_rule(const SymbolSplit& split, const SymbolSpaceConfig& config, RngHandle& rng) {
  // The length is drawn once; only the content is resampled, which keeps the
  // length law uniform.
  const int length = rng.uniform_int(config.rule_len);
  Sequence rule(static_cast<std::size_t>(length));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    if (config.rule_sampling == RuleSampling::WithReplacement) {
      for (auto& t : rule) t = draw_from(split.math, split.rule, rng);
    } else {
      std::vector<Token> pool = split.math;
      pool.insert(pool.end(), split.rule.begin(), split.rule.end());
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
        rule[i] = pool[i];
      }
    }
    if (std::any_of(rule.begin(), rule.end(), [&](Token t) { return split.is_rule(t); })) {
      return rule;
    }
  }
  throw GenerationError("no rule with a rule symbol after 1000 attempts");
}

Substitution sample_substitution(std::span<const Token> rule, const SymbolSplit& split,
                                 const SymbolSpaceConfig& config, RngHandle& rng) {
  Substitution out;
  for (Token key : distinct_rule_symbols(rule, split)) {
    Sequence value(static_cast<std::size_t>(rng.uniform_int(config.value_len)));
    for (auto& t : value) t = split.math[rng.below(split.math.size())];
    out.entries.push_back({key, std::move(value)});
  }
  return out;
}

Sequence apply_substitution(std::span<const Token> rule, const Substitution& case_,
                            const SymbolSplit& split) {
  Sequence out;
  out.reserve(rule.size() * 4);
  for (Token t : rule) {
    if (const Sequence* value = case_.find(t)) {
      out.insert(out.end(), value->begin(), value->end());
    } else if (split.is_rule(t)) {
      throw MissingBinding("rule symbol " + std::to_string(t) + " has no binding");
    } else {
      out.push_back(t);
    }
  }
  return out;
}

TermTriple generate_triple(const SymbolSpaceConfig& config, RngHandle& rng) {
  TermTriple triple;
  triple.split = sample_split(config, rng, false);
  triple.rule = sample_rule(triple.split, config, rng);
  triple.case_ = sample_substitution(triple.rule, triple.split, config, rng);
  triple.result = apply_substitution(triple.rule, triple.case_, triple.split);
  return triple;
}

TwinTriple generate_twin_triple(const SymbolSpaceConfig& config, RngHandle& rng) {
  TwinTriple twin;
  twin.first = generate_triple(config, rng);
  twin.second_case = sample_substitution(twin.first.rule, twin.first.split, config, rng);
  twin.second_result = apply_substitution(twin.first.rule, twin.second_case, twin.first.split);
  return twin;
}

std::optional<std::string> check_triple(const TermTriple& triple, const SymbolSpaceConfig& config) {
  const auto& split = triple.split;
  if (!split.canonical()) return "split is not in ascending order";
  if (!split.disjoint()) return "split classes overlap";
  if (split.math.size() != static_cast<std::size_t>(config.n_math) ||
      split.rule.size() != static_cast<std::size_t>(config.n_rule)) {
    return "split class sizes differ from the configuration";
  }
  for (Token t : split.math) {
    if (t < 1 || t > config.vocab_size) return "math symbol outside [1, S]";
  }
  for (Token t : split.rule) {
    if (t < 1 || t > config.vocab_size) return "rule symbol outside [1, S]";
  }
  if (!config.rule_len.contains(static_cast<long long>(triple.rule.size()))) {
    return "rule length outside range";
  }
  for (Token t : triple.rule) {
    const auto c = split.classify(t);
    if (c != SymbolClass::Math && c != SymbolClass::Rule) return "rule token outside math/rule sets";
  }
  const auto used = distinct_rule_symbols(triple.rule, split);
  if (used.empty()) return "rule has no rule symbol";
  if (triple.case_.keys() != used) return "case keys differ from first-occurrence rule symbols";
  for (const auto& e : triple.case_.entries) {
    if (!config.value_len.contains(static_cast<long long>(e.value.size()))) {
      return "case value length outside range";
    }
    for (Token t : e.value) {
      if (!split.is_math(t)) return "case value contains a non-math symbol";
    }
  }
  for (Token t : triple.result) {
    if (!split.is_math(t)) return "result contains a non-math symbol";
  }
  if (apply_substitution(triple.rule, triple.case_, split) != triple.result) {
    return "result differs from the substituted rule";
  }
  return std::nullopt;
}

}  // namespace lime
