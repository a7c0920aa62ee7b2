#include "lime/rewrite_engine.hpp"

#include <algorithm>

#include "lime/errors.hpp"

namespace lime {

namespace {

constexpr int kMaxAttempts = 1000;

bool is_subject_token(Token t, const SymbolSplit& split) {
  const auto c = split.classify(t);
  return c == SymbolClass::Math || c == SymbolClass::String;
}

}  // namespace

void RewriteConfig::validate() const {
  if (!subject_len.valid() || !rhs_len.valid() || !span_len.valid() || !binding_len.valid() ||
      !steps.valid()) {
    throw ConfigError("rewrite ranges must satisfy 1 <= min <= max");
  }
  if (binding_len.lo != 1) throw ConfigError("rewrite binding length range must start at 1");
}

Sequence sample_subject(const SymbolSplit& split, const RewriteConfig& config, RngHandle& rng) {
  const auto pool_size = split.math.size() + split.string.size();
  Sequence subject(static_cast<std::size_t>(rng.uniform_int(config.subject_len)));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    bool has_string = false;
    for (auto& t : subject) {
      const auto i = rng.below(pool_size);
      if (i < split.math.size()) {
        t = split.math[i];
      } else {
        t = split.string[i - split.math.size()];
        has_string = true;
      }
    }
    if (has_string) return subject;
  }
  throw GenerationError("no subject with a string symbol after 1000 attempts");
}

Abstraction abstract_span(std::span<const Token> subject, Span span, const SymbolSplit& split,
                          const RewriteConfig& config, RngHandle& rng) {
  if (span.begin >= span.end || span.end > subject.size()) {
    throw InvalidSpan("span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) +
                      ") is outside the subject");
  }
  const auto window = subject.subspan(span.begin, span.size());
  if (std::none_of(window.begin(), window.end(), [&](Token t) { return split.is_string(t); })) {
    throw InvalidSpan("span holds no string symbol");
  }

  Abstraction out;
  std::size_t next_var = 0;
  std::size_t i = 0;
  while (i < window.size()) {
    const Token t = window[i];
    if (split.is_math(t)) {
      out.lhs.push_back(t);
      ++i;
      continue;
    }
    if (!split.is_string(t)) throw InvalidSpan("span holds a symbol outside math/string sets");

    std::size_t run_end = i;
    while (run_end < window.size() && split.is_string(window[run_end])) ++run_end;
    const auto longest = std::min<std::size_t>(static_cast<std::size_t>(config.binding_len.hi),
                                               run_end - i);
    const std::size_t len =
        longest == 1 ? 1 : static_cast<std::size_t>(rng.uniform_int(1, static_cast<int>(longest)));
    Sequence chunk(window.begin() + static_cast<std::ptrdiff_t>(i),
                   window.begin() + static_cast<std::ptrdiff_t>(i + len));

    Token var = 0;
    for (const auto& e : out.binding.entries) {
      if (e.value == chunk) var = e.key;
    }
    if (var == 0) {
      if (next_var >= split.rule.size()) throw GenerationError("span needs more rule symbols");
      var = split.rule[next_var++];
      out.binding.entries.push_back({var, std::move(chunk)});
    }
    out.lhs.push_back(var);
    i += len;
  }
  return out;
}

Sequence sample_rhs(std::span<const Token> lhs_vars, const SymbolSplit& split,
                    const RewriteConfig& config, RngHandle& rng) {
  if (lhs_vars.empty()) throw InvalidSpan("right-hand side needs at least one variable");
  const auto pool_size = lhs_vars.size() + split.math.size();
  Sequence rhs(static_cast<std::size_t>(rng.uniform_int(config.rhs_len)));
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    bool has_var = false;
    for (auto& t : rhs) {
      const auto i = rng.below(pool_size);
      if (i < lhs_vars.size()) {
        t = lhs_vars[i];
        has_var = true;
      } else {
        t = split.math[i - lhs_vars.size()];
      }
    }
    if (has_var) return rhs;
  }
  throw GenerationError("no right-hand side with a variable after 1000 attempts");
}

Sequence apply_rewrite_at(std::span<const Token> current, const RewriteRule& rule, Span span,
                          const Substitution& binding, const SymbolSplit& split) {
  if (span.begin > span.end || span.end > current.size()) {
    throw SpanMismatch("span lies outside the current string");
  }
  const Sequence expected = apply_substitution(rule.lhs, binding, split);
  const auto window = current.subspan(span.begin, span.size());
  if (!std::equal(window.begin(), window.end(), expected.begin(), expected.end())) {
    throw SpanMismatch("span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) +
                       ") does not match the instantiated left-hand side");
  }
  const Sequence replacement = apply_substitution(rule.rhs, binding, split);
  Sequence out;
  out.reserve(current.size() - span.size() + replacement.size());
  out.insert(out.end(), current.begin(), current.begin() + static_cast<std::ptrdiff_t>(span.begin));
  out.insert(out.end(), replacement.begin(), replacement.end());
  out.insert(out.end(), current.begin() + static_cast<std::ptrdiff_t>(span.end), current.end());
  return out;
}

std::vector<Span> candidate_spans(std::span<const Token> current, const SymbolSplit& split,
                                  const RewriteConfig& config) {
  std::vector<std::size_t> strings_before(current.size() + 1, 0);
  for (std::size_t i = 0; i < current.size(); ++i) {
    strings_before[i + 1] = strings_before[i] + (split.is_string(current[i]) ? 1 : 0);
  }
  std::vector<Span> out;
  const auto lo = static_cast<std::size_t>(config.span_len.lo);
  const auto hi = std::min(static_cast<std::size_t>(config.span_len.hi), current.size());
  for (std::size_t len = lo; len <= hi; ++len) {
    for (std::size_t b = 0; b + len <= current.size(); ++b) {
      if (strings_before[b + len] > strings_before[b]) out.push_back({b, b + len});
    }
  }
  return out;
}

RewriteInstance generate_rewrite(const SymbolSpaceConfig& symbols, const RewriteConfig& config,
                                 RngHandle& rng, IntRange n_steps) {
  config.validate();
  if (!n_steps.valid()) throw ConfigError("rewrite step range must satisfy 1 <= min <= max");
  RewriteInstance instance;
  instance.split = sample_split(symbols, rng, true);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    instance.subject = sample_subject(instance.split, config, rng);
    instance.steps.clear();
    const int k = rng.uniform_int(n_steps);
    Sequence current = instance.subject;
    bool ok = true;
    for (int step = 0; step < k; ++step) {
      const auto spans = candidate_spans(current, instance.split, config);
      if (spans.empty()) {
        ok = false;
        break;
      }
      const Span span = spans[rng.below(spans.size())];
      Abstraction abs = abstract_span(current, span, instance.split, config, rng);
      RewriteRule rule{std::move(abs.lhs), sample_rhs(abs.binding.keys(), instance.split, config, rng)};
      Sequence after = apply_rewrite_at(current, rule, span, abs.binding, instance.split);
      current = after;
      instance.steps.push_back({std::move(rule), span, std::move(abs.binding), std::move(after)});
    }
    if (ok) {
      instance.final_ = std::move(current);
      return instance;
    }
  }
  throw GenerationError("no rewrite chain found after 1000 attempts");
}

Sequence replay(const RewriteInstance& instance) {
  Sequence current = instance.subject;
  for (const auto& step : instance.steps) {
    current = apply_rewrite_at(current, step.rule, step.span, step.binding, instance.split);
  }
  return current;
}

std::optional<std::string> check_rewrite(const RewriteInstance& instance) {
  const auto& split = instance.split;
  if (!split.disjoint()) return "split classes overlap";
  if (instance.steps.empty()) return "rewrite instance has no steps";
  auto only_subject_tokens = [&](const Sequence& s) {
    return std::all_of(s.begin(), s.end(), [&](Token t) { return is_subject_token(t, split); });
  };
  auto only_pattern_tokens = [&](const Sequence& s) {
    return std::all_of(s.begin(), s.end(),
                       [&](Token t) { return split.is_math(t) || split.is_rule(t); });
  };
  if (!only_subject_tokens(instance.subject)) return "subject holds a symbol outside math/string";
  if (!only_subject_tokens(instance.final_)) return "final holds a symbol outside math/string";
  Sequence current = instance.subject;
  for (const auto& step : instance.steps) {
    if (!only_pattern_tokens(step.rule.lhs) || !only_pattern_tokens(step.rule.rhs)) {
      return "pattern holds a symbol outside math/rule";
    }
    const auto lhs_vars = distinct_rule_symbols(step.rule.lhs, split);
    if (lhs_vars.empty()) return "left-hand side has no variable";
    for (Token v : distinct_rule_symbols(step.rule.rhs, split)) {
      if (std::find(lhs_vars.begin(), lhs_vars.end(), v) == lhs_vars.end()) {
        return "right-hand side variable missing from the left-hand side";
      }
    }
    try {
      current = apply_rewrite_at(current, step.rule, step.span, step.binding, split);
    } catch (const LimeError& e) {
      return std::string("step does not apply: ") + e.what();
    }
    if (current != step.after) return "recorded intermediate string differs from replay";
  }
  if (current != instance.final_) return "replay differs from the recorded final string";
  return std::nullopt;
}

}  // namespace lime
