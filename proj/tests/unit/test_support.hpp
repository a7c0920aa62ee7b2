#pragma once

#include <cmath>
#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lime/corpus_pipeline.hpp"
#include "lime/errors.hpp"
#include "lime/oracle.hpp"

namespace lt {

using namespace lime;

// Canonical glyph splits: with no string class the math alphabet is
// "*+=-/()&^|!~%?@#$;" then a-z; with one, '=' becomes the rewrite separator.
inline const SymbolSplit& term_split() {
  static const SymbolSplit s = canonical_glyph_split(SymbolSpaceConfig{}, false);
  return s;
}

inline const SymbolSplit& rewrite_split() {
  static const SymbolSplit s = canonical_glyph_split(SymbolSpaceConfig{}, true);
  return s;
}

inline Sequence g(std::string_view text, const SymbolSplit& split = term_split()) {
  return parse_glyphs(text, split);
}

inline std::string show(std::span<const Token> t, const SymbolSplit& split = term_split()) {
  return render_glyphs(t, split, GlyphStyle::Compact);
}

inline Substitution sub(std::initializer_list<std::pair<const char*, const char*>> entries,
                        const SymbolSplit& split = term_split()) {
  Substitution s;
  for (const auto& [k, v] : entries) s.entries.push_back({g(k, split).at(0), g(v, split)});
  return s;
}

// Pearson statistic of observed counts against a uniform law.
inline double chi2_uniform(const std::vector<std::uint64_t>& counts) {
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double chi2 = 0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  return chi2;
}

// Upper 1% points of the chi-square distribution.
inline double chi2_crit_1pct(int dof) {
  static const std::map<int, double> table{{2, 9.210}, {4, 13.277}, {6, 16.812}, {7, 18.475}, {15, 30.578}};
  return table.at(dof);
}

inline std::vector<Token> sorted(std::vector<Token> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace lt
