#pragma once

// Integer vocabulary, per-example symbol splits, structural tokens,
// deterministic RNG derivation and the debug glyph view.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lime {

// Symbols are ids in [1, S]. Structural tokens use the reserved ids <= 0.
using Token = std::int32_t;
using Sequence = std::vector<Token>;

namespace tok {
inline constexpr Token kPad = 0;
inline constexpr Token kUnk = -1;
inline constexpr Token kRule = -2;    // <Rule>
inline constexpr Token kMath = -3;    // <Math>
inline constexpr Token kString = -4;  // <String>
inline constexpr Token kSep = -5;     // <s>
inline constexpr Token kLBrace = -6;  // {
inline constexpr Token kRBrace = -7;  // }
inline constexpr Token kColon = -8;   // :
inline constexpr Token kComma = -9;   // ,
inline constexpr Token kEquals = -10; // = (rewrite rule separator)
inline constexpr Token kLowest = kEquals;
}  // namespace tok

constexpr bool is_structural(Token t) noexcept { return t <= 0 && t >= tok::kLowest; }

// Literal name used in text corpora and glyph views, e.g. "<s>".
std::string_view structural_name(Token t);
std::optional<Token> structural_from_name(std::string_view name);

// Inclusive integer range.
struct IntRange {
  int lo = 0;
  int hi = 0;

  constexpr bool contains(long long v) const noexcept { return v >= lo && v <= hi; }
  constexpr bool valid() const noexcept { return lo >= 1 && lo <= hi; }
  friend constexpr bool operator==(const IntRange&, const IntRange&) = default;
};

enum class RuleSampling { WithReplacement, Distinct };

struct SymbolSpaceConfig {
  int vocab_size = 100;
  int n_math = 44;
  int n_rule = 24;
  int n_string = 24;
  IntRange rule_len{5, 20};
  IntRange value_len{2, 8};
  RuleSampling rule_sampling = RuleSampling::WithReplacement;

  int symbols_needed(bool with_string_class) const noexcept {
    return n_math + n_rule + (with_string_class ? n_string : 0);
  }
  // Throws ConfigError. The string class only counts when it is requested.
  void validate(bool with_string_class) const;
};

enum class SymbolClass { Math, Rule, String, None };

// Disjoint symbol classes of one example, each in ascending id order.
struct SymbolSplit {
  std::vector<Token> math;
  std::vector<Token> rule;
  std::vector<Token> string;

  SymbolClass classify(Token t) const noexcept;
  bool is_math(Token t) const noexcept { return classify(t) == SymbolClass::Math; }
  bool is_rule(Token t) const noexcept { return classify(t) == SymbolClass::Rule; }
  bool is_string(Token t) const noexcept { return classify(t) == SymbolClass::String; }
  // Position of t inside its class, if any.
  std::optional<std::size_t> rank(Token t) const noexcept;
  const std::vector<Token>& members(SymbolClass c) const;
  bool disjoint() const;
  bool canonical() const;

  friend bool operator==(const SymbolSplit&, const SymbolSplit&) = default;
};

// xoshiro256** keyed through SplitMix64. Bounded draws use Lemire's
// multiply-shift rejection so streams are identical on every platform.
class RngHandle {
 public:
  using result_type = std::uint64_t;

  explicit RngHandle(std::uint64_t key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;
  // Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  // Uniform in [lo, hi].
  int uniform_int(int lo, int hi) noexcept;
  int uniform_int(IntRange r) noexcept { return uniform_int(r.lo, r.hi); }
  // Uniform in [0, 1).
  double uniform01() noexcept;
  // Independent child stream, a pure function of (this handle's key, sub).
  RngHandle fork(std::uint64_t sub) const noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::array<std::uint64_t, 4> s_{};
};

RngHandle derive_rng(std::uint64_t master_seed, std::string_view stream_label,
                     std::uint64_t example_index) noexcept;

// Samples math, rule and (optionally) string classes without replacement
// from [1, S]. Throws ConfigError when the counts do not fit.
SymbolSplit sample_split(const SymbolSpaceConfig& config, RngHandle& rng,
                         bool with_string_class);

// Split whose ids follow the glyph alphabets: math ids 1..n_math, then rule
// ids, then string ids. Used to turn glyph input back into tokens.
SymbolSplit canonical_glyph_split(const SymbolSpaceConfig& config, bool with_string_class);

enum class GlyphStyle {
  Spaced,   // every token separated by one space
  Compact,  // "<Rule> A B C <Math> * + = a b d e <s> A*A+B=C" and "{A:a, B:b}"
};

// Glyph of one symbol: rule symbols are uppercase letters, string symbols
// lowercase letters, math symbols operators then lowercase letters (digits
// when the split has a string class). Ranks past the alphabet render as
// "[m44]", "[R26]", "[s26]".
std::string glyph_of(Token t, const SymbolSplit& split);

// Throws UnknownSymbol for a non-structural token outside the split.
std::string render_glyphs(std::span<const Token> tokens, const SymbolSplit& split,
                          GlyphStyle style = GlyphStyle::Spaced);

// Inverse of render_glyphs for either style. Whitespace is ignored. "=" is
// the structural rewrite separator when the split has a string class and a
// math glyph otherwise. Throws UnknownSymbol on an unrecognised glyph.
Sequence parse_glyphs(std::string_view text, const SymbolSplit& split);

}  // namespace lime
