#include "lime/symbol_space.hpp"

#include <algorithm>
#include <numeric>

#include "lime/errors.hpp"

namespace lime {

namespace {

constexpr std::array<std::string_view, 11> kStructuralNames = {
    "<pad>", "<unk>", "<Rule>", "<Math>", "<String>", "<s>", "{", "}", ":", ",", "="};

// '<', '>', '[', ']', '{', '}', ':', ',' never appear as symbol glyphs so the
// compact view stays parseable. '=' is reserved only when a string class
// exists, because only rewrite examples use the structural '='.
constexpr std::string_view kMathOps = "*+=-/()&^|!~%?@#$;";
constexpr std::string_view kMathOpsNoEquals = "*+-/()&^|!~%?@#$;";
constexpr std::string_view kLower = "abcdefghijklmnopqrstuvwxyz";
constexpr std::string_view kUpper = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
constexpr std::string_view kDigits = "0123456789";
constexpr std::string_view kExtra = ".'\"_`\\";

const std::string& math_alphabet(bool with_string_class) {
  static const std::string plain =
      std::string(kMathOps) + std::string(kLower) + std::string(kDigits) + std::string(kExtra);
  static const std::string rewrite =
      std::string(kMathOpsNoEquals) + std::string(kDigits) + std::string(kExtra);
  return with_string_class ? rewrite : plain;
}

std::string_view alphabet_for(SymbolClass c, bool with_string_class) {
  switch (c) {
    case SymbolClass::Math: return math_alphabet(with_string_class);
    case SymbolClass::Rule: return kUpper;
    case SymbolClass::String: return kLower;
    case SymbolClass::None: break;
  }
  return {};
}

char fallback_prefix(SymbolClass c) {
  switch (c) {
    case SymbolClass::Math: return 'm';
    case SymbolClass::Rule: return 'R';
    default: return 's';
  }
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t h, std::uint64_t v) noexcept {
  return finalize(h ^ finalize(v + kGolden));
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

bool contains_sorted(const std::vector<Token>& v, Token t) noexcept {
  return std::binary_search(v.begin(), v.end(), t);
}

}  // namespace

std::string_view structural_name(Token t) {
  if (!is_structural(t)) throw UnknownSymbol("token " + std::to_string(t) + " is not structural");
  return kStructuralNames[static_cast<std::size_t>(-t)];
}

std::optional<Token> structural_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kStructuralNames.size(); ++i) {
    if (kStructuralNames[i] == name) return -static_cast<Token>(i);
  }
  return std::nullopt;
}

void SymbolSpaceConfig::validate(bool with_string_class) const {
  if (n_math < 1 || n_rule < 1 || (with_string_class && n_string < 1)) {
    throw ConfigError("symbol class counts must be positive");
  }
  const int needed = symbols_needed(with_string_class);
  if (needed > vocab_size) {
    throw ConfigError("vocabulary size " + std::to_string(vocab_size) + " cannot hold " +
                      std::to_string(needed) + " distinct symbols");
  }
  if (!rule_len.valid()) throw ConfigError("rule length range must satisfy 1 <= min <= max");
  if (!value_len.valid()) throw ConfigError("value length range must satisfy 1 <= min <= max");
  if (rule_sampling == RuleSampling::Distinct && rule_len.hi > n_math + n_rule) {
    throw ConfigError("distinct rule sampling needs rule length <= n_math + n_rule");
  }
}

SymbolClass SymbolSplit::classify(Token t) const noexcept {
  if (t <= 0) return SymbolClass::None;
  if (contains_sorted(math, t)) return SymbolClass::Math;
  if (contains_sorted(rule, t)) return SymbolClass::Rule;
  if (contains_sorted(string, t)) return SymbolClass::String;
  return SymbolClass::None;
}

const std::vector<Token>& SymbolSplit::members(SymbolClass c) const {
  switch (c) {
    case SymbolClass::Math: return math;
    case SymbolClass::Rule: return rule;
    case SymbolClass::String: return string;
    case SymbolClass::None: break;
  }
  throw UnknownSymbol("no member list for SymbolClass::None");
}

std::optional<std::size_t> SymbolSplit::rank(Token t) const noexcept {
  for (const auto* set : {&math, &rule, &string}) {
    auto it = std::lower_bound(set->begin(), set->end(), t);
    if (it != set->end() && *it == t) return static_cast<std::size_t>(it - set->begin());
  }
  return std::nullopt;
}

bool SymbolSplit::disjoint() const {
  std::vector<Token> all;
  all.reserve(math.size() + rule.size() + string.size());
  all.insert(all.end(), math.begin(), math.end());
  all.insert(all.end(), rule.begin(), rule.end());
  all.insert(all.end(), string.begin(), string.end());
  std::sort(all.begin(), all.end());
  return std::adjacent_find(all.begin(), all.end()) == all.end();
}

bool SymbolSplit::canonical() const {
  auto strictly_sorted = [](const std::vector<Token>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>{}) == v.end();
  };
  return strictly_sorted(math) && strictly_sorted(rule) && strictly_sorted(string);
}

RngHandle::RngHandle(std::uint64_t key) noexcept : key_(key) {
  std::uint64_t x = key;
  for (auto& word : s_) {
    x += kGolden;
    word = finalize(x);
  }
}

RngHandle::result_type RngHandle::operator()() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t RngHandle::below(std::uint64_t n) noexcept {
  std::uint64_t x = (*this)();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

int RngHandle::uniform_int(int lo, int hi) noexcept {
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
  return static_cast<int>(lo + static_cast<std::int64_t>(below(span)));
}

double RngHandle::uniform01() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

RngHandle RngHandle::fork(std::uint64_t sub) const noexcept {
  return RngHandle(mix(key_ ^ 0x5bd1e9955bd1e995ULL, sub));
}

RngHandle derive_rng(std::uint64_t master_seed, std::string_view stream_label,
                     std::uint64_t example_index) noexcept {
  std::uint64_t key = mix(0x4c494d45ULL, master_seed);
  key = mix(key, fnv1a(stream_label));
  key = mix(key, example_index);
  return RngHandle(key);
}

SymbolSplit sample_split(const SymbolSpaceConfig& config, RngHandle& rng,
                         bool with_string_class) {
  config.validate(with_string_class);
  const auto k = static_cast<std::size_t>(config.symbols_needed(with_string_class));
  const auto s = static_cast<std::size_t>(config.vocab_size);

  std::vector<Token> drawn;
  drawn.reserve(k);
  if (s <= 4 * k) {
    std::vector<Token> pool(s);
    std::iota(pool.begin(), pool.end(), Token{1});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.below(s - i);
      std::swap(pool[i], pool[j]);
      drawn.push_back(pool[i]);
    }
  } else {
    // Sparse draw: rejection against the (short) list of ids taken so far.
    while (drawn.size() < k) {
      const auto id = static_cast<Token>(1 + rng.below(s));
      if (std::find(drawn.begin(), drawn.end(), id) == drawn.end()) drawn.push_back(id);
    }
  }

  SymbolSplit split;
  auto take = [&](std::size_t from, int count) {
    std::vector<Token> out(drawn.begin() + static_cast<std::ptrdiff_t>(from),
                           drawn.begin() + static_cast<std::ptrdiff_t>(from + count));
    std::sort(out.begin(), out.end());
    return out;
  };
  split.math = take(0, config.n_math);
  split.rule = take(static_cast<std::size_t>(config.n_math), config.n_rule);
  if (with_string_class) {
    split.string = take(static_cast<std::size_t>(config.n_math + config.n_rule), config.n_string);
  }
  return split;
}

SymbolSplit canonical_glyph_split(const SymbolSpaceConfig& config, bool with_string_class) {
  SymbolSplit split;
  Token next = 1;
  auto fill = [&next](std::vector<Token>& v, int n) {
    for (int i = 0; i < n; ++i) v.push_back(next++);
  };
  fill(split.math, config.n_math);
  fill(split.rule, config.n_rule);
  if (with_string_class) fill(split.string, config.n_string);
  return split;
}

std::string glyph_of(Token t, const SymbolSplit& split) {
  if (is_structural(t)) return std::string(structural_name(t));
  const SymbolClass c = split.classify(t);
  if (c == SymbolClass::None) {
    throw UnknownSymbol("token " + std::to_string(t) + " is not in the example's split");
  }
  const std::size_t r = *split.rank(t);
  const std::string_view alphabet = alphabet_for(c, !split.string.empty());
  if (r < alphabet.size()) return std::string(1, alphabet[r]);
  return std::string("[") + fallback_prefix(c) + std::to_string(r) + "]";
}

std::string render_glyphs(std::span<const Token> tokens, const SymbolSplit& split,
                          GlyphStyle style) {
  std::string out;
  if (style == GlyphStyle::Spaced) {
    for (Token t : tokens) {
      if (!out.empty()) out += ' ';
      out += glyph_of(t, split);
    }
    return out;
  }

  // Compact: header lists stay spaced, bodies concatenate, case maps read
  // "{A:a, B:b}".
  bool in_header_list = false;
  auto space_before = [&out] {
    if (!out.empty() && out.back() != ' ') out += ' ';
  };
  for (Token t : tokens) {
    if (!is_structural(t)) {
      if (in_header_list) space_before();
      out += glyph_of(t, split);
      continue;
    }
    switch (t) {
      case tok::kRule:
      case tok::kMath:
      case tok::kString:
        space_before();
        out += structural_name(t);
        in_header_list = true;
        break;
      case tok::kComma:
        out += ", ";
        break;
      case tok::kLBrace:
      case tok::kRBrace:
      case tok::kColon:
      case tok::kEquals:
        out += structural_name(t);
        break;
      default:
        space_before();
        out += structural_name(t);
        out += ' ';
        in_header_list = false;
        break;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

Sequence parse_glyphs(std::string_view text, const SymbolSplit& split) {
  const bool with_string = !split.string.empty();
  Sequence out;
  std::size_t i = 0;
  auto symbol_at = [&](SymbolClass c, std::size_t rank) -> Token {
    const auto& members = split.members(c);
    if (rank >= members.size()) {
      throw UnknownSymbol("glyph rank " + std::to_string(rank) + " exceeds its symbol class");
    }
    return members[rank];
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '<') {
      const std::size_t close = text.find('>', i);
      if (close == std::string_view::npos) throw UnknownSymbol("unterminated '<' in glyph text");
      const auto name = text.substr(i, close - i + 1);
      const auto t = structural_from_name(name);
      if (!t) throw UnknownSymbol("unknown structural token " + std::string(name));
      out.push_back(*t);
      i = close + 1;
      continue;
    }
    if (c == '[') {
      const std::size_t close = text.find(']', i);
      if (close == std::string_view::npos || close < i + 3) {
        throw UnknownSymbol("malformed fallback glyph in glyph text");
      }
      const char prefix = text[i + 1];
      const SymbolClass cls = prefix == 'm'   ? SymbolClass::Math
                              : prefix == 'R' ? SymbolClass::Rule
                              : prefix == 's' ? SymbolClass::String
                                              : SymbolClass::None;
      if (cls == SymbolClass::None) throw UnknownSymbol("unknown fallback glyph class");
      std::size_t rank = 0;
      for (std::size_t j = i + 2; j < close; ++j) {
        if (text[j] < '0' || text[j] > '9') throw UnknownSymbol("malformed fallback glyph rank");
        rank = rank * 10 + static_cast<std::size_t>(text[j] - '0');
      }
      out.push_back(symbol_at(cls, rank));
      i = close + 1;
      continue;
    }
    if (c == '{' || c == '}' || c == ':' || c == ',' || (c == '=' && with_string)) {
      out.push_back(*structural_from_name(std::string_view(&text[i], 1)));
      ++i;
      continue;
    }
    bool found = false;
    for (SymbolClass cls : {SymbolClass::Rule, SymbolClass::String, SymbolClass::Math}) {
      if (cls == SymbolClass::String && !with_string) continue;
      const auto alphabet = alphabet_for(cls, with_string);
      const auto pos = alphabet.find(c);
      if (pos != std::string_view::npos) {
        out.push_back(symbol_at(cls, pos));
        found = true;
        break;
      }
    }
    if (!found) throw UnknownSymbol(std::string("unknown glyph '") + c + "'");
    ++i;
  }
  return out;
}

}  // namespace lime
