#include "lime/task_codec.hpp"

#include <algorithm>

#include "lime/errors.hpp"

namespace lime {

namespace {

constexpr std::array<std::string_view, 9> kTaskNames = {
    "deduct",        "abduct",  "induct",           "induct_v2", "induct_v3",
    "induct_rewrite", "rewrite", "rewrite_multistep", "mix"};

struct Segment {
  std::span<const Token> tokens;
  std::size_t base = 0;
};

std::vector<Segment> split_segments(std::span<const Token> tokens, std::size_t base) {
  std::vector<Segment> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= tokens.size(); ++i) {
    if (i == tokens.size() || tokens[i] == tok::kSep) {
      out.push_back({tokens.subspan(start, i - start), base + start});
      start = i + 1;
    }
  }
  return out;
}

Sequence plain(const Segment& seg, std::string_view what) {
  if (seg.tokens.empty()) throw ParseError(seg.base, std::string(what) + " is empty");
  for (std::size_t i = 0; i < seg.tokens.size(); ++i) {
    if (is_structural(seg.tokens[i])) {
      throw ParseError(seg.base + i, "unexpected " + std::string(structural_name(seg.tokens[i])) +
                                         " in " + std::string(what));
    }
  }
  return {seg.tokens.begin(), seg.tokens.end()};
}

RewriteRule parse_rule(const Segment& seg) {
  const auto eq = std::find(seg.tokens.begin(), seg.tokens.end(), tok::kEquals);
  if (eq == seg.tokens.end()) throw ParseError(seg.base, "rewrite rule lacks '='");
  const auto pos = static_cast<std::size_t>(eq - seg.tokens.begin());
  RewriteRule rule;
  rule.lhs = plain({seg.tokens.first(pos), seg.base}, "rule left-hand side");
  rule.rhs = plain({seg.tokens.subspan(pos + 1), seg.base + pos + 1}, "rule right-hand side");
  return rule;
}

Sequence encode_rule(const RewriteRule& rule) {
  Sequence out = rule.lhs;
  out.push_back(tok::kEquals);
  out.insert(out.end(), rule.rhs.begin(), rule.rhs.end());
  return out;
}

void append(Sequence& out, std::span<const Token> tail) { out.insert(out.end(), tail.begin(), tail.end()); }

void expect_segments(const std::vector<Segment>& segs, std::size_t n, std::string_view where) {
  if (segs.size() != n) {
    const std::size_t at = segs.size() > n ? segs[n].base - 1 : segs.back().base + segs.back().tokens.size();
    throw ParseError(at, "expected " + std::to_string(n) + " <s>-separated parts in " +
                             std::string(where) + ", found " + std::to_string(segs.size()));
  }
}

// Parses "<Rule> ... <Math> ... [<String> ...] <s>"; returns the offset of the
// first body token.
std::size_t parse_header(std::span<const Token> source, SymbolSplit& split) {
  std::size_t i = 1;
  auto read_list = [&](std::vector<Token>& into) {
    while (i < source.size() && !is_structural(source[i])) into.push_back(source[i++]);
  };
  read_list(split.rule);
  if (i >= source.size() || source[i] != tok::kMath) throw ParseError(i, "expected <Math> in header");
  ++i;
  read_list(split.math);
  if (i < source.size() && source[i] == tok::kString) {
    ++i;
    read_list(split.string);
  }
  if (i >= source.size() || source[i] != tok::kSep) throw ParseError(i, "expected <s> after header");
  for (auto* v : {&split.math, &split.rule, &split.string}) std::sort(v->begin(), v->end());
  if (!split.canonical() || !split.disjoint()) throw ParseError(0, "header lists a symbol twice");
  return i + 1;
}

void check_membership(std::span<const Token> tokens, std::size_t base, const SymbolSplit& split) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!is_structural(tokens[i]) && split.classify(tokens[i]) == SymbolClass::None) {
      throw ParseError(base + i, "symbol " + std::to_string(tokens[i]) + " is not in the header");
    }
  }
}

const TermTriple& expect_triple(const ExampleSource& source, TaskKind task) {
  if (const auto* t = std::get_if<TermTriple>(&source)) return *t;
  throw TaskMismatch(std::string(to_string(task)) + " needs a term triple");
}

const RewriteInstance& expect_rewrite(const ExampleSource& source, TaskKind task) {
  if (const auto* r = std::get_if<RewriteInstance>(&source)) {
    if (r->steps.empty()) throw TaskMismatch("rewrite instance has no steps");
    if ((task == TaskKind::Rewrite || task == TaskKind::InductRewrite) && r->steps.size() != 1) {
      throw TaskMismatch(std::string(to_string(task)) + " needs exactly one rewrite step");
    }
    return *r;
  }
  throw TaskMismatch(std::string(to_string(task)) + " needs a rewrite instance");
}

bool header_enabled(HeaderMode mode, TaskKind task) {
  return mode == HeaderMode::All || (mode == HeaderMode::AbductOnly && task == TaskKind::Abduct);
}

// Classes for headerless input without a known split: case keys are rule
// symbols, everything else is math.
SymbolSplit infer_split(const DecodedExample& d, std::span<const Token> source,
                        std::span<const Token> target) {
  if (d.case_.empty() && d.task != TaskKind::Deduct && d.task != TaskKind::Abduct &&
      d.task != TaskKind::Induct && d.task != TaskKind::InductV2) {
    throw ParseError(0, std::string(to_string(d.task)) + " without a header needs a known split");
  }
  SymbolSplit split;
  split.rule = d.case_.keys();
  std::sort(split.rule.begin(), split.rule.end());
  for (auto seq : {source, target}) {
    for (Token t : seq) {
      if (!is_structural(t) && !std::binary_search(split.rule.begin(), split.rule.end(), t)) {
        split.math.push_back(t);
      }
    }
  }
  std::sort(split.math.begin(), split.math.end());
  split.math.erase(std::unique(split.math.begin(), split.math.end()), split.math.end());
  return split;
}

}  // namespace

std::string_view to_string(TaskKind task) { return kTaskNames[static_cast<std::size_t>(task)]; }

TaskKind task_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
    if (kTaskNames[i] == name) return static_cast<TaskKind>(i);
  }
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

bool is_rewrite_task(TaskKind task) noexcept {
  return task == TaskKind::Rewrite || task == TaskKind::RewriteMultistep ||
         task == TaskKind::InductRewrite;
}

std::string_view to_string(HeaderMode mode) {
  switch (mode) {
    case HeaderMode::All: return "all";
    case HeaderMode::AbductOnly: return "abduct_only";
    case HeaderMode::None: return "none";
  }
  return "all";
}

HeaderMode header_mode_from_string(std::string_view name) {
  if (name == "all") return HeaderMode::All;
  if (name == "abduct_only") return HeaderMode::AbductOnly;
  if (name == "none") return HeaderMode::None;
  throw ConfigError("unknown header mode '" + std::string(name) + "'");
}

SolverBounds bounds_from(const SymbolSpaceConfig& symbols, const RewriteConfig& rewrite) {
  return {symbols.rule_len, symbols.value_len, rewrite.rhs_len, rewrite.span_len,
          rewrite.binding_len};
}

const SymbolSplit& split_of(const ExampleSource& source) {
  return std::visit(
      [](const auto& s) -> const SymbolSplit& {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TwinTriple>) {
          return s.first.split;
        } else {
          return s.split;
        }
      },
      source);
}

Sequence encode_case(const Substitution& case_) {
  Sequence out{tok::kLBrace};
  for (std::size_t i = 0; i < case_.entries.size(); ++i) {
    if (i > 0) out.push_back(tok::kComma);
    out.push_back(case_.entries[i].key);
    out.push_back(tok::kColon);
    append(out, case_.entries[i].value);
  }
  out.push_back(tok::kRBrace);
  return out;
}

Substitution decode_case(std::span<const Token> tokens, std::size_t base) {
  if (tokens.empty() || tokens[0] != tok::kLBrace) throw ParseError(base, "case must open with '{'");
  Substitution out;
  std::size_t i = 1;
  if (i < tokens.size() && tokens[i] == tok::kRBrace) {
    if (i + 1 != tokens.size()) throw ParseError(base + i + 1, "tokens after closing '}'");
    return out;
  }
  while (true) {
    if (i >= tokens.size()) throw ParseError(base + i, "unclosed '{' in case");
    const Token key = tokens[i];
    if (is_structural(key)) throw ParseError(base + i, "expected a case key");
    if (out.find(key) != nullptr) throw ParseError(base + i, "duplicate case key");
    ++i;
    if (i >= tokens.size()) throw ParseError(base + i, "unclosed '{' in case");
    if (tokens[i] != tok::kColon) throw ParseError(base + i, "expected ':' after case key");
    ++i;
    Sequence value;
    while (i < tokens.size() && !is_structural(tokens[i])) value.push_back(tokens[i++]);
    if (value.empty()) throw ParseError(base + i, "empty case value");
    out.entries.push_back({key, std::move(value)});
    if (i >= tokens.size()) throw ParseError(base + i, "unclosed '{' in case");
    if (tokens[i] == tok::kComma) {
      ++i;
      continue;
    }
    if (tokens[i] == tok::kRBrace) {
      if (i + 1 != tokens.size()) throw ParseError(base + i + 1, "tokens after closing '}'");
      return out;
    }
    throw ParseError(base + i, "expected ',' or '}' in case");
  }
}

SymbolSplit used_subset(const SymbolSplit& split, std::span<const Token> body) {
  SymbolSplit out;
  for (Token t : body) {
    switch (split.classify(t)) {
      case SymbolClass::Math: out.math.push_back(t); break;
      case SymbolClass::Rule: out.rule.push_back(t); break;
      case SymbolClass::String: out.string.push_back(t); break;
      case SymbolClass::None: break;
    }
  }
  for (auto* v : {&out.math, &out.rule, &out.string}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  return out;
}

Sequence encode_header(const SymbolSplit& split) {
  Sequence out{tok::kRule};
  append(out, split.rule);
  out.push_back(tok::kMath);
  append(out, split.math);
  if (!split.string.empty()) {
    out.push_back(tok::kString);
    append(out, split.string);
  }
  return out;
}

SeqPair encode_example(const ExampleSource& source, TaskKind task, const CodecOptions& options) {
  SeqPair pair;
  pair.task = task;
  Sequence body;
  Sequence& target = pair.target;

  switch (task) {
    case TaskKind::Deduct: {
      const auto& t = expect_triple(source, task);
      body = t.rule;
      body.push_back(tok::kSep);
      append(body, encode_case(t.case_));
      target = t.result;
      break;
    }
    case TaskKind::Abduct: {
      const auto& t = expect_triple(source, task);
      body = t.rule;
      body.push_back(tok::kSep);
      append(body, t.result);
      target = encode_case(t.case_);
      break;
    }
    case TaskKind::Induct: {
      const auto& t = expect_triple(source, task);
      body = encode_case(t.case_);
      body.push_back(tok::kSep);
      append(body, t.result);
      target = t.rule;
      break;
    }
    case TaskKind::InductV2: {
      const auto& t = expect_triple(source, task);
      body = t.result;
      target = t.rule;
      target.push_back(tok::kSep);
      append(target, encode_case(t.case_));
      break;
    }
    case TaskKind::InductV3: {
      const auto* twin = std::get_if<TwinTriple>(&source);
      if (twin == nullptr) throw TaskMismatch("induct_v3 needs a twin triple");
      body = twin->first.result;
      body.push_back(tok::kSep);
      append(body, twin->second_result);
      target = twin->first.rule;
      break;
    }
    case TaskKind::Rewrite:
    case TaskKind::RewriteMultistep: {
      const auto& r = expect_rewrite(source, task);
      body = r.subject;
      for (const auto& step : r.steps) {
        body.push_back(tok::kSep);
        append(body, encode_rule(step.rule));
      }
      target = r.final_;
      break;
    }
    case TaskKind::InductRewrite: {
      const auto& r = expect_rewrite(source, task);
      body = r.subject;
      body.push_back(tok::kSep);
      append(body, r.final_);
      target = encode_rule(r.steps.front().rule);
      break;
    }
    case TaskKind::Mix:
      throw TaskMismatch("mix is a sampling directive, not an encodable task");
  }

  if (header_enabled(options.header, task)) {
    const SymbolSplit& split = split_of(source);
    Sequence all = body;
    append(all, target);
    pair.source = encode_header(options.used_only ? used_subset(split, all) : split);
    pair.source.push_back(tok::kSep);
    append(pair.source, body);
  } else {
    pair.source = std::move(body);
  }
  return pair;
}

namespace {

DecodedExample decode_impl(std::span<const Token> source, std::span<const Token> target,
                           TaskKind task, const SymbolSplit* known_split, bool with_target) {
  DecodedExample d;
  d.task = task;
  std::size_t body_start = 0;
  if (!source.empty() && source[0] == tok::kRule) {
    body_start = parse_header(source, d.header);
    d.has_header = true;
  }
  const auto src = split_segments(source.subspan(body_start), body_start);
  const auto tgt = with_target ? split_segments(target, 0) : std::vector<Segment>{};

  switch (task) {
    case TaskKind::Deduct:
      expect_segments(src, 2, "source");
      if (with_target) expect_segments(tgt, 1, "target");
      d.rule = plain(src[0], "rule");
      d.case_ = decode_case(src[1].tokens, src[1].base);
      if (with_target) d.result = plain(tgt[0], "result");
      break;
    case TaskKind::Abduct:
      expect_segments(src, 2, "source");
      if (with_target) expect_segments(tgt, 1, "target");
      d.rule = plain(src[0], "rule");
      d.result = plain(src[1], "result");
      if (with_target) d.case_ = decode_case(tgt[0].tokens, tgt[0].base);
      break;
    case TaskKind::Induct:
      expect_segments(src, 2, "source");
      if (with_target) expect_segments(tgt, 1, "target");
      d.case_ = decode_case(src[0].tokens, src[0].base);
      d.result = plain(src[1], "result");
      if (with_target) d.rule = plain(tgt[0], "rule");
      break;
    case TaskKind::InductV2:
      expect_segments(src, 1, "source");
      if (with_target) expect_segments(tgt, 2, "target");
      d.result = plain(src[0], "result");
      if (with_target) d.rule = plain(tgt[0], "rule");
      if (with_target) d.case_ = decode_case(tgt[1].tokens, tgt[1].base);
      break;
    case TaskKind::InductV3:
      expect_segments(src, 2, "source");
      if (with_target) expect_segments(tgt, 1, "target");
      d.result = plain(src[0], "first result");
      d.result2 = plain(src[1], "second result");
      if (with_target) d.rule = plain(tgt[0], "rule");
      break;
    case TaskKind::Rewrite:
    case TaskKind::RewriteMultistep:
      if (src.size() < 2) throw ParseError(source.size(), "rewrite source needs at least one rule");
      if (task == TaskKind::Rewrite) expect_segments(src, 2, "source");
      if (with_target) expect_segments(tgt, 1, "target");
      d.subject = plain(src[0], "subject");
      for (std::size_t i = 1; i < src.size(); ++i) d.rules.push_back(parse_rule(src[i]));
      if (with_target) d.rewritten = plain(tgt[0], "final string");
      break;
    case TaskKind::InductRewrite:
      expect_segments(src, 2, "source");
      if (with_target) expect_segments(tgt, 1, "target");
      d.subject = plain(src[0], "subject");
      d.rewritten = plain(src[1], "rewritten string");
      if (with_target) d.rules.push_back(parse_rule(tgt[0]));
      break;
    case TaskKind::Mix:
      throw TaskMismatch("mix examples carry a concrete task");
  }

  if (!d.has_header) d.header = known_split != nullptr ? *known_split : infer_split(d, source, target);
  check_membership(source, 0, d.header);
  check_membership(target, 0, d.header);
  return d;
}

}  // namespace

DecodedExample decode_example(std::span<const Token> source, std::span<const Token> target,
                              TaskKind task, const SymbolSplit* known_split) {
  return decode_impl(source, target, task, known_split, true);
}

DecodedExample decode_source(std::span<const Token> source, TaskKind task,
                             const SymbolSplit* known_split) {
  return decode_impl(source, {}, task, known_split, false);
}

DecodedExample logical_content(const ExampleSource& source, TaskKind task,
                               const CodecOptions& options) {
  const SeqPair pair = encode_example(source, task, options);
  DecodedExample d;
  d.task = task;
  d.has_header = header_enabled(options.header, task);
  const SymbolSplit& split = split_of(source);
  if (d.has_header && options.used_only) {
    Sequence all = pair.source;
    append(all, pair.target);
    d.header = used_subset(split, all);
  } else {
    d.header = split;
  }
  if (const auto* t = std::get_if<TermTriple>(&source)) {
    d.rule = t->rule;
    d.case_ = t->case_;
    d.result = t->result;
  } else if (const auto* twin = std::get_if<TwinTriple>(&source)) {
    d.rule = twin->first.rule;
    d.result = twin->first.result;
    d.result2 = twin->second_result;
  } else {
    const auto& r = std::get<RewriteInstance>(source);
    d.subject = r.subject;
    for (const auto& step : r.steps) d.rules.push_back(step.rule);
    d.rewritten = r.final_;
  }
  return d;
}

TaskKind infer_task(std::span<const Token> source, std::span<const Token> target) {
  std::size_t body_start = 0;
  if (!source.empty() && source[0] == tok::kRule) {
    SymbolSplit ignored;
    body_start = parse_header(source, ignored);
  }
  const auto src = split_segments(source.subspan(body_start), body_start);
  auto has = [](std::span<const Token> s, Token t) { return std::find(s.begin(), s.end(), t) != s.end(); };
  auto starts_case = [](const Segment& seg) { return !seg.tokens.empty() && seg.tokens[0] == tok::kLBrace; };

  if (has(target, tok::kEquals)) return TaskKind::InductRewrite;
  if (!target.empty() && target[0] == tok::kLBrace) return TaskKind::Abduct;
  if (has(target, tok::kSep)) return TaskKind::InductV2;
  if (has(source.subspan(body_start), tok::kEquals)) {
    return src.size() == 2 ? TaskKind::Rewrite : TaskKind::RewriteMultistep;
  }
  if (src.size() == 2) {
    if (starts_case(src[0])) return TaskKind::Induct;
    if (starts_case(src[1])) return TaskKind::Deduct;
    return TaskKind::InductV3;
  }
  throw ParseError(body_start, "token structure matches no task grammar");
}

}  // namespace lime
