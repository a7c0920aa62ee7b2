#pragma once

// Sequence-to-sequence encoding of every task kind, and the grammar that
// parses it back.
//
//   header   := <Rule> rule* <Math> math* [<String> string*]
//   case     := { [key : value+ (, key : value+)*] }
//   Deduct          header <s> rule <s> case              -> result
//   Abduct          header <s> rule <s> result            -> case
//   Induct          header <s> case <s> result            -> rule
//   InductV2        header <s> result                     -> rule <s> case
//   InductV3        header <s> result1 <s> result2        -> rule
//   Rewrite(*)      header <s> subject (<s> lhs = rhs)+   -> final
//   InductRewrite   header <s> subject <s> rewritten      -> lhs = rhs
//
// Without a header the leading <s> is dropped as well.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lime/rewrite_engine.hpp"
#include "lime/symbol_space.hpp"
#include "lime/term_core.hpp"

namespace lime {

enum class TaskKind {
  Deduct,
  Abduct,
  Induct,
  InductV2,
  InductV3,
  InductRewrite,
  Rewrite,
  RewriteMultistep,
  Mix,
};

inline constexpr std::array<TaskKind, 8> kConcreteTasks = {
    TaskKind::Deduct,   TaskKind::Abduct,        TaskKind::Induct,  TaskKind::InductV2,
    TaskKind::InductV3, TaskKind::InductRewrite, TaskKind::Rewrite, TaskKind::RewriteMultistep};

std::string_view to_string(TaskKind task);
// Accepts the lower_snake names used on the command line ("induct_v2").
TaskKind task_from_string(std::string_view name);
bool is_rewrite_task(TaskKind task) noexcept;

enum class HeaderMode { All, AbductOnly, None };

std::string_view to_string(HeaderMode mode);
HeaderMode header_mode_from_string(std::string_view name);

struct CodecOptions {
  HeaderMode header = HeaderMode::All;
  bool used_only = true;

  friend bool operator==(const CodecOptions&, const CodecOptions&) = default;
};

// Bounds the solvers need to decide whether a target is admissible. They
// travel with generated examples and come from flags for external corpora.
struct SolverBounds {
  IntRange rule_len{5, 20};
  IntRange value_len{2, 8};
  IntRange rhs_len{2, 8};
  IntRange span_len{2, 8};
  IntRange binding_len{1, 1};

  friend bool operator==(const SolverBounds&, const SolverBounds&) = default;
};

SolverBounds bounds_from(const SymbolSpaceConfig& symbols, const RewriteConfig& rewrite);

using ExampleSource = std::variant<TermTriple, TwinTriple, RewriteInstance>;

const SymbolSplit& split_of(const ExampleSource& source);

struct Provenance {
  std::uint64_t master_seed = 0;
  std::string stage;
  std::uint64_t index = 0;
  std::uint32_t retry = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ExampleMeta {
  Provenance origin;
  ExampleSource content;
  SolverBounds bounds;
};

struct SeqPair {
  TaskKind task = TaskKind::Deduct;
  Sequence source;
  Sequence target;
  std::optional<ExampleMeta> meta;
};

Sequence encode_case(const Substitution& case_);

// Parses exactly one case map spanning all of `tokens`. `base` offsets the
// positions reported in ParseError.
Substitution decode_case(std::span<const Token> tokens, std::size_t base = 0);

// The split restricted to symbols occurring in `body`.
SymbolSplit used_subset(const SymbolSplit& split, std::span<const Token> body);

Sequence encode_header(const SymbolSplit& split);

// Throws TaskMismatch when the source kind does not fit the task.
SeqPair encode_example(const ExampleSource& source, TaskKind task,
                       const CodecOptions& options = {});

// Logical content of an encoded example.
struct DecodedExample {
  TaskKind task = TaskKind::Deduct;
  bool has_header = false;
  SymbolSplit header;  // decoded header, or the split used to classify symbols
  Sequence rule;
  Substitution case_;
  Sequence result;
  Sequence result2;
  Sequence subject;
  std::vector<RewriteRule> rules;
  Sequence rewritten;  // final string of rewrite tasks

  friend bool operator==(const DecodedExample&, const DecodedExample&) = default;
};

// Parses source/target under the task grammar. Symbol classes come from the
// header when present, else from `known_split`, else from case keys. Throws
// ParseError with the offending offset.
DecodedExample decode_example(std::span<const Token> source, std::span<const Token> target,
                              TaskKind task, const SymbolSplit* known_split = nullptr);

// Source half only; target fields stay empty.
DecodedExample decode_source(std::span<const Token> source, TaskKind task,
                             const SymbolSplit* known_split = nullptr);

// What decode_example must return for encode_example(source, task, options).
DecodedExample logical_content(const ExampleSource& source, TaskKind task,
                               const CodecOptions& options = {});

// Recovers the concrete task from the token structure. Single-rule rewrite
// examples come back as Rewrite. Throws ParseError when nothing fits.
TaskKind infer_task(std::span<const Token> source, std::span<const Token> target);

}  // namespace lime
