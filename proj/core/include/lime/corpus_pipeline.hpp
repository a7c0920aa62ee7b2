#pragma once

// Corpus assembly: curriculum stages, weighted task mixing, sharded
// deterministic generation, dedup, length filtering, writers, manifests,
// splits and statistics.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lime/oracle.hpp"
#include "lime/rewrite_engine.hpp"
#include "lime/symbol_space.hpp"
#include "lime/task_codec.hpp"

namespace lime {

// 20K updates x 4 accumulated batches x 4096 tokens.
inline constexpr std::uint64_t kIsarstepTokenBudget = 20'000ULL * 4 * 4096;

struct CurriculumStage {
  std::string name = "stage1";
  SymbolSpaceConfig symbols;
  RewriteConfig rewrite;
  CodecOptions codec;
  // Concrete tasks only; Mix is expanded by with_task().
  std::vector<std::pair<TaskKind, double>> task_weights{{TaskKind::Deduct, 1.0}};
  std::optional<std::uint64_t> n_examples = 1000;
  std::optional<std::uint64_t> token_budget;
  int max_seq_len = 128;

  void validate() const;
  // Sets the weights for one task; Mix becomes Deduct/Abduct/Induct at 1/3.
  CurriculumStage& with_task(TaskKind task);
};

// Two Mix stages at S=100 then S=1000, each with half the examples or
// half the token budget.
std::vector<CurriculumStage> isarstep_curriculum(std::optional<std::uint64_t> n_examples,
                                                 std::optional<std::uint64_t> token_budget);

// JSON curriculum: {"stages": [{"name": ..., "vocab_size": ..., "task": "mix" or
// "task_weights": {...}, "n_examples" or "token_budget": ..., ...}]}. Missing
// keys keep their defaults.
std::vector<CurriculumStage> parse_curriculum(std::string_view json_text);
std::string curriculum_to_json(const std::vector<CurriculumStage>& stages);

enum class AmbiguityPolicy { Keep, Annotate, UniqueOnly };
enum class OutputFormat { Text, Jsonl };

std::string_view to_string(AmbiguityPolicy policy);
AmbiguityPolicy ambiguity_policy_from_string(std::string_view name);
std::string_view to_string(OutputFormat format);
OutputFormat output_format_from_string(std::string_view name);

struct ExampleRecord {
  SeqPair pair;
  std::string stage;
  std::uint64_t index = 0;
  std::optional<std::size_t> n_solutions;
};

// Draws the task for `index` by weight, then generates and encodes an
// example, retrying with a bumped sub-index while it exceeds max_seq_len.
// `retries` receives the number of discarded draws. Throws GenerationError
// after 1000 retries.
SeqPair generate_example(const CurriculumStage& stage, std::uint64_t master_seed,
                         std::uint64_t index, std::uint32_t* retries = nullptr);

// ceil(token_budget / mean example length) from `avg_probe` probe examples;
// passes n_examples through when set.
std::uint64_t plan_token_budget(const CurriculumStage& stage, std::uint64_t master_seed,
                                std::uint64_t avg_probe = 10'000);

struct CorpusConfig {
  std::vector<CurriculumStage> stages;
  std::uint64_t master_seed = 0;
  int shard_count = 1;
  int jobs = 1;
  AmbiguityPolicy ambiguity = AmbiguityPolicy::Keep;
  OutputFormat format = OutputFormat::Text;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  std::uint64_t probe_examples = 10'000;
  std::filesystem::path out;
};

struct FileDigest {
  std::string path;  // relative to the corpus root
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct StageReport {
  std::string name;
  std::uint64_t planned = 0;
  std::uint64_t emitted = 0;
  std::uint64_t dedup_dropped = 0;
  std::uint64_t ambiguity_dropped = 0;
  std::uint64_t resamples = 0;
  std::uint64_t tokens = 0;
  std::map<std::string, std::uint64_t> per_task;
  std::map<std::string, std::uint64_t> ambiguity_histogram;
  std::vector<FileDigest> files;
};

struct CorpusManifest {
  std::uint64_t master_seed = 0;
  int shard_count = 1;
  std::string format;
  std::string ambiguity;
  std::vector<CurriculumStage> stages;
  std::vector<StageReport> reports;

  std::string to_json() const;
};

// Writes <out>/<stage>/<stage>.{src,tgt} or <stage>.jsonl plus
// <out>/manifest.json. Output bytes do not depend on shard_count or jobs.
CorpusManifest generate_corpus(const CorpusConfig& config);

// Serialisation of one record in each format.
std::string text_line(std::span<const Token> tokens);
Sequence parse_text_line(std::string_view line, std::size_t line_no = 0);
std::string jsonl_line(const ExampleRecord& record);
ExampleRecord parse_jsonl_line(std::string_view line);

// Reads a corpus from a .jsonl file, a .src file (with its .tgt sibling), a
// stage directory, or a corpus root (all stages in manifest order).
std::vector<ExampleRecord> read_corpus(const std::filesystem::path& path,
                                       std::optional<TaskKind> task = std::nullopt);

void write_corpus(const std::vector<ExampleRecord>& records, const std::filesystem::path& prefix,
                  OutputFormat format);

// Train / valid / test partition keyed on a hash of (seed, stage, index).
struct CorpusSplit {
  std::vector<ExampleRecord> train;
  std::vector<ExampleRecord> valid;
  std::vector<ExampleRecord> test;
};

CorpusSplit split_corpus(const std::vector<ExampleRecord>& corpus,
                         const std::array<double, 3>& fractions, std::uint64_t seed);

struct StatsReport {
  std::uint64_t examples = 0;
  std::map<std::string, std::uint64_t> per_task;
  std::map<std::size_t, std::uint64_t> source_len_histogram;
  std::map<std::size_t, std::uint64_t> target_len_histogram;
  std::map<Token, std::uint64_t> symbol_usage;
  std::map<std::string, std::uint64_t> ambiguity_histogram;
  std::uint64_t duplicates = 0;
  double dedup_rate = 0.0;
  std::size_t max_source_len = 0;
  std::size_t max_target_len = 0;
  std::uint64_t rule_only_rules = 0;  // rules made solely of rule symbols

  // Fidelity checks against generation bounds, on records carrying meta.
  std::uint64_t checked_with_meta = 0;
  std::uint64_t rule_len_violations = 0;
  std::uint64_t value_len_violations = 0;
  std::uint64_t split_violations = 0;
  std::uint64_t length_violations = 0;

  std::string to_json() const;
};

// `expected` supplies split sizes and max_seq_len for the fidelity checks.
StatsReport corpus_stats(const std::vector<ExampleRecord>& corpus,
                         const std::optional<CurriculumStage>& expected = std::nullopt);

std::string sha256_hex(std::string_view bytes);

}  // namespace lime
