#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "test_support.hpp"

using namespace lt;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lime_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CorpusConfig small_config(const fs::path& out, TaskKind task, std::uint64_t n) {
  CorpusConfig cfg;
  CurriculumStage stage;
  stage.with_task(task);
  stage.n_examples = n;
  cfg.stages = {stage};
  cfg.master_seed = 42;
  cfg.out = out;
  return cfg;
}

std::vector<std::string> digests(const CorpusManifest& m) {
  std::vector<std::string> out;
  for (const auto& r : m.reports) {
    for (const auto& f : r.files) out.push_back(f.path + ":" + f.sha256);
  }
  return out;
}

}  // namespace

TEST_SUITE("corpus_pipeline") {

TEST_CASE("stage validation") {
  CurriculumStage stage;
  CHECK_NOTHROW(stage.validate());
  auto both = stage;
  both.token_budget = 100;
  CHECK_THROWS_AS(both.validate(), ConfigError);
  auto neither = stage;
  neither.n_examples.reset();
  CHECK_THROWS_AS(neither.validate(), ConfigError);
  auto zero = stage;
  zero.task_weights = {{TaskKind::Deduct, 0.0}};
  CHECK_THROWS_AS(zero.validate(), ConfigError);
  auto small = stage;
  small.symbols.vocab_size = 60;
  CHECK_THROWS_AS(small.validate(), ConfigError);
  auto rewrite = stage;
  rewrite.with_task(TaskKind::Rewrite);
  rewrite.symbols.vocab_size = 80;  // enough for math+rule, not strings
  CHECK_THROWS_AS(rewrite.validate(), ConfigError);
  auto mix = stage;
  mix.with_task(TaskKind::Mix);
  CHECK(mix.task_weights.size() == 3);
  CHECK_NOTHROW(mix.validate());
}

TEST_CASE("mix draws the three term tasks evenly") {
  CurriculumStage stage;
  stage.with_task(TaskKind::Mix);
  std::map<TaskKind, std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 3000; ++i) ++seen[generate_example(stage, 1, i).task];
  REQUIRE(seen.size() == 3);
  std::vector<std::uint64_t> counts;
  for (const auto& [t, c] : seen) counts.push_back(c);
  CHECK(chi2_uniform(counts) < chi2_crit_1pct(2));
}

TEST_CASE("generate_example is deterministic and respects max_seq_len") {
  CurriculumStage stage;
  stage.with_task(TaskKind::Mix);
  stage.max_seq_len = 64;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto a = generate_example(stage, 9, i);
    const auto b = generate_example(stage, 9, i);
    CHECK(a.source == b.source);
    CHECK(a.target == b.target);
    CHECK(a.source.size() <= 64);
    CHECK(a.target.size() <= 64);
    REQUIRE(a.meta.has_value());
    CHECK(a.meta->origin.index == i);
  }
  stage.max_seq_len = 3;
  CHECK_THROWS_AS(generate_example(stage, 9, 0), GenerationError);
}

TEST_CASE("token budget planning") {
  CurriculumStage stage;
  CHECK(plan_token_budget(stage, 0) == 1000);
  stage.n_examples.reset();
  stage.token_budget = 0;
  CHECK(plan_token_budget(stage, 0) == 0);

  stage.with_task(TaskKind::Mix);
  stage.token_budget = 200'000;
  const auto n = plan_token_budget(stage, 3, 2000);
  CHECK(n > 0);
  std::uint64_t tokens = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto p = generate_example(stage, 3, i);
    tokens += p.source.size() + p.target.size();
  }
  const double ratio = static_cast<double>(tokens) / 200'000.0;
  CHECK(ratio > 0.98);
  CHECK(ratio < 1.02);
}

TEST_CASE("output does not depend on shard count or jobs") {
  auto base = small_config(scratch("shard1"), TaskKind::Mix, 9000);
  const auto one = generate_corpus(base);
  auto sharded = base;
  sharded.out = scratch("shard8");
  sharded.shard_count = 8;
  sharded.jobs = 3;
  const auto eight = generate_corpus(sharded);
  CHECK(digests(one) == digests(eight));
  CHECK(one.reports[0].emitted == 9000);
  CHECK(slurp(base.out / "stage1" / "stage1.src") == slurp(sharded.out / "stage1" / "stage1.src"));
}

TEST_CASE("corpus has exactly n distinct pairs and dedup is idempotent") {
  auto cfg = small_config(scratch("dedup"), TaskKind::Deduct, 2000);
  cfg.stages[0].symbols.rule_len = {5, 5};
  cfg.stages[0].symbols.value_len = {2, 2};
  const auto m = generate_corpus(cfg);
  const auto records = read_corpus(cfg.out);
  CHECK(records.size() == 2000);
  std::set<std::pair<Sequence, Sequence>> uniq;
  for (const auto& r : records) uniq.insert({r.pair.source, r.pair.target});
  CHECK(uniq.size() == records.size());
  CHECK(corpus_stats(records).duplicates == 0);
  CHECK(m.reports[0].emitted == 2000);
  CHECK(m.reports[0].per_task.at("deduct") == 2000);

  auto doubled = records;
  doubled.insert(doubled.end(), records.begin(), records.begin() + 10);
  CHECK(corpus_stats(doubled).duplicates == 10);
}

TEST_CASE("manifest records files and reports") {
  auto cfg = small_config(scratch("manifest"), TaskKind::Abduct, 300);
  cfg.format = OutputFormat::Jsonl;
  const auto m = generate_corpus(cfg);
  CHECK(fs::exists(cfg.out / "manifest.json"));
  REQUIRE(m.reports.size() == 1);
  REQUIRE(m.reports[0].files.size() == 1);
  const auto& f = m.reports[0].files[0];
  CHECK(f.sha256 == sha256_hex(slurp(cfg.out / f.path)));
  CHECK(f.bytes == fs::file_size(cfg.out / f.path));
  const auto j = nlohmann::json::parse(m.to_json());
  CHECK(j.at("stages").size() == 1);
}

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("text and jsonl corpora read back to the same logical records") {
  auto text_cfg = small_config(scratch("fmt_text"), TaskKind::Mix, 200);
  auto json_cfg = text_cfg;
  json_cfg.out = scratch("fmt_jsonl");
  json_cfg.format = OutputFormat::Jsonl;
  generate_corpus(text_cfg);
  generate_corpus(json_cfg);
  const auto a = read_corpus(text_cfg.out);
  const auto b = read_corpus(json_cfg.out);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].pair.source == b[i].pair.source);
    CHECK(a[i].pair.target == b[i].pair.target);
    CHECK(a[i].pair.task == b[i].pair.task);
    CHECK(b[i].pair.meta.has_value());
  }
  CHECK(verify_example(b[0].pair).valid);
}

TEST_CASE("record line formats") {
  const Sequence s{tok::kRule, 3, tok::kMath, 7, tok::kSep, 3, 7};
  CHECK(parse_text_line(text_line(s)) == s);
  CHECK_THROWS_AS(parse_text_line("<Rule> 3 <bogus>"), ParseError);
  CHECK_THROWS_AS(parse_text_line("1 x 2"), ParseError);

  CurriculumStage stage;
  stage.with_task(TaskKind::InductV3);
  ExampleRecord r;
  r.pair = generate_example(stage, 4, 2);
  r.stage = "stage1";
  r.index = 2;
  r.n_solutions = 1;
  const auto back = parse_jsonl_line(jsonl_line(r));
  CHECK(back.pair.source == r.pair.source);
  CHECK(back.pair.target == r.pair.target);
  CHECK(back.pair.task == r.pair.task);
  CHECK(back.index == 2);
  CHECK(back.n_solutions == r.n_solutions);
  REQUIRE(back.pair.meta.has_value());
  CHECK(back.pair.meta->origin == r.pair.meta->origin);
  CHECK(back.pair.meta->bounds == r.pair.meta->bounds);
  CHECK(std::holds_alternative<TwinTriple>(back.pair.meta->content));
  CHECK_THROWS_AS(parse_jsonl_line("{\"task\": 3}"), ParseError);
}

TEST_CASE("curriculum json round trip") {
  auto stages = isarstep_curriculum(std::nullopt, std::nullopt);
  REQUIRE(stages.size() == 2);
  CHECK(stages[0].symbols.vocab_size == 100);
  CHECK(stages[1].symbols.vocab_size == 1000);
  CHECK(*stages[0].token_budget + *stages[1].token_budget == kIsarstepTokenBudget);
  const auto back = parse_curriculum(curriculum_to_json(stages));
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].name == stages[i].name);
    CHECK(back[i].symbols.vocab_size == stages[i].symbols.vocab_size);
    CHECK(back[i].task_weights == stages[i].task_weights);
    CHECK(back[i].token_budget == stages[i].token_budget);
    CHECK(back[i].n_examples == stages[i].n_examples);
  }
  const auto parsed = parse_curriculum(R"({"stages":[{"name":"a","task":"rewrite","n_examples":5}]})");
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].task_weights.size() == 1);
  CHECK(parsed[0].task_weights[0].first == TaskKind::Rewrite);
  CHECK_THROWS_AS(parse_curriculum("[{\"vocab_size\": -3}]"), ConfigError);
  CHECK_THROWS_AS(parse_curriculum("not json"), ConfigError);
  CHECK_THROWS_AS(parse_curriculum(R"([{"name":"a","n_examples":1,"token_budget":1}])"), ConfigError);
}

TEST_CASE("isarstep curriculum writes both stage directories") {
  CorpusConfig cfg;
  cfg.stages = isarstep_curriculum(400, std::nullopt);
  cfg.out = scratch("isar");
  const auto m = generate_corpus(cfg);
  REQUIRE(m.reports.size() == 2);
  CHECK(m.reports[0].emitted == 200);
  CHECK(m.reports[1].emitted == 200);
  CHECK(fs::exists(cfg.out / "stage1" / "stage1.src"));
  CHECK(fs::exists(cfg.out / "stage2" / "stage2.tgt"));
  const auto all = read_corpus(cfg.out);
  CHECK(all.size() == 400);
  CHECK(all.front().stage == "stage1");
  CHECK(all.back().stage == "stage2");
}

TEST_CASE("splits partition the corpus deterministically") {
  auto cfg = small_config(scratch("split"), TaskKind::Mix, 3000);
  generate_corpus(cfg);
  const auto records = read_corpus(cfg.out);
  const auto a = split_corpus(records, {0.8, 0.1, 0.1}, 5);
  const auto b = split_corpus(records, {0.8, 0.1, 0.1}, 5);
  CHECK(a.train.size() + a.valid.size() + a.test.size() == records.size());
  CHECK(a.train.size() == b.train.size());
  CHECK(a.valid.size() == b.valid.size());
  std::set<std::uint64_t> ids;
  for (const auto* part : {&a.train, &a.valid, &a.test}) {
    for (const auto& r : *part) ids.insert(r.index);
  }
  CHECK(ids.size() == records.size());
  CHECK(a.valid.size() > 200);
  CHECK(a.valid.size() < 400);
  // Membership depends only on the record, not on the rest of the corpus.
  const std::vector<ExampleRecord> half(records.begin(), records.begin() + 1500);
  const auto h = split_corpus(half, {0.8, 0.1, 0.1}, 5);
  std::set<std::uint64_t> valid_full, valid_half;
  for (const auto& r : a.valid) if (r.index < 1500) valid_full.insert(r.index);
  for (const auto& r : h.valid) valid_half.insert(r.index);
  CHECK(valid_full == valid_half);
  CHECK_THROWS_AS(split_corpus(records, {0.5, 0.1, 0.1}, 5), ConfigError);
  CHECK_THROWS_AS(split_corpus(records, {1.2, -0.1, -0.1}, 5), ConfigError);
}

TEST_CASE("stats") {
  const auto empty = corpus_stats({});
  CHECK(empty.examples == 0);
  CHECK(empty.duplicates == 0);

  auto cfg = small_config(scratch("stats"), TaskKind::Deduct, 500);
  cfg.format = OutputFormat::Jsonl;
  generate_corpus(cfg);
  const auto records = read_corpus(cfg.out);
  const auto st = corpus_stats(records, cfg.stages[0]);
  CHECK(st.examples == 500);
  CHECK(st.per_task.at("deduct") == 500);
  CHECK(st.max_source_len <= 128);
  CHECK(st.max_target_len <= 128);
  CHECK(st.checked_with_meta == 500);
  CHECK(st.rule_len_violations == 0);
  CHECK(st.value_len_violations == 0);
  CHECK(st.split_violations == 0);
  CHECK(st.length_violations == 0);
  CHECK(st.ambiguity_histogram.empty());  // keep policy: nothing annotated
  for (const auto& [id, count] : st.symbol_usage) {
    CHECK(id >= 1);
    CHECK(id <= 100);
    (void)count;
  }
}

TEST_CASE("ambiguity policies") {
  auto annotate = small_config(scratch("amb_annotate"), TaskKind::Induct, 300);
  annotate.ambiguity = AmbiguityPolicy::Annotate;
  annotate.format = OutputFormat::Jsonl;
  const auto m = generate_corpus(annotate);
  const auto recs = read_corpus(annotate.out);
  REQUIRE(recs.size() == 300);
  std::uint64_t unique = 0;
  for (const auto& r : recs) {
    REQUIRE(r.n_solutions.has_value());
    CHECK(*r.n_solutions >= 1);
    if (*r.n_solutions == 1) ++unique;
  }
  CHECK(m.reports[0].ambiguity_histogram.size() >= 1);

  auto only = annotate;
  only.out = scratch("amb_unique");
  only.ambiguity = AmbiguityPolicy::UniqueOnly;
  const auto mu = generate_corpus(only);
  const auto urecs = read_corpus(only.out);
  CHECK(urecs.size() == 300);
  for (const auto& r : urecs) CHECK(r.n_solutions == std::optional<std::size_t>(1));
  CHECK(mu.reports[0].ambiguity_dropped > 0);
  (void)unique;
}

TEST_CASE("impossible length limits fail generation") {
  auto cfg = small_config(scratch("toolong"), TaskKind::Deduct, 10);
  cfg.stages[0].max_seq_len = 5;
  CHECK_THROWS_AS(generate_corpus(cfg), GenerationError);
}

}  // TEST_SUITE
