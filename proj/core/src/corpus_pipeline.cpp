#include "lime/corpus_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "json_convert.hpp"
#include "lime/errors.hpp"

namespace lime {

namespace {

constexpr std::uint32_t kMaxRetries = 1000;
constexpr std::uint64_t kBlock = 4096;

bool needs_string_class(const CurriculumStage& stage) {
  for (const auto& [task, w] : stage.task_weights) {
    if (w > 0 && is_rewrite_task(task)) return true;
  }
  return false;
}

bool needs_term_class(const CurriculumStage& stage) {
  for (const auto& [task, w] : stage.task_weights) {
    if (w > 0 && !is_rewrite_task(task)) return true;
  }
  return false;
}

TaskKind draw_task(const CurriculumStage& stage, std::uint64_t seed, std::uint64_t index) {
  if (stage.task_weights.size() == 1) return stage.task_weights.front().first;
  double total = 0;
  for (const auto& [task, w] : stage.task_weights) total += w;
  auto rng = derive_rng(seed, stage.name + "/task", index);
  double x = rng.uniform01() * total;
  for (const auto& [task, w] : stage.task_weights) {
    if (x < w) return task;
    x -= w;
  }
  // rounding at the top end
  for (auto it = stage.task_weights.rbegin(); it != stage.task_weights.rend(); ++it) {
    if (it->second > 0) return it->first;
  }
  return stage.task_weights.back().first;
}

ExampleSource draw_source(const CurriculumStage& stage, TaskKind task, RngHandle& rng) {
  switch (task) {
    case TaskKind::InductV3:
      return generate_twin_triple(stage.symbols, rng);
    case TaskKind::Rewrite:
    case TaskKind::InductRewrite:
      return generate_rewrite(stage.symbols, stage.rewrite, rng, IntRange{1, 1});
    case TaskKind::RewriteMultistep:
      return generate_rewrite(stage.symbols, stage.rewrite, rng, stage.rewrite.steps);
    default:
      return generate_triple(stage.symbols, rng);
  }
}

struct PairKey {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  friend bool operator==(const PairKey&, const PairKey&) = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const noexcept { return static_cast<std::size_t>(k.a ^ (k.b * 0x9e3779b97f4a7c15ULL)); }
};

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

PairKey pair_key(const Sequence& source, const Sequence& target) {
  std::uint64_t a = 0x243f6a8885a308d3ULL;
  std::uint64_t b = 0x13198a2e03707344ULL;
  auto feed = [&](std::uint64_t v) {
    a = mix64(a ^ v);
    b = mix64(b + v * 0xff51afd7ed558ccdULL + 0x632be59bd9b4e019ULL);
  };
  feed(source.size());
  for (Token t : source) feed(static_cast<std::uint32_t>(t));
  feed(target.size());
  for (Token t : target) feed(static_cast<std::uint32_t>(t));
  return {a, b};
}

std::string ambiguity_bucket(const VerificationReport& r, std::size_t cap) {
  if (!r.n_solutions) return "unknown";
  if (r.truncated) return ">" + std::to_string(cap);
  return std::to_string(*r.n_solutions);
}

struct Generated {
  ExampleRecord record;
  std::uint32_t retries = 0;
  PairKey key;
  std::string bucket;
  bool unique = true;
};

Generated generate_one(const CurriculumStage& stage, const CorpusConfig& cfg, std::uint64_t index) {
  Generated g;
  g.record.pair = generate_example(stage, cfg.master_seed, index, &g.retries);
  g.record.stage = stage.name;
  g.record.index = index;
  g.key = pair_key(g.record.pair.source, g.record.pair.target);
  if (cfg.ambiguity != AmbiguityPolicy::Keep) {
    VerifyOptions opts;
    opts.cap = cfg.enumeration_cap;
    const auto report = verify_example(g.record.pair, opts);
    g.bucket = ambiguity_bucket(report, cfg.enumeration_cap);
    g.unique = report.n_solutions && *report.n_solutions == 1 && !report.truncated;
    if (!report.truncated) {
      g.record.n_solutions = report.n_solutions;
    }
  }
  return g;
}

// Indices [begin, end) cut into shard_count contiguous ranges, spread over
// `jobs` threads. Results come back in index order.
std::vector<Generated> generate_block(const CurriculumStage& stage, const CorpusConfig& cfg,
                                      std::uint64_t begin, std::uint64_t end) {
  const std::uint64_t n = end - begin;
  std::vector<Generated> out(n);
  const std::uint64_t shards = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(cfg.shard_count));
  const int jobs = std::max(1, cfg.jobs);
  auto run_shard = [&](std::uint64_t s) {
    const std::uint64_t lo = n * s / shards;
    const std::uint64_t hi = n * (s + 1) / shards;
    for (std::uint64_t i = lo; i < hi; ++i) out[i] = generate_one(stage, cfg, begin + i);
  };
  if (jobs == 1) {
    for (std::uint64_t s = 0; s < shards; ++s) run_shard(s);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  std::vector<std::thread> workers;
  for (int j = 0; j < jobs; ++j) {
    workers.emplace_back([&, j] {
      try {
        for (std::uint64_t s = static_cast<std::uint64_t>(j); s < shards; s += static_cast<std::uint64_t>(jobs)) {
          run_shard(s);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(j)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

void CurriculumStage::validate() const {
  if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..") {
    throw ConfigError("stage name '" + name + "' is not a valid directory name");
  }
  if (task_weights.empty()) throw ConfigError("stage " + name + " has no task weights");
  double total = 0;
  for (const auto& [task, w] : task_weights) {
    if (task == TaskKind::Mix) throw ConfigError("mix must be expanded into concrete task weights");
    if (!(w >= 0) || !std::isfinite(w)) throw ConfigError("task weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0)) throw ConfigError("task weights of stage " + name + " sum to zero");
  if (n_examples.has_value() == token_budget.has_value()) {
    throw ConfigError("stage " + name + " needs exactly one of n_examples and token_budget");
  }
  if (max_seq_len < 1) throw ConfigError("max_seq_len must be positive");
  if (needs_term_class(*this)) symbols.validate(false);
  if (needs_string_class(*this)) {
    symbols.validate(true);
    rewrite.validate();
  }
}

CurriculumStage& CurriculumStage::with_task(TaskKind task) {
  task_weights.clear();
  if (task == TaskKind::Mix) {
    for (TaskKind t : {TaskKind::Deduct, TaskKind::Abduct, TaskKind::Induct}) {
      task_weights.emplace_back(t, 1.0 / 3.0);
    }
  } else {
    task_weights.emplace_back(task, 1.0);
  }
  return *this;
}

std::vector<CurriculumStage> isarstep_curriculum(std::optional<std::uint64_t> n_examples,
                                                 std::optional<std::uint64_t> token_budget) {
  if (!n_examples && !token_budget) token_budget = kIsarstepTokenBudget;
  std::vector<CurriculumStage> stages(2);
  const int vocab[2] = {100, 1000};
  for (int i = 0; i < 2; ++i) {
    auto& s = stages[static_cast<std::size_t>(i)];
    s.name = "stage" + std::to_string(i + 1);
    s.symbols.vocab_size = vocab[i];
    s.with_task(TaskKind::Mix);
    s.n_examples.reset();
    if (n_examples) s.n_examples = (*n_examples + 1 - static_cast<std::uint64_t>(i)) / 2;
    if (token_budget) s.token_budget = (*token_budget + 1 - static_cast<std::uint64_t>(i)) / 2;
  }
  return stages;
}

std::string_view to_string(AmbiguityPolicy policy) {
  switch (policy) {
    case AmbiguityPolicy::Keep: return "keep";
    case AmbiguityPolicy::Annotate: return "annotate";
    case AmbiguityPolicy::UniqueOnly: return "unique_only";
  }
  return "keep";
}

AmbiguityPolicy ambiguity_policy_from_string(std::string_view name) {
  if (name == "keep") return AmbiguityPolicy::Keep;
  if (name == "annotate") return AmbiguityPolicy::Annotate;
  if (name == "unique_only") return AmbiguityPolicy::UniqueOnly;
  throw ConfigError("unknown ambiguity policy '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat format) {
  return format == OutputFormat::Jsonl ? "jsonl" : "text";
}

OutputFormat output_format_from_string(std::string_view name) {
  if (name == "text") return OutputFormat::Text;
  if (name == "jsonl") return OutputFormat::Jsonl;
  throw ConfigError("unknown format '" + std::string(name) + "'");
}

SeqPair generate_example(const CurriculumStage& stage, std::uint64_t master_seed, std::uint64_t index,
                         std::uint32_t* retries) {
  const TaskKind task = draw_task(stage, master_seed, index);
  const auto base = derive_rng(master_seed, stage.name, index);
  const auto limit = static_cast<std::size_t>(stage.max_seq_len);
  for (std::uint32_t retry = 0; retry < kMaxRetries; ++retry) {
    auto rng = base.fork(retry);
    ExampleSource source = draw_source(stage, task, rng);
    SeqPair pair = encode_example(source, task, stage.codec);
    if (pair.source.size() > limit || pair.target.size() > limit) continue;
    pair.meta = ExampleMeta{Provenance{master_seed, stage.name, index, retry}, std::move(source),
                            bounds_from(stage.symbols, stage.rewrite)};
    if (retries) *retries = retry;
    return pair;
  }
  throw GenerationError("index " + std::to_string(index) + " of stage " + stage.name +
                        " exceeded max_seq_len after " + std::to_string(kMaxRetries) + " retries");
}

std::uint64_t plan_token_budget(const CurriculumStage& stage, std::uint64_t master_seed,
                                std::uint64_t avg_probe) {
  if (stage.n_examples) return *stage.n_examples;
  if (!stage.token_budget || *stage.token_budget == 0) return 0;
  CurriculumStage probe = stage;
  probe.name = stage.name + "/probe";
  const std::uint64_t n = std::max<std::uint64_t>(1, avg_probe);
  std::uint64_t tokens = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto pair = generate_example(probe, master_seed, i);
    tokens += pair.source.size() + pair.target.size();
  }
  const double mean = static_cast<double>(tokens) / static_cast<double>(n);
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(*stage.token_budget) / mean));
}

CorpusManifest generate_corpus(const CorpusConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.stages.empty()) throw ConfigError("no stages to generate");
  if (cfg.shard_count < 1) throw ConfigError("shard count must be positive");
  if (cfg.jobs < 1) throw ConfigError("jobs must be positive");
  if (cfg.enumeration_cap < 1) throw ConfigError("enumeration cap must be positive");
  std::unordered_set<std::string> names;
  for (const auto& s : cfg.stages) {
    s.validate();
    if (!names.insert(s.name).second) throw ConfigError("duplicate stage name " + s.name);
  }

  CorpusManifest manifest;
  manifest.master_seed = cfg.master_seed;
  manifest.shard_count = cfg.shard_count;
  manifest.format = std::string(to_string(cfg.format));
  manifest.ambiguity = std::string(to_string(cfg.ambiguity));
  manifest.stages = cfg.stages;

  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw IoError("cannot create " + cfg.out.string() + ": " + ec.message());

  for (const auto& stage : cfg.stages) {
    StageReport report;
    report.name = stage.name;
    report.planned = plan_token_budget(stage, cfg.master_seed, cfg.probe_examples);

    const fs::path dir = cfg.out / stage.name;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    std::vector<std::unique_ptr<detail::DigestingWriter>> writers;
    if (cfg.format == OutputFormat::Jsonl) {
      writers.push_back(std::make_unique<detail::DigestingWriter>(
          dir / (stage.name + ".jsonl"), stage.name + "/" + stage.name + ".jsonl"));
    } else {
      writers.push_back(std::make_unique<detail::DigestingWriter>(
          dir / (stage.name + ".src"), stage.name + "/" + stage.name + ".src"));
      writers.push_back(std::make_unique<detail::DigestingWriter>(
          dir / (stage.name + ".tgt"), stage.name + "/" + stage.name + ".tgt"));
    }

    // Dropped examples are replaced by further indices so the stage always
    // emits `planned` examples.
    std::unordered_set<PairKey, PairKeyHash> seen;
    const std::uint64_t index_limit = report.planned * 100 + 10'000;
    std::uint64_t next = 0;
    while (report.emitted < report.planned) {
      if (next >= index_limit) {
        throw GenerationError("stage " + stage.name + " dropped too many examples to reach " +
                              std::to_string(report.planned));
      }
      const std::uint64_t want = report.planned - report.emitted;
      const std::uint64_t end = next + std::min(kBlock, std::max(want, std::uint64_t{64}));
      auto block = generate_block(stage, cfg, next, end);
      next = end;
      for (auto& g : block) {
        if (report.emitted == report.planned) break;
        report.resamples += g.retries;
        if (!seen.insert(g.key).second) {
          ++report.dedup_dropped;
          continue;
        }
        if (cfg.ambiguity == AmbiguityPolicy::UniqueOnly && !g.unique) {
          ++report.ambiguity_dropped;
          continue;
        }
        if (cfg.ambiguity != AmbiguityPolicy::Keep) ++report.ambiguity_histogram[g.bucket];
        ++report.emitted;
        report.tokens += g.record.pair.source.size() + g.record.pair.target.size();
        ++report.per_task[std::string(to_string(g.record.pair.task))];
        if (cfg.format == OutputFormat::Jsonl) {
          writers[0]->write_line(jsonl_line(g.record));
        } else {
          writers[0]->write_line(text_line(g.record.pair.source));
          writers[1]->write_line(text_line(g.record.pair.target));
        }
      }
    }
    for (auto& w : writers) report.files.push_back(w->finish());
    manifest.reports.push_back(std::move(report));
  }

  std::ofstream out(cfg.out / "manifest.json", std::ios::binary | std::ios::trunc);
  out << manifest.to_json() << '\n';
  if (!out) throw IoError("cannot write manifest in " + cfg.out.string());
  return manifest;
}

CorpusSplit split_corpus(const std::vector<ExampleRecord>& corpus, const std::array<double, 3>& fractions,
                         std::uint64_t seed) {
  double total = 0;
  for (double f : fractions) {
    if (!(f >= 0)) throw ConfigError("split fractions must be nonnegative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  CorpusSplit out;
  for (const auto& r : corpus) {
    const double u = derive_rng(seed, "split/" + r.stage, r.index).uniform01();
    if (u < fractions[0] || (fractions[1] == 0 && fractions[2] == 0)) {
      out.train.push_back(r);
    } else if (u < fractions[0] + fractions[1] || fractions[2] == 0) {
      out.valid.push_back(r);
    } else {
      out.test.push_back(r);
    }
  }
  return out;
}

StatsReport corpus_stats(const std::vector<ExampleRecord>& corpus,
                         const std::optional<CurriculumStage>& expected) {
  StatsReport s;
  std::unordered_set<PairKey, PairKeyHash> seen;
  const std::size_t max_len = expected ? static_cast<std::size_t>(expected->max_seq_len) : 128;
  for (const auto& r : corpus) {
    const auto& p = r.pair;
    ++s.examples;
    ++s.per_task[std::string(to_string(p.task))];
    ++s.source_len_histogram[p.source.size()];
    ++s.target_len_histogram[p.target.size()];
    for (const auto* seq : {&p.source, &p.target}) {
      for (Token t : *seq) {
        if (t > 0) ++s.symbol_usage[t];
      }
    }
    if (!seen.insert(pair_key(p.source, p.target)).second) ++s.duplicates;
    if (r.n_solutions) ++s.ambiguity_histogram[std::to_string(*r.n_solutions)];
    s.max_source_len = std::max(s.max_source_len, p.source.size());
    s.max_target_len = std::max(s.max_target_len, p.target.size());
    if (p.source.size() > max_len || p.target.size() > max_len) ++s.length_violations;
    if (!p.meta) continue;

    ++s.checked_with_meta;
    const auto& bounds = p.meta->bounds;
    const IntRange rule_len = expected ? expected->symbols.rule_len : bounds.rule_len;
    const IntRange value_len = expected ? expected->symbols.value_len : bounds.value_len;
    const SymbolSplit& split = split_of(p.meta->content);
    bool split_ok = split.disjoint();
    if (expected) {
      const auto& c = expected->symbols;
      split_ok = split_ok && split.math.size() == static_cast<std::size_t>(c.n_math) &&
                 split.rule.size() == static_cast<std::size_t>(c.n_rule) &&
                 (split.string.empty() || split.string.size() == static_cast<std::size_t>(c.n_string));
      for (const auto* cls : {&split.math, &split.rule, &split.string}) {
        for (Token t : *cls) split_ok = split_ok && t >= 1 && t <= c.vocab_size;
      }
    }
    if (!split_ok) ++s.split_violations;

    auto check_term = [&](const Sequence& rule, std::initializer_list<const Substitution*> cases) {
      if (!rule_len.contains(static_cast<long long>(rule.size()))) ++s.rule_len_violations;
      if (!rule.empty() && std::all_of(rule.begin(), rule.end(), [&](Token t) { return split.is_rule(t); })) {
        ++s.rule_only_rules;
      }
      bool values_ok = true;
      for (const auto* c : cases) {
        for (const auto& e : c->entries) {
          values_ok = values_ok && value_len.contains(static_cast<long long>(e.value.size()));
        }
      }
      if (!values_ok) ++s.value_len_violations;
    };
    if (const auto* t = std::get_if<TermTriple>(&p.meta->content)) {
      check_term(t->rule, {&t->case_});
    } else if (const auto* w = std::get_if<TwinTriple>(&p.meta->content)) {
      check_term(w->first.rule, {&w->first.case_, &w->second_case});
    }
  }
  if (s.examples > 0) s.dedup_rate = static_cast<double>(s.duplicates) / static_cast<double>(s.examples);
  return s;
}

}  // namespace lime
