// lime: generate, verify, solve, inspect and split synthetic reasoning corpora.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "lime/corpus_pipeline.hpp"
#include "lime/errors.hpp"
#include "lime/oracle.hpp"

namespace {

using nlohmann::json;
using namespace lime;

enum Exit : int { kOk = 0, kConfig = 2, kIo = 3, kGeneration = 4, kVerifyFailed = 5 };

using Range = std::pair<int, int>;

IntRange to_range(const Range& r) { return {r.first, r.second}; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Values from a JSON file fill every option the command line left unset.
// Keys mirror flag names; '_' and '-' are interchangeable.
void merge_config(CLI::App& app, const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config " + path + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "config") continue;
    CLI::Option* opt = app.get_option_no_throw("--" + name);
    if (opt == nullptr) throw ConfigError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    std::vector<std::string> results;
    auto as_string = [](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      return v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) results.push_back(as_string(v));
    } else {
      results.push_back(as_string(value));
    }
    opt->add_result(results);
    opt->run_callback();
  }
}

struct BoundFlags {
  Range rule_len{5, 20};
  Range value_len{2, 8};
  Range rhs_len{2, 8};
  Range span_len{2, 8};
  Range binding_len{1, 1};
  std::size_t cap = kDefaultEnumerationCap;

  void add_to(CLI::App& app) {
    app.add_option("--rule-len", rule_len, "Rule length bounds (min max)")->capture_default_str();
    app.add_option("--value-len", value_len, "Case value length bounds (min max)")->capture_default_str();
    app.add_option("--rhs-len", rhs_len, "Rewrite rhs length bounds (min max)")->capture_default_str();
    app.add_option("--span-len", span_len, "Rewrite span length bounds (min max)")->capture_default_str();
    app.add_option("--binding-len", binding_len, "Rewrite variable binding length bounds (min max)")
        ->capture_default_str();
    app.add_option("--cap", cap, "Enumeration cap")->capture_default_str()->check(CLI::PositiveNumber);
  }

  SolverBounds bounds() const {
    SolverBounds b{to_range(rule_len), to_range(value_len), to_range(rhs_len), to_range(span_len),
                   to_range(binding_len)};
    for (const IntRange& r : {b.rule_len, b.value_len, b.rhs_len, b.span_len, b.binding_len}) {
      if (!r.valid()) throw ConfigError("length bounds must satisfy 1 <= min <= max");
    }
    return b;
  }
};

struct GenFlags {
  std::string task = "mix";
  int vocab_size = 100;
  int n_math = 44;
  int n_rule = 24;
  int n_string = 24;
  Range rule_len{5, 20};
  Range value_len{2, 8};
  Range subject_len{5, 20};
  Range rhs_len{2, 8};
  Range span_len{2, 8};
  Range binding_len{1, 1};
  Range steps{1, 5};
  std::string rule_sampling = "with_replacement";
  std::string header = "all";
  bool all_symbols_header = false;
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> token_budget;
  std::uint64_t seed = 0;
  int shards = 1;
  int jobs = 1;
  std::string format = "text";
  std::string out;
  std::string curriculum;
  std::string ambiguity = "keep";
  int max_seq_len = 128;
  std::size_t cap = kDefaultEnumerationCap;
  std::uint64_t probe = 10'000;
  std::string stage_name = "stage1";
  std::string config;
};

std::vector<CurriculumStage> stages_from(const GenFlags& f, const CLI::App& app) {
  if (f.n && f.token_budget) throw ConfigError("--n and --token-budget are mutually exclusive");
  std::vector<CurriculumStage> stages;
  if (f.curriculum == "isarstep") {
    stages = isarstep_curriculum(f.n, f.token_budget);
  } else if (!f.curriculum.empty()) {
    stages = parse_curriculum(read_file(f.curriculum));
  } else {
    CurriculumStage s;
    s.name = f.stage_name;
    s.symbols.vocab_size = f.vocab_size;
    s.symbols.n_math = f.n_math;
    s.symbols.n_rule = f.n_rule;
    s.symbols.n_string = f.n_string;
    s.symbols.rule_len = to_range(f.rule_len);
    s.symbols.value_len = to_range(f.value_len);
    if (f.rule_sampling == "distinct") {
      s.symbols.rule_sampling = RuleSampling::Distinct;
    } else if (f.rule_sampling != "with_replacement") {
      throw ConfigError("unknown rule sampling '" + f.rule_sampling + "'");
    }
    s.rewrite.subject_len = to_range(f.subject_len);
    s.rewrite.rhs_len = to_range(f.rhs_len);
    s.rewrite.span_len = to_range(f.span_len);
    s.rewrite.binding_len = to_range(f.binding_len);
    s.rewrite.steps = to_range(f.steps);
    s.codec.header = header_mode_from_string(f.header);
    s.codec.used_only = !f.all_symbols_header;
    s.with_task(task_from_string(f.task));
    s.n_examples = f.token_budget ? std::nullopt : std::optional<std::uint64_t>(f.n.value_or(1000));
    s.token_budget = f.token_budget;
    stages.push_back(std::move(s));
  }
  const bool override_len = app.get_option("--max-seq-len")->count() > 0 || f.curriculum.empty();
  for (auto& s : stages) {
    if (override_len) s.max_seq_len = f.max_seq_len;
    s.validate();
  }
  return stages;
}

int cmd_gen(const GenFlags& f, const CLI::App& app) {
  CorpusConfig cfg;
  cfg.stages = stages_from(f, app);
  cfg.master_seed = f.seed;
  cfg.shard_count = f.shards;
  cfg.jobs = f.jobs;
  cfg.ambiguity = ambiguity_policy_from_string(f.ambiguity);
  cfg.format = output_format_from_string(f.format);
  cfg.enumeration_cap = f.cap;
  cfg.probe_examples = f.probe;
  cfg.out = f.out;
  const auto manifest = generate_corpus(cfg);
  for (const auto& r : manifest.reports) {
    std::cerr << r.name << ": " << r.emitted << " examples, " << r.tokens << " tokens, "
              << r.dedup_dropped << " duplicates dropped, " << r.resamples << " resamples\n";
  }
  return kOk;
}

struct VerifyFlags {
  std::string in;
  std::string report;
  std::string task;
  BoundFlags bounds;
  std::string config;
};

std::optional<TaskKind> task_opt(const std::string& name) {
  if (name.empty()) return std::nullopt;
  const TaskKind t = task_from_string(name);
  if (t == TaskKind::Mix) throw ConfigError("a concrete task is required");
  return t;
}

int cmd_verify(const VerifyFlags& f) {
  VerifyOptions opts;
  opts.bounds = f.bounds.bounds();
  opts.cap = f.bounds.cap;
  const auto corpus = read_corpus(f.in, task_opt(f.task));

  std::ofstream report;
  if (!f.report.empty()) {
    report.open(f.report, std::ios::binary | std::ios::trunc);
    if (!report) throw IoError("cannot write " + f.report);
  }
  std::uint64_t passed = 0;
  json failures = json::array();
  std::map<std::string, std::uint64_t> histogram;
  for (const auto& r : corpus) {
    const auto v = verify_example(r.pair, opts);
    if (v.valid) {
      ++passed;
    } else {
      failures.push_back({{"stage", r.stage}, {"index", r.index}, {"task", to_string(r.pair.task)},
                          {"error", v.error.empty() ? "target is not a solution" : v.error}});
    }
    std::string bucket = "unknown";
    if (v.n_solutions) bucket = v.truncated ? ">" + std::to_string(opts.cap) : std::to_string(*v.n_solutions);
    ++histogram[bucket];
    if (report.is_open()) {
      json line{{"stage", r.stage},
                {"index", r.index},
                {"task", to_string(v.task)},
                {"valid", v.valid},
                {"target_is_solution", v.target_is_solution},
                {"n_solutions", v.n_solutions ? json(*v.n_solutions) : json(nullptr)},
                {"truncated", v.truncated}};
      if (!v.error.empty()) line["error"] = v.error;
      report << line.dump() << '\n';
    }
  }
  if (report.is_open() && !report) throw IoError("write failed for " + f.report);
  const std::uint64_t total = corpus.size();
  json summary{{"examples", total},
               {"passed", passed},
               {"failed", total - passed},
               {"pass_rate", total == 0 ? 1.0 : static_cast<double>(passed) / static_cast<double>(total)},
               {"ambiguity_histogram", histogram},
               {"failures", std::move(failures)}};
  std::cout << summary.dump(2) << '\n';
  return passed == total ? kOk : kVerifyFailed;
}

struct SolveFlags {
  std::string task;
  std::string source;
  BoundFlags bounds;
  int vocab_size = 100;
  int n_math = 44;
  int n_rule = 24;
  int n_string = 24;
  bool tokens = false;
  std::string config;
};

int cmd_solve(const SolveFlags& f) {
  const TaskKind task = task_from_string(f.task);
  if (task == TaskKind::Mix) throw ConfigError("solve needs a concrete task");
  SymbolSpaceConfig sym;
  sym.vocab_size = f.vocab_size;
  sym.n_math = f.n_math;
  sym.n_rule = f.n_rule;
  sym.n_string = f.n_string;

  Sequence source;
  std::optional<SymbolSplit> glyph_split;
  try {
    source = parse_text_line(f.source);
  } catch (const ParseError&) {
    glyph_split = canonical_glyph_split(sym, is_rewrite_task(task));
    source = parse_glyphs(f.source, *glyph_split);
  }
  const auto sol = solve_source(source, task, f.bounds.bounds(), f.bounds.cap,
                                glyph_split ? &*glyph_split : nullptr);
  const SymbolSplit& view = glyph_split ? *glyph_split : sol.split;
  for (const auto& t : sol.targets) {
    std::cout << (f.tokens ? text_line(t) : render_glyphs(t, view, GlyphStyle::Compact)) << '\n';
  }
  std::cout << sol.targets.size() << (sol.targets.size() == 1 ? " solution" : " solutions");
  if (sol.truncated) std::cout << " (truncated at cap " << sol.enumeration_cap << ")";
  std::cout << '\n';
  return kOk;
}

struct ShowFlags {
  std::string in;
  long long index = 0;
  bool glyphs = false;
  std::string task;
};

int cmd_show(const ShowFlags& f) {
  if (f.index < 0) throw ConfigError("--index must be nonnegative");
  const auto corpus = read_corpus(f.in, task_opt(f.task));
  if (static_cast<std::uint64_t>(f.index) >= corpus.size()) {
    throw ConfigError("--index " + std::to_string(f.index) + " out of range (corpus has " +
                      std::to_string(corpus.size()) + " examples)");
  }
  const auto& r = corpus[static_cast<std::size_t>(f.index)];
  std::cout << "task: " << to_string(r.pair.task) << '\n'
            << "source: " << text_line(r.pair.source) << '\n'
            << "target: " << text_line(r.pair.target) << '\n';
  if (f.glyphs) {
    const SymbolSplit* known = r.pair.meta ? &split_of(r.pair.meta->content) : nullptr;
    const auto d = decode_example(r.pair.source, r.pair.target, r.pair.task, known);
    std::cout << "source glyphs: " << render_glyphs(r.pair.source, d.header, GlyphStyle::Compact) << '\n'
              << "target glyphs: " << render_glyphs(r.pair.target, d.header, GlyphStyle::Compact) << '\n';
  }
  if (r.pair.meta) {
    const auto& o = r.pair.meta->origin;
    std::cout << "meta: seed " << o.master_seed << ", stage " << o.stage << ", index " << o.index
              << ", retry " << o.retry << '\n';
  }
  if (r.n_solutions) std::cout << "n_solutions: " << *r.n_solutions << '\n';
  return kOk;
}

struct StatsFlags {
  std::string in;
  std::string task;
  std::optional<int> vocab_size;
  int n_math = 44;
  int n_rule = 24;
  int n_string = 24;
  Range rule_len{5, 20};
  Range value_len{2, 8};
  int max_seq_len = 128;
};

int cmd_stats(const StatsFlags& f) {
  const auto corpus = read_corpus(f.in, task_opt(f.task));
  std::optional<CurriculumStage> expected;
  if (f.vocab_size) {
    CurriculumStage s;
    s.symbols.vocab_size = *f.vocab_size;
    s.symbols.n_math = f.n_math;
    s.symbols.n_rule = f.n_rule;
    s.symbols.n_string = f.n_string;
    s.symbols.rule_len = to_range(f.rule_len);
    s.symbols.value_len = to_range(f.value_len);
    s.max_seq_len = f.max_seq_len;
    expected = s;
  }
  std::cout << corpus_stats(corpus, expected).to_json() << '\n';
  return kOk;
}

struct SplitFlags {
  std::string in;
  std::string out;
  std::string task;
  std::vector<double> fractions{0.98, 0.01, 0.01};
  std::uint64_t seed = 0;
  std::string format = "text";
};

int cmd_split(const SplitFlags& f) {
  if (f.fractions.size() != 3) throw ConfigError("--fractions takes three values");
  const auto corpus = read_corpus(f.in, task_opt(f.task));
  const auto parts = split_corpus(corpus, {f.fractions[0], f.fractions[1], f.fractions[2]}, f.seed);
  const auto format = output_format_from_string(f.format);
  const std::filesystem::path out(f.out);
  write_corpus(parts.train, out / "train", format);
  write_corpus(parts.valid, out / "valid", format);
  write_corpus(parts.test, out / "test", format);
  std::cout << json{{"train", parts.train.size()}, {"valid", parts.valid.size()}, {"test", parts.test.size()}}.dump()
            << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic deduction / abduction / induction corpus tool"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lime 0.1.0");

  GenFlags gen;
  auto* g = app.add_subcommand("gen", "Generate a corpus");
  g->add_option("--config", gen.config, "JSON file with defaults for any flag");
  g->add_option("--task", gen.task, "Task kind")
      ->check(CLI::IsMember({"deduct", "abduct", "induct", "induct_v2", "induct_v3", "induct_rewrite",
                             "rewrite", "rewrite_multistep", "mix"}))
      ->capture_default_str();
  g->add_option("--vocab-size", gen.vocab_size, "Vocabulary size S")->capture_default_str();
  g->add_option("--n-math", gen.n_math)->capture_default_str();
  g->add_option("--n-rule", gen.n_rule)->capture_default_str();
  g->add_option("--n-string", gen.n_string)->capture_default_str();
  g->add_option("--rule-len", gen.rule_len)->capture_default_str();
  g->add_option("--value-len", gen.value_len)->capture_default_str();
  g->add_option("--subject-len", gen.subject_len)->capture_default_str();
  g->add_option("--rhs-len", gen.rhs_len)->capture_default_str();
  g->add_option("--span-len", gen.span_len)->capture_default_str();
  g->add_option("--binding-len", gen.binding_len)->capture_default_str();
  g->add_option("--steps", gen.steps, "Rewrite steps for rewrite_multistep")->capture_default_str();
  g->add_option("--rule-sampling", gen.rule_sampling)
      ->check(CLI::IsMember({"with_replacement", "distinct"}))
      ->capture_default_str();
  g->add_option("--header", gen.header)->check(CLI::IsMember({"all", "abduct_only", "none"}))->capture_default_str();
  g->add_flag("--all-symbols-header", gen.all_symbols_header, "List every split symbol in headers");
  g->add_option("--n", gen.n, "Examples per stage (default 1000)");
  g->add_option("--token-budget", gen.token_budget, "Token budget per stage");
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--shards", gen.shards)->capture_default_str();
  g->add_option("--jobs", gen.jobs, "Worker threads")->capture_default_str();
  g->add_option("--format", gen.format)->check(CLI::IsMember({"text", "jsonl"}))->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--curriculum", gen.curriculum, "'isarstep' or a curriculum JSON file");
  g->add_option("--ambiguity", gen.ambiguity)
      ->check(CLI::IsMember({"keep", "annotate", "unique_only"}))
      ->capture_default_str();
  g->add_option("--max-seq-len", gen.max_seq_len)->capture_default_str();
  g->add_option("--cap", gen.cap, "Enumeration cap for ambiguity checks")->capture_default_str();
  g->add_option("--probe", gen.probe, "Probe examples for token budgets")->capture_default_str();
  g->add_option("--stage-name", gen.stage_name)->capture_default_str();

  VerifyFlags ver;
  auto* v = app.add_subcommand("verify", "Check every target against the oracles");
  v->add_option("--config", ver.config, "JSON file with defaults for any flag");
  v->add_option("--in", ver.in, "Corpus root, stage directory, .src or .jsonl")->required();
  v->add_option("--report", ver.report, "Per-example JSONL report");
  v->add_option("--task", ver.task, "Task of a text corpus (inferred when omitted)");
  ver.bounds.add_to(*v);

  SolveFlags sol;
  auto* s = app.add_subcommand("solve", "Enumerate the solutions of one source");
  s->add_option("--config", sol.config, "JSON file with defaults for any flag");
  s->add_option("--task", sol.task)->required();
  s->add_option("--source", sol.source, "Source as tokens or glyphs")->required();
  s->add_option("--vocab-size", sol.vocab_size, "Glyph input: vocabulary size")->capture_default_str();
  s->add_option("--n-math", sol.n_math)->capture_default_str();
  s->add_option("--n-rule", sol.n_rule)->capture_default_str();
  s->add_option("--n-string", sol.n_string)->capture_default_str();
  s->add_flag("--tokens", sol.tokens, "Print solutions as tokens");
  sol.bounds.add_to(*s);

  ShowFlags show;
  auto* sh = app.add_subcommand("show", "Print one example");
  sh->add_option("--in", show.in)->required();
  sh->add_option("--index", show.index)->capture_default_str();
  sh->add_flag("--glyphs", show.glyphs, "Also print the glyph view");
  sh->add_option("--task", show.task, "Task of a text corpus (inferred when omitted)");

  StatsFlags st;
  auto* stc = app.add_subcommand("stats", "Corpus statistics as JSON");
  stc->add_option("--in", st.in)->required();
  stc->add_option("--task", st.task);
  stc->add_option("--vocab-size", st.vocab_size, "Enables the fidelity checks");
  stc->add_option("--n-math", st.n_math)->capture_default_str();
  stc->add_option("--n-rule", st.n_rule)->capture_default_str();
  stc->add_option("--n-string", st.n_string)->capture_default_str();
  stc->add_option("--rule-len", st.rule_len)->capture_default_str();
  stc->add_option("--value-len", st.value_len)->capture_default_str();
  stc->add_option("--max-seq-len", st.max_seq_len)->capture_default_str();

  SplitFlags sp;
  auto* spc = app.add_subcommand("split", "Partition a corpus into train/valid/test");
  spc->add_option("--in", sp.in)->required();
  spc->add_option("--out", sp.out)->required();
  spc->add_option("--task", sp.task);
  spc->add_option("--fractions", sp.fractions)->expected(3)->capture_default_str();
  spc->add_option("--seed", sp.seed)->capture_default_str();
  spc->add_option("--format", sp.format)->check(CLI::IsMember({"text", "jsonl"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (g->parsed()) {
      if (!gen.config.empty()) merge_config(*g, gen.config);
      return cmd_gen(gen, *g);
    }
    if (v->parsed()) {
      if (!ver.config.empty()) merge_config(*v, ver.config);
      return cmd_verify(ver);
    }
    if (s->parsed()) {
      if (!sol.config.empty()) merge_config(*s, sol.config);
      return cmd_solve(sol);
    }
    if (sh->parsed()) return cmd_show(show);
    if (stc->parsed()) return cmd_stats(st);
    if (spc->parsed()) return cmd_split(sp);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const GenerationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kGeneration;
  } catch (const LimeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}
