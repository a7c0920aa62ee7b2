#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include "json_convert.hpp"
#include "lime/corpus_pipeline.hpp"
#include "lime/errors.hpp"

namespace lime {

namespace detail {

json to_json(const IntRange& r) { return json::array({r.lo, r.hi}); }

IntRange range_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("range must be a [min, max] pair");
  return {j[0].get<int>(), j[1].get<int>()};
}

json to_json(const SymbolSplit& split) {
  return json{{"math", split.math}, {"rule", split.rule}, {"string", split.string}};
}

SymbolSplit split_from_json(const json& j) {
  SymbolSplit s;
  s.math = j.at("math").get<std::vector<Token>>();
  s.rule = j.at("rule").get<std::vector<Token>>();
  if (j.contains("string")) s.string = j.at("string").get<std::vector<Token>>();
  return s;
}

json to_json(const Substitution& s) {
  json out = json::array();
  for (const auto& e : s.entries) out.push_back(json::array({e.key, e.value}));
  return out;
}

Substitution substitution_from_json(const json& j) {
  Substitution s;
  for (const auto& e : j) s.entries.push_back({e.at(0).get<Token>(), e.at(1).get<Sequence>()});
  return s;
}

json to_json(const SolverBounds& b) {
  return json{{"rule_len", to_json(b.rule_len)},
              {"value_len", to_json(b.value_len)},
              {"rhs_len", to_json(b.rhs_len)},
              {"span_len", to_json(b.span_len)},
              {"binding_len", to_json(b.binding_len)}};
}

SolverBounds bounds_from_json(const json& j) {
  SolverBounds b;
  if (j.contains("rule_len")) b.rule_len = range_from_json(j["rule_len"]);
  if (j.contains("value_len")) b.value_len = range_from_json(j["value_len"]);
  if (j.contains("rhs_len")) b.rhs_len = range_from_json(j["rhs_len"]);
  if (j.contains("span_len")) b.span_len = range_from_json(j["span_len"]);
  if (j.contains("binding_len")) b.binding_len = range_from_json(j["binding_len"]);
  return b;
}

json to_json(const ExampleMeta& meta) {
  json out{{"seed", meta.origin.master_seed},
           {"retry", meta.origin.retry},
           {"bounds", to_json(meta.bounds)}};
  std::visit(
      [&out](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TermTriple>) {
          out["kind"] = "triple";
          out["rule"] = c.rule;
          out["case"] = to_json(c.case_);
          out["result"] = c.result;
        } else if constexpr (std::is_same_v<T, TwinTriple>) {
          out["kind"] = "twin";
          out["rule"] = c.first.rule;
          out["case"] = to_json(c.first.case_);
          out["result"] = c.first.result;
          out["case2"] = to_json(c.second_case);
          out["result2"] = c.second_result;
        } else {
          out["kind"] = "rewrite";
          out["subject"] = c.subject;
          json steps = json::array();
          for (const auto& s : c.steps) {
            steps.push_back(json{{"lhs", s.rule.lhs},
                                 {"rhs", s.rule.rhs},
                                 {"span", json::array({s.span.begin, s.span.end})},
                                 {"binding", to_json(s.binding)},
                                 {"after", s.after}});
          }
          out["steps"] = std::move(steps);
          out["final"] = c.final_;
        }
      },
      meta.content);
  return out;
}

ExampleMeta meta_from_json(const json& j, const SymbolSplit& split) {
  ExampleMeta meta;
  meta.origin.master_seed = j.value("seed", std::uint64_t{0});
  meta.origin.retry = j.value("retry", std::uint32_t{0});
  if (j.contains("bounds")) meta.bounds = bounds_from_json(j["bounds"]);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "triple" || kind == "twin") {
    TermTriple t{split, j.at("rule").get<Sequence>(), substitution_from_json(j.at("case")),
                 j.at("result").get<Sequence>()};
    if (kind == "triple") {
      meta.content = std::move(t);
    } else {
      meta.content = TwinTriple{std::move(t), substitution_from_json(j.at("case2")),
                                j.at("result2").get<Sequence>()};
    }
  } else if (kind == "rewrite") {
    RewriteInstance r;
    r.split = split;
    r.subject = j.at("subject").get<Sequence>();
    for (const auto& s : j.at("steps")) {
      RewriteStep step;
      step.rule = {s.at("lhs").get<Sequence>(), s.at("rhs").get<Sequence>()};
      step.span = {s.at("span").at(0).get<std::size_t>(), s.at("span").at(1).get<std::size_t>()};
      step.binding = substitution_from_json(s.at("binding"));
      step.after = s.at("after").get<Sequence>();
      r.steps.push_back(std::move(step));
    }
    r.final_ = j.at("final").get<Sequence>();
    meta.content = std::move(r);
  } else {
    throw ParseError(0, "unknown meta kind '" + kind + "'");
  }
  return meta;
}

json to_json(const CurriculumStage& stage) {
  // Pairs keep the draw order; an object would sort by name.
  json weights = json::array();
  for (const auto& [task, w] : stage.task_weights) weights.push_back({std::string(to_string(task)), w});
  json out{{"name", stage.name},
           {"vocab_size", stage.symbols.vocab_size},
           {"n_math", stage.symbols.n_math},
           {"n_rule", stage.symbols.n_rule},
           {"n_string", stage.symbols.n_string},
           {"rule_len", to_json(stage.symbols.rule_len)},
           {"value_len", to_json(stage.symbols.value_len)},
           {"rule_sampling", stage.symbols.rule_sampling == RuleSampling::Distinct ? "distinct"
                                                                                   : "with_replacement"},
           {"subject_len", to_json(stage.rewrite.subject_len)},
           {"rhs_len", to_json(stage.rewrite.rhs_len)},
           {"span_len", to_json(stage.rewrite.span_len)},
           {"binding_len", to_json(stage.rewrite.binding_len)},
           {"steps", to_json(stage.rewrite.steps)},
           {"header", std::string(to_string(stage.codec.header))},
           {"used_only", stage.codec.used_only},
           {"task_weights", std::move(weights)},
           {"max_seq_len", stage.max_seq_len}};
  if (stage.n_examples) out["n_examples"] = *stage.n_examples;
  if (stage.token_budget) out["token_budget"] = *stage.token_budget;
  return out;
}

CurriculumStage stage_from_json(const json& j) {
  CurriculumStage s;
  s.name = j.value("name", s.name);
  s.symbols.vocab_size = j.value("vocab_size", s.symbols.vocab_size);
  s.symbols.n_math = j.value("n_math", s.symbols.n_math);
  s.symbols.n_rule = j.value("n_rule", s.symbols.n_rule);
  s.symbols.n_string = j.value("n_string", s.symbols.n_string);
  if (j.contains("rule_len")) s.symbols.rule_len = range_from_json(j["rule_len"]);
  if (j.contains("value_len")) s.symbols.value_len = range_from_json(j["value_len"]);
  if (j.contains("rule_sampling")) {
    const auto v = j["rule_sampling"].get<std::string>();
    if (v == "distinct") {
      s.symbols.rule_sampling = RuleSampling::Distinct;
    } else if (v == "with_replacement") {
      s.symbols.rule_sampling = RuleSampling::WithReplacement;
    } else {
      throw ConfigError("unknown rule_sampling '" + v + "'");
    }
  }
  if (j.contains("subject_len")) s.rewrite.subject_len = range_from_json(j["subject_len"]);
  if (j.contains("rhs_len")) s.rewrite.rhs_len = range_from_json(j["rhs_len"]);
  if (j.contains("span_len")) s.rewrite.span_len = range_from_json(j["span_len"]);
  if (j.contains("binding_len")) s.rewrite.binding_len = range_from_json(j["binding_len"]);
  if (j.contains("steps")) s.rewrite.steps = range_from_json(j["steps"]);
  if (j.contains("header")) s.codec.header = header_mode_from_string(j["header"].get<std::string>());
  s.codec.used_only = j.value("used_only", s.codec.used_only);
  if (j.contains("task")) s.with_task(task_from_string(j["task"].get<std::string>()));
  if (j.contains("task_weights")) {
    s.task_weights.clear();
    const json& tw = j["task_weights"];
    if (tw.is_array()) {
      for (const auto& p : tw) s.task_weights.emplace_back(task_from_string(p.at(0).get<std::string>()),
                                                           p.at(1).get<double>());
    } else {
      for (const auto& [name, w] : tw.items()) s.task_weights.emplace_back(task_from_string(name), w.get<double>());
    }
  }
  if (j.contains("n_examples") || j.contains("token_budget")) {
    s.n_examples.reset();
    s.token_budget.reset();
    if (j.contains("n_examples")) s.n_examples = j["n_examples"].get<std::uint64_t>();
    if (j.contains("token_budget")) s.token_budget = j["token_budget"].get<std::uint64_t>();
  }
  s.max_seq_len = j.value("max_seq_len", s.max_seq_len);
  return s;
}

}  // namespace detail

using detail::json;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw LimeError("cannot initialise SHA-256");
    }
  }
  void update(std::string_view bytes) { EVP_DigestUpdate(ctx_.get(), bytes.data(), bytes.size()); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 0xf];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<ExampleRecord> read_jsonl(const std::filesystem::path& path) {
  std::vector<ExampleRecord> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(parse_jsonl_line(line));
    } catch (const ParseError& e) {
      throw ParseError(0, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ExampleRecord> read_text(const std::filesystem::path& src, std::optional<TaskKind> task) {
  auto tgt = src;
  tgt.replace_extension(".tgt");
  const auto sources = read_lines(src);
  const auto targets = read_lines(tgt);
  if (sources.size() != targets.size()) {
    throw IoError(src.string() + " and " + tgt.string() + " differ in line count");
  }
  std::vector<ExampleRecord> out;
  out.reserve(sources.size());
  const std::string stage = src.stem().string();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    ExampleRecord r;
    r.stage = stage;
    r.index = i;
    r.pair.source = parse_text_line(sources[i], i + 1);
    r.pair.target = parse_text_line(targets[i], i + 1);
    r.pair.task = task ? *task : infer_task(r.pair.source, r.pair.target);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ExampleRecord> read_stage_dir(const std::filesystem::path& dir,
                                          std::optional<TaskKind> task) {
  const std::string name = dir.filename().string();
  if (std::filesystem::exists(dir / (name + ".jsonl"))) return read_jsonl(dir / (name + ".jsonl"));
  if (std::filesystem::exists(dir / (name + ".src"))) return read_text(dir / (name + ".src"), task);
  throw IoError("no " + name + ".jsonl or " + name + ".src in " + dir.string());
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex();
}

std::string text_line(std::span<const Token> tokens) {
  std::string out;
  out.reserve(tokens.size() * 3);
  char buf[16];
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    if (is_structural(tokens[i])) {
      out += structural_name(tokens[i]);
    } else {
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, tokens[i]);
      out.append(buf, end);
    }
  }
  return out;
}

Sequence parse_text_line(std::string_view line, std::size_t line_no) {
  Sequence out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    const auto word = line.substr(i, j - i);
    if (auto t = structural_from_name(word)) {
      out.push_back(*t);
    } else {
      Token value = 0;
      const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
      if (ec != std::errc{} || ptr != word.data() + word.size() || value <= 0) {
        throw ParseError(out.size(), "line " + std::to_string(line_no) + ": bad token '" +
                                         std::string(word) + "'");
      }
      out.push_back(value);
    }
    i = j;
  }
  return out;
}

std::string jsonl_line(const ExampleRecord& record) {
  json j{{"task", std::string(to_string(record.pair.task))},
         {"stage", record.stage},
         {"index", record.index},
         {"source", record.pair.source},
         {"target", record.pair.target}};
  if (record.pair.meta) {
    j["split_header"] = detail::to_json(split_of(record.pair.meta->content));
    j["meta"] = detail::to_json(*record.pair.meta);
  }
  if (record.n_solutions) j["n_solutions"] = *record.n_solutions;
  return j.dump();
}

ExampleRecord parse_jsonl_line(std::string_view line) try {
  const json j = json::parse(line);
  ExampleRecord r;
  r.pair.task = task_from_string(j.at("task").get<std::string>());
  r.stage = j.value("stage", std::string{});
  r.index = j.value("index", std::uint64_t{0});
  r.pair.source = j.at("source").get<Sequence>();
  r.pair.target = j.at("target").get<Sequence>();
  if (j.contains("meta") && j.contains("split_header")) {
    const SymbolSplit split = detail::split_from_json(j["split_header"]);
    r.pair.meta = detail::meta_from_json(j["meta"], split);
    r.pair.meta->origin.stage = r.stage;
    r.pair.meta->origin.index = r.index;
  }
  if (j.contains("n_solutions")) r.n_solutions = j["n_solutions"].get<std::size_t>();
  return r;
} catch (const json::exception& e) {
  throw ParseError(0, std::string("bad record: ") + e.what());
}

std::vector<ExampleRecord> read_corpus(const std::filesystem::path& path,
                                       std::optional<TaskKind> task) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    const auto manifest = path / "manifest.json";
    if (!fs::exists(manifest)) return read_stage_dir(path, task);
    std::ifstream in(manifest);
    json m;
    try {
      m = json::parse(in);
    } catch (const json::exception& e) {
      throw IoError("unreadable manifest: " + std::string(e.what()));
    }
    std::vector<ExampleRecord> out;
    for (const auto& stage : m.at("stages")) {
      auto part = read_stage_dir(path / stage.at("name").get<std::string>(), task);
      out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
  }
  if (path.extension() == ".jsonl") return read_jsonl(path);
  if (path.extension() == ".src" || path.extension() == ".tgt") {
    auto src = path;
    return read_text(src.replace_extension(".src"), task);
  }
  auto src = path;
  src += ".src";
  if (fs::exists(src)) return read_text(src, task);
  throw IoError("cannot read corpus at " + path.string());
}

void write_corpus(const std::vector<ExampleRecord>& records, const std::filesystem::path& prefix,
                  OutputFormat format) {
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  auto open = [](std::filesystem::path p) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
  };
  if (format == OutputFormat::Jsonl) {
    auto p = prefix;
    p += ".jsonl";
    auto out = open(p);
    for (const auto& r : records) out << jsonl_line(r) << '\n';
    if (!out) throw IoError("write failed for " + p.string());
    return;
  }
  auto sp = prefix;
  sp += ".src";
  auto tp = prefix;
  tp += ".tgt";
  auto src = open(sp);
  auto tgt = open(tp);
  for (const auto& r : records) {
    src << text_line(r.pair.source) << '\n';
    tgt << text_line(r.pair.target) << '\n';
  }
  if (!src || !tgt) throw IoError("write failed for " + prefix.string());
}

std::vector<CurriculumStage> parse_curriculum(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("curriculum is not valid JSON: " + std::string(e.what()));
  }
  const json& stages = j.is_array() ? j : j.at("stages");
  std::vector<CurriculumStage> out;
  try {
    for (const auto& s : stages) out.push_back(detail::stage_from_json(s));
  } catch (const json::exception& e) {
    throw ConfigError("bad curriculum entry: " + std::string(e.what()));
  }
  if (out.empty()) throw ConfigError("curriculum has no stages");
  for (const auto& stage : out) stage.validate();
  return out;
}

std::string curriculum_to_json(const std::vector<CurriculumStage>& stages) {
  json arr = json::array();
  for (const auto& s : stages) arr.push_back(detail::to_json(s));
  return json{{"stages", std::move(arr)}}.dump(2);
}

std::string CorpusManifest::to_json() const {
  json stage_arr = json::array();
  for (const auto& s : stages) stage_arr.push_back(detail::to_json(s));
  json report_arr = json::array();
  for (const auto& r : reports) {
    json files = json::array();
    for (const auto& f : r.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    report_arr.push_back({{"name", r.name},
                          {"planned", r.planned},
                          {"emitted", r.emitted},
                          {"dedup_dropped", r.dedup_dropped},
                          {"ambiguity_dropped", r.ambiguity_dropped},
                          {"resamples", r.resamples},
                          {"tokens", r.tokens},
                          {"per_task", r.per_task},
                          {"ambiguity_histogram", r.ambiguity_histogram},
                          {"files", std::move(files)}});
  }
  return json{{"master_seed", master_seed},
              {"shard_count", shard_count},
              {"format", format},
              {"ambiguity", ambiguity},
              {"stages", std::move(stage_arr)},
              {"reports", std::move(report_arr)}}
      .dump(2);
}

std::string StatsReport::to_json() const {
  auto keyed = [](const auto& m) {
    json o = json::object();
    for (const auto& [k, v] : m) {
      if constexpr (std::is_same_v<std::decay_t<decltype(k)>, std::string>) {
        o[k] = v;
      } else {
        o[std::to_string(k)] = v;
      }
    }
    return o;
  };
  return json{{"examples", examples},
              {"per_task", keyed(per_task)},
              {"source_len_histogram", keyed(source_len_histogram)},
              {"target_len_histogram", keyed(target_len_histogram)},
              {"symbol_usage", keyed(symbol_usage)},
              {"ambiguity_histogram", keyed(ambiguity_histogram)},
              {"duplicates", duplicates},
              {"dedup_rate", dedup_rate},
              {"max_source_len", max_source_len},
              {"max_target_len", max_target_len},
              {"rule_only_rules", rule_only_rules},
              {"checked_with_meta", checked_with_meta},
              {"rule_len_violations", rule_len_violations},
              {"value_len_violations", value_len_violations},
              {"split_violations", split_violations},
              {"length_violations", length_violations}}
      .dump(2);
}

struct detail::DigestingWriter::Impl {
  std::filesystem::path path;
  std::string rel;
  std::ofstream out;
  Sha256 hash;
  std::uint64_t bytes = 0;
};

detail::DigestingWriter::DigestingWriter(std::filesystem::path path, std::string rel)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = std::move(path);
  impl_->rel = std::move(rel);
  impl_->out.open(impl_->path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw IoError("cannot write " + impl_->path.string());
}

detail::DigestingWriter::~DigestingWriter() = default;

void detail::DigestingWriter::write_line(std::string_view line) {
  impl_->out.write(line.data(), static_cast<std::streamsize>(line.size()));
  impl_->out.put('\n');
  impl_->hash.update(line);
  impl_->hash.update("\n");
  impl_->bytes += line.size() + 1;
}

FileDigest detail::DigestingWriter::finish() {
  impl_->out.close();
  if (!impl_->out) throw IoError("write failed for " + impl_->path.string());
  return {impl_->rel, impl_->hash.hex(), impl_->bytes};
}

}  // namespace lime
