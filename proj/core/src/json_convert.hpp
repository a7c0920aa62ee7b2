#pragma once

// nlohmann::json conversions shared by the corpus writers and the manifest.
// Private to the library.

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "lime/corpus_pipeline.hpp"

namespace lime::detail {

using nlohmann::json;

json to_json(const IntRange& r);
IntRange range_from_json(const json& j);

json to_json(const SymbolSplit& split);
SymbolSplit split_from_json(const json& j);

json to_json(const Substitution& s);
Substitution substitution_from_json(const json& j);

json to_json(const SolverBounds& b);
SolverBounds bounds_from_json(const json& j);

json to_json(const ExampleMeta& meta);
ExampleMeta meta_from_json(const json& j, const SymbolSplit& split);

json to_json(const CurriculumStage& stage);
CurriculumStage stage_from_json(const json& j);

// Line writer that hashes what it writes.
class DigestingWriter {
 public:
  DigestingWriter(std::filesystem::path path, std::string rel);
  ~DigestingWriter();
  DigestingWriter(const DigestingWriter&) = delete;
  DigestingWriter& operator=(const DigestingWriter&) = delete;

  void write_line(std::string_view line);
  FileDigest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lime::detail
