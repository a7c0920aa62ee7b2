#include <benchmark/benchmark.h>

#include <filesystem>

#include "lime/corpus_pipeline.hpp"
#include "lime/oracle.hpp"

using namespace lime;

namespace {

void BM_GenerateTriple(benchmark::State& state) {
  SymbolSpaceConfig cfg;
  cfg.vocab_size = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto rng = derive_rng(1, "bench", i++);
    benchmark::DoNotOptimize(generate_triple(cfg, rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GenerateTriple)->Arg(100)->Arg(1000)->Arg(25000);

void BM_GenerateExample(benchmark::State& state) {
  CurriculumStage stage;
  stage.with_task(kConcreteTasks.at(static_cast<std::size_t>(state.range(0))));
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_example(stage, 1, i++));
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(to_string(kConcreteTasks.at(static_cast<std::size_t>(state.range(0))))));
}
BENCHMARK(BM_GenerateExample)->DenseRange(0, 7);

void BM_GenerateCorpusMix(benchmark::State& state) {
  const auto out = std::filesystem::temp_directory_path() / "lime_bench_corpus";
  CorpusConfig cfg;
  CurriculumStage stage;
  stage.with_task(TaskKind::Mix);
  stage.n_examples = 10'000;
  cfg.stages = {stage};
  cfg.out = out;
  for (auto _ : state) benchmark::DoNotOptimize(generate_corpus(cfg));
  std::filesystem::remove_all(out);
  state.SetItemsProcessed(state.iterations() * 10'000);
}
BENCHMARK(BM_GenerateCorpusMix)->Unit(benchmark::kMillisecond);

void BM_Verify(benchmark::State& state) {
  const auto task = kConcreteTasks.at(static_cast<std::size_t>(state.range(0)));
  CurriculumStage stage;
  stage.with_task(task);
  std::vector<SeqPair> pairs;
  for (std::uint64_t i = 0; i < 256; ++i) pairs.push_back(generate_example(stage, 2, i));
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(verify_example(pairs[k++ % pairs.size()]));
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(to_string(task)));
}
BENCHMARK(BM_Verify)->DenseRange(0, 7);

}  // namespace

BENCHMARK_MAIN();
