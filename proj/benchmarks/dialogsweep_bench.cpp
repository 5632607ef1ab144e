#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dialogsweep/batchrunner.hpp"
#include "dialogsweep/labels.hpp"
#include "dialogsweep/metrics.hpp"
#include "dialogsweep/promptkit.hpp"
#include "dialogsweep/tradeoff.hpp"

namespace ds = dialogsweep;

namespace {

std::vector<ds::CodeVector> random_vectors(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.3);
  std::vector<ds::CodeVector> out(n);
  for (auto& v : out) {
    for (ds::Code c : ds::kAllCodes) v.set(c, coin(rng));
  }
  return out;
}

std::vector<ds::Utterance> utterances(int n) {
  std::vector<ds::Utterance> out;
  for (int i = 0; i < n; ++i) {
    ds::Utterance u;
    u.session_id = "s";
    u.utterance_id = i + 1;
    u.t_start = 2.0 * i;
    u.t_end = u.t_start + 1.5;
    u.speaker = i % 2 ? ds::Role::PrimaryNurse1 : ds::Role::SecondaryNurse1;
    u.text = "Can you check the blood pressure again and let me know?";
    out.push_back(u);
  }
  return out;
}

void BM_ParetoFront(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> f1(0, 1), time(1, 1000);
  std::vector<ds::ObjectivePoint> pts;
  for (int i = 0; i < state.range(0); ++i) {
    pts.push_back(ds::ObjectivePoint::make({ds::PromptDesign{}, i + 1}, f1(rng), time(rng), time(rng)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(ds::pareto_front(pts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ParetoFront)->RangeMultiplier(4)->Range(32, 2048)->Complexity();

void BM_MultilabelMetrics(benchmark::State& state) {
  const auto gold = random_vectors(static_cast<std::size_t>(state.range(0)), 1);
  const auto pred = random_vectors(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(ds::multilabel_metrics(gold, pred));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MultilabelMetrics)->Arg(35)->Arg(1000)->Arg(20000);

void BM_RenderPrompt(benchmark::State& state) {
  const ds::PromptRenderer renderer;
  const ds::PromptDesign design(ds::PromptVariant::RulesContext);
  const auto all = utterances(static_cast<int>(state.range(0)) + 3);
  const std::span<const ds::Utterance> span(all);
  for (auto _ : state) {
    benchmark::DoNotOptimize(renderer.render(design, span.subspan(3), span.first(3)));
  }
}
BENCHMARK(BM_RenderPrompt)->Arg(1)->Arg(10)->Arg(70);

void BM_ParseCompletion(benchmark::State& state) {
  const auto rows = random_vectors(static_cast<std::size_t>(state.range(0)), 3);
  const std::string text = "<think>\nweighing each code in turn\n</think>\nHere are the labels:\n" +
                           ds::format_rows(rows) + "Let me know if you need more.\n";
  for (auto _ : state) benchmark::DoNotOptimize(ds::parse_completion(text, rows.size()));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseCompletion)->Arg(1)->Arg(10)->Arg(70);

}  // namespace
BENCHMARK_MAIN();
