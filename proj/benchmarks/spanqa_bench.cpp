// Copyright 2026 The spanqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "spanqa/classifier.hpp"
#include "spanqa/corpus.hpp"
#include "spanqa/diffmerge.hpp"
#include "spanqa/encoder.hpp"
#include "spanqa/selftrain.hpp"

namespace {

using namespace spanqa;

// A report of n characters and a copy with roughly one edit per 20.
std::pair<CharSeq, CharSeq> edited_pair(std::size_t n) {
  std::mt19937_64 rng(n);
  const CharSeq alphabet = U"左右双肺叶未见结节影积液钙化灶纵隔居中心影大小正常";
  CharSeq junior;
  for (std::size_t i = 0; i < n; ++i) junior.push_back(alphabet[rng() % alphabet.size()]);
  CharSeq senior;
  for (char32_t c : junior) {
    const auto roll = rng() % 20;
    if (roll == 0) continue;
    senior.push_back(roll == 1 ? alphabet[rng() % alphabet.size()] : c);
  }
  return {junior, senior};
}

void BM_LcsDiff(benchmark::State& state) {
  const auto [junior, senior] = edited_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lcs_diff(junior, senior));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LcsDiff)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_Merge(benchmark::State& state) {
  const auto [junior, senior] = edited_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(merge("b", junior, senior));
}
BENCHMARK(BM_Merge)->Arg(150)->Arg(600);

void BM_EncodeBaseline(benchmark::State& state) {
  const auto [junior, senior] = edited_pair(150);
  const MixedReport mixed = merge("b", junior, senior);
  const auto backend = baseline_backend(64, 2, 0);
  for (auto _ : state) benchmark::DoNotOptimize(backend->encode(mixed));
}
BENCHMARK(BM_EncodeBaseline);

void BM_ScoreSpans(benchmark::State& state) {
  const auto [junior, senior] = edited_pair(150);
  const MixedReport mixed = merge("b", junior, senior);
  const SpanClassifierModel model(baseline_backend(64, 2, 0),
                                  SpanClassifier::random(64, 32, 1));
  for (auto _ : state) benchmark::DoNotOptimize(model.score_spans(mixed));
  state.counters["spans"] = static_cast<double>(mixed.spans.size());
}
BENCHMARK(BM_ScoreSpans);

void BM_Otsu(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(static_cast<std::size_t>(state.range(0)));
  for (double& s : scores) s = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(otsu_threshold(scores));
}
BENCHMARK(BM_Otsu)->Arg(1000)->Arg(100000);

void BM_TrainEpoch(benchmark::State& state) {
  SynthesisConfig config = SynthesisConfig::defaults();
  config.n_reports = static_cast<std::size_t>(state.range(0));
  const SyntheticCorpus corpus = generate_synthetic_corpus(config);
  SpanLabelSet manual;
  for (const ReportPair& p : corpus.dataset.pairs) {
    if (manual.size() == corpus.dataset.size() / 10) break;
    manual.emplace(p.id, corpus.span_labels.at(p.id));
  }
  InitResult init = init_pseudo_labels(corpus.dataset, manual);
  SelfTrainer trainer(SpanClassifierModel(baseline_backend(64, 2, 0),
                                          SpanClassifier::random(64, 32, 1)),
                      TrainConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(trainer.run_epoch(init.manual, init.pseudo));
  state.counters["reports"] = static_cast<double>(init.manual.reports.size() +
                                                  init.pseudo.reports.size());
}
BENCHMARK(BM_TrainEpoch)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
