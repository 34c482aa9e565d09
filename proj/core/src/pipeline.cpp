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

#include "spanqa/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "spanqa/error.hpp"

namespace spanqa {

Evaluation evaluate(const Dataset& test, const SpanClassifierModel& model,
                    Aggregator aggregator) {
  Evaluation eval;
  std::vector<int> preds;
  std::vector<int> golds;
  for (const ReportPair& pair : test.pairs) {
    if (!pair.label) {
      ++eval.skipped_unlabeled;
      continue;
    }
    QAResult r = classify_report(pair, model, aggregator);
    preds.push_back(r.verdict);
    golds.push_back(*pair.label);
    eval.results.push_back(std::move(r));
  }
  if (preds.empty()) throw ValidationError("no labeled reports to evaluate");
  eval.counts = confusion(preds, golds);
  eval.metrics = macro_metrics(eval.counts);
  return eval;
}

SpanAccuracy span_label_accuracy(const Dataset& dataset,
                                 const SpanLabelSet& truth,
                                 const SpanClassifierModel& model) {
  SpanAccuracy acc;
  for (const ReportPair& pair : dataset.pairs) {
    auto it = truth.find(pair.id);
    if (it == truth.end()) continue;
    const MixedReport mixed = merge_reports(pair);
    const std::vector<double> scores = model.score_spans(mixed);
    if (scores.size() != it->second.span_labels.size()) {
      throw ValidationError("report '" + pair.id +
                            "': reference span labels do not match the merge");
    }
    for (std::size_t j = 0; j < scores.size(); ++j) {
      const int predicted = scores[j] > model.threshold.tau ? 1 : 0;
      if (predicted == it->second.span_labels[j]) ++acc.correct;
      ++acc.total;
    }
  }
  return acc;
}

nlohmann::json SweepCell::to_json() const {
  return {{"gamma", gamma},
          {"lambda", lambda},
          {"average", average.to_json()},
          {"minimum", minimum.to_json()}};
}

std::vector<SweepCell> run_sweep(const Dataset& train_set,
                                 const Dataset& test_set,
                                 const SpanLabelSet& span_labels,
                                 const TrainConfig& base,
                                 const BaselineConfig& encoder,
                                 const std::vector<double>& gammas,
                                 const std::vector<double>& lambdas,
                                 std::size_t jobs) {
  std::vector<SweepCell> cells;
  for (double g : gammas) {
    for (double l : lambdas) cells.push_back({g, l, {}, {}});
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        TrainConfig config = base;
        config.gamma = cells[i].gamma;
        config.lambda = cells[i].lambda;
        TrainResult trained = train(train_set, span_labels, config,
                                    std::make_unique<BaselineBackend>(encoder));
        cells[i].average =
            evaluate(test_set, trained.model, Aggregator::kAverage).metrics;
        cells[i].minimum =
            evaluate(test_set, trained.model, Aggregator::kMinimum).metrics;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, cells.size() ? cells.size() : 1);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return cells;
}

std::size_t best_cell(const std::vector<SweepCell>& cells) {
  std::size_t best = 0;
  double best_f1 = -1.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double f1 = std::max(cells[i].average.f1, cells[i].minimum.f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = i;
    }
  }
  return best;
}

}  // namespace spanqa
