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

#ifndef SPANQA_PIPELINE_HPP_
#define SPANQA_PIPELINE_HPP_

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "spanqa/aggregate.hpp"
#include "spanqa/corpus.hpp"
#include "spanqa/encoder.hpp"
#include "spanqa/metrics.hpp"
#include "spanqa/model.hpp"
#include "spanqa/selftrain.hpp"

namespace spanqa {

struct Evaluation {
  std::vector<QAResult> results;  // one per labeled pair, input order
  ConfusionCounts counts;
  MacroMetrics metrics;
  std::size_t skipped_unlabeled = 0;
};

// Classifies every labeled pair with the model threshold and scores the
// verdicts against the report labels.
Evaluation evaluate(const Dataset& test, const SpanClassifierModel& model,
                    Aggregator aggregator);

struct SpanAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const {
    return total == 0 ? 0.0 : static_cast<double>(correct) / total;
  }
};

// Span-level agreement of (score > tau) with reference span labels, over
// the pairs of dataset that have a record in truth.
SpanAccuracy span_label_accuracy(const Dataset& dataset,
                                 const SpanLabelSet& truth,
                                 const SpanClassifierModel& model);

struct SweepCell {
  double gamma = 0.0;
  double lambda = 0.0;
  MacroMetrics average;
  MacroMetrics minimum;

  nlohmann::json to_json() const;
};

// Retrains from scratch at every (gamma, lambda) grid point, gamma-major,
// with the same seed, and evaluates on test under both aggregators. Cells
// run on up to jobs threads; results do not depend on jobs.
std::vector<SweepCell> run_sweep(const Dataset& train_set,
                                 const Dataset& test_set,
                                 const SpanLabelSet& span_labels,
                                 const TrainConfig& base,
                                 const BaselineConfig& encoder,
                                 const std::vector<double>& gammas,
                                 const std::vector<double>& lambdas,
                                 std::size_t jobs = 1);

// Index of the cell with the best macro-F1 under either aggregator
// (first wins on ties).
std::size_t best_cell(const std::vector<SweepCell>& cells);

}  // namespace spanqa

#endif  // SPANQA_PIPELINE_HPP_
