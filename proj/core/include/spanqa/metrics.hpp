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

#ifndef SPANQA_METRICS_HPP_
#define SPANQA_METRICS_HPP_

#include <array>
#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

namespace spanqa {

// One-vs-rest counts for a single class.
struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  bool operator==(const ClassCounts&) const = default;
};

// Index 0 = unqualified, 1 = qualified.
struct ConfusionCounts {
  std::array<ClassCounts, 2> per_class;

  std::size_t total() const;
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(std::span<const int> preds, std::span<const int> golds);

// Percentages in [0, 100], each the mean of the two per-class values:
//   acc_t = (TP+TN)/(TP+TN+FP+FN)   pre_t = TP/(TP+FP)
//   rec_t = TP/(TP+FN)              f1_t  = 2 pre_t rec_t/(pre_t+rec_t)
// An undefined precision, recall or F1 (zero denominator) counts as 0.
struct MacroMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // Rounded to two decimals, plus the zero-division convention.
  nlohmann::json to_json() const;
};

MacroMetrics macro_metrics(const ConfusionCounts& counts);

double round2(double value);

}  // namespace spanqa

#endif  // SPANQA_METRICS_HPP_
