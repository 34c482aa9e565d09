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

#ifndef SPANQA_AGGREGATE_HPP_
#define SPANQA_AGGREGATE_HPP_

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spanqa/corpus.hpp"
#include "spanqa/model.hpp"

namespace spanqa {

enum class Aggregator { kAverage, kMinimum };

const char* to_string(Aggregator aggregator);
Aggregator aggregator_from_string(const std::string& name);

// Score and verdict assigned to a report without revisions.
inline constexpr double kSpanlessScore = 1.0;

struct QAResult {
  std::string report_id;
  std::vector<double> span_scores;
  double aggregate_score = kSpanlessScore;
  int verdict = 1;  // 1 = qualified, 0 = unqualified
  Aggregator aggregator = Aggregator::kMinimum;
  double threshold = 0.5;

  nlohmann::json to_json() const;
};

// Both require a non-empty list.
double aggregate_average(std::span<const double> scores);
double aggregate_min(std::span<const double> scores);
double aggregate(Aggregator aggregator, std::span<const double> scores);

// Aggregates already-computed span scores. verdict = aggregate > tau.
QAResult judge(std::string report_id, std::vector<double> span_scores,
               Aggregator aggregator, double tau);

QAResult classify_report(const ReportPair& pair,
                         const SpanClassifierModel& model,
                         Aggregator aggregator, double tau);
// Uses the model's fitted threshold.
QAResult classify_report(const ReportPair& pair,
                         const SpanClassifierModel& model,
                         Aggregator aggregator);

}  // namespace spanqa

#endif  // SPANQA_AGGREGATE_HPP_
