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

#include "spanqa/aggregate.hpp"

#include <algorithm>
#include <numeric>

#include "spanqa/diffmerge.hpp"
#include "spanqa/error.hpp"

namespace spanqa {

const char* to_string(Aggregator aggregator) {
  return aggregator == Aggregator::kAverage ? "average" : "minimum";
}

Aggregator aggregator_from_string(const std::string& name) {
  if (name == "average" || name == "ave" || name == "avg") return Aggregator::kAverage;
  if (name == "minimum" || name == "min") return Aggregator::kMinimum;
  throw ValidationError("unknown aggregator '" + name + "'");
}

nlohmann::json QAResult::to_json() const {
  return {{"id", report_id},
          {"span_scores", span_scores},
          {"aggregate_score", aggregate_score},
          {"verdict", verdict},
          {"aggregator", to_string(aggregator)},
          {"threshold", threshold}};
}

double aggregate_average(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("cannot aggregate zero spans");
  return std::accumulate(scores.begin(), scores.end(), 0.0) /
         static_cast<double>(scores.size());
}

double aggregate_min(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("cannot aggregate zero spans");
  return *std::min_element(scores.begin(), scores.end());
}

double aggregate(Aggregator aggregator, std::span<const double> scores) {
  return aggregator == Aggregator::kAverage ? aggregate_average(scores)
                                            : aggregate_min(scores);
}

QAResult judge(std::string report_id, std::vector<double> span_scores,
               Aggregator aggregator, double tau) {
  QAResult result;
  result.report_id = std::move(report_id);
  result.aggregator = aggregator;
  result.threshold = tau;
  result.span_scores = std::move(span_scores);
  if (result.span_scores.empty()) {
    result.aggregate_score = kSpanlessScore;
    result.verdict = 1;
    return result;
  }
  result.aggregate_score = aggregate(aggregator, result.span_scores);
  result.verdict = result.aggregate_score > tau ? 1 : 0;
  return result;
}

QAResult classify_report(const ReportPair& pair,
                         const SpanClassifierModel& model,
                         Aggregator aggregator, double tau) {
  const MixedReport mixed = merge_reports(pair);
  return judge(pair.id, model.score_spans(mixed), aggregator, tau);
}

QAResult classify_report(const ReportPair& pair,
                         const SpanClassifierModel& model,
                         Aggregator aggregator) {
  return classify_report(pair, model, aggregator, model.threshold.tau);
}

}  // namespace spanqa
