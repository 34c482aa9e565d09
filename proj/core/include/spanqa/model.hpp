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

#ifndef SPANQA_MODEL_HPP_
#define SPANQA_MODEL_HPP_

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spanqa/classifier.hpp"
#include "spanqa/diffmerge.hpp"
#include "spanqa/encoder.hpp"

namespace spanqa {

inline constexpr const char* kModelFormat = "spanqa-model";
inline constexpr int kModelVersion = 1;

// Encoder parameters plus classifier parameters plus the decision
// threshold. train_config and run_config are carried for provenance.
struct SpanClassifierModel {
  std::unique_ptr<EncoderBackend> encoder;
  SpanClassifier classifier{1, 0};
  DecisionThreshold threshold;
  nlohmann::json train_config = nlohmann::json::object();
  nlohmann::json run_config = nlohmann::json::object();

  SpanClassifierModel() = default;
  SpanClassifierModel(std::unique_ptr<EncoderBackend> enc, SpanClassifier clf);
  SpanClassifierModel(const SpanClassifierModel& other);
  SpanClassifierModel& operator=(const SpanClassifierModel& other);
  SpanClassifierModel(SpanClassifierModel&&) noexcept = default;
  SpanClassifierModel& operator=(SpanClassifierModel&&) noexcept = default;

  // Importance score of every revised span, in span order.
  std::vector<double> score_spans(const MixedReport& mixed) const;
};

nlohmann::json model_to_json(const SpanClassifierModel& model);

// Rejects unknown formats and version mismatches. A model trained on the
// external backend needs the embeddings for the reports it will score.
SpanClassifierModel model_from_json(
    const nlohmann::json& j, std::unique_ptr<EncoderBackend> external = {});

std::string serialize_model(const SpanClassifierModel& model);
void save_model(const SpanClassifierModel& model, const std::string& path);
SpanClassifierModel load_model(const std::string& path,
                               std::unique_ptr<EncoderBackend> external = {});

}  // namespace spanqa

#endif  // SPANQA_MODEL_HPP_
