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

#include "spanqa/model.hpp"

#include "spanqa/error.hpp"
#include "spanqa/io.hpp"

namespace spanqa {

SpanClassifierModel::SpanClassifierModel(std::unique_ptr<EncoderBackend> enc,
                                         SpanClassifier clf)
    : encoder(std::move(enc)), classifier(std::move(clf)) {
  if (encoder && encoder->dim() != classifier.dim()) {
    throw ValidationError("encoder dimension " + std::to_string(encoder->dim()) +
                          " does not match classifier input " +
                          std::to_string(classifier.dim()));
  }
}

SpanClassifierModel::SpanClassifierModel(const SpanClassifierModel& other)
    : encoder(other.encoder ? other.encoder->clone() : nullptr),
      classifier(other.classifier),
      threshold(other.threshold),
      train_config(other.train_config),
      run_config(other.run_config) {}

SpanClassifierModel& SpanClassifierModel::operator=(
    const SpanClassifierModel& other) {
  if (this != &other) *this = SpanClassifierModel(other);
  return *this;
}

std::vector<double> SpanClassifierModel::score_spans(
    const MixedReport& mixed) const {
  std::vector<double> scores;
  if (mixed.spans.empty()) return scores;
  if (!encoder) throw ValidationError("model has no encoder");
  const CharEmbeddings h = encoder->encode(mixed);
  scores.reserve(mixed.spans.size());
  for (const RevisedSpan& span : mixed.spans) {
    scores.push_back(classifier.score(pool_span(h, span.range)));
  }
  return scores;
}

nlohmann::json model_to_json(const SpanClassifierModel& model) {
  if (!model.encoder) throw ValidationError("model has no encoder");
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"encoder", model.encoder->to_json()},
          {"classifier", model.classifier.to_json()},
          {"threshold", model.threshold.tau},
          {"train_config", model.train_config},
          {"run_config", model.run_config}};
}

SpanClassifierModel model_from_json(const nlohmann::json& j,
                                    std::unique_ptr<EncoderBackend> external) {
  if (!j.is_object() || j.value("format", "") != kModelFormat) {
    throw ValidationError("not a spanqa model file");
  }
  const int version = j.at("version").get<int>();
  if (version != kModelVersion) {
    throw ValidationError("model format version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(kModelVersion) + ")");
  }
  const auto& enc = j.at("encoder");
  const auto name = enc.at("name").get<std::string>();
  std::unique_ptr<EncoderBackend> encoder;
  if (name == "baseline") {
    encoder = BaselineBackend::from_json(enc);
  } else if (name == "external") {
    if (!external) {
      throw ValidationError("model uses external embeddings; supply an embeddings file");
    }
    if (external->dim() != enc.at("dim").get<std::size_t>()) {
      throw ValidationError("embeddings dimension does not match the model");
    }
    encoder = std::move(external);
  } else {
    throw ValidationError("unknown encoder backend '" + name + "'");
  }
  SpanClassifierModel model(std::move(encoder),
                            SpanClassifier::from_json(j.at("classifier")));
  model.threshold.tau = j.at("threshold").get<double>();
  model.train_config = j.value("train_config", nlohmann::json::object());
  model.run_config = j.value("run_config", nlohmann::json::object());
  return model;
}

std::string serialize_model(const SpanClassifierModel& model) {
  return model_to_json(model).dump() + "\n";
}

void save_model(const SpanClassifierModel& model, const std::string& path) {
  AtomicFile file(path);
  file.stream() << serialize_model(model);
  file.commit();
}

SpanClassifierModel load_model(const std::string& path,
                               std::unique_ptr<EncoderBackend> external) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("model file '" + path + "': " + e.what());
  }
  return model_from_json(j, std::move(external));
}

}  // namespace spanqa
