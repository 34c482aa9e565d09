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

#ifndef SPANQA_SELFTRAIN_HPP_
#define SPANQA_SELFTRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "spanqa/classifier.hpp"
#include "spanqa/corpus.hpp"
#include "spanqa/diffmerge.hpp"
#include "spanqa/model.hpp"

namespace spanqa {

// Which pseudo-labels a refresh replaces with the model's current score.
enum class RefreshRule {
  kLowLoss,   // l < gamma (default)
  kHighLoss,  // l >= gamma
};

inline constexpr double kRefreshAll = std::numeric_limits<double>::infinity();

struct TrainConfig {
  double gamma = 0.10;
  double lambda = 1.0;
  std::size_t epochs = 100;
  std::size_t batch_size = 8;
  double lr_classifier = 1e-3;
  double lr_encoder = 1e-6;
  std::size_t hidden = 32;
  std::uint64_t seed = 0;
  RefreshRule refresh_rule = RefreshRule::kLowLoss;
  // Binarize refreshed labels at 0.5 instead of keeping the soft score.
  bool hard_refresh = false;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// A merged report with one target and one last-seen loss per span.
struct LabeledReport {
  MixedReport mixed;
  std::vector<double> labels;
  std::vector<double> losses;
};

// D*: reports whose span labels came from a human.
struct ManualSet {
  std::vector<LabeledReport> reports;
};

// D~: reports whose span labels start as the report label and are
// refreshed from model predictions.
struct PseudoLabelState {
  std::vector<LabeledReport> reports;
  std::size_t epoch = 0;

  std::size_t span_count() const;
};

struct InitResult {
  ManualSet manual;
  PseudoLabelState pseudo;
  std::size_t skipped_unlabeled = 0;
  std::size_t skipped_spanless = 0;
};

// Throws ValidationError if a span-labeled report is not in train or its
// label count disagrees with the merge.
InitResult init_pseudo_labels(const Dataset& train,
                              const SpanLabelSet& span_labels);

struct EpochLosses {
  double l_manual = 0.0;
  double l_pseudo = 0.0;
  double l_all = 0.0;
};

struct EpochTelemetry {
  std::size_t epoch = 0;
  EpochLosses losses;
  std::size_t refreshed = 0;

  nlohmann::json to_json() const;
};

// L_all = L_manual + lambda * L_pseudo over the whole of D* and D~, where
// each L is the mean over its reports of the mean span cross-entropy, with
// the analytic gradient w.r.t. encoder and classifier parameters. Records
// per-span losses as a side effect.
struct Objective {
  double value = 0.0;
  std::vector<double> encoder_grad;
  std::vector<double> classifier_grad;
};

Objective full_objective(const SpanClassifierModel& model, ManualSet& manual,
                         PseudoLabelState& pseudo, double lambda);

// Replaces pseudo-labels selected by the rule with the model's current
// scores. Returns the number replaced.
std::size_t refresh_pseudo_labels(const SpanClassifierModel& model,
                                  PseudoLabelState& state, double gamma,
                                  RefreshRule rule = RefreshRule::kLowLoss,
                                  bool hard = false);

// Owns the model and optimizer state across epochs. Single writer.
class SelfTrainer {
 public:
  SelfTrainer(SpanClassifierModel model, const TrainConfig& config);

  // One pass over D* and (when lambda > 0) D~ in seeded mini-batches of
  // reports, one Adam update per batch. Each batch minimizes
  //   (1/|B|) sum_i c_i * mean_j CE(score_ij, target_ij)
  // with c_i = N/n* for manual and lambda*N/n~ for pseudo reports, an
  // unbiased estimate of L_manual + lambda * L_pseudo. Records the
  // per-span loss of every pseudo span.
  EpochLosses run_epoch(ManualSet& manual, PseudoLabelState& pseudo);

  const SpanClassifierModel& model() const { return model_; }
  SpanClassifierModel release() { return std::move(model_); }

 private:
  struct Item {
    LabeledReport* report;
    double weight;
    bool manual;
  };
  void process_batch(std::span<const Item> batch);

  SpanClassifierModel model_;
  TrainConfig config_;
  Adam encoder_opt_;
  Adam classifier_opt_;
  std::mt19937_64 rng_;
  std::vector<double> encoder_grad_;
  std::vector<double> classifier_grad_;
};

struct TrainResult {
  SpanClassifierModel model;
  std::vector<EpochTelemetry> telemetry;
  std::size_t manual_reports = 0;
  std::size_t pseudo_reports = 0;
  std::size_t skipped_unlabeled = 0;
  std::size_t skipped_spanless = 0;
  bool threshold_fallback = false;
};

using TelemetrySink = std::function<void(const EpochTelemetry&)>;

// init_pseudo_labels, then epochs x (run_epoch + refresh), then an Otsu fit
// of the threshold on the training span scores.
TrainResult train(const Dataset& train_set, const SpanLabelSet& span_labels,
                  const TrainConfig& config,
                  std::unique_ptr<EncoderBackend> encoder,
                  const TelemetrySink& sink = {});

}  // namespace spanqa

#endif  // SPANQA_SELFTRAIN_HPP_
