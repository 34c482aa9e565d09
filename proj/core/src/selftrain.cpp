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

#include "spanqa/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spanqa/error.hpp"

namespace spanqa {
namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + stream * 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

const char* to_string(RefreshRule rule) {
  return rule == RefreshRule::kLowLoss ? "low_loss" : "high_loss";
}

nlohmann::json gamma_to_json(double gamma) {
  if (std::isinf(gamma)) return "all";
  return gamma;
}

double gamma_from_json(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "all") return kRefreshAll;
  return j.get<double>();
}

// Forward and backward over one report. grad += coef * d(mean span CE)/dTheta.
// Returns the mean span loss and records per-span losses.
double accumulate_report(const SpanClassifierModel& model,
                         LabeledReport& report, double coef,
                         std::span<double> encoder_grad,
                         std::span<double> classifier_grad) {
  const EncoderBackend& encoder = *model.encoder;
  const bool train_encoder = encoder.trainable() && !encoder_grad.empty();
  const MixedReport& mixed = report.mixed;
  const CharEmbeddings h = encoder.encode(mixed);
  CharEmbeddings grad_h;
  if (train_encoder) grad_h = CharEmbeddings::Zero(h.rows(), h.cols());

  const double span_coef = coef / static_cast<double>(mixed.spans.size());
  double total = 0.0;
  for (std::size_t j = 0; j < mixed.spans.size(); ++j) {
    const IndexRange& range = mixed.spans[j].range;
    const SpanEmbedding s = pool_span(h, range);
    const ClassifierTrace trace = model.classifier.forward(s);
    const double target = report.labels[j];
    const double loss = span_loss(trace.score, target);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "non-finite loss on report '" << mixed.report_id << "' span " << j
          << " (score " << trace.score << ", target " << target << ")";
      throw NumericError(msg.str());
    }
    report.losses[j] = loss;
    total += loss;
    const double d_logit = span_coef * span_loss_grad_logit(trace.score, target);
    const SpanEmbedding d_s =
        model.classifier.backward(s, trace, d_logit, classifier_grad);
    if (train_encoder) accumulate_pool_gradient(range, d_s, grad_h);
  }
  if (train_encoder) encoder.accumulate_gradient(mixed, grad_h, encoder_grad);
  return total / static_cast<double>(mixed.spans.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(gamma >= 0.0)) throw ValidationError("gamma must be >= 0");
  if (!(lambda >= 0.0) || std::isinf(lambda)) {
    throw ValidationError("lambda must be a finite value >= 0");
  }
  if (batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (!(lr_classifier >= 0.0) || !(lr_encoder >= 0.0)) {
    throw ValidationError("learning rates must be >= 0");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"gamma", gamma_to_json(gamma)},
          {"lambda", lambda},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"lr_classifier", lr_classifier},
          {"lr_encoder", lr_encoder},
          {"hidden", hidden},
          {"seed", seed},
          {"refresh_rule", to_string(refresh_rule)},
          {"hard_refresh", hard_refresh}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (j.contains("gamma")) c.gamma = gamma_from_json(j.at("gamma"));
  c.lambda = j.value("lambda", c.lambda);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr_classifier = j.value("lr_classifier", c.lr_classifier);
  c.lr_encoder = j.value("lr_encoder", c.lr_encoder);
  c.hidden = j.value("hidden", c.hidden);
  c.seed = j.value("seed", c.seed);
  const std::string rule = j.value("refresh_rule", std::string("low_loss"));
  if (rule == "low_loss") {
    c.refresh_rule = RefreshRule::kLowLoss;
  } else if (rule == "high_loss") {
    c.refresh_rule = RefreshRule::kHighLoss;
  } else {
    throw ValidationError("unknown refresh rule '" + rule + "'");
  }
  c.hard_refresh = j.value("hard_refresh", c.hard_refresh);
  return c;
}

std::size_t PseudoLabelState::span_count() const {
  std::size_t n = 0;
  for (const LabeledReport& r : reports) n += r.labels.size();
  return n;
}

nlohmann::json EpochTelemetry::to_json() const {
  return {{"epoch", epoch},
          {"l_manual", losses.l_manual},
          {"l_pseudo", losses.l_pseudo},
          {"l_all", losses.l_all},
          {"refreshed", refreshed}};
}

InitResult init_pseudo_labels(const Dataset& train,
                              const SpanLabelSet& span_labels) {
  for (const auto& [id, rec] : span_labels) {
    if (train.find(id) == nullptr) {
      throw ValidationError("span-labeled report '" + id +
                            "' is not in the training set");
    }
  }
  InitResult out;
  for (const ReportPair& pair : train.pairs) {
    MixedReport mixed = merge_reports(pair);
    const std::size_t spans = mixed.spans.size();
    LabeledReport report;
    if (auto it = span_labels.find(pair.id); it != span_labels.end()) {
      if (it->second.span_labels.size() != spans) {
        throw ValidationError("report '" + pair.id + "': " +
                              std::to_string(it->second.span_labels.size()) +
                              " span labels but merge yields " +
                              std::to_string(spans) + " spans");
      }
      if (spans == 0) {
        ++out.skipped_spanless;
        continue;
      }
      report.labels.assign(it->second.span_labels.begin(),
                           it->second.span_labels.end());
      report.losses.assign(spans, kRefreshAll);
      report.mixed = std::move(mixed);
      out.manual.reports.push_back(std::move(report));
      continue;
    }
    if (!pair.label) {
      ++out.skipped_unlabeled;
      continue;
    }
    if (spans == 0) {
      ++out.skipped_spanless;
      continue;
    }
    report.labels.assign(spans, static_cast<double>(*pair.label));
    report.losses.assign(spans, kRefreshAll);
    report.mixed = std::move(mixed);
    out.pseudo.reports.push_back(std::move(report));
  }
  return out;
}

std::size_t refresh_pseudo_labels(const SpanClassifierModel& model,
                                  PseudoLabelState& state, double gamma,
                                  RefreshRule rule, bool hard) {
  std::size_t replaced = 0;
  for (LabeledReport& report : state.reports) {
    std::vector<double> scores;
    for (std::size_t j = 0; j < report.labels.size(); ++j) {
      const double loss = report.losses[j];
      const bool select =
          rule == RefreshRule::kLowLoss ? loss < gamma : loss >= gamma;
      if (!select) continue;
      if (scores.empty()) scores = model.score_spans(report.mixed);
      report.labels[j] = hard ? (scores[j] > 0.5 ? 1.0 : 0.0) : scores[j];
      ++replaced;
    }
  }
  return replaced;
}

SelfTrainer::SelfTrainer(SpanClassifierModel model, const TrainConfig& config)
    : model_(std::move(model)),
      config_(config),
      encoder_opt_(model_.encoder->parameters().size(),
                   AdamConfig{config.lr_encoder}),
      classifier_opt_(model_.classifier.parameters().size(),
                      AdamConfig{config.lr_classifier}),
      rng_(derive_seed(config.seed, 2)),
      encoder_grad_(model_.encoder->parameters().size()),
      classifier_grad_(model_.classifier.parameters().size()) {
  config_.validate();
}

void SelfTrainer::process_batch(std::span<const Item> batch) {
  std::fill(encoder_grad_.begin(), encoder_grad_.end(), 0.0);
  std::fill(classifier_grad_.begin(), classifier_grad_.end(), 0.0);
  const double batch_share = 1.0 / static_cast<double>(batch.size());
  for (const Item& item : batch) {
    accumulate_report(model_, *item.report, item.weight * batch_share,
                      encoder_grad_, classifier_grad_);
  }
  classifier_opt_.step(model_.classifier.parameters(), classifier_grad_);
  if (model_.encoder->trainable()) {
    encoder_opt_.step(model_.encoder->parameters(), encoder_grad_);
  }
}

EpochLosses SelfTrainer::run_epoch(ManualSet& manual, PseudoLabelState& pseudo) {
  const bool use_pseudo = config_.lambda > 0.0 && !pseudo.reports.empty();
  const std::size_t n_manual = manual.reports.size();
  const std::size_t n_pseudo = use_pseudo ? pseudo.reports.size() : 0;
  const double n_items = static_cast<double>(n_manual + n_pseudo);

  std::vector<Item> items;
  items.reserve(n_manual + n_pseudo);
  for (LabeledReport& r : manual.reports) {
    items.push_back({&r, n_items / static_cast<double>(n_manual), true});
  }
  if (use_pseudo) {
    for (LabeledReport& r : pseudo.reports) {
      items.push_back(
          {&r, config_.lambda * n_items / static_cast<double>(n_pseudo), false});
    }
  }
  std::shuffle(items.begin(), items.end(), rng_);

  for (std::size_t start = 0; start < items.size(); start += config_.batch_size) {
    const std::size_t end = std::min(items.size(), start + config_.batch_size);
    process_batch(std::span<const Item>(items).subspan(start, end - start));
  }

  // Pseudo spans left out of the batches still need a loss for the refresh.
  if (!use_pseudo) {
    for (LabeledReport& r : pseudo.reports) {
      const std::vector<double> scores = model_.score_spans(r.mixed);
      for (std::size_t j = 0; j < scores.size(); ++j) {
        r.losses[j] = span_loss(scores[j], r.labels[j]);
      }
    }
  }
  ++pseudo.epoch;

  const auto mean_loss = [](const std::vector<LabeledReport>& reports) {
    if (reports.empty()) return 0.0;
    double total = 0.0;
    for (const LabeledReport& r : reports) {
      double sum = 0.0;
      for (double l : r.losses) sum += l;
      total += sum / static_cast<double>(r.losses.size());
    }
    return total / static_cast<double>(reports.size());
  };
  EpochLosses losses;
  losses.l_manual = mean_loss(manual.reports);
  losses.l_pseudo = mean_loss(pseudo.reports);
  losses.l_all = losses.l_manual + config_.lambda * losses.l_pseudo;
  return losses;
}

Objective full_objective(const SpanClassifierModel& model, ManualSet& manual,
                         PseudoLabelState& pseudo, double lambda) {
  Objective out;
  out.encoder_grad.assign(model.encoder->parameters().size(), 0.0);
  out.classifier_grad.assign(model.classifier.parameters().size(), 0.0);
  const auto add_set = [&](std::vector<LabeledReport>& reports, double weight) {
    if (reports.empty()) return;
    const double coef = weight / static_cast<double>(reports.size());
    for (LabeledReport& r : reports) {
      out.value += coef * accumulate_report(model, r, coef, out.encoder_grad,
                                            out.classifier_grad);
    }
  };
  add_set(manual.reports, 1.0);
  add_set(pseudo.reports, lambda);
  return out;
}

TrainResult train(const Dataset& train_set, const SpanLabelSet& span_labels,
                  const TrainConfig& config,
                  std::unique_ptr<EncoderBackend> encoder,
                  const TelemetrySink& sink) {
  config.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  if (!encoder) throw ValidationError("no encoder backend");

  InitResult init = init_pseudo_labels(train_set, span_labels);
  const std::size_t dim = encoder->dim();
  SpanClassifierModel model(
      std::move(encoder),
      SpanClassifier::random(dim, config.hidden, derive_seed(config.seed, 1)));
  model.train_config = config.to_json();

  TrainResult result;
  result.manual_reports = init.manual.reports.size();
  result.pseudo_reports = init.pseudo.reports.size();
  result.skipped_unlabeled = init.skipped_unlabeled;
  result.skipped_spanless = init.skipped_spanless;

  SelfTrainer trainer(std::move(model), config);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochTelemetry t;
    t.epoch = epoch;
    t.losses = trainer.run_epoch(init.manual, init.pseudo);
    t.refreshed =
        refresh_pseudo_labels(trainer.model(), init.pseudo, config.gamma,
                              config.refresh_rule, config.hard_refresh);
    if (sink) sink(t);
    result.telemetry.push_back(t);
  }
  result.model = trainer.release();

  std::vector<double> scores;
  for (const auto* set : {&init.manual.reports, &init.pseudo.reports}) {
    for (const LabeledReport& r : *set) {
      const auto s = result.model.score_spans(r.mixed);
      scores.insert(scores.end(), s.begin(), s.end());
    }
  }
  try {
    result.model.threshold = otsu_threshold(scores);
  } catch (const ValidationError&) {
    result.model.threshold.tau = kFallbackThreshold;
    result.threshold_fallback = true;
  }
  return result;
}

}  // namespace spanqa
