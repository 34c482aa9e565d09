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

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "spanqa/error.hpp"
#include "spanqa/model.hpp"
#include "spanqa/selftrain.hpp"
#include "test_support.hpp"

using namespace spanqa;

namespace {

// Small corpus: laterality flips are harmful, style swaps are benign.
Dataset tiny_dataset() {
  Dataset ds;
  const char* rows[][3] = {
      {"q1", "双肺纹理清楚，心影如常。", "双肺纹理清晰，心影正常。"},
      {"q2", "肝脏大小如常，实质均一。", "肝脏大小正常，实质均匀。"},
      {"q3", "脑室形态如常。", "脑室形态正常。"},
      {"q4", "胆囊显示清楚。", "胆囊显示清晰。"},
      {"u1", "左肺下叶见结节。", "右肺下叶见结节。"},
      {"u2", "右肾见囊肿，肾盂正常。", "左肾见囊肿，肾盂如常。"},
      {"u3", "左侧额叶见梗死灶。", "双侧额叶见梗死灶。"},
      {"q5", "纵隔居中。", "纵隔居中。"},  // spanless
  };
  for (const auto& r : rows) {
    ds.pairs.push_back({r[0], r[1], r[2], r[0][0] == 'q' ? 1 : 0, {}});
  }
  ds.pairs.push_back({"x1", "左肺", "右肺", std::nullopt, {}});  // unlabeled
  return ds;
}

SpanClassifierModel small_model(std::uint64_t seed, std::size_t hidden = 3) {
  return SpanClassifierModel(baseline_backend(4, 1, seed, 32),
                             SpanClassifier::random(4, hidden, seed + 1));
}

TrainConfig quick_config() {
  TrainConfig c;
  c.epochs = 5;
  c.batch_size = 2;
  c.hidden = 4;
  c.lr_classifier = 1e-2;
  c.lr_encoder = 1e-3;
  return c;
}

std::vector<double> all_params(const SpanClassifierModel& m) {
  std::vector<double> p(m.encoder->parameters().begin(), m.encoder->parameters().end());
  p.insert(p.end(), m.classifier.parameters().begin(), m.classifier.parameters().end());
  return p;
}

}  // namespace

TEST_CASE("init assigns report labels to every pseudo span") {
  const Dataset ds = tiny_dataset();
  SpanLabelSet manual;
  manual["u1"] = {"u1", {0}};
  const InitResult init = init_pseudo_labels(ds, manual);
  CHECK(init.manual.reports.size() == 1);
  CHECK(init.pseudo.reports.size() == 6);
  CHECK(init.skipped_unlabeled == 1);
  CHECK(init.skipped_spanless == 1);
  for (const LabeledReport& r : init.pseudo.reports) {
    const double y = r.mixed.report_id[0] == 'q' ? 1.0 : 0.0;
    REQUIRE(r.labels.size() == r.mixed.spans.size());
    for (double l : r.labels) CHECK(l == y);
    for (double l : r.losses) CHECK(std::isinf(l));
  }
  // q1 carries two benign edits.
  CHECK(init.pseudo.reports[0].labels == std::vector<double>{1.0, 1.0});

  const InitResult none = init_pseudo_labels(ds, {});
  CHECK(none.manual.reports.empty());
  CHECK(none.pseudo.reports.size() == 7);

  SpanLabelSet unknown;
  unknown["zz"] = {"zz", {1}};
  CHECK_THROWS_AS(init_pseudo_labels(ds, unknown), ValidationError);
  SpanLabelSet mismatch;
  mismatch["q1"] = {"q1", {1}};
  CHECK_THROWS_AS(init_pseudo_labels(ds, mismatch), ValidationError);
}

TEST_CASE("refresh rule") {
  const SpanClassifierModel model = small_model(1);
  const Dataset ds = tiny_dataset();
  PseudoLabelState state = init_pseudo_labels(ds, {}).pseudo;
  LabeledReport& q1 = state.reports[0];
  q1.losses = {0.05, 0.2};
  for (std::size_t i = 1; i < state.reports.size(); ++i) {
    for (double& l : state.reports[i].losses) l = 1.0;
  }
  const std::vector<double> scores = model.score_spans(q1.mixed);

  PseudoLabelState copy = state;
  CHECK(refresh_pseudo_labels(model, copy, 0.0) == 0);
  for (std::size_t i = 0; i < state.reports.size(); ++i) {
    CHECK(copy.reports[i].labels == state.reports[i].labels);
  }

  copy = state;
  CHECK(refresh_pseudo_labels(model, copy, 0.1) == 1);
  CHECK(copy.reports[0].labels[0] == scores[0]);
  CHECK(copy.reports[0].labels[1] == 1.0);

  copy = state;
  CHECK(refresh_pseudo_labels(model, copy, kRefreshAll) == state.span_count());
  CHECK(copy.reports[0].labels == scores);

  copy = state;
  CHECK(refresh_pseudo_labels(model, copy, 0.1, RefreshRule::kHighLoss) ==
        state.span_count() - 1);
  CHECK(copy.reports[0].labels[0] == 1.0);
  CHECK(copy.reports[0].labels[1] == scores[1]);

  copy = state;
  refresh_pseudo_labels(model, copy, kRefreshAll, RefreshRule::kLowLoss, true);
  for (const LabeledReport& r : copy.reports) {
    for (double l : r.labels) CHECK((l == 0.0 || l == 1.0));
  }
}

TEST_CASE("refresh count is monotone in gamma") {
  const SpanClassifierModel model = small_model(2);
  PseudoLabelState state = init_pseudo_labels(tiny_dataset(), {}).pseudo;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& r : state.reports) {
    for (double& l : r.losses) l = u(rng);
  }
  std::size_t previous = 0;
  for (double gamma = 0.0; gamma <= 1.05; gamma += 0.05) {
    PseudoLabelState copy = state;
    const std::size_t n = refresh_pseudo_labels(model, copy, gamma);
    CHECK(n >= previous);
    previous = n;
  }
}

TEST_CASE("refreshing labels that equal the scores is a fixed point") {
  const SpanClassifierModel model = small_model(4);
  PseudoLabelState state = init_pseudo_labels(tiny_dataset(), {}).pseudo;
  for (auto& r : state.reports) {
    r.labels = model.score_spans(r.mixed);
    for (std::size_t j = 0; j < r.labels.size(); ++j) {
      // Loss of a soft target against itself is its entropy, at most ln 2.
      r.losses[j] = span_loss(r.labels[j], r.labels[j]);
    }
  }
  PseudoLabelState copy = state;
  refresh_pseudo_labels(model, copy, kRefreshAll);
  for (std::size_t i = 0; i < state.reports.size(); ++i) {
    CHECK(copy.reports[i].labels == state.reports[i].labels);
  }
}

TEST_CASE("training is deterministic") {
  const Dataset ds = tiny_dataset();
  SpanLabelSet manual;
  manual["u1"] = {"u1", {0}};
  const TrainConfig config = quick_config();
  const TrainResult a = train(ds, manual, config, baseline_backend(4, 1, 0, 32));
  const TrainResult b = train(ds, manual, config, baseline_backend(4, 1, 0, 32));
  CHECK(serialize_model(a.model) == serialize_model(b.model));
  CHECK(a.telemetry.size() == 5);
  CHECK(a.manual_reports == 1);
  CHECK(a.pseudo_reports == 6);
  TrainConfig other = config;
  other.seed = 1;
  const TrainResult c = train(ds, manual, other, baseline_backend(4, 1, 0, 32));
  CHECK(serialize_model(a.model) != serialize_model(c.model));
}

TEST_CASE("lambda zero equals training on the manual set alone") {
  const Dataset full = tiny_dataset();
  SpanLabelSet manual;
  manual["u1"] = {"u1", {0}};
  manual["q2"] = {"q2", {1, 1}};
  Dataset only_manual;
  for (const auto& p : full.pairs) {
    if (manual.contains(p.id)) only_manual.pairs.push_back(p);
  }
  TrainConfig config = quick_config();
  config.lambda = 0.0;
  const TrainResult a = train(full, manual, config, baseline_backend(4, 1, 0, 32));
  const TrainResult b = train(only_manual, manual, config, baseline_backend(4, 1, 0, 32));
  CHECK(all_params(a.model) == all_params(b.model));
  for (std::size_t e = 0; e < a.telemetry.size(); ++e) {
    CHECK(a.telemetry[e].losses.l_manual == b.telemetry[e].losses.l_manual);
    CHECK(a.telemetry[e].losses.l_all == a.telemetry[e].losses.l_manual);
  }
}

TEST_CASE("without manual labels the objective is the pseudo loss") {
  TrainConfig config = quick_config();
  const TrainResult r = train(tiny_dataset(), {}, config, baseline_backend(4, 1, 0, 32));
  for (const EpochTelemetry& t : r.telemetry) {
    CHECK(t.losses.l_manual == 0.0);
    CHECK(t.losses.l_all == t.losses.l_pseudo);
    CHECK(t.losses.l_pseudo > 0.0);
  }
}

TEST_CASE("one epoch with gamma zero keeps the initial labels") {
  const Dataset ds = tiny_dataset();
  InitResult init = init_pseudo_labels(ds, {});
  const PseudoLabelState before = init.pseudo;
  TrainConfig config = quick_config();
  config.gamma = 0.0;
  SelfTrainer trainer(small_model(0, 4), config);
  trainer.run_epoch(init.manual, init.pseudo);
  CHECK(refresh_pseudo_labels(trainer.model(), init.pseudo, 0.0) == 0);
  CHECK(init.pseudo.epoch == 1);
  for (std::size_t i = 0; i < before.reports.size(); ++i) {
    CHECK(init.pseudo.reports[i].labels == before.reports[i].labels);
    for (double l : init.pseudo.reports[i].losses) {
      CHECK(std::isfinite(l));
      CHECK(l >= 0.0);
    }
  }
}

TEST_CASE("an epoch lowers the loss on a learnable set") {
  const Dataset ds = tiny_dataset();
  SpanLabelSet manual;
  manual["u1"] = {"u1", {0}};
  manual["q3"] = {"q3", {1}};
  InitResult init = init_pseudo_labels(ds, manual);
  TrainConfig config = quick_config();
  SelfTrainer trainer(small_model(5, 4), config);
  const double first = trainer.run_epoch(init.manual, init.pseudo).l_all;
  double last = first;
  for (int e = 0; e < 50; ++e) last = trainer.run_epoch(init.manual, init.pseudo).l_all;
  CHECK(last < first);
}

TEST_CASE("config validation and json") {
  TrainConfig c;
  c.gamma = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig();
  c.lambda = -0.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = TrainConfig();
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);

  c = TrainConfig();
  c.gamma = kRefreshAll;
  c.refresh_rule = RefreshRule::kHighLoss;
  c.hard_refresh = true;
  const nlohmann::json j = c.to_json();
  CHECK(j.at("gamma") == "all");
  const TrainConfig back = TrainConfig::from_json(j);
  CHECK(std::isinf(back.gamma));
  CHECK(back.refresh_rule == RefreshRule::kHighLoss);
  CHECK(back.hard_refresh);
  CHECK(back.epochs == 100);
  CHECK_THROWS_AS(TrainConfig::from_json({{"refresh_rule", "sometimes"}}), ValidationError);
}

TEST_CASE("training rejects empty input") {
  CHECK_THROWS_AS(train(Dataset{}, {}, quick_config(), baseline_backend(4, 1, 0, 32)),
                  ValidationError);
}

TEST_CASE("telemetry json keys") {
  EpochTelemetry t;
  t.epoch = 3;
  t.refreshed = 7;
  const nlohmann::json j = t.to_json();
  for (const char* key : {"epoch", "l_manual", "l_pseudo", "l_all", "refreshed"}) {
    CHECK(j.contains(key));
  }
  CHECK(j.at("refreshed") == 7);
}

TEST_CASE("model file round trip") {
  const TrainResult r =
      train(tiny_dataset(), {}, quick_config(), baseline_backend(4, 1, 0, 32));
  const std::string text = serialize_model(r.model);
  const SpanClassifierModel back = model_from_json(nlohmann::json::parse(text));
  CHECK(serialize_model(back) == text);
  CHECK(back.threshold == r.model.threshold);
  CHECK(back.classifier == r.model.classifier);

  testing::TempDir dir("model");
  save_model(r.model, dir.file("m.json"));
  CHECK(serialize_model(load_model(dir.file("m.json"))) == text);

  nlohmann::json bumped = nlohmann::json::parse(text);
  bumped["version"] = kModelVersion + 1;
  CHECK_THROWS_AS(model_from_json(bumped), ValidationError);
  nlohmann::json foreign = {{"format", "other"}};
  CHECK_THROWS_AS(model_from_json(foreign), ValidationError);
  testing::write_text(dir.file("bad.json"), "{oops");
  CHECK_THROWS_AS(load_model(dir.file("bad.json")), ParseError);
}

TEST_CASE("copied models are independent") {
  SpanClassifierModel a = small_model(7);
  SpanClassifierModel b = a;
  b.encoder->parameters()[0] += 1.0;
  CHECK(a.encoder->parameters()[0] != b.encoder->parameters()[0]);
}
