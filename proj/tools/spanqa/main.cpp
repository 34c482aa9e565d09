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
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "json_config.hpp"
#include "spanqa/aggregate.hpp"
#include "spanqa/corpus.hpp"
#include "spanqa/diffmerge.hpp"
#include "spanqa/error.hpp"
#include "spanqa/io.hpp"
#include "spanqa/metrics.hpp"
#include "spanqa/model.hpp"
#include "spanqa/pipeline.hpp"
#include "spanqa/selftrain.hpp"

namespace {

using nlohmann::json;
using namespace spanqa;

constexpr int kArtifactVersion = 1;

void warn(const std::string& message) { std::cerr << "spanqa: warning: " << message << '\n'; }

json run_config(const CLI::App* root, const CLI::App* sub) {
  json config = cli::resolved_options(sub);
  config["subcommand"] = sub->get_name();
  if (const CLI::Option* file = root->get_config_ptr(); file && file->count() > 0) {
    config["config_file"] = file->as<std::string>();
  }
  return config;
}

json meta(const std::string& format, const json& config) {
  return {{"_meta",
           {{"format", format},
            {"version", kArtifactVersion},
            {"tool", std::string("spanqa ") + SPANQA_VERSION},
            {"run_config", config}}}};
}

Dataset load_pairs(const std::string& path) {
  Dataset ds = load_report_pairs(path);
  if (ds.empty()) warn("'" + path + "' holds no report pairs");
  return ds;
}

double parse_gamma(const std::string& text) {
  if (text == "all" || text == "inf") return kRefreshAll;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw ValidationError("gamma must be a number or 'all', got '" + text + "'");
  return value;
}

RefreshRule parse_rule(const std::string& text) {
  if (text == "low_loss") return RefreshRule::kLowLoss;
  if (text == "high_loss") return RefreshRule::kHighLoss;
  throw ValidationError("refresh rule must be low_loss or high_loss, got '" + text + "'");
}

// Options shared by train and sweep.
struct TrainOptions {
  std::string gamma = "0.10";
  TrainConfig config;
  std::string refresh_rule = "low_loss";
  std::string backend = "baseline";
  std::string embeddings;
  BaselineConfig baseline;

  void add(CLI::App* app, bool with_gamma) {
    if (with_gamma) {
      app->add_option("--gamma", gamma, "Loss gate of the pseudo-label refresh ('all' refreshes every span)")
          ->capture_default_str();
      app->add_option("--lambda", config.lambda, "Weight of the pseudo-labeled loss")
          ->capture_default_str()
          ->check(CLI::NonNegativeNumber);
    }
    app->add_option("--epochs", config.epochs, "Training epochs")->capture_default_str();
    app->add_option("--batch-size", config.batch_size, "Reports per mini-batch")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--lr-classifier", config.lr_classifier, "Classifier learning rate")
        ->capture_default_str();
    app->add_option("--lr-encoder", config.lr_encoder, "Encoder learning rate")->capture_default_str();
    app->add_option("--hidden", config.hidden, "Classifier hidden units (0 = linear)")
        ->capture_default_str();
    app->add_option("--seed", config.seed, "Training seed")->capture_default_str();
    app->add_option("--refresh-rule", refresh_rule, "Pseudo-label refresh rule")
        ->capture_default_str()
        ->check(CLI::IsMember({"low_loss", "high_loss"}));
    app->add_flag("--hard-refresh", config.hard_refresh, "Binarize refreshed pseudo-labels at 0.5")
        ->default_str("false");
    app->add_option("--dim", baseline.dim, "Baseline embedding dimension")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--window", baseline.window, "Baseline context radius")->capture_default_str();
    app->add_option("--buckets", baseline.buckets, "Baseline hash buckets")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  TrainConfig resolve() {
    config.gamma = parse_gamma(gamma);
    config.refresh_rule = parse_rule(refresh_rule);
    baseline.seed = config.seed;
    config.validate();
    return config;
  }
};

void write_jsonl_header(std::ostream& out, const std::string& format, const json& config) {
  out << meta(format, config).dump() << '\n';
}

json mixed_to_json(const MixedReport& m) {
  json spans = json::array();
  for (const RevisedSpan& s : m.spans) {
    spans.push_back({{"range", {s.range.begin, s.range.end}},
                     {"kind", to_string(s.kind)},
                     {"deleted", encode_utf8(s.deleted)},
                     {"inserted", encode_utf8(s.inserted)},
                     {"junior_offset", s.junior_offset},
                     {"senior_offset", s.senior_offset}});
  }
  return {{"id", m.report_id},
          {"chars", encode_utf8(m.chars)},
          {"tags", tags_to_string(m.tags)},
          {"spans", std::move(spans)}};
}

std::unique_ptr<EncoderBackend> optional_embeddings(const std::string& path) {
  if (path.empty()) return nullptr;
  return external_backend(path);
}

SpanClassifierModel load_for_inference(const std::string& model_path,
                                       const std::string& embeddings,
                                       std::optional<double> threshold) {
  SpanClassifierModel model = load_model(model_path, optional_embeddings(embeddings));
  if (threshold) {
    if (!(*threshold > 0.0 && *threshold < 1.0)) {
      throw ValidationError("threshold must lie in (0, 1)");
    }
    model.threshold.tau = *threshold;
  }
  return model;
}

std::string format_table(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-15s | %-27s | %-27s\n", "", "average", "minimum");
  out << line;
  std::snprintf(line, sizeof(line), "%-7s %-7s | %6s %6s %6s %6s | %6s %6s %6s %6s\n", "gamma",
                "lambda", "acc", "pre", "rec", "f1", "acc", "pre", "rec", "f1");
  out << line;
  for (const SweepCell& c : cells) {
    std::snprintf(line, sizeof(line),
                  "%-7.2f %-7.2f | %6.2f %6.2f %6.2f %6.2f | %6.2f %6.2f %6.2f %6.2f\n", c.gamma,
                  c.lambda, c.average.accuracy, c.average.precision, c.average.recall,
                  c.average.f1, c.minimum.accuracy, c.minimum.precision, c.minimum.recall,
                  c.minimum.f1);
    out << line;
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Span-level quality assessment of revised report pairs", "spanqa"};
  app.set_version_flag("--version", std::string("spanqa ") + SPANQA_VERSION);
  app.config_formatter(std::make_shared<cli::JsonConfig>());
  app.set_config("--config", "", "JSON file supplying option values; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();

  // merge
  std::string merge_input, merge_output;
  CLI::App* merge_cmd = app.add_subcommand("merge", "Merge report pairs into mixed reports with BIO tags");
  merge_cmd->add_option("--input", merge_input, "Report pairs (JSON Lines)")->required();
  merge_cmd->add_option("--output", merge_output, "Mixed reports (JSON Lines)")->required();

  // gen-corpus
  SynthesisConfig synth = SynthesisConfig::defaults();
  std::string gen_output, gen_truth, gen_train, gen_test, gen_manual_output;
  double gen_fraction = 0.2;
  std::uint64_t gen_split_seed = 0;
  std::size_t gen_manual = 0;
  CLI::App* gen_cmd = app.add_subcommand("gen-corpus", "Generate a synthetic corpus with span-level ground truth");
  gen_cmd->add_option("--n", synth.n_reports, "Number of reports")->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--harmful-rate", synth.harmful_edit_rate, "Probability that a report receives harmful edits")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--benign-rate", synth.benign_edit_rate, "Per-attempt probability of a benign edit")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--length", synth.target_length, "Target senior report length in characters")
      ->capture_default_str();
  gen_cmd->add_option("--output", gen_output, "All report pairs (JSON Lines)")->required();
  gen_cmd->add_option("--ground-truth", gen_truth, "Span labels for every report");
  gen_cmd->add_option("--train-output", gen_train, "Training split of the corpus");
  gen_cmd->add_option("--test-output", gen_test, "Test split of the corpus");
  gen_cmd->add_option("--test-fraction", gen_fraction, "Share of reports in the test split")
      ->capture_default_str();
  gen_cmd->add_option("--split-seed", gen_split_seed, "Seed of the stratified split")->capture_default_str();
  gen_cmd->add_option("--manual", gen_manual, "Number of training reports given manual span labels")
      ->capture_default_str();
  gen_cmd->add_option("--manual-output", gen_manual_output, "Span labels of the manual reports");

  // split
  std::string split_input, split_train, split_test;
  double split_fraction = 0.1;
  std::uint64_t split_seed = 0;
  CLI::App* split_cmd = app.add_subcommand("split", "Stratified train/test split of a pair file");
  split_cmd->add_option("--input", split_input, "Report pairs")->required();
  split_cmd->add_option("--train-output", split_train, "Training pairs")->required();
  split_cmd->add_option("--test-output", split_test, "Test pairs")->required();
  split_cmd->add_option("--test-fraction", split_fraction, "Share of reports in the test split")
      ->capture_default_str();
  split_cmd->add_option("--seed", split_seed, "Split seed")->capture_default_str();

  // train
  TrainOptions train_opts;
  std::string train_pairs, train_labels, train_model, train_telemetry;
  CLI::App* train_cmd = app.add_subcommand("train", "Self-train the span classifier");
  train_cmd->add_option("--pairs", train_pairs, "Training report pairs")->required();
  train_cmd->add_option("--span-labels", train_labels, "Manual span labels");
  train_cmd->add_option("--model", train_model, "Output model file")->required();
  train_cmd->add_option("--telemetry", train_telemetry, "Per-epoch losses (JSON Lines)");
  train_cmd->add_option("--backend", train_opts.backend, "Encoder backend")
      ->capture_default_str()
      ->check(CLI::IsMember({"baseline", "external"}));
  train_cmd->add_option("--embeddings", train_opts.embeddings, "Embeddings file for the external backend");
  train_opts.add(train_cmd, true);

  // predict / evaluate
  std::string pred_pairs, pred_model, pred_output, pred_embeddings, pred_aggregator = "minimum";
  std::optional<double> pred_threshold;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Score spans and judge each report");
  predict_cmd->add_option("--pairs", pred_pairs, "Report pairs")->required();
  predict_cmd->add_option("--model", pred_model, "Trained model")->required();
  predict_cmd->add_option("--output", pred_output, "Verdicts (JSON Lines)")->required();

  std::string eval_pairs, eval_model, eval_output, eval_verdicts, eval_embeddings, eval_aggregator = "minimum";
  std::optional<double> eval_threshold;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Macro metrics of the verdicts on labeled pairs");
  evaluate_cmd->add_option("--pairs", eval_pairs, "Labeled report pairs")->required();
  evaluate_cmd->add_option("--model", eval_model, "Trained model")->required();
  evaluate_cmd->add_option("--output", eval_output, "Metrics (JSON)")->required();
  evaluate_cmd->add_option("--verdicts", eval_verdicts, "Per-report verdicts (JSON Lines)");
  for (auto [cmd, agg, tau, emb] :
       {std::tuple{predict_cmd, &pred_aggregator, &pred_threshold, &pred_embeddings},
        std::tuple{evaluate_cmd, &eval_aggregator, &eval_threshold, &eval_embeddings}}) {
    cmd->add_option("--aggregator", *agg, "Span score aggregator")
        ->capture_default_str()
        ->check(CLI::IsMember({"average", "ave", "avg", "minimum", "min"}));
    cmd->add_option("--threshold", *tau, "Override the model's decision threshold");
    cmd->add_option("--embeddings", *emb, "Embeddings file, for models with the external backend");
  }

  // sweep
  TrainOptions sweep_opts;
  std::string sweep_train, sweep_test, sweep_labels, sweep_output, sweep_summary;
  std::vector<double> sweep_gammas{0.0, 0.05, 0.10, 0.15, 0.20};
  std::vector<double> sweep_lambdas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t sweep_jobs = 1;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Retrain over a gamma x lambda grid and tabulate metrics");
  sweep_cmd->add_option("--train", sweep_train, "Training report pairs")->required();
  sweep_cmd->add_option("--test", sweep_test, "Labeled test pairs")->required();
  sweep_cmd->add_option("--span-labels", sweep_labels, "Manual span labels");
  sweep_cmd->add_option("--gammas", sweep_gammas, "Gamma grid")->capture_default_str()->delimiter(',');
  sweep_cmd->add_option("--lambdas", sweep_lambdas, "Lambda grid")->capture_default_str()->delimiter(',');
  sweep_cmd->add_option("--output", sweep_output, "Metrics table (JSON)")->required();
  sweep_cmd->add_option("--summary", sweep_summary, "Plain-text summary");
  sweep_cmd->add_option("--jobs", sweep_jobs, "Grid cells trained in parallel")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep_opts.add(sweep_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (merge_cmd->parsed()) {
      const Dataset ds = load_pairs(merge_input);
      AtomicFile out(merge_output);
      write_jsonl_header(out.stream(), "spanqa-mixed", run_config(&app, merge_cmd));
      std::size_t spans = 0;
      for (const ReportPair& pair : ds.pairs) {
        const MixedReport m = merge_reports(pair);
        spans += m.spans.size();
        out.stream() << mixed_to_json(m).dump() << '\n';
      }
      out.commit();
      std::cout << "merged " << ds.size() << " pairs, " << spans << " revised spans\n";

    } else if (gen_cmd->parsed()) {
      if (gen_manual > 0 && gen_manual_output.empty()) {
        throw ValidationError("--manual needs --manual-output");
      }
      if (gen_train.empty() != gen_test.empty()) {
        throw ValidationError("--train-output and --test-output go together");
      }
      const json config = run_config(&app, gen_cmd);
      const SyntheticCorpus corpus = generate_synthetic_corpus(synth);
      auto write_pairs = [&](const std::string& path, const Dataset& ds, const char* format) {
        AtomicFile out(path);
        write_jsonl_header(out.stream(), format, config);
        write_report_pairs(out.stream(), ds);
        out.commit();
      };
      auto write_labels = [&](const std::string& path, const SpanLabelSet& labels) {
        AtomicFile out(path);
        write_jsonl_header(out.stream(), "spanqa-span-labels", config);
        write_span_labels(out.stream(), labels);
        out.commit();
      };
      const Dataset* pool = &corpus.dataset;
      std::optional<std::pair<Dataset, Dataset>> split;
      if (!gen_train.empty()) {
        split = split_dataset(corpus.dataset, gen_fraction, gen_split_seed);
        pool = &split->first;
      }
      if (gen_manual > pool->size()) {
        throw ValidationError("--manual " + std::to_string(gen_manual) + " exceeds the " +
                              std::to_string(pool->size()) + " available training reports");
      }
      write_pairs(gen_output, corpus.dataset, "spanqa-pairs");
      if (!gen_truth.empty()) write_labels(gen_truth, corpus.span_labels);
      if (split) {
        write_pairs(gen_train, split->first, "spanqa-pairs");
        write_pairs(gen_test, split->second, "spanqa-pairs");
      }
      if (gen_manual > 0) {
        SpanLabelSet manual;
        for (std::size_t i = 0; i < gen_manual; ++i) {
          const std::string& id = pool->pairs[i].id;
          manual.emplace(id, corpus.span_labels.at(id));
        }
        write_labels(gen_manual_output, manual);
      }
      std::cout << "generated " << corpus.dataset.size() << " reports ("
                << corpus.dataset.count_label(0) << " unqualified)\n";

    } else if (split_cmd->parsed()) {
      const json config = run_config(&app, split_cmd);
      const auto [train_set, test_set] = split_dataset(load_pairs(split_input), split_fraction, split_seed);
      for (auto [path, ds] : {std::pair{&split_train, &train_set}, std::pair{&split_test, &test_set}}) {
        AtomicFile out(*path);
        write_jsonl_header(out.stream(), "spanqa-pairs", config);
        write_report_pairs(out.stream(), *ds);
        out.commit();
      }
      std::cout << "train " << train_set.size() << ", test " << test_set.size() << '\n';

    } else if (train_cmd->parsed()) {
      const TrainConfig config = train_opts.resolve();
      const json run = run_config(&app, train_cmd);
      const Dataset ds = load_pairs(train_pairs);
      const SpanLabelSet labels = train_labels.empty() ? SpanLabelSet{} : load_span_labels(train_labels, ds);
      std::unique_ptr<EncoderBackend> encoder;
      if (train_opts.backend == "external") {
        if (train_opts.embeddings.empty()) throw ValidationError("--backend external needs --embeddings");
        encoder = external_backend(train_opts.embeddings);
      } else {
        encoder = std::make_unique<BaselineBackend>(train_opts.baseline);
      }

      std::optional<AtomicFile> telemetry;
      if (!train_telemetry.empty()) {
        telemetry.emplace(train_telemetry);
        write_jsonl_header(telemetry->stream(), "spanqa-telemetry", run);
      }
      TrainResult result = train(ds, labels, config, std::move(encoder), [&](const EpochTelemetry& t) {
        if (telemetry) telemetry->stream() << t.to_json().dump() << '\n';
      });
      if (result.skipped_unlabeled > 0) {
        warn(std::to_string(result.skipped_unlabeled) + " reports without a label were left out");
      }
      if (result.skipped_spanless > 0) {
        warn(std::to_string(result.skipped_spanless) + " reports without revisions give no training signal");
      }
      if (result.threshold_fallback) {
        warn("span scores do not separate; decision threshold falls back to 0.5");
      }
      result.model.run_config = run;
      save_model(result.model, train_model);
      if (telemetry) telemetry->commit();
      const EpochLosses last = result.telemetry.empty() ? EpochLosses{} : result.telemetry.back().losses;
      std::cout << "trained on " << result.manual_reports << " manual + " << result.pseudo_reports
                << " pseudo-labeled reports; final L_all " << last.l_all << ", threshold "
                << result.model.threshold.tau << '\n';

    } else if (predict_cmd->parsed()) {
      const Aggregator agg = aggregator_from_string(pred_aggregator);
      const SpanClassifierModel model = load_for_inference(pred_model, pred_embeddings, pred_threshold);
      const Dataset ds = load_pairs(pred_pairs);
      AtomicFile out(pred_output);
      write_jsonl_header(out.stream(), "spanqa-verdicts", run_config(&app, predict_cmd));
      std::size_t unqualified = 0;
      for (const ReportPair& pair : ds.pairs) {
        const QAResult r = classify_report(pair, model, agg);
        unqualified += r.verdict == 0;
        out.stream() << r.to_json().dump() << '\n';
      }
      out.commit();
      std::cout << "judged " << ds.size() << " reports, " << unqualified << " unqualified\n";

    } else if (evaluate_cmd->parsed()) {
      const Aggregator agg = aggregator_from_string(eval_aggregator);
      const SpanClassifierModel model = load_for_inference(eval_model, eval_embeddings, eval_threshold);
      const json config = run_config(&app, evaluate_cmd);
      const Evaluation ev = evaluate(load_pairs(eval_pairs), model, agg);
      if (ev.skipped_unlabeled > 0) {
        warn(std::to_string(ev.skipped_unlabeled) + " unlabeled reports were not scored");
      }
      std::optional<AtomicFile> verdicts;
      if (!eval_verdicts.empty()) {
        verdicts.emplace(eval_verdicts);
        write_jsonl_header(verdicts->stream(), "spanqa-verdicts", config);
        for (const QAResult& r : ev.results) verdicts->stream() << r.to_json().dump() << '\n';
      }
      json confusion_json = json::object();
      for (int cls = 0; cls < 2; ++cls) {
        const ClassCounts& c = ev.counts.per_class[static_cast<std::size_t>(cls)];
        confusion_json[cls == 1 ? "qualified" : "unqualified"] = {
            {"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
      }
      json doc = meta("spanqa-metrics", config);
      doc["aggregator"] = to_string(agg);
      doc["threshold"] = model.threshold.tau;
      doc["reports"] = ev.results.size();
      doc["skipped_unlabeled"] = ev.skipped_unlabeled;
      doc["metrics"] = ev.metrics.to_json();
      doc["confusion"] = confusion_json;
      AtomicFile out(eval_output);
      out.stream() << doc.dump(2) << '\n';
      out.commit();
      if (verdicts) verdicts->commit();
      std::cout << doc["metrics"].dump() << '\n';

    } else if (sweep_cmd->parsed()) {
      const TrainConfig base = sweep_opts.resolve();
      const json config = run_config(&app, sweep_cmd);
      if (sweep_gammas.empty() || sweep_lambdas.empty()) throw ValidationError("empty sweep grid");
      for (double g : sweep_gammas) {
        if (!(g >= 0.0)) throw ValidationError("gamma grid values must be >= 0");
      }
      for (double l : sweep_lambdas) {
        if (!(l >= 0.0) || std::isinf(l)) throw ValidationError("lambda grid values must be finite and >= 0");
      }
      const Dataset train_set = load_pairs(sweep_train);
      const Dataset test_set = load_pairs(sweep_test);
      const SpanLabelSet labels = sweep_labels.empty() ? SpanLabelSet{} : load_span_labels(sweep_labels, train_set);
      const std::vector<SweepCell> cells =
          run_sweep(train_set, test_set, labels, base, sweep_opts.baseline, sweep_gammas, sweep_lambdas, sweep_jobs);
      const std::size_t best = best_cell(cells);
      const SweepCell& b = cells[best];
      const bool best_is_min = b.minimum.f1 >= b.average.f1;
      char best_line[200];
      std::snprintf(best_line, sizeof(best_line),
                    "best cell: gamma=%.2f lambda=%.2f (%s aggregator, macro-F1 %.2f)\n", b.gamma,
                    b.lambda, best_is_min ? "minimum" : "average",
                    best_is_min ? b.minimum.f1 : b.average.f1);

      json doc = meta("spanqa-sweep", config);
      json rows = json::array();
      for (const SweepCell& c : cells) rows.push_back(c.to_json());
      doc["cells"] = std::move(rows);
      doc["best"] = {{"index", best},
                     {"gamma", b.gamma},
                     {"lambda", b.lambda},
                     {"aggregator", best_is_min ? "minimum" : "average"}};
      AtomicFile out(sweep_output);
      out.stream() << doc.dump(2) << '\n';
      const std::string summary = format_table(cells) + best_line;
      std::optional<AtomicFile> text;
      if (!sweep_summary.empty()) {
        text.emplace(sweep_summary);
        text->stream() << summary;
      }
      out.commit();
      if (text) text->commit();
      std::cout << summary;
    }
  } catch (const spanqa::Error& e) {
    std::cerr << "spanqa: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "spanqa: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
