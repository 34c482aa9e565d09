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

#include "spanqa/metrics.hpp"

#include <cmath>

#include "spanqa/error.hpp"

namespace spanqa {
namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

std::size_t ConfusionCounts::total() const {
  const ClassCounts& c = per_class[0];
  return c.tp + c.fp + c.tn + c.fn;
}

ConfusionCounts confusion(std::span<const int> preds, std::span<const int> golds) {
  if (preds.size() != golds.size()) {
    throw ValidationError("prediction count " + std::to_string(preds.size()) +
                          " != gold count " + std::to_string(golds.size()));
  }
  if (preds.empty()) throw ValidationError("no predictions to score");
  ConfusionCounts counts;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if ((preds[i] != 0 && preds[i] != 1) || (golds[i] != 0 && golds[i] != 1)) {
      throw ValidationError("labels must be 0 or 1");
    }
    for (int t = 0; t < 2; ++t) {
      ClassCounts& c = counts.per_class[static_cast<std::size_t>(t)];
      const bool pred_pos = preds[i] == t;
      const bool gold_pos = golds[i] == t;
      if (pred_pos && gold_pos) {
        ++c.tp;
      } else if (pred_pos) {
        ++c.fp;
      } else if (gold_pos) {
        ++c.fn;
      } else {
        ++c.tn;
      }
    }
  }
  return counts;
}

MacroMetrics macro_metrics(const ConfusionCounts& counts) {
  MacroMetrics m;
  for (const ClassCounts& c : counts.per_class) {
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn);
    const double fn = static_cast<double>(c.fn);
    const double pre = ratio(tp, tp + fp);
    const double rec = ratio(tp, tp + fn);
    m.accuracy += ratio(tp + tn, tp + tn + fp + fn);
    m.precision += pre;
    m.recall += rec;
    m.f1 += ratio(2.0 * pre * rec, pre + rec);
  }
  const double scale = 100.0 / static_cast<double>(counts.per_class.size());
  m.accuracy *= scale;
  m.precision *= scale;
  m.recall *= scale;
  m.f1 *= scale;
  return m;
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

nlohmann::json MacroMetrics::to_json() const {
  return {{"accuracy", round2(accuracy)},
          {"precision", round2(precision)},
          {"recall", round2(recall)},
          {"f1", round2(f1)},
          {"averaging", "macro"},
          {"zero_division", 0}};
}

}  // namespace spanqa
