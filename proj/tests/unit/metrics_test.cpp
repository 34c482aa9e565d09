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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "spanqa/error.hpp"
#include "spanqa/metrics.hpp"

using namespace spanqa;

namespace {

struct OracleMetrics {
  double acc, pre, rec, f1;
};

// Per-class metrics from the raw vectors, averaged over the two classes.
OracleMetrics oracle(const std::vector<int>& p, const std::vector<int>& g) {
  OracleMetrics m{0, 0, 0, 0};
  for (int cls = 0; cls < 2; ++cls) {
    double tp = 0, pp = 0, gp = 0, agree = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      tp += p[i] == cls && g[i] == cls;
      pp += p[i] == cls;
      gp += g[i] == cls;
      agree += (p[i] == cls) == (g[i] == cls);
    }
    const double pre = pp > 0 ? tp / pp : 0.0;
    const double rec = gp > 0 ? tp / gp : 0.0;
    m.acc += 50.0 * agree / static_cast<double>(p.size());
    m.pre += 50.0 * pre;
    m.rec += 50.0 * rec;
    m.f1 += pre + rec > 0 ? 50.0 * 2.0 * pre * rec / (pre + rec) : 0.0;
  }
  return m;
}

std::vector<int> flip(std::vector<int> v) {
  for (int& x : v) x = 1 - x;
  return v;
}

}  // namespace

TEST_CASE("perfect predictions") {
  const std::vector<int> y{1, 0, 1};
  const ConfusionCounts c = confusion(y, y);
  for (const ClassCounts& k : c.per_class) {
    CHECK(k.fp == 0);
    CHECK(k.fn == 0);
  }
  CHECK(c.per_class[1].tp == 2);
  CHECK(c.per_class[0].tp == 1);
  CHECK(c.total() == 3);
  const MacroMetrics m = macro_metrics(c);
  CHECK(m.accuracy == 100.0);
  CHECK(m.precision == 100.0);
  CHECK(m.recall == 100.0);
  CHECK(m.f1 == 100.0);
}

TEST_CASE("complementary predictions") {
  const std::vector<int> y{1, 0, 1, 1};
  const ConfusionCounts c = confusion(flip(y), y);
  for (const ClassCounts& k : c.per_class) {
    CHECK(k.tp == 0);
    CHECK(k.tn == 0);
  }
  CHECK(macro_metrics(c).f1 == 0.0);
}

TEST_CASE("constant predictor on an imbalanced set") {
  // 8 qualified, 2 unqualified, all predicted qualified. Closed form:
  // class 1: P = 0.8, R = 1, F1 = 8/9; class 0: P = R = F1 = 0.
  std::vector<int> gold(8, 1);
  gold.push_back(0);
  gold.push_back(0);
  const std::vector<int> pred(10, 1);
  const MacroMetrics m = macro_metrics(confusion(pred, gold));
  CHECK(m.accuracy == doctest::Approx(80.0));
  CHECK(m.precision == doctest::Approx(40.0));
  CHECK(m.recall == 50.0);
  CHECK(m.f1 == doctest::Approx(100.0 * 4.0 / 9.0));
  CHECK(m.f1 < 50.0);
}

TEST_CASE("metrics agree with the oracle and are class-symmetric") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<int> p(n), g(n);
    const std::uint64_t bias = rng() % 10;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng() % 10 < bias ? 1 : 0;
      g[i] = rng() % 10 < bias ? 1 : 0;
    }
    const MacroMetrics m = macro_metrics(confusion(p, g));
    const OracleMetrics o = oracle(p, g);
    REQUIRE(std::abs(m.accuracy - o.acc) < 1e-9);
    REQUIRE(std::abs(m.precision - o.pre) < 1e-9);
    REQUIRE(std::abs(m.recall - o.rec) < 1e-9);
    REQUIRE(std::abs(m.f1 - o.f1) < 1e-9);
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 100.0);
    }
    const MacroMetrics s = macro_metrics(confusion(flip(p), flip(g)));
    REQUIRE(std::abs(s.accuracy - m.accuracy) < 1e-12);
    REQUIRE(std::abs(s.precision - m.precision) < 1e-12);
    REQUIRE(std::abs(s.recall - m.recall) < 1e-12);
    REQUIRE(std::abs(s.f1 - m.f1) < 1e-12);
    // Constant predictor: macro recall is exactly 50 when both classes occur.
    const bool both = std::find(g.begin(), g.end(), 0) != g.end() &&
                      std::find(g.begin(), g.end(), 1) != g.end();
    if (both) {
      REQUIRE(macro_metrics(confusion(std::vector<int>(n, 1), g)).recall == 50.0);
    }
  }
}

TEST_CASE("confusion preconditions") {
  CHECK_THROWS_AS(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), ValidationError);
  CHECK_THROWS_AS(confusion(std::vector<int>{}, std::vector<int>{}), ValidationError);
  CHECK_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{1}), ValidationError);
}

TEST_CASE("json rounds to two decimals") {
  MacroMetrics m;
  m.accuracy = 92.3349;
  m.f1 = 100.0 * 4.0 / 9.0;
  const nlohmann::json j = m.to_json();
  CHECK(j.at("accuracy") == 92.33);
  CHECK(j.at("f1") == 44.44);
  CHECK(j.at("averaging") == "macro");
  CHECK(j.at("zero_division") == 0);
  CHECK(round2(0.125) == 0.13);
}
