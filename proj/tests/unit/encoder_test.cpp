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
#include <random>
#include <sstream>

#include "doctest.h"
#include "spanqa/diffmerge.hpp"
#include "spanqa/encoder.hpp"
#include "spanqa/error.hpp"
#include "test_support.hpp"

using namespace spanqa;

namespace {

// Row i is the mean of the table rows of chars[i-w .. i+w], clipped.
CharEmbeddings oracle_encode(const BaselineBackend& backend, const CharSeq& chars) {
  const std::size_t d = backend.dim();
  const std::size_t w = backend.config().window;
  const auto table = backend.parameters();
  CharEmbeddings h(static_cast<Eigen::Index>(chars.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const std::size_t lo = i >= w ? i - w : 0;
    const std::size_t hi = std::min(chars.size() - 1, i + w);
    for (std::size_t c = 0; c < d; ++c) {
      double sum = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) sum += table[backend.bucket(chars[k]) * d + c];
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          sum / static_cast<double>(hi - lo + 1);
    }
  }
  return h;
}

MixedReport mixed_of(const CharSeq& text) { return merge("m", text, text); }

}  // namespace

TEST_CASE("shape and determinism") {
  auto backend = baseline_backend(8, 2, 1);
  const CharEmbeddings one = backend->encode(mixed_of(U"肺"));
  CHECK(one.rows() == 1);
  CHECK(one.cols() == 8);
  const MixedReport m = merge("r", U"左肺下叶见结节", U"双肺下叶见结节影");
  const CharEmbeddings a = backend->encode(m);
  CHECK(a.rows() == static_cast<Eigen::Index>(m.size()));
  CHECK(a == backend->encode(m));
  CHECK(a.allFinite());
}

TEST_CASE("baseline encode matches an independent oracle") {
  std::mt19937_64 rng(2);
  const CharSeq alphabet = U"左右双肺叶未见结节影abcxyz";
  for (std::size_t window : {0u, 1u, 2u, 5u}) {
    auto backend = baseline_backend(5, window, 3, 64);
    for (int t = 0; t < 50; ++t) {
      CharSeq text = testing::random_seq(rng, 20, alphabet);
      if (text.empty()) text = U"a";
      const CharEmbeddings h = backend->encode(mixed_of(text));
      REQUIRE((h - oracle_encode(*backend, text)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("window zero is position independent") {
  auto backend = baseline_backend(6, 0, 4);
  const CharEmbeddings a = backend->encode(mixed_of(U"左肺见结节"));
  const CharEmbeddings b = backend->encode(mixed_of(U"双侧胸腔积液结"));
  CHECK(a.row(3) == b.row(6));  // 结
  // All-distinct characters: rows are table lookups.
  const auto table = backend->parameters();
  for (Eigen::Index c = 0; c < 6; ++c) {
    CHECK(a(0, c) == table[backend->bucket(U'左') * 6 + static_cast<std::size_t>(c)]);
  }
}

TEST_CASE("initial table is seeded and bounded") {
  auto a = baseline_backend(16, 2, 0);
  auto b = baseline_backend(16, 2, 0);
  auto c = baseline_backend(16, 2, 1);
  CHECK(std::equal(a->parameters().begin(), a->parameters().end(), b->parameters().begin()));
  CHECK_FALSE(std::equal(a->parameters().begin(), a->parameters().end(),
                         c->parameters().begin()));
  CHECK(a->parameters().size() == 4096 * 16);
  for (double v : a->parameters()) REQUIRE(std::abs(v) < 0.1);
  CHECK(a->trainable());
}

TEST_CASE("pool_span examples") {
  CharEmbeddings h(3, 2);
  h << 1, 2, 3, 4, 3, 4;
  CHECK(pool_span(h, {0, 1}) == Eigen::Vector2d(1, 2));
  CHECK(pool_span(h, {1, 3}) == Eigen::Vector2d(3, 4));
  CHECK(pool_span(h, {0, 2}) == Eigen::Vector2d(2, 3));
  CHECK_THROWS_AS(pool_span(h, {1, 1}), ValidationError);
  CHECK_THROWS_AS(pool_span(h, {2, 4}), ValidationError);
}

TEST_CASE("pool_span agrees with naive summation and is linear") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 500; ++t) {
    const std::size_t m = 1 + rng() % 30;
    const std::size_t d = 1 + rng() % 10;
    CharEmbeddings h(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = u(rng);
    const std::size_t b = rng() % m;
    const std::size_t e = b + 1 + rng() % (m - b);
    const SpanEmbedding s = pool_span(h, {b, e});
    for (std::size_t c = 0; c < d; ++c) {
      double sum = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        sum += h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      }
      REQUIRE(std::abs(s[static_cast<Eigen::Index>(c)] - sum / static_cast<double>(e - b)) < 1e-12);
    }
    const double alpha = u(rng);
    const CharEmbeddings scaled = alpha * h;
    REQUIRE((pool_span(scaled, {b, e}) - alpha * s).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pool gradient spreads evenly over the span") {
  CharEmbeddings grad = CharEmbeddings::Zero(4, 2);
  accumulate_pool_gradient({1, 3}, Eigen::Vector2d(2, -4), grad);
  CHECK(grad(0, 0) == 0.0);
  CHECK(grad(1, 0) == 1.0);
  CHECK(grad(2, 1) == -2.0);
  CHECK(grad(3, 1) == 0.0);
}

TEST_CASE("baseline gradient matches central differences") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto backend = baseline_backend(3, 2, 5, 16);
  const MixedReport m = merge("g", U"左肺下叶见结节影", U"双肺下叶未见结节");
  const Eigen::Index rows = static_cast<Eigen::Index>(m.size());
  // Nonlinear probe: f(H) = sum_ik sin(H_ik) * c_ik
  CharEmbeddings c(rows, 3);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
  auto f = [&](const BaselineBackend& b) {
    return (b.encode(m).array().sin() * c.array()).sum();
  };
  const CharEmbeddings grad_h = (backend->encode(m).array().cos() * c.array()).matrix();
  std::vector<double> grad(backend->parameters().size(), 0.0);
  backend->accumulate_gradient(m, grad_h, grad);
  const double eps = 1e-6;
  auto params = backend->parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + eps;
    const double up = f(*backend);
    params[p] = saved - eps;
    const double down = f(*backend);
    params[p] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    REQUIRE(std::abs(numeric - grad[p]) <= 1e-4 * std::max(std::abs(numeric), 1e-6));
  }
}

TEST_CASE("baseline json round trip") {
  auto backend = baseline_backend(4, 1, 9, 32);
  auto back = BaselineBackend::from_json(backend->to_json());
  const MixedReport m = mixed_of(U"双肺纹理");
  CHECK(back->encode(m) == backend->encode(m));
  CHECK(back->config().window == 1);
  auto clone = backend->clone();
  CHECK(clone->encode(m) == backend->encode(m));
}

TEST_CASE("external backend") {
  const MixedReport m = merge("r1", U"左肺", U"双肺");  // 3 mixed chars
  const std::string good =
      "{\"dim\":2}\n"
      "{\"report_id\":\"r1\",\"rows\":[[0.1,0.2],[0.3,0.4],[0.5,0.6]]}\n";
  std::istringstream in(good);
  auto backend = ExternalBackend::read(in);
  CHECK(backend->dim() == 2);
  CHECK_FALSE(backend->trainable());
  const CharEmbeddings h = backend->encode(m);
  CHECK(h(0, 0) == 0.1);
  CHECK(h(2, 1) == 0.6);

  CHECK_THROWS_AS(backend->encode(merge("zz", U"a", U"b")), ValidationError);
  try {
    backend->encode(merge("r1", U"左肺部", U"双肺部"));
    FAIL("expected a row count error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("r1") != std::string::npos);
  }

  std::istringstream bad_dim("{\"dim\":2}\n{\"report_id\":\"r1\",\"rows\":[[0.1]]}\n");
  CHECK_THROWS_AS(ExternalBackend::read(bad_dim), ValidationError);
  std::istringstream no_header("{\"report_id\":\"r1\",\"rows\":[[0.1]]}\n");
  CHECK_THROWS_AS(ExternalBackend::read(no_header), ParseError);
  CHECK_THROWS_AS(external_backend("/nonexistent/emb.jsonl"), IoError);

  testing::TempDir dir("ext");
  testing::write_text(dir.file("emb.jsonl"), good);
  CHECK(external_backend(dir.file("emb.jsonl"))->encode(m) == h);
}
