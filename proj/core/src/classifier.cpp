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

#include "spanqa/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "spanqa/error.hpp"

namespace spanqa {
namespace {

using Eigen::Index;
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;
using MutRowMajorMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>;

std::size_t parameter_count(std::size_t dim, std::size_t hidden) {
  return hidden == 0 ? dim + 1 : hidden * dim + 2 * hidden + 1;
}

double sigmoid(double x) {
  const double p = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                            : std::exp(x) / (1.0 + std::exp(x));
  return std::clamp(p, std::numeric_limits<double>::min(),
                    std::nextafter(1.0, 0.0));
}

}  // namespace

SpanClassifier::SpanClassifier(std::size_t dim, std::size_t hidden)
    : dim_(dim), hidden_(hidden), params_(parameter_count(dim, hidden), 0.0) {
  if (dim < 1) throw ValidationError("classifier input dimension must be >= 1");
}

SpanClassifier SpanClassifier::random(std::size_t dim, std::size_t hidden,
                                      std::uint64_t seed) {
  SpanClassifier clf(dim, hidden);
  std::mt19937_64 rng(seed);
  const auto uniform = [&](double bound) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return bound * (2.0 * u - 1.0);
  };
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(dim));
  if (hidden == 0) {
    for (std::size_t i = 0; i < dim; ++i) clf.params_[i] = uniform(in_bound);
    return clf;
  }
  const double out_bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  const std::size_t w1 = hidden * dim;
  for (std::size_t i = 0; i < w1; ++i) clf.params_[i] = uniform(in_bound);
  for (std::size_t i = 0; i < hidden; ++i) {
    clf.params_[w1 + hidden + i] = uniform(out_bound);
  }
  return clf;
}

ClassifierTrace SpanClassifier::forward(const SpanEmbedding& s) const {
  if (static_cast<std::size_t>(s.size()) != dim_) {
    throw ValidationError("span embedding has dimension " +
                          std::to_string(s.size()) + ", classifier expects " +
                          std::to_string(dim_));
  }
  ClassifierTrace trace;
  const double* p = params_.data();
  const Index d = static_cast<Index>(dim_);
  if (hidden_ == 0) {
    trace.logit = Eigen::Map<const Eigen::VectorXd>(p, d).dot(s) + p[dim_];
  } else {
    const Index h = static_cast<Index>(hidden_);
    RowMajorMap w1(p, h, d);
    Eigen::Map<const Eigen::VectorXd> b1(p + hidden_ * dim_, h);
    Eigen::Map<const Eigen::VectorXd> w2(p + hidden_ * dim_ + hidden_, h);
    const double b2 = p[hidden_ * dim_ + 2 * hidden_];
    trace.hidden = (w1 * s + b1).array().tanh().matrix();
    trace.logit = w2.dot(trace.hidden) + b2;
  }
  trace.score = sigmoid(trace.logit);
  return trace;
}

double SpanClassifier::score(const SpanEmbedding& s) const {
  return forward(s).score;
}

SpanEmbedding SpanClassifier::backward(const SpanEmbedding& s,
                                       const ClassifierTrace& trace,
                                       double d_logit,
                                       std::span<double> grad) const {
  const double* p = params_.data();
  double* g = grad.data();
  const Index d = static_cast<Index>(dim_);
  if (hidden_ == 0) {
    Eigen::Map<Eigen::VectorXd>(g, d) += d_logit * s;
    g[dim_] += d_logit;
    return d_logit * Eigen::Map<const Eigen::VectorXd>(p, d);
  }
  const Index h = static_cast<Index>(hidden_);
  const std::size_t b1_at = hidden_ * dim_;
  const std::size_t w2_at = b1_at + hidden_;
  Eigen::Map<const Eigen::VectorXd> w2(p + w2_at, h);

  Eigen::Map<Eigen::VectorXd>(g + w2_at, h) += d_logit * trace.hidden;
  g[w2_at + hidden_] += d_logit;
  const Eigen::VectorXd dz =
      (d_logit * w2.array() * (1.0 - trace.hidden.array().square())).matrix();
  MutRowMajorMap(g, h, d) += dz * s.transpose();
  Eigen::Map<Eigen::VectorXd>(g + b1_at, h) += dz;
  return RowMajorMap(p, h, d).transpose() * dz;
}

nlohmann::json SpanClassifier::to_json() const {
  return {{"dim", dim_}, {"hidden", hidden_}, {"params", params_}};
}

SpanClassifier SpanClassifier::from_json(const nlohmann::json& j) {
  SpanClassifier clf(j.at("dim").get<std::size_t>(),
                     j.at("hidden").get<std::size_t>());
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != clf.params_.size()) {
    throw ValidationError("classifier has " + std::to_string(params.size()) +
                          " parameters, expected " +
                          std::to_string(clf.params_.size()));
  }
  clf.params_ = std::move(params);
  return clf;
}

double span_loss(double score, double label) {
  const double p = std::clamp(score, kLossClamp, 1.0 - kLossClamp);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

double span_loss_grad_logit(double score, double label) {
  if (score < kLossClamp || score > 1.0 - kLossClamp) return 0.0;
  return score - label;
}

Adam::Adam(std::size_t n, const AdamConfig& config)
    : config_(config), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ValidationError("optimizer state does not match parameter count");
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.lr;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
  }
}

std::size_t otsu_bin(double score) {
  constexpr double kBins = static_cast<double>(kOtsuBins);
  if (!(score * kBins > 1.0)) return 0;
  const double k = std::ceil(score * kBins) - 1.0;
  return std::min(static_cast<std::size_t>(k), kOtsuBins - 1);
}

DecisionThreshold otsu_threshold(std::span<const double> scores) {
  if (scores.size() < 2) {
    throw ValidationError("Otsu threshold needs at least two scores");
  }
  std::array<std::uint64_t, kOtsuBins> counts{};
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("non-finite score");
    ++counts[otsu_bin(s)];
  }

  using u128 = unsigned __int128;
  using i128 = __int128;
  // Between-class variance at cut k, up to the constant 1/N^2, is
  // (n1*S0 - n0*S1)^2 / (n0*n1) with S the sums of bin indices. Candidates
  // are compared as exact rationals.
  std::int64_t total_n = 0;
  i128 total_s = 0;
  for (std::size_t b = 0; b < kOtsuBins; ++b) {
    total_n += static_cast<std::int64_t>(counts[b]);
    total_s += static_cast<i128>(b) * counts[b];
  }
  std::optional<std::size_t> best;
  u128 best_num = 0;
  u128 best_den = 1;
  std::int64_t n0 = 0;
  i128 s0 = 0;
  for (std::size_t k = 1; k < kOtsuBins; ++k) {
    n0 += static_cast<std::int64_t>(counts[k - 1]);
    s0 += static_cast<i128>(k - 1) * counts[k - 1];
    const std::int64_t n1 = total_n - n0;
    if (n0 == 0 || n1 == 0) continue;
    const i128 a = static_cast<i128>(n1) * s0 - static_cast<i128>(n0) * (total_s - s0);
    const u128 mag = static_cast<u128>(a < 0 ? -a : a);
    const u128 num = mag * mag;
    const u128 den = static_cast<u128>(n0) * static_cast<u128>(n1);
    bool better = !best.has_value();
    if (!better) {
      // num/den > best_num/best_den, via quotient then remainder.
      const u128 q = num / den;
      const u128 bq = best_num / best_den;
      if (q != bq) {
        better = q > bq;
      } else {
        better = (num % den) * best_den > (best_num % best_den) * den;
      }
    }
    if (better) {
      best = k;
      best_num = num;
      best_den = den;
    }
  }
  if (!best) {
    throw ValidationError("all scores fall in one histogram bin; no separating threshold");
  }
  return {static_cast<double>(*best) / static_cast<double>(kOtsuBins)};
}

}  // namespace spanqa
