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

#ifndef SPANQA_CLASSIFIER_HPP_
#define SPANQA_CLASSIFIER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "spanqa/encoder.hpp"

namespace spanqa {

// Intermediate values of one forward pass, kept for the backward pass.
struct ClassifierTrace {
  Eigen::VectorXd hidden;  // tanh activations (empty when hidden == 0)
  double logit = 0.0;
  double score = 0.5;
};

// Feed-forward span scorer: d -> tanh(h) -> 1 -> sigmoid. hidden == 0
// degenerates to logistic regression on the span embedding.
//
// Parameter layout (flat): W1 (h x d, row-major), b1 (h), w2 (h), b2.
// Linear variant: w (d), b.
class SpanClassifier {
 public:
  // All-zero parameters.
  SpanClassifier(std::size_t dim, std::size_t hidden);
  // Seeded uniform init, W1 ~ U(-1/sqrt(d), 1/sqrt(d)),
  // w2 ~ U(-1/sqrt(h), 1/sqrt(h)), biases zero.
  static SpanClassifier random(std::size_t dim, std::size_t hidden,
                               std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  std::size_t hidden() const { return hidden_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // Score in the open interval (0, 1). Throws ValidationError when the
  // embedding has the wrong dimension.
  double score(const SpanEmbedding& s) const;
  ClassifierTrace forward(const SpanEmbedding& s) const;

  // grad += d_logit * dlogit/dW; returns d_logit * dlogit/ds.
  SpanEmbedding backward(const SpanEmbedding& s, const ClassifierTrace& trace,
                         double d_logit, std::span<double> grad) const;

  nlohmann::json to_json() const;
  static SpanClassifier from_json(const nlohmann::json& j);

  bool operator==(const SpanClassifier&) const = default;

 private:
  std::size_t dim_;
  std::size_t hidden_;
  std::vector<double> params_;
};

// Scores are clipped to [kLossClamp, 1 - kLossClamp] inside the loss.
inline constexpr double kLossClamp = 1e-7;

// Binary cross-entropy; label may be soft (in [0, 1]).
double span_loss(double score, double label);
// d span_loss / d logit, where score = sigmoid(logit). Zero when clipped.
double span_loss_grad_logit(double score, double label);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t n, const AdamConfig& config);
  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

// Otsu thresholding over a fixed 256-bin histogram of [0, 1]. Bin 0 holds
// [0, 1/256]; bin k >= 1 holds (k/256, (k+1)/256]. A cut at k separates
// scores <= k/256 from scores > k/256, matching the strict verdict rule.
inline constexpr std::size_t kOtsuBins = 256;

struct DecisionThreshold {
  double tau = 0.5;
  bool operator==(const DecisionThreshold&) const = default;
};

std::size_t otsu_bin(double score);

// Cut maximizing between-class variance; ties go to the lowest cut. Throws
// ValidationError with fewer than two scores or when every score falls in
// one bin (callers fall back to kFallbackThreshold).
DecisionThreshold otsu_threshold(std::span<const double> scores);

inline constexpr double kFallbackThreshold = 0.5;

}  // namespace spanqa

#endif  // SPANQA_CLASSIFIER_HPP_
