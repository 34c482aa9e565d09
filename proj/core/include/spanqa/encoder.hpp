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

#ifndef SPANQA_ENCODER_HPP_
#define SPANQA_ENCODER_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "spanqa/diffmerge.hpp"

namespace spanqa {

// One row per mixed-report character.
using CharEmbeddings =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SpanEmbedding = Eigen::VectorXd;

// Produces per-character embeddings for a mixed report. Backends with
// trainable parameters expose them as one flat vector so the optimizer can
// treat encoder and classifier uniformly.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual CharEmbeddings encode(const MixedReport& mixed) const = 0;

  virtual std::span<double> parameters() { return {}; }
  virtual std::span<const double> parameters() const { return {}; }
  bool trainable() const { return !parameters().empty(); }

  // grad += dLoss/dPhi, given grad_h = dLoss/dH for the same report.
  virtual void accumulate_gradient(const MixedReport& mixed,
                                   const CharEmbeddings& grad_h,
                                   std::span<double> grad) const;

  virtual nlohmann::json to_json() const = 0;
  virtual std::unique_ptr<EncoderBackend> clone() const = 0;
};

struct BaselineConfig {
  std::size_t dim = 64;
  std::size_t window = 2;
  std::size_t buckets = 4096;
  std::uint64_t seed = 0;
};

// Hashed character embedding table; row i of H is the mean of the table
// rows of the characters in [i - window, i + window], clipped to the
// report. Collisions between characters sharing a bucket are accepted.
class BaselineBackend final : public EncoderBackend {
 public:
  explicit BaselineBackend(const BaselineConfig& config);

  std::string name() const override { return "baseline"; }
  std::size_t dim() const override { return config_.dim; }
  CharEmbeddings encode(const MixedReport& mixed) const override;

  std::span<double> parameters() override { return table_; }
  std::span<const double> parameters() const override { return table_; }
  void accumulate_gradient(const MixedReport& mixed,
                           const CharEmbeddings& grad_h,
                           std::span<double> grad) const override;

  nlohmann::json to_json() const override;
  static std::unique_ptr<BaselineBackend> from_json(const nlohmann::json& j);
  std::unique_ptr<EncoderBackend> clone() const override;

  const BaselineConfig& config() const { return config_; }
  std::size_t bucket(char32_t c) const;

 private:
  BaselineConfig config_;
  std::vector<double> table_;  // buckets x dim, row-major
};

// Frozen, precomputed embeddings keyed by report id.
class ExternalBackend final : public EncoderBackend {
 public:
  ExternalBackend(std::size_t dim,
                  std::unordered_map<std::string, CharEmbeddings> rows);

  // JSON-Lines: a header {"dim": d} followed by
  // {"report_id": str, "rows": [[...], ...]} records.
  static std::unique_ptr<ExternalBackend> load(const std::string& path);
  static std::unique_ptr<ExternalBackend> read(std::istream& in);

  std::string name() const override { return "external"; }
  std::size_t dim() const override { return dim_; }
  CharEmbeddings encode(const MixedReport& mixed) const override;

  nlohmann::json to_json() const override;
  std::unique_ptr<EncoderBackend> clone() const override;

 private:
  std::size_t dim_;
  std::shared_ptr<const std::unordered_map<std::string, CharEmbeddings>>
      rows_;
};

std::unique_ptr<BaselineBackend> baseline_backend(std::size_t dim,
                                                  std::size_t window,
                                                  std::uint64_t seed,
                                                  std::size_t buckets = 4096);
std::unique_ptr<ExternalBackend> external_backend(const std::string& path);

// Mean of the rows of H in range. Throws ValidationError on an empty or
// out-of-bounds range.
SpanEmbedding pool_span(const CharEmbeddings& h, const IndexRange& range);

// Backward of pool_span: grad_h rows in range += d_span / |range|.
void accumulate_pool_gradient(const IndexRange& range,
                              const SpanEmbedding& d_span,
                              CharEmbeddings& grad_h);

}  // namespace spanqa

#endif  // SPANQA_ENCODER_HPP_
