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

#include "spanqa/encoder.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "spanqa/error.hpp"

namespace spanqa {
namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

void EncoderBackend::accumulate_gradient(const MixedReport&,
                                         const CharEmbeddings&,
                                         std::span<double>) const {}

BaselineBackend::BaselineBackend(const BaselineConfig& config)
    : config_(config), table_(config.buckets * config.dim) {
  if (config.dim < 1) throw ValidationError("encoder dimension must be >= 1");
  if (config.buckets < 1) throw ValidationError("bucket count must be >= 1");
  std::mt19937_64 rng(config.seed);
  for (double& w : table_) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    w = -0.1 + 0.2 * u;
  }
}

std::size_t BaselineBackend::bucket(char32_t c) const {
  return static_cast<std::size_t>(mix64(c) % config_.buckets);
}

CharEmbeddings BaselineBackend::encode(const MixedReport& mixed) const {
  const std::size_t m = mixed.size();
  const std::size_t d = config_.dim;
  std::vector<std::size_t> rows(m);
  for (std::size_t i = 0; i < m; ++i) rows[i] = bucket(mixed.chars[i]);

  CharEmbeddings h = CharEmbeddings::Zero(static_cast<Eigen::Index>(m),
                                          static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i >= config_.window ? i - config_.window : 0;
    const std::size_t hi = std::min(m - 1, i + config_.window);
    auto out = h.row(static_cast<Eigen::Index>(i));
    for (std::size_t k = lo; k <= hi; ++k) {
      out += Eigen::Map<const Eigen::RowVectorXd>(&table_[rows[k] * d],
                                                  static_cast<Eigen::Index>(d));
    }
    out /= static_cast<double>(hi - lo + 1);
  }
  return h;
}

void BaselineBackend::accumulate_gradient(const MixedReport& mixed,
                                          const CharEmbeddings& grad_h,
                                          std::span<double> grad) const {
  const std::size_t m = mixed.size();
  const std::size_t d = config_.dim;
  if (static_cast<std::size_t>(grad_h.rows()) != m ||
      static_cast<std::size_t>(grad_h.cols()) != d) {
    throw ValidationError("gradient shape does not match report '" +
                          mixed.report_id + "'");
  }
  for (std::size_t i = 0; i < m; ++i) {
    const auto g = grad_h.row(static_cast<Eigen::Index>(i));
    if (g.isZero(0.0)) continue;
    const std::size_t lo = i >= config_.window ? i - config_.window : 0;
    const std::size_t hi = std::min(m - 1, i + config_.window);
    const double share = 1.0 / static_cast<double>(hi - lo + 1);
    for (std::size_t k = lo; k <= hi; ++k) {
      Eigen::Map<Eigen::RowVectorXd>(&grad[bucket(mixed.chars[k]) * d],
                                     static_cast<Eigen::Index>(d)) +=
          share * g;
    }
  }
}

nlohmann::json BaselineBackend::to_json() const {
  return {{"name", name()},
          {"dim", config_.dim},
          {"window", config_.window},
          {"buckets", config_.buckets},
          {"seed", config_.seed},
          {"table", table_}};
}

std::unique_ptr<BaselineBackend> BaselineBackend::from_json(
    const nlohmann::json& j) {
  BaselineConfig config;
  config.dim = j.at("dim").get<std::size_t>();
  config.window = j.at("window").get<std::size_t>();
  config.buckets = j.at("buckets").get<std::size_t>();
  config.seed = j.at("seed").get<std::uint64_t>();
  auto backend = std::make_unique<BaselineBackend>(config);
  auto table = j.at("table").get<std::vector<double>>();
  if (table.size() != backend->table_.size()) {
    throw ValidationError("baseline table has " + std::to_string(table.size()) +
                          " entries, expected " +
                          std::to_string(backend->table_.size()));
  }
  backend->table_ = std::move(table);
  return backend;
}

std::unique_ptr<EncoderBackend> BaselineBackend::clone() const {
  return std::make_unique<BaselineBackend>(*this);
}

ExternalBackend::ExternalBackend(
    std::size_t dim, std::unordered_map<std::string, CharEmbeddings> rows)
    : dim_(dim),
      rows_(std::make_shared<const std::unordered_map<std::string, CharEmbeddings>>(
          std::move(rows))) {}

std::unique_ptr<ExternalBackend> ExternalBackend::read(std::istream& in) {
  std::optional<std::size_t> dim;
  std::unordered_map<std::string, CharEmbeddings> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    if (!dim) {
      if (!record.contains("dim")) {
        throw ParseError("first record must declare \"dim\"", lineno);
      }
      dim = record.at("dim").get<std::size_t>();
      if (*dim < 1) throw ValidationError("embedding dimension must be >= 1");
      continue;
    }
    const auto id = record.at("report_id").get<std::string>();
    const auto& matrix = record.at("rows");
    CharEmbeddings h(static_cast<Eigen::Index>(matrix.size()),
                     static_cast<Eigen::Index>(*dim));
    for (std::size_t r = 0; r < matrix.size(); ++r) {
      if (matrix[r].size() != *dim) {
        throw ValidationError("embeddings for report '" + id + "': row " +
                              std::to_string(r) + " has " +
                              std::to_string(matrix[r].size()) +
                              " values, expected " + std::to_string(*dim));
      }
      for (std::size_t c = 0; c < *dim; ++c) {
        const double v = matrix[r][c].get<double>();
        if (!std::isfinite(v)) {
          throw ValidationError("embeddings for report '" + id +
                                "' contain a non-finite value");
        }
        h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      }
    }
    if (!rows.emplace(id, std::move(h)).second) {
      throw ValidationError("duplicate embeddings for report '" + id + "'");
    }
  }
  if (!dim) throw ParseError("embeddings file has no header record");
  return std::make_unique<ExternalBackend>(*dim, std::move(rows));
}

std::unique_ptr<ExternalBackend> ExternalBackend::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read(in);
}

CharEmbeddings ExternalBackend::encode(const MixedReport& mixed) const {
  auto it = rows_->find(mixed.report_id);
  if (it == rows_->end()) {
    throw ValidationError("no embeddings for report '" + mixed.report_id + "'");
  }
  if (static_cast<std::size_t>(it->second.rows()) != mixed.size()) {
    throw ValidationError("embeddings for report '" + mixed.report_id +
                          "' have " + std::to_string(it->second.rows()) +
                          " rows but the mixed report has " +
                          std::to_string(mixed.size()) + " characters");
  }
  return it->second;
}

nlohmann::json ExternalBackend::to_json() const {
  return {{"name", name()}, {"dim", dim_}};
}

std::unique_ptr<EncoderBackend> ExternalBackend::clone() const {
  return std::make_unique<ExternalBackend>(*this);
}

std::unique_ptr<BaselineBackend> baseline_backend(std::size_t dim,
                                                  std::size_t window,
                                                  std::uint64_t seed,
                                                  std::size_t buckets) {
  return std::make_unique<BaselineBackend>(
      BaselineConfig{dim, window, buckets, seed});
}

std::unique_ptr<ExternalBackend> external_backend(const std::string& path) {
  return ExternalBackend::load(path);
}

SpanEmbedding pool_span(const CharEmbeddings& h, const IndexRange& range) {
  if (range.begin >= range.end) throw ValidationError("cannot pool an empty span");
  if (range.end > static_cast<std::size_t>(h.rows())) {
    throw ValidationError("span [" + std::to_string(range.begin) + ", " +
                          std::to_string(range.end) + ") exceeds " +
                          std::to_string(h.rows()) + " embedding rows");
  }
  SpanEmbedding sum = SpanEmbedding::Zero(h.cols());
  for (std::size_t i = range.begin; i < range.end; ++i) {
    sum += h.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return sum / static_cast<double>(range.size());
}

void accumulate_pool_gradient(const IndexRange& range,
                              const SpanEmbedding& d_span,
                              CharEmbeddings& grad_h) {
  const double share = 1.0 / static_cast<double>(range.size());
  for (std::size_t i = range.begin; i < range.end; ++i) {
    grad_h.row(static_cast<Eigen::Index>(i)) += share * d_span.transpose();
  }
}

}  // namespace spanqa
