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

#include "spanqa/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "spanqa/diffmerge.hpp"
#include "spanqa/error.hpp"
#include "spanqa/text.hpp"

namespace spanqa {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

json parse_line(const std::string& line, std::size_t lineno) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
  }
  if (!record.is_object()) throw ParseError("record is not an object", lineno);
  return record;
}

std::string required_string(const json& record, const char* key,
                            std::size_t lineno) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(std::string("missing field '") + key + "'", lineno);
  }
  if (!it->is_string()) {
    throw ParseError(std::string("field '") + key + "' is not a string",
                     lineno);
  }
  return it->get<std::string>();
}

int binary_label(const json& value, std::size_t lineno) {
  if (!value.is_number_integer() ||
      (value.get<long long>() != 0 && value.get<long long>() != 1)) {
    throw ParseError("label must be 0 or 1, got " + value.dump(), lineno);
  }
  return value.get<int>();
}

}  // namespace

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(),
                    [&](const ReportPair& p) { return p.label == label; }));
}

std::size_t Dataset::count_unlabeled() const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(),
                    [](const ReportPair& p) { return !p.label; }));
}

const ReportPair* Dataset::find(const std::string& id) const {
  auto it = std::find_if(pairs.begin(), pairs.end(),
                         [&](const ReportPair& p) { return p.id == id; });
  return it == pairs.end() ? nullptr : &*it;
}

void validate(const ReportPair& pair) {
  if (pair.junior.empty()) {
    throw ValidationError("report '" + pair.id + "': junior text is empty");
  }
  if (pair.senior.empty()) {
    throw ValidationError("report '" + pair.id + "': senior text is empty");
  }
  if (pair.label && *pair.label != 0 && *pair.label != 1) {
    throw ValidationError("report '" + pair.id + "': label must be 0 or 1");
  }
}

void validate(const Dataset& dataset) {
  std::set<std::string> seen;
  for (const ReportPair& pair : dataset.pairs) {
    validate(pair);
    if (!seen.insert(pair.id).second) {
      throw ValidationError("duplicate report id '" + pair.id + "'");
    }
  }
}

Dataset read_report_pairs(std::istream& in) {
  Dataset dataset;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json record = parse_line(line, lineno);
    if (first && record.contains("_meta")) {
      first = false;
      continue;
    }
    first = false;

    ReportPair pair;
    pair.id = required_string(record, "id", lineno);
    try {
      pair.junior = normalize_nfc(required_string(record, "junior", lineno));
      pair.senior = normalize_nfc(required_string(record, "senior", lineno));
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(e.what(), lineno);
    }
    if (auto it = record.find("label"); it != record.end() && !it->is_null()) {
      pair.label = binary_label(*it, lineno);
    }
    if (auto it = record.find("section"); it != record.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError("section is not a string", lineno);
      pair.section = it->get<std::string>();
    }
    try {
      validate(pair);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!seen.insert(pair.id).second) {
      throw ValidationError("line " + std::to_string(lineno) +
                            ": duplicate report id '" + pair.id + "'");
    }
    dataset.pairs.push_back(std::move(pair));
  }
  return dataset;
}

Dataset load_report_pairs(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_report_pairs(in);
}

void write_report_pairs(std::ostream& out, const Dataset& dataset) {
  for (const ReportPair& pair : dataset.pairs) {
    nlohmann::ordered_json record;
    record["id"] = pair.id;
    record["junior"] = pair.junior;
    record["senior"] = pair.senior;
    record["label"] = pair.label ? json(*pair.label) : json(nullptr);
    record["section"] = pair.section ? json(*pair.section) : json(nullptr);
    out << record.dump() << '\n';
  }
}

SpanLabelSet read_span_labels(std::istream& in, const Dataset& dataset) {
  SpanLabelSet labels;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json record = parse_line(line, lineno);
    if (first && record.contains("_meta")) {
      first = false;
      continue;
    }
    first = false;

    SpanLabelRecord rec;
    rec.report_id = required_string(record, "report_id", lineno);
    auto it = record.find("span_labels");
    if (it == record.end() || !it->is_array()) {
      throw ParseError("missing array field 'span_labels'", lineno);
    }
    for (const json& v : *it) rec.span_labels.push_back(binary_label(v, lineno));

    const ReportPair* pair = dataset.find(rec.report_id);
    if (pair == nullptr) {
      throw ValidationError("line " + std::to_string(lineno) +
                            ": unknown report id '" + rec.report_id + "'");
    }
    const std::size_t spans = merge_reports(*pair).spans.size();
    if (spans != rec.span_labels.size()) {
      throw ValidationError("report '" + rec.report_id + "': " +
                            std::to_string(rec.span_labels.size()) +
                            " span labels but merge yields " +
                            std::to_string(spans) + " spans");
    }
    if (labels.contains(rec.report_id)) {
      throw ValidationError("line " + std::to_string(lineno) +
                            ": duplicate span labels for '" + rec.report_id +
                            "'");
    }
    labels.emplace(rec.report_id, std::move(rec));
  }
  return labels;
}

SpanLabelSet load_span_labels(const std::string& path, const Dataset& dataset) {
  std::ifstream in = open_input(path);
  return read_span_labels(in, dataset);
}

void write_span_labels(std::ostream& out, const SpanLabelSet& labels) {
  for (const auto& [id, rec] : labels) {
    nlohmann::ordered_json record;
    record["report_id"] = rec.report_id;
    record["span_labels"] = rec.span_labels;
    out << record.dump() << '\n';
  }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset,
                                          double test_fraction,
                                          std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test_fraction must lie in (0, 1)");
  }
  const std::size_t n = dataset.size();
  if (n < 2) throw ValidationError("cannot split fewer than 2 reports");

  // Strata: unqualified, qualified, unlabeled.
  std::array<std::vector<std::size_t>, 3> strata;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& label = dataset.pairs[i].label;
    strata[label ? static_cast<std::size_t>(*label) : 2].push_back(i);
  }

  std::size_t total = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  total = std::clamp<std::size_t>(total, 1, n - 1);

  // Largest-remainder apportionment of the test quota.
  std::array<std::size_t, 3> quota{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < strata.size(); ++k) {
    const double exact = static_cast<double>(total) *
                         static_cast<double>(strata[k].size()) /
                         static_cast<double>(n);
    quota[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - std::floor(exact);
    assigned += quota[k];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    const std::size_t s = order[k];
    if (quota[s] < strata[s].size()) {
      ++quota[s];
      ++assigned;
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<bool> in_test(n, false);
  for (std::size_t k = 0; k < strata.size(); ++k) {
    std::vector<std::size_t> shuffled = strata[k];
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::size_t q = 0; q < quota[k]; ++q) in_test[shuffled[q]] = true;
  }

  Dataset train{{}, dataset.provenance};
  Dataset test{{}, dataset.provenance};
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? test : train).pairs.push_back(dataset.pairs[i]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace spanqa
