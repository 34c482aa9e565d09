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

#ifndef SPANQA_CORPUS_HPP_
#define SPANQA_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spanqa {

// A junior draft and its senior revision. Text is NFC-normalized UTF-8.
struct ReportPair {
  std::string id;
  std::string junior;
  std::string senior;
  std::optional<int> label;  // 1 = qualified, 0 = unqualified
  std::optional<std::string> section;

  bool operator==(const ReportPair&) const = default;
};

enum class Provenance { kReal, kSynthetic };

struct Dataset {
  std::vector<ReportPair> pairs;
  Provenance provenance = Provenance::kReal;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  std::size_t count_label(int label) const;
  std::size_t count_unlabeled() const;
  const ReportPair* find(const std::string& id) const;

  bool operator==(const Dataset&) const = default;
};

// Manual span labels for one report, in mixed-report span order.
struct SpanLabelRecord {
  std::string report_id;
  std::vector<int> span_labels;

  bool operator==(const SpanLabelRecord&) const = default;
};

using SpanLabelSet = std::map<std::string, SpanLabelRecord>;

// Checks ReportPair invariants and id uniqueness. Throws ValidationError.
void validate(const ReportPair& pair);
void validate(const Dataset& dataset);

// JSON-Lines pair files. A leading record carrying a "_meta" key is
// provenance metadata and is skipped on read.
Dataset read_report_pairs(std::istream& in);
Dataset load_report_pairs(const std::string& path);
void write_report_pairs(std::ostream& out, const Dataset& dataset);

// Parses span-label records and checks every record against the merge
// output of its report.
SpanLabelSet read_span_labels(std::istream& in, const Dataset& dataset);
SpanLabelSet load_span_labels(const std::string& path, const Dataset& dataset);
void write_span_labels(std::ostream& out, const SpanLabelSet& labels);

// Seeded split stratified by label (unlabeled pairs form their own
// stratum). The test size is round(test_fraction * n), apportioned across
// strata by largest remainder; input order is kept within each part.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset,
                                          double test_fraction,
                                          std::uint64_t seed);

// Sentence template for the synthetic generator. Markup:
//   [L]        laterality slot (harmful site: flipped in the junior)
//   [N]        negation site, "未" or empty (harmful site: toggled)
//   [F]        finding slot (harmful site: omitted from the junior)
//   {a|b|c}    stylistic alternatives (benign site: swapped)
//   (w)        optional function word (benign site: toggled)
struct SentenceTemplate {
  std::string section;
  std::string text;
};

struct SynthesisConfig {
  std::size_t n_reports = 1000;
  // Per-attempt probability of a benign edit; max_benign_edits attempts.
  double benign_edit_rate = 0.5;
  // Probability that a report receives harmful edits (1..max_harmful_edits).
  double harmful_edit_rate = 0.14;
  std::size_t max_benign_edits = 3;
  std::size_t max_harmful_edits = 2;
  // Unqualified reports carry strictly fewer benign than harmful edits.
  bool harmful_dominates = true;
  std::size_t target_length = 150;
  std::vector<SentenceTemplate> template_vocab;
  std::vector<std::string> laterality;
  std::vector<std::string> findings;
  std::uint64_t seed = 7;

  // Built-in radiology-flavoured vocabulary.
  static SynthesisConfig defaults();
};

struct SyntheticCorpus {
  Dataset dataset;
  SpanLabelSet span_labels;  // ground truth for every report
};

SyntheticCorpus generate_synthetic_corpus(const SynthesisConfig& config);

}  // namespace spanqa

#endif  // SPANQA_CORPUS_HPP_
