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

#ifndef SPANQA_DIFFMERGE_HPP_
#define SPANQA_DIFFMERGE_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spanqa/corpus.hpp"
#include "spanqa/text.hpp"

namespace spanqa {

enum class EditKind { kKeep, kDelete, kInsert };

struct EditRun {
  EditKind kind;
  CharSeq chars;
  std::size_t junior_offset;
  std::size_t senior_offset;

  bool operator==(const EditRun&) const = default;
};

// Maximal runs in document order. Inside each gap between keep runs the
// delete run (if any) precedes the insert run (if any).
using EditScript = std::vector<EditRun>;

// Character-level LCS diff. The table fill and the backtrack follow the
// classic dynamic program; on a mismatch the backtrack steps along the
// junior text when M[i-1][j] >= M[i][j-1].
EditScript lcs_diff(const CharSeq& junior, const CharSeq& senior);

// Length of an LCS of the two sequences.
std::size_t lcs_length(const CharSeq& junior, const CharSeq& senior);

enum class Tag : char { kO = 'O', kB = 'B', kI = 'I' };

enum class SpanKind { kDeletion, kAddition, kRevision };

const char* to_string(SpanKind kind);
SpanKind span_kind_from_string(const std::string& name);

// Half-open character range [begin, end) in a mixed report.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const IndexRange&) const = default;
};

struct RevisedSpan {
  IndexRange range;
  SpanKind kind;
  CharSeq deleted;
  CharSeq inserted;
  // Where the gap sits in the original texts.
  std::size_t junior_offset = 0;
  std::size_t senior_offset = 0;
  std::optional<int> label;
  std::optional<double> score;

  bool operator==(const RevisedSpan&) const = default;
};

// Junior and senior merged into one sequence. Kept characters are tagged O;
// each edit gap contributes its deleted characters followed by its inserted
// characters, tagged B I I ...
struct MixedReport {
  std::string report_id;
  CharSeq chars;
  std::vector<Tag> tags;
  std::vector<RevisedSpan> spans;

  std::size_t size() const { return chars.size(); }
  bool operator==(const MixedReport&) const = default;
};

MixedReport merge(std::string report_id, const CharSeq& junior,
                  const CharSeq& senior);
MixedReport merge_reports(const ReportPair& pair);

// Throws ValidationError naming the first violated invariant.
void validate(const MixedReport& mixed);

// Inverse of merge: returns (junior, senior). Validates first.
std::pair<CharSeq, CharSeq> reconstruct(const MixedReport& mixed);

// g_1..g_l: each range starts at a B tag and runs up to the next O or B.
std::vector<IndexRange> span_char_indices(const std::vector<Tag>& tags);
std::vector<IndexRange> span_char_indices(const MixedReport& mixed);

std::string tags_to_string(const std::vector<Tag>& tags);
std::vector<Tag> tags_from_string(const std::string& tags);

}  // namespace spanqa

#endif  // SPANQA_DIFFMERGE_HPP_
