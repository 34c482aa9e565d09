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

#include "spanqa/diffmerge.hpp"

#include <algorithm>
#include <cstdint>
#include <utility>

#include "spanqa/error.hpp"

namespace spanqa {
namespace {

// (len(junior)+1) x (len(senior)+1) LCS length table.
class LcsTable {
 public:
  LcsTable(const CharSeq& a, const CharSeq& b)
      : cols_(b.size() + 1), cells_((a.size() + 1) * cols_, 0) {
    for (std::size_t i = 1; i <= a.size(); ++i) {
      for (std::size_t j = 1; j <= b.size(); ++j) {
        if (a[i - 1] == b[j - 1]) {
          cell(i, j) = at(i - 1, j - 1) + 1;
        } else {
          cell(i, j) = std::max(at(i - 1, j), at(i, j - 1));
        }
      }
    }
  }

  std::uint32_t at(std::size_t i, std::size_t j) const {
    return cells_[i * cols_ + j];
  }

 private:
  std::uint32_t& cell(std::size_t i, std::size_t j) {
    return cells_[i * cols_ + j];
  }

  std::size_t cols_;
  std::vector<std::uint32_t> cells_;
};

}  // namespace

EditScript lcs_diff(const CharSeq& junior, const CharSeq& senior) {
  const LcsTable table(junior, senior);

  // Backtrack from the bottom-right corner, collecting ops in reverse.
  std::vector<EditKind> ops;
  ops.reserve(junior.size() + senior.size());
  std::size_t i = junior.size();
  std::size_t j = senior.size();
  while (i > 0 && j > 0) {
    if (junior[i - 1] == senior[j - 1]) {
      ops.push_back(EditKind::kKeep);
      --i;
      --j;
    } else if (table.at(i - 1, j) >= table.at(i, j - 1)) {
      ops.push_back(EditKind::kDelete);
      --i;
    } else {
      ops.push_back(EditKind::kInsert);
      --j;
    }
  }
  for (; i > 0; --i) ops.push_back(EditKind::kDelete);
  for (; j > 0; --j) ops.push_back(EditKind::kInsert);
  std::reverse(ops.begin(), ops.end());

  EditScript script;
  std::size_t jpos = 0;
  std::size_t spos = 0;
  std::size_t k = 0;
  while (k < ops.size()) {
    if (ops[k] == EditKind::kKeep) {
      EditRun run{EditKind::kKeep, {}, jpos, spos};
      while (k < ops.size() && ops[k] == EditKind::kKeep) {
        run.chars.push_back(junior[jpos]);
        ++jpos;
        ++spos;
        ++k;
      }
      script.push_back(std::move(run));
      continue;
    }
    // An edit gap: deletes and inserts up to the next keep. Reorder so the
    // delete run comes first; relative order within each side is kept.
    EditRun del{EditKind::kDelete, {}, jpos, spos};
    EditRun ins{EditKind::kInsert, {}, 0, spos};
    for (; k < ops.size() && ops[k] != EditKind::kKeep; ++k) {
      if (ops[k] == EditKind::kDelete) {
        del.chars.push_back(junior[jpos++]);
      } else {
        ins.chars.push_back(senior[spos++]);
      }
    }
    ins.junior_offset = jpos;
    if (!del.chars.empty()) script.push_back(std::move(del));
    if (!ins.chars.empty()) script.push_back(std::move(ins));
  }
  return script;
}

std::size_t lcs_length(const CharSeq& junior, const CharSeq& senior) {
  return LcsTable(junior, senior).at(junior.size(), senior.size());
}

const char* to_string(SpanKind kind) {
  switch (kind) {
    case SpanKind::kDeletion:
      return "deletion";
    case SpanKind::kAddition:
      return "addition";
    case SpanKind::kRevision:
      return "revision";
  }
  return "unknown";
}

SpanKind span_kind_from_string(const std::string& name) {
  if (name == "deletion") return SpanKind::kDeletion;
  if (name == "addition") return SpanKind::kAddition;
  if (name == "revision") return SpanKind::kRevision;
  throw ParseError("unknown span kind '" + name + "'");
}

MixedReport merge(std::string report_id, const CharSeq& junior,
                  const CharSeq& senior) {
  const EditScript script = lcs_diff(junior, senior);

  MixedReport mixed;
  mixed.report_id = std::move(report_id);
  mixed.chars.reserve(junior.size() + senior.size());
  mixed.tags.reserve(junior.size() + senior.size());

  for (std::size_t k = 0; k < script.size(); ++k) {
    const EditRun& run = script[k];
    if (run.kind == EditKind::kKeep) {
      mixed.chars += run.chars;
      mixed.tags.insert(mixed.tags.end(), run.chars.size(), Tag::kO);
      continue;
    }
    RevisedSpan span;
    span.junior_offset = run.junior_offset;
    span.senior_offset = run.senior_offset;
    if (run.kind == EditKind::kDelete) {
      span.deleted = run.chars;
      if (k + 1 < script.size() && script[k + 1].kind == EditKind::kInsert) {
        span.inserted = script[++k].chars;
      }
    } else {
      span.inserted = run.chars;
    }
    span.kind = span.inserted.empty()  ? SpanKind::kDeletion
                : span.deleted.empty() ? SpanKind::kAddition
                                       : SpanKind::kRevision;
    span.range.begin = mixed.chars.size();
    mixed.chars += span.deleted;
    mixed.chars += span.inserted;
    span.range.end = mixed.chars.size();
    mixed.tags.push_back(Tag::kB);
    mixed.tags.insert(mixed.tags.end(), span.range.size() - 1, Tag::kI);
    mixed.spans.push_back(std::move(span));
  }
  return mixed;
}

MixedReport merge_reports(const ReportPair& pair) {
  return merge(pair.id, decode_utf8(pair.junior), decode_utf8(pair.senior));
}

void validate(const MixedReport& mixed) {
  const auto fail = [&](const std::string& what) {
    throw ValidationError("mixed report '" + mixed.report_id + "': " + what);
  };
  if (mixed.tags.size() != mixed.chars.size()) {
    fail("tag count " + std::to_string(mixed.tags.size()) +
         " != character count " + std::to_string(mixed.chars.size()));
  }
  for (std::size_t i = 0; i < mixed.tags.size(); ++i) {
    if (mixed.tags[i] == Tag::kI && (i == 0 || mixed.tags[i - 1] == Tag::kO)) {
      fail("I tag at " + std::to_string(i) + " does not follow B or I");
    }
  }
  const std::vector<IndexRange> ranges = span_char_indices(mixed.tags);
  if (ranges.size() != mixed.spans.size()) {
    fail("span count " + std::to_string(mixed.spans.size()) +
         " != B tag count " + std::to_string(ranges.size()));
  }
  std::size_t jpos = 0;
  std::size_t spos = 0;
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < mixed.spans.size(); ++s) {
    const RevisedSpan& span = mixed.spans[s];
    const std::string where = "span " + std::to_string(s) + ": ";
    if (span.range != ranges[s]) fail(where + "range disagrees with tags");
    const bool kind_ok =
        (span.kind == SpanKind::kDeletion && !span.deleted.empty() &&
         span.inserted.empty()) ||
        (span.kind == SpanKind::kAddition && span.deleted.empty() &&
         !span.inserted.empty()) ||
        (span.kind == SpanKind::kRevision && !span.deleted.empty() &&
         !span.inserted.empty());
    if (!kind_ok) fail(where + "content does not match kind");
    if (span.range.size() != span.deleted.size() + span.inserted.size() ||
        mixed.chars.compare(span.range.begin, span.range.size(),
                            span.deleted + span.inserted) != 0) {
      fail(where + "characters do not match deleted + inserted content");
    }
    const std::size_t kept = span.range.begin - cursor;
    jpos += kept;
    spos += kept;
    if (span.junior_offset != jpos || span.senior_offset != spos) {
      fail(where + "offsets inconsistent with preceding content");
    }
    jpos += span.deleted.size();
    spos += span.inserted.size();
    cursor = span.range.end;
  }
}

std::pair<CharSeq, CharSeq> reconstruct(const MixedReport& mixed) {
  validate(mixed);
  CharSeq junior;
  CharSeq senior;
  std::size_t cursor = 0;
  for (const RevisedSpan& span : mixed.spans) {
    const auto kept = std::u32string_view(mixed.chars)
                          .substr(cursor, span.range.begin - cursor);
    junior += kept;
    senior += kept;
    junior += span.deleted;
    senior += span.inserted;
    cursor = span.range.end;
  }
  const auto tail = std::u32string_view(mixed.chars).substr(cursor);
  junior += tail;
  senior += tail;
  return {std::move(junior), std::move(senior)};
}

std::vector<IndexRange> span_char_indices(const std::vector<Tag>& tags) {
  std::vector<IndexRange> ranges;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    switch (tags[i]) {
      case Tag::kB:
        ranges.push_back({i, i + 1});
        open = true;
        break;
      case Tag::kI:
        if (open) ranges.back().end = i + 1;
        break;
      case Tag::kO:
        open = false;
        break;
    }
  }
  return ranges;
}

std::vector<IndexRange> span_char_indices(const MixedReport& mixed) {
  return span_char_indices(mixed.tags);
}

std::string tags_to_string(const std::vector<Tag>& tags) {
  std::string out;
  out.reserve(tags.size());
  for (Tag t : tags) out.push_back(static_cast<char>(t));
  return out;
}

std::vector<Tag> tags_from_string(const std::string& tags) {
  std::vector<Tag> out;
  out.reserve(tags.size());
  for (char c : tags) {
    if (c != 'B' && c != 'I' && c != 'O') {
      throw ParseError(std::string("invalid BIO tag '") + c + "'");
    }
    out.push_back(static_cast<Tag>(c));
  }
  return out;
}

}  // namespace spanqa
