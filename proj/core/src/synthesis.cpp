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
#include <cstdio>
#include <limits>
#include <random>
#include <string_view>

#include "spanqa/corpus.hpp"
#include "spanqa/diffmerge.hpp"
#include "spanqa/error.hpp"
#include "spanqa/text.hpp"

namespace spanqa {
namespace {

enum class SiteKind { kLiteral, kLaterality, kNegation, kFinding, kStyle, kOptional };

bool harmful(SiteKind kind) {
  return kind == SiteKind::kLaterality || kind == SiteKind::kNegation ||
         kind == SiteKind::kFinding;
}

struct Token {
  SiteKind kind;
  std::vector<std::string> values;  // literal text, alternatives, or the word
};

std::vector<Token> parse_template(const std::string& text) {
  std::vector<Token> tokens;
  std::string literal;
  const auto flush = [&] {
    if (!literal.empty()) tokens.push_back({SiteKind::kLiteral, {literal}});
    literal.clear();
  };
  const auto closing = [&](std::size_t from, char close) {
    const std::size_t end = text.find(close, from);
    if (end == std::string::npos) {
      throw ValidationError("unterminated markup in template '" + text + "'");
    }
    return end;
  };
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (c == '[') {
      const std::size_t end = closing(i, ']');
      const std::string name = text.substr(i + 1, end - i - 1);
      flush();
      if (name == "L") {
        tokens.push_back({SiteKind::kLaterality, {}});
      } else if (name == "N") {
        tokens.push_back({SiteKind::kNegation, {}});
      } else if (name == "F") {
        tokens.push_back({SiteKind::kFinding, {}});
      } else {
        throw ValidationError("unknown slot [" + name + "] in template");
      }
      i = end + 1;
    } else if (c == '{') {
      const std::size_t end = closing(i, '}');
      Token token{SiteKind::kStyle, {}};
      std::string_view body(text.data() + i + 1, end - i - 1);
      for (std::size_t start = 0;;) {
        const std::size_t bar = body.find('|', start);
        token.values.emplace_back(body.substr(start, bar - start));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
      }
      if (token.values.size() < 2) {
        throw ValidationError("style slot needs two alternatives in '" + text +
                              "'");
      }
      flush();
      tokens.push_back(std::move(token));
      i = end + 1;
    } else if (c == '(') {
      const std::size_t end = closing(i, ')');
      flush();
      tokens.push_back({SiteKind::kOptional, {text.substr(i + 1, end - i - 1)}});
      i = end + 1;
    } else {
      literal.push_back(c);
      ++i;
    }
  }
  flush();
  return tokens;
}

// Portable draws on top of mt19937_64 so corpora do not depend on the
// standard library's distribution implementations.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
  // Index in [0, n) different from skip.
  std::size_t other_than(std::size_t n, std::size_t skip) {
    std::size_t k = below(n - 1);
    return k >= skip ? k + 1 : k;
  }
  // k distinct elements of v, in draw order.
  std::vector<std::size_t> sample(std::vector<std::size_t> v, std::size_t k) {
    k = std::min(k, v.size());
    for (std::size_t i = 0; i < k; ++i) std::swap(v[i], v[i + below(v.size() - i)]);
    v.resize(k);
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

// One rendered slot or literal. senior/junior are the texts the two
// reports carry at this position.
struct Segment {
  SiteKind kind;
  std::string senior;
  std::string junior;
  std::size_t alternative = 0;  // chosen index for style/laterality slots
  std::vector<std::string> alternatives;
  bool edited = false;
};

struct InjectedEdit {
  bool harmful;
  std::size_t junior_begin;  // code-point interval in the junior text
  std::size_t junior_end;
};

std::size_t interval_gap(std::size_t a0, std::size_t a1, std::size_t b0,
                         std::size_t b1) {
  // Distance between closed intervals [a0, a1] and [b0, b1]; 0 if touching.
  if (a1 < b0) return b0 - a1;
  if (b1 < a0) return a0 - b1;
  return 0;
}

void validate(const SynthesisConfig& config) {
  if (config.n_reports < 1) throw ValidationError("n_reports must be >= 1");
  for (double rate : {config.benign_edit_rate, config.harmful_edit_rate}) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
      throw ValidationError("edit rates must lie in [0, 1]");
    }
  }
  if (config.template_vocab.empty()) {
    throw ValidationError("template_vocab is empty");
  }
  if (config.laterality.size() < 2) {
    throw ValidationError("laterality needs at least two values");
  }
  if (config.findings.empty()) throw ValidationError("findings is empty");
  if (config.max_harmful_edits < 1) {
    throw ValidationError("max_harmful_edits must be >= 1");
  }
}

}  // namespace

SynthesisConfig SynthesisConfig::defaults() {
  SynthesisConfig c;
  c.laterality = {"左", "右", "双"};
  c.findings = {"结节", "钙化灶", "积液", "出血灶", "占位", "肿块", "梗死灶", "囊肿"};
  c.template_vocab = {
      {"chest", "[L]肺纹理{清晰|清楚}，(各叶)肺野透亮度{正常|如常}。"},
      {"chest", "[L]肺下叶[N]见[F]，边缘{光整|光滑}。"},
      {"chest", "[L]侧胸腔[N]见[F]，(可)见胸膜{稍|略}增厚。"},
      {"chest", "纵隔{居中|无移位}，心影大小{正常|如常}。"},
      {"chest", "气管及(各叶)支气管{通畅|畅通}，[L]肺门[N]见[F]。"},
      {"abdomen", "肝脏大小形态{正常|如常}，实质密度{均匀|均一}。"},
      {"abdomen", "[L]肾[N]见[F]，(的)肾盂{形态|外形}{正常|如常}。"},
      {"abdomen", "胆囊{显示|示}{清晰|清楚}，壁{光整|光滑}。"},
      {"abdomen", "[L]侧肾上腺[N]见[F]，胰腺{大致|基本}{正常|如常}。"},
      {"abdomen", "脾脏(约){大小|体积}{正常|如常}，腹腔[N]见[F]。"},
      {"neurology", "[L]侧基底节区[N]见[F]，周围{稍|略}低密度水肿带。"},
      {"neurology", "脑室系统{大小|形态}{正常|如常}，中线结构{居中|无偏移}。"},
      {"neurology", "[L]侧额叶[N]见[F]，(呈)斑片状{改变|影}。"},
      {"neurology", "(各)脑沟脑裂{清晰|清楚}，脑实质密度{均匀|均一}。"},
      {"neurology", "[L]侧小脑半球[N]见[F]，灰白质分界{清晰|清楚}。"},
  };
  return c;
}

SyntheticCorpus generate_synthetic_corpus(const SynthesisConfig& config) {
  validate(config);

  std::vector<std::string> sections;
  std::vector<std::vector<std::vector<Token>>> by_section;
  for (const SentenceTemplate& t : config.template_vocab) {
    auto it = std::find(sections.begin(), sections.end(), t.section);
    if (it == sections.end()) {
      sections.push_back(t.section);
      by_section.emplace_back();
      it = sections.end() - 1;
    }
    by_section[static_cast<std::size_t>(it - sections.begin())].push_back(
        parse_template(t.text));
  }

  Draw draw(config.seed);
  SyntheticCorpus corpus;
  corpus.dataset.provenance = Provenance::kSynthetic;

  for (std::size_t r = 0; r < config.n_reports; ++r) {
    const std::size_t section = draw.below(sections.size());
    const auto& templates = by_section[section];

    // Render senior sentences until the length is closest to the target.
    std::vector<Segment> segments;
    std::size_t length = 0;
    for (;;) {
      std::vector<Segment> sentence;
      std::size_t added = 0;
      for (const Token& token : draw.pick(templates)) {
        Segment seg{token.kind, {}, {}, 0, {}, false};
        switch (token.kind) {
          case SiteKind::kLiteral:
            seg.senior = token.values[0];
            break;
          case SiteKind::kLaterality:
            seg.alternatives = config.laterality;
            seg.alternative = draw.below(seg.alternatives.size());
            seg.senior = seg.alternatives[seg.alternative];
            break;
          case SiteKind::kNegation:
            seg.senior = draw.chance(0.5) ? "未" : "";
            break;
          case SiteKind::kFinding:
            seg.senior = draw.pick(config.findings);
            break;
          case SiteKind::kStyle:
            seg.alternatives = token.values;
            seg.alternative = draw.below(seg.alternatives.size());
            seg.senior = seg.alternatives[seg.alternative];
            break;
          case SiteKind::kOptional:
            seg.alternatives = token.values;
            seg.senior = draw.chance(0.5) ? token.values[0] : "";
            break;
        }
        seg.junior = seg.senior;
        added += decode_utf8(seg.senior).size();
        sentence.push_back(std::move(seg));
      }
      const auto distance = [&](std::size_t len) {
        return len > config.target_length ? len - config.target_length
                                          : config.target_length - len;
      };
      if (length > 0 && distance(length + added) >= distance(length)) break;
      length += added;
      segments.insert(segments.end(), sentence.begin(), sentence.end());
    }

    std::vector<std::size_t> harmful_sites;
    std::vector<std::size_t> benign_sites;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (segments[i].kind == SiteKind::kLiteral) continue;
      (harmful(segments[i].kind) ? harmful_sites : benign_sites).push_back(i);
    }

    std::size_t n_harmful = 0;
    if (draw.chance(config.harmful_edit_rate)) {
      n_harmful = 1 + draw.below(config.max_harmful_edits);
    }
    std::size_t n_benign = 0;
    for (std::size_t k = 0; k < config.max_benign_edits; ++k) {
      if (draw.chance(config.benign_edit_rate)) ++n_benign;
    }
    const std::vector<std::size_t> harmful_pick =
        draw.sample(harmful_sites, n_harmful);
    n_harmful = harmful_pick.size();
    if (n_harmful > 0 && config.harmful_dominates) {
      n_benign = std::min(n_benign, n_harmful - 1);
    }
    const std::vector<std::size_t> benign_pick =
        draw.sample(benign_sites, n_benign);

    for (std::size_t i : harmful_pick) {
      Segment& seg = segments[i];
      switch (seg.kind) {
        case SiteKind::kLaterality:
          seg.junior = seg.alternatives[draw.other_than(seg.alternatives.size(),
                                                        seg.alternative)];
          break;
        case SiteKind::kNegation:
          seg.junior = seg.senior.empty() ? "未" : "";
          break;
        case SiteKind::kFinding:
          seg.junior.clear();  // missed finding
          break;
        default:
          break;
      }
      seg.edited = true;
    }
    for (std::size_t i : benign_pick) {
      Segment& seg = segments[i];
      if (seg.kind == SiteKind::kStyle) {
        seg.junior = seg.alternatives[draw.other_than(seg.alternatives.size(),
                                                      seg.alternative)];
      } else {
        seg.junior = seg.senior.empty() ? seg.alternatives[0] : "";
      }
      seg.edited = true;
    }

    ReportPair pair;
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%06zu", r);
    pair.id = id;
    pair.section = sections[section];
    std::vector<InjectedEdit> edits;
    std::size_t jpos = 0;
    for (const Segment& seg : segments) {
      const std::size_t jlen = decode_utf8(seg.junior).size();
      if (seg.edited) edits.push_back({harmful(seg.kind), jpos, jpos + jlen});
      pair.junior += seg.junior;
      pair.senior += seg.senior;
      jpos += jlen;
    }
    pair.label = n_harmful == 0 ? 1 : 0;

    // Attribute each merged span to the injected edits whose junior interval
    // touches the span's; fall back to the nearest edit, and attach any edit
    // left without a span to its nearest span. Span label = min over edits.
    const MixedReport mixed = merge_reports(pair);
    std::vector<std::vector<std::size_t>> owners(mixed.spans.size());
    std::vector<bool> used(edits.size(), false);
    const auto gap = [&](const RevisedSpan& s, const InjectedEdit& e) {
      return interval_gap(s.junior_offset, s.junior_offset + s.deleted.size(),
                          e.junior_begin, e.junior_end);
    };
    for (std::size_t s = 0; s < mixed.spans.size(); ++s) {
      std::size_t nearest = 0;
      std::size_t best = std::numeric_limits<std::size_t>::max();
      for (std::size_t e = 0; e < edits.size(); ++e) {
        const std::size_t d = gap(mixed.spans[s], edits[e]);
        if (d == 0) {
          owners[s].push_back(e);
          used[e] = true;
        }
        if (d < best) {
          best = d;
          nearest = e;
        }
      }
      if (owners[s].empty() && !edits.empty()) {
        owners[s].push_back(nearest);
        used[nearest] = true;
      }
    }
    for (std::size_t e = 0; e < edits.size() && !mixed.spans.empty(); ++e) {
      if (used[e]) continue;
      std::size_t nearest = 0;
      std::size_t best = std::numeric_limits<std::size_t>::max();
      for (std::size_t s = 0; s < mixed.spans.size(); ++s) {
        const std::size_t d = gap(mixed.spans[s], edits[e]);
        if (d < best) {
          best = d;
          nearest = s;
        }
      }
      owners[nearest].push_back(e);
    }

    SpanLabelRecord record{pair.id, {}};
    for (const auto& owner : owners) {
      int label = 1;
      for (std::size_t e : owner) {
        if (edits[e].harmful) label = 0;
      }
      record.span_labels.push_back(label);
    }
    corpus.span_labels.emplace(pair.id, std::move(record));
    corpus.dataset.pairs.push_back(std::move(pair));
  }
  return corpus;
}

}  // namespace spanqa
