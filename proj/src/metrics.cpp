#include "groundreward/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace groundreward {

void MatchConfig::check() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("iou_threshold must be in (0, 1]");
  }
}

PrecisionRecall prf(const Counts& c) {
  auto ratio = [](int num, int den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; };
  PrecisionRecall out;
  out.precision = ratio(c.tp, c.tp + c.fp);
  out.recall = ratio(c.tp, c.tp + c.fn);
  double sum = out.precision + out.recall;
  out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
  return out;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  auto area = [](const BoundingBox& r) {
    return std::max(0.0, static_cast<double>(r.x2) - r.x1) * std::max(0.0, static_cast<double>(r.y2) - r.y1);
  };
  double iw = std::max(0.0, static_cast<double>(std::min(a.x2, b.x2)) - std::max(a.x1, b.x1));
  double ih = std::max(0.0, static_cast<double>(std::min(a.y2, b.y2)) - std::max(a.y1, b.y1));
  double inter = iw * ih;
  double uni = area(a) + area(b) - inter;
  return uni <= 0.0 ? 0.0 : inter / uni;
}

std::vector<Reference> collect_references(const AnnotatedStory& doc) {
  std::vector<Reference> refs;
  for (const auto& tag : doc.story.tags) {
    if (tag.kind != TagKind::EntityRef) continue;
    for (const auto& id : tag.entity_ids) {
      Reference ref{id, tag.frame_index, std::nullopt};
      if (const EntityRecord* e = doc.cot.find(id)) {
        auto it = e->appearances.find(tag.frame_index);
        if (it != e->appearances.end()) ref.box = it->second;
      }
      refs.push_back(ref);
    }
  }
  return refs;
}

MatchResult match_references(const AnnotatedStory& pred, const AnnotatedStory& gold, const MatchConfig& cfg) {
  cfg.check();
  if (pred.frame_count != gold.frame_count) {
    throw std::invalid_argument("match_references: prediction covers " + std::to_string(pred.frame_count) +
                                " frames, gold covers " + std::to_string(gold.frame_count));
  }
  const auto preds = collect_references(pred);
  const auto golds = collect_references(gold);

  struct Candidate {
    double iou;
    std::size_t p;
    std::size_t g;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    if (!preds[p].box) continue;
    for (std::size_t g = 0; g < golds.size(); ++g) {
      if (!golds[g].box || golds[g].frame_index != preds[p].frame_index) continue;
      if (cfg.require_class_match && preds[p].id.is_character() != golds[g].id.is_character()) continue;
      double v = iou(*preds[p].box, *golds[g].box);
      if (v >= cfg.iou_threshold) candidates.push_back({v, p, g});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    return std::tie(a.p, a.g) < std::tie(b.p, b.g);
  });

  std::vector<bool> pred_hit(preds.size(), false);
  std::vector<bool> gold_hit(golds.size(), false);
  for (const auto& c : candidates) {
    if (pred_hit[c.p] || gold_hit[c.g]) continue;
    pred_hit[c.p] = true;
    gold_hit[c.g] = true;
  }

  MatchResult out;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    Counts& cls = preds[p].id.is_character() ? out.characters : out.objects;
    ++(pred_hit[p] ? cls.tp : cls.fp);
    out.ordered_outcomes.push_back(pred_hit[p] ? Outcome::TP : Outcome::FP);
  }
  for (std::size_t g = 0; g < golds.size(); ++g) {
    if (gold_hit[g]) continue;
    Counts& cls = golds[g].id.is_character() ? out.characters : out.objects;
    ++cls.fn;
  }
  out.combined = out.characters;
  out.combined += out.objects;
  out.gold_count = static_cast<int>(golds.size());
  return out;
}

double average_precision_11pt(const std::vector<Outcome>& outcomes, int gold_count) {
  if (gold_count <= 0 || outcomes.empty()) return 0.0;
  // best[i]: highest precision among prefixes whose recall reaches i/10.
  // recall >= i/10 is tested as 10*tp >= i*gold_count to stay exact.
  double best[11] = {};
  int tp = 0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    if (outcomes[k] == Outcome::TP) ++tp;
    double precision = static_cast<double>(tp) / static_cast<double>(k + 1);
    for (int i = 0; i <= 10; ++i) {
      if (10 * tp >= i * gold_count) best[i] = std::max(best[i], precision);
    }
  }
  double sum = 0.0;
  for (double b : best) sum += b;
  return sum / 11.0;
}

double map_over_stories(const std::vector<double>& per_story_ap) {
  if (per_story_ap.empty()) throw std::invalid_argument("map_over_stories: no stories");
  return std::accumulate(per_story_ap.begin(), per_story_ap.end(), 0.0) / static_cast<double>(per_story_ap.size());
}

PersistenceCurve persistence_curve(const std::vector<CotDocument>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("persistence_curve: empty corpus");
  std::vector<std::size_t> chars;
  std::vector<std::size_t> objs;
  for (const auto& doc : corpus) {
    for (const auto& e : doc.entities) {
      (e.id.is_character() ? chars : objs).push_back(e.appearances.size());
    }
  }
  PersistenceCurve curve;
  curve.max_frames = 1;
  for (auto n : chars) curve.max_frames = std::max(curve.max_frames, n);
  for (auto n : objs) curve.max_frames = std::max(curve.max_frames, n);

  auto pct = [](std::size_t hits, std::size_t total) {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(total);
  };
  for (std::size_t n = 1; n <= curve.max_frames; ++n) {
    auto at_least = [n](const std::vector<std::size_t>& v) {
      return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [n](std::size_t f) { return f >= n; }));
    };
    std::size_t c = at_least(chars);
    std::size_t o = at_least(objs);
    curve.characters.push_back(pct(c, chars.size()));
    curve.objects.push_back(pct(o, objs.size()));
    curve.total.push_back(pct(c + o, chars.size() + objs.size()));
  }
  return curve;
}

double PronounStats::ungrounded_pct() const {
  return total == 0 ? 0.0 : 100.0 * (1.0 - static_cast<double>(grounded) / static_cast<double>(total));
}

PronounReport pronoun_report(const std::vector<GroundedStory>& corpus, const Lexicon& lexicon) {
  PronounReport report;
  for (const auto& story : corpus) {
    const std::string_view text = story.plain_text;
    for (const auto& tok : word_tokens(text)) {
      std::string_view word = text.substr(tok.span.begin, tok.span.end - tok.span.begin);
      if (!lexicon.lookup(word)) continue;
      std::string key(word);
      std::transform(key.begin(), key.end(), key.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      PronounStats& stats = report[key];
      ++stats.total;
      if (token_context(story, tok.span).grounding) ++stats.grounded;
    }
  }
  return report;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

using NgramCounts = std::map<TokenList, int>;

NgramCounts ngrams(const TokenList& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[TokenList(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

struct BleuStats {
  long matches[4] = {};
  long totals[4] = {};
  long hyp_len = 0;
  long ref_len = 0;
};

void accumulate_bleu(const TokenList& cand, const std::vector<TokenList>& refs, BleuStats& stats) {
  for (std::size_t n = 1; n <= 4; ++n) {
    NgramCounts cand_counts = ngrams(cand, n);
    NgramCounts max_ref;
    for (const auto& ref : refs) {
      for (const auto& [gram, count] : ngrams(ref, n)) max_ref[gram] = std::max(max_ref[gram], count);
    }
    long total = 0;
    long clipped = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(count, it->second);
    }
    stats.matches[n - 1] += clipped;
    // Each sentence contributes at least one n-gram slot, as in NLTK.
    stats.totals[n - 1] += std::max(1L, total);
  }
  const long c = static_cast<long>(cand.size());
  stats.hyp_len += c;
  // Closest reference length, shorter one on ties.
  long best = -1;
  for (const auto& ref : refs) {
    long r = static_cast<long>(ref.size());
    if (best < 0 || std::abs(r - c) < std::abs(best - c) || (std::abs(r - c) == std::abs(best - c) && r < best)) {
      best = r;
    }
  }
  stats.ref_len += std::max(0L, best);
}

double bleu_from_stats(const BleuStats& s) {
  if (s.hyp_len == 0 || s.matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    double num = s.matches[n] == 0 ? 1.0 : static_cast<double>(s.matches[n]);
    double den = static_cast<double>(s.totals[n]);
    log_sum += 0.25 * std::log(num / den);
  }
  double bp = s.hyp_len > s.ref_len ? 1.0 : std::exp(1.0 - static_cast<double>(s.ref_len) / s.hyp_len);
  return bp * std::exp(log_sum);
}

}  // namespace

double bleu4(const TokenList& candidate, const std::vector<TokenList>& references) {
  return corpus_bleu4({candidate}, {references});
}

double corpus_bleu4(const std::vector<TokenList>& candidates, const std::vector<std::vector<TokenList>>& references) {
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("corpus_bleu4: candidate and reference counts differ");
  }
  BleuStats stats;
  for (std::size_t i = 0; i < candidates.size(); ++i) accumulate_bleu(candidates[i], references[i], stats);
  return bleu_from_stats(stats);
}

std::size_t lcs_length(const TokenList& a, const TokenList& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const TokenList& candidate, const TokenList& reference) {
  RougeScore out;
  if (candidate.empty() || reference.empty()) return out;
  double lcs = static_cast<double>(lcs_length(candidate, reference));
  out.p = lcs / static_cast<double>(candidate.size());
  out.r = lcs / static_cast<double>(reference.size());
  out.f = out.p + out.r == 0.0 ? 0.0 : 2.0 * out.p * out.r / (out.p + out.r);
  return out;
}

}  // namespace groundreward
