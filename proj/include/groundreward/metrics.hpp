#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundreward/reward.hpp"
#include "groundreward/story_model.hpp"

namespace groundreward {

struct MatchConfig {
  double iou_threshold = 0.5;
  bool require_class_match = true;

  void check() const;
};

struct Counts {
  int tp = 0;
  int fp = 0;
  int fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// 0/0 is taken as 0 for every ratio.
PrecisionRecall prf(const Counts& counts);

double iou(const BoundingBox& a, const BoundingBox& b);

// A parsed CoT plus story, i.e. one model output or one gold annotation.
struct AnnotatedStory {
  CotDocument cot;
  GroundedStory story;
  std::size_t frame_count = 0;
};

// One entity id inside a <gdo> tag, resolved to its box in that frame.
struct Reference {
  EntityId id;
  std::size_t frame_index = 0;
  std::optional<BoundingBox> box;
};

// References in narrative order.
std::vector<Reference> collect_references(const AnnotatedStory& doc);

enum class Outcome { TP, FP };

struct MatchResult {
  Counts characters;
  Counts objects;
  Counts combined;
  std::vector<Outcome> ordered_outcomes;  // one per predicted reference, narrative order
  int gold_count = 0;
};

// Greedy same-frame matching in descending IoU. Throws std::invalid_argument
// when the documents cover different frame counts.
MatchResult match_references(const AnnotatedStory& pred, const AnnotatedStory& gold, const MatchConfig& cfg = {});

double average_precision_11pt(const std::vector<Outcome>& ordered_outcomes, int gold_count);

// Throws std::invalid_argument on an empty list.
double map_over_stories(const std::vector<double>& per_story_ap);

struct PersistenceCurve {
  std::size_t max_frames = 0;
  // Index k holds the percentage for N = k + 1.
  std::vector<double> characters;
  std::vector<double> objects;
  std::vector<double> total;
};

// Pools every entity of every document. Throws std::invalid_argument on an
// empty corpus.
PersistenceCurve persistence_curve(const std::vector<CotDocument>& corpus);

struct PronounStats {
  int total = 0;
  int grounded = 0;
  double ungrounded_pct() const;
};

using PronounReport = std::map<std::string, PronounStats>;

PronounReport pronoun_report(const std::vector<GroundedStory>& corpus, const Lexicon& lexicon = Lexicon::builtin());

// Lower-cased alphanumeric word tokens.
std::vector<std::string> tokenize_words(std::string_view text);

using TokenList = std::vector<std::string>;

// Corpus BLEU-4, uniform weights, clipped counts, closest-length brevity
// penalty. An order with zero matches contributes 1 / total instead of 0.
double bleu4(const TokenList& candidate, const std::vector<TokenList>& references);
double corpus_bleu4(const std::vector<TokenList>& candidates, const std::vector<std::vector<TokenList>>& references);

struct RougeScore {
  double p = 0.0;
  double r = 0.0;
  double f = 0.0;
};

std::size_t lcs_length(const TokenList& a, const TokenList& b);
RougeScore rouge_l(const TokenList& candidate, const TokenList& reference);

}  // namespace groundreward
