#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "groundreward/metrics.hpp"
#include "groundreward/preference.hpp"
#include "groundreward/reward.hpp"
#include "groundreward/synthetic.hpp"
#include "groundreward/validator.hpp"

namespace groundreward {

using json = nlohmann::json;

void to_json(json& j, const ImageMeta& m);
void from_json(const json& j, ImageMeta& m);
void to_json(json& j, const StorySample& s);
void from_json(const json& j, StorySample& s);
void to_json(json& j, const Violation& v);
void to_json(json& j, const ValidationReport& r);
void to_json(json& j, const RewardBreakdown& r);
void from_json(const json& j, RewardBreakdown& r);
void to_json(json& j, const RewardAggregate& a);
void to_json(json& j, const FrameProvenance& p);
void to_json(json& j, const SyntheticSpec& s);
void to_json(json& j, const PairSummary& s);
void to_json(json& j, const PreferencePair& p);

// Scored-candidate JSONL row written by `score` and read by `pairs`.
json candidate_to_json(const CandidateResponse& c, int candidate_index);
CandidateResponse candidate_from_json(const json& j);

// Reward and match settings with every key optional:
// w_reid, w_ground, alpha, beta_reid, gamma, delta, invalid_penalty,
// iou_threshold, require_class_match, min_margin,
// lexicon: {character_like: [...], object_like: [...]}.
// Setting only one weight of a pair fills in its complement.
struct Settings {
  RewardConfig reward;
  MatchConfig match;
  double min_margin = kDefaultMinMargin;
};
void apply_settings(const json& j, Settings& s);
Lexicon lexicon_from_json(const json& j);
json lexicon_to_json(const Lexicon& lexicon);

struct JsonlLine {
  std::size_t line_no = 0;  // 1-based
  std::variant<json, std::string> value;  // parsed object or error message
};

// Splits a JSONL stream; blank lines are skipped, malformed lines become
// error entries instead of aborting the read.
std::vector<JsonlLine> read_jsonl(std::istream& in);

// One compact JSON document per line.
void write_jsonl_line(std::ostream& out, const json& j);

}  // namespace groundreward
