#include "groundreward/jsonio.hpp"

#include <stdexcept>

namespace groundreward {

void to_json(json& j, const ImageMeta& m) {
  j = json{{"image_id", m.image_id}, {"width", m.width}, {"height", m.height}, {"source_story_id", m.source_story_id}};
}

void from_json(const json& j, ImageMeta& m) {
  j.at("image_id").get_to(m.image_id);
  j.at("width").get_to(m.width);
  j.at("height").get_to(m.height);
  m.source_story_id = j.value("source_story_id", std::string());
  if (m.width <= 0 || m.height <= 0) {
    throw std::invalid_argument("image '" + m.image_id + "' needs positive width and height");
  }
}

void to_json(json& j, const StorySample& s) {
  j = json{{"sample_id", s.sample_id},
           {"is_real", s.is_real},
           {"images", s.images},
           {"cot_text", s.cot_text},
           {"story_text", s.story_text}};
}

void from_json(const json& j, StorySample& s) {
  j.at("sample_id").get_to(s.sample_id);
  j.at("is_real").get_to(s.is_real);
  j.at("images").get_to(s.images);
  s.cot_text = j.value("cot_text", std::string());
  s.story_text = j.value("story_text", std::string());
  if (s.images.empty()) throw std::invalid_argument("sample '" + s.sample_id + "' has no images");
}

void to_json(json& j, const Violation& v) {
  j = json{{"rule_id", std::string(rule_name(v.rule_id))}};
  if (v.frame_index) j["frame_index"] = *v.frame_index;
  if (v.entity_id) j["entity_id"] = v.entity_id->str();
  j["message"] = v.message;
}

void to_json(json& j, const ValidationReport& r) {
  j = json{{"valid", r.valid}, {"violations", r.violations}};
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

void to_json(json& j, const RewardBreakdown& r) {
  j = json{{"valid", r.valid},
           {"r_char", optional_number(r.r_char)},
           {"r_obj", optional_number(r.r_obj)},
           {"r_reid", optional_number(r.r_reid)},
           {"r_ground", optional_number(r.r_ground)},
           {"total", r.total},
           {"violations", r.violations}};
}

void to_json(json& j, const RewardAggregate& a) {
  j = json{{"candidates", a.candidates},
           {"valid", a.valid},
           {"r_char", optional_number(a.r_char)},
           {"r_obj", optional_number(a.r_obj)},
           {"r_reid", optional_number(a.r_reid)},
           {"r_ground", optional_number(a.r_ground)},
           {"total_per_sample", optional_number(a.total_per_sample)},
           {"total_of_means", optional_number(a.total_of_means)},
           {"total_with_penalty", optional_number(a.total_with_penalty)}};
}

void from_json(const json& j, RewardBreakdown& r) {
  j.at("valid").get_to(r.valid);
  r.r_char = read_optional(j, "r_char");
  r.r_obj = read_optional(j, "r_obj");
  r.r_reid = read_optional(j, "r_reid");
  r.r_ground = read_optional(j, "r_ground");
  j.at("total").get_to(r.total);
  r.violations.clear();
  for (const auto& v : j.value("violations", json::array())) {
    auto rule = rule_from_name(v.at("rule_id").get<std::string>());
    if (!rule) throw std::invalid_argument("unknown rule_id " + v.at("rule_id").dump());
    Violation out{*rule, std::nullopt, std::nullopt, v.value("message", std::string())};
    if (v.contains("frame_index")) out.frame_index = v.at("frame_index").get<std::size_t>();
    if (v.contains("entity_id")) out.entity_id = EntityId::parse(v.at("entity_id").get<std::string>());
    r.violations.push_back(std::move(out));
  }
}

void to_json(json& j, const FrameProvenance& p) {
  j = json{{"frame_index", p.frame_index},
           {"story_idx", p.story_idx},
           {"img_idx", p.img_idx},
           {"source_sample_id", p.source_sample_id},
           {"image_id", p.image_id}};
}

void to_json(json& j, const SyntheticSpec& s) {
  json picks = json::array();
  for (const auto& p : s.picks) picks.push_back({{"story_idx", p.story_idx}, {"img_idx", p.img_idx}});
  j = json{{"synthetic_index", s.synthetic_index}, {"frame_count", s.frame_count}, {"picks", picks}};
}

void to_json(json& j, const PairSummary& s) {
  j = json{{"samples", s.samples},
           {"pairs", s.pairs},
           {"pair_yield", s.pair_yield},
           {"real_samples", s.real_samples},
           {"synthetic_samples", s.synthetic_samples},
           {"real_pairs", s.real_pairs},
           {"synthetic_pairs", s.synthetic_pairs},
           {"margin_min", optional_number(s.margin_min)},
           {"margin_max", optional_number(s.margin_max)},
           {"margin_mean", optional_number(s.margin_mean)},
           {"margin_histogram", {{"edges", kMarginBucketEdges}, {"counts", s.margin_histogram}}}};
}

void to_json(json& j, const PreferencePair& p) {
  auto side = [](const CandidateResponse& c) {
    return json{{"cot", c.cot_text}, {"story", c.story_text}, {"reward", c.reward}};
  };
  j = json{{"sample_id", p.sample_id},
           {"images", p.chosen.images},
           {"prompt_meta", {{"is_real", p.chosen.is_real}, {"frame_count", p.chosen.images.size()}}},
           {"chosen", side(p.chosen)},
           {"rejected", side(p.rejected)},
           {"margin", p.margin}};
}

json candidate_to_json(const CandidateResponse& c, int candidate_index) {
  return json{{"sample_id", c.sample_id},   {"candidate_index", candidate_index},
              {"is_real", c.is_real},       {"images", c.images},
              {"cot_text", c.cot_text},     {"story_text", c.story_text},
              {"reward", c.reward}};
}

CandidateResponse candidate_from_json(const json& j) {
  CandidateResponse c;
  j.at("sample_id").get_to(c.sample_id);
  c.is_real = j.value("is_real", true);
  if (j.contains("images")) j.at("images").get_to(c.images);
  c.cot_text = j.value("cot_text", std::string());
  c.story_text = j.value("story_text", std::string());
  j.at("reward").get_to(c.reward);
  return c;
}

Lexicon lexicon_from_json(const json& j) {
  return Lexicon(j.at("character_like").get<std::set<std::string>>(), j.at("object_like").get<std::set<std::string>>());
}

json lexicon_to_json(const Lexicon& lexicon) {
  return json{{"character_like", lexicon.character_like()}, {"object_like", lexicon.object_like()}};
}

void apply_settings(const json& j, Settings& s) {
  if (!j.is_object()) throw std::invalid_argument("settings must be a JSON object");
  auto pair = [&](const char* a_key, const char* b_key, double& a, double& b) {
    bool has_a = j.contains(a_key);
    bool has_b = j.contains(b_key);
    if (has_a) a = j.at(a_key).get<double>();
    if (has_b) b = j.at(b_key).get<double>();
    if (has_a && !has_b) b = 1.0 - a;
    if (has_b && !has_a) a = 1.0 - b;
  };
  pair("w_reid", "w_ground", s.reward.w_reid, s.reward.w_ground);
  pair("alpha", "beta_reid", s.reward.alpha, s.reward.beta_reid);
  pair("gamma", "delta", s.reward.gamma, s.reward.delta);
  if (j.contains("invalid_penalty")) j.at("invalid_penalty").get_to(s.reward.invalid_penalty);
  if (j.contains("lexicon")) s.reward.lexicon = lexicon_from_json(j.at("lexicon"));
  if (j.contains("iou_threshold")) j.at("iou_threshold").get_to(s.match.iou_threshold);
  if (j.contains("require_class_match")) j.at("require_class_match").get_to(s.match.require_class_match);
  if (j.contains("min_margin")) j.at("min_margin").get_to(s.min_margin);
  s.reward.check();
  s.match.check();
}

std::vector<JsonlLine> read_jsonl(std::istream& in) {
  std::vector<JsonlLine> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) {
        lines.push_back({line_no, std::string("line is not a JSON object")});
      } else {
        lines.push_back({line_no, std::move(j)});
      }
    } catch (const json::parse_error& e) {
      lines.push_back({line_no, std::string(e.what())});
    }
  }
  return lines;
}

void write_jsonl_line(std::ostream& out, const json& j) {
  out << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

}  // namespace groundreward
