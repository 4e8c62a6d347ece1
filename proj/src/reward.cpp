#include "groundreward/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "text_util.hpp"

namespace groundreward {

Lexicon::Lexicon(std::set<std::string> character_like, std::set<std::string> object_like) {
  for (const auto& w : character_like) character_like_.insert(detail::to_lower(w));
  for (const auto& w : object_like) object_like_.insert(detail::to_lower(w));
  for (const auto& w : object_like_) {
    if (character_like_.contains(w)) {
      throw std::invalid_argument("lexicon word '" + w + "' is both character-like and object-like");
    }
  }
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lexicon(
      {"he", "she", "they", "his", "her", "their", "him", "them", "hers", "theirs", "i", "we", "you", "my",
       "our", "your", "me", "us"},
      {"it", "its"});
  return lexicon;
}

std::optional<ReferentClass> Lexicon::lookup(std::string_view word) const {
  std::string key = detail::to_lower(word);
  if (character_like_.contains(key)) return ReferentClass::CharacterLike;
  if (object_like_.contains(key)) return ReferentClass::ObjectLike;
  return std::nullopt;
}

void RewardConfig::check() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in [0,1]");
  };
  unit(w_reid, "w_reid");
  unit(w_ground, "w_ground");
  unit(alpha, "alpha");
  unit(beta_reid, "beta_reid");
  unit(gamma, "gamma");
  unit(delta, "delta");
  auto sums_to_one = [](double a, double b, const char* what) {
    if (std::abs(a + b - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + " must sum to 1");
  };
  sums_to_one(w_reid, w_ground, "w_reid + w_ground");
  sums_to_one(alpha, beta_reid, "alpha + beta_reid");
  sums_to_one(gamma, delta, "gamma + delta");
}

TokenClass classify_token(std::string_view surface, bool sentence_initial, const Lexicon& lexicon) {
  TokenClass out;
  out.surface = std::string(surface);
  if (surface.empty()) return out;
  if (auto cls = lexicon.lookup(surface)) {
    out.kind = TokenKind::Pronoun;
    out.entity_class = *cls;
    return out;
  }
  if (!sentence_initial && std::isupper(static_cast<unsigned char>(surface.front()))) {
    out.kind = TokenKind::ProperNoun;
    out.entity_class = ReferentClass::Ambiguous;
  }
  return out;
}

namespace {

bool is_word_byte(unsigned char c) { return std::isalpha(c) || c >= 0x80; }

bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?'; }

// U+2019 RIGHT SINGLE QUOTATION MARK, used as an apostrophe.
bool curly_apostrophe_at(std::string_view text, std::size_t i) {
  return text.substr(i, 3) == "\xE2\x80\x99";
}

}  // namespace

std::vector<WordToken> word_tokens(std::string_view text, const std::vector<std::size_t>& segment_starts) {
  std::vector<WordToken> tokens;
  bool boundary = true;
  std::size_t next_segment = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (next_segment < segment_starts.size() && segment_starts[next_segment] <= i) {
      boundary = true;
      ++next_segment;
    }
    auto c = static_cast<unsigned char>(text[i]);
    if (!is_word_byte(c) || curly_apostrophe_at(text, i)) {
      if (is_sentence_end(text[i])) boundary = true;
      i += curly_apostrophe_at(text, i) ? 3 : 1;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j])) && !curly_apostrophe_at(text, j)) {
      ++j;
    }
    tokens.push_back({{i, j}, boundary});
    boundary = false;
    i = j;
  }
  return tokens;
}

namespace {

template <typename Pred>
double persistence_score(const CotDocument& cot, std::size_t frame_count, Pred in_set) {
  if (frame_count == 0) throw std::invalid_argument("frame_count must be >= 1");
  std::size_t members = 0;
  std::size_t frames = 0;
  for (const auto& e : cot.entities) {
    if (!in_set(e.id)) continue;
    ++members;
    frames += static_cast<std::size_t>(
        std::count_if(e.appearances.begin(), e.appearances.end(),
                      [&](const auto& kv) { return kv.first < frame_count; }));
  }
  if (members == 0) return 0.0;
  double ratio = static_cast<double>(frames) / (static_cast<double>(members) * static_cast<double>(frame_count));
  return std::min(1.0, ratio);
}

}  // namespace

double compute_r_char(const CotDocument& cot, std::size_t frame_count) {
  return persistence_score(cot, frame_count, [](const EntityId& id) { return id.is_character(); });
}

double compute_r_obj(const CotDocument& cot, std::size_t frame_count) {
  return persistence_score(cot, frame_count, [](const EntityId& id) { return id.is_object_like(); });
}

double compute_r_reid(double r_char, double r_obj, bool is_real, const RewardConfig& cfg) {
  double persistence = cfg.alpha * r_char + cfg.beta_reid * r_obj;
  return is_real ? persistence : 1.0 - persistence;
}

std::vector<std::size_t> segment_starts(const GroundedStory& story) {
  std::vector<std::size_t> starts;
  for (const auto& tag : story.tags) {
    if (tag.kind == TagKind::ImageSegment) starts.push_back(tag.plain_span.begin);
  }
  std::sort(starts.begin(), starts.end());
  return starts;
}

TokenContext token_context(const GroundedStory& story, Span token) {
  TokenContext ctx;
  for (const auto& tag : story.tags) {
    if (tag.plain_span.begin > token.begin) break;
    if (token.end > tag.plain_span.end) continue;
    if (tag.kind == TagKind::EntityRef || tag.kind == TagKind::ActionRef) {
      ctx.grounding = &tag;  // later tags are nested deeper
    } else if (tag.kind == TagKind::LocationRef) {
      ctx.in_location = true;
    }
  }
  return ctx;
}

GroundingCounts count_groundings(const GroundedStory& story, const Lexicon& lexicon) {
  GroundingCounts counts;
  const std::string_view text = story.plain_text;
  for (const auto& tok : word_tokens(text, segment_starts(story))) {
    TokenClass cls = classify_token(text.substr(tok.span.begin, tok.span.end - tok.span.begin),
                                    tok.sentence_initial, lexicon);
    if (cls.kind == TokenKind::Other) continue;

    TokenContext ctx = token_context(story, tok.span);
    bool pronoun = cls.kind == TokenKind::Pronoun;
    if (ctx.grounding) {
      const auto& ids = ctx.grounding->entity_ids;
      bool character = std::any_of(ids.begin(), ids.end(), [](const EntityId& id) { return id.is_character(); });
      if (character) {
        ++(pronoun ? counts.g_char : counts.p_char);
        ++counts.t_char;
      } else {
        ++(pronoun ? counts.g_obj : counts.p_obj);
        ++counts.t_obj;
      }
    } else if (!ctx.in_location) {
      // Ambiguous proper nouns count on the character side.
      if (cls.entity_class == ReferentClass::ObjectLike) {
        ++counts.t_obj;
      } else {
        ++counts.t_char;
      }
    }
  }
  return counts;
}

double compute_r_ground(const GroundingCounts& counts, const RewardConfig& cfg) {
  auto share = [](int grounded, int total) {
    return total == 0 ? 1.0 : static_cast<double>(grounded) / static_cast<double>(total);
  };
  return cfg.gamma * share(counts.g_char + counts.p_char, counts.t_char) +
         cfg.delta * share(counts.g_obj + counts.p_obj, counts.t_obj);
}

RewardBreakdown compute_reward(const StorySample& sample, std::string_view generated_cot,
                               std::string_view generated_story, const RewardConfig& cfg) {
  RewardBreakdown out;
  CotDocument cot;
  GroundedStory story;
  ValidationReport report;
  if (sample.images.empty()) {
    report.add({RuleId::AnalysisPerImage, std::nullopt, std::nullopt, "sample has no images"});
  } else {
    report = validate_output(sample.images, generated_cot, generated_story, &cot, &story);
  }
  if (!report.valid) {
    out.valid = false;
    out.total = cfg.invalid_penalty;
    out.violations = std::move(report.violations);
    return out;
  }
  std::size_t frames = sample.images.size();
  out.valid = true;
  out.r_char = compute_r_char(cot, frames);
  out.r_obj = compute_r_obj(cot, frames);
  out.r_reid = compute_r_reid(*out.r_char, *out.r_obj, sample.is_real, cfg);
  out.r_ground = compute_r_ground(count_groundings(story, cfg.lexicon), cfg);
  out.total = cfg.w_reid * *out.r_reid + cfg.w_ground * *out.r_ground;
  return out;
}

RewardAggregate aggregate_rewards(const std::vector<RewardBreakdown>& rewards, const RewardConfig& cfg) {
  RewardAggregate agg;
  agg.candidates = rewards.size();
  double sums[5] = {};
  double all_total = 0.0;
  for (const auto& r : rewards) {
    all_total += r.total;
    if (!r.valid) continue;
    ++agg.valid;
    sums[0] += r.r_char.value_or(0.0);
    sums[1] += r.r_obj.value_or(0.0);
    sums[2] += r.r_reid.value_or(0.0);
    sums[3] += r.r_ground.value_or(0.0);
    sums[4] += r.total;
  }
  if (agg.candidates > 0) agg.total_with_penalty = all_total / static_cast<double>(agg.candidates);
  if (agg.valid == 0) return agg;
  double n = static_cast<double>(agg.valid);
  agg.r_char = sums[0] / n;
  agg.r_obj = sums[1] / n;
  agg.r_reid = sums[2] / n;
  agg.r_ground = sums[3] / n;
  agg.total_per_sample = sums[4] / n;
  agg.total_of_means = cfg.w_reid * *agg.r_reid + cfg.w_ground * *agg.r_ground;
  return agg;
}

}  // namespace groundreward
