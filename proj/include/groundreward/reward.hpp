#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "groundreward/story_model.hpp"
#include "groundreward/validator.hpp"

namespace groundreward {

enum class TokenKind { Pronoun, ProperNoun, Other };
enum class ReferentClass { CharacterLike, ObjectLike, Ambiguous };

struct TokenClass {
  TokenKind kind = TokenKind::Other;
  ReferentClass entity_class = ReferentClass::Ambiguous;
  std::string surface;

  friend bool operator==(const TokenClass&, const TokenClass&) = default;
};

// Closed-class pronoun lexicon. Entries are stored lower-case and matched
// case-insensitively.
class Lexicon {
 public:
  Lexicon(std::set<std::string> character_like, std::set<std::string> object_like);

  static const Lexicon& builtin();

  std::optional<ReferentClass> lookup(std::string_view word) const;
  const std::set<std::string>& character_like() const { return character_like_; }
  const std::set<std::string>& object_like() const { return object_like_; }

  friend bool operator==(const Lexicon&, const Lexicon&) = default;

 private:
  std::set<std::string> character_like_;
  std::set<std::string> object_like_;
};

struct RewardConfig {
  double w_reid = 0.5;
  double w_ground = 0.5;
  double alpha = 0.6;      // character share of the re-identification score
  double beta_reid = 0.4;  // object share of the re-identification score
  double gamma = 0.5;      // character share of the grounding score
  double delta = 0.5;      // object share of the grounding score
  double invalid_penalty = -1.0;
  Lexicon lexicon = Lexicon::builtin();

  // Throws std::invalid_argument when a weight leaves [0,1] or a pair does
  // not sum to one.
  void check() const;
};

struct GroundingCounts {
  int g_char = 0;  // grounded character pronouns
  int p_char = 0;  // grounded character proper nouns
  int t_char = 0;
  int g_obj = 0;
  int p_obj = 0;
  int t_obj = 0;

  friend bool operator==(const GroundingCounts&, const GroundingCounts&) = default;
};

struct RewardBreakdown {
  bool valid = false;
  std::optional<double> r_char;
  std::optional<double> r_obj;
  std::optional<double> r_reid;
  std::optional<double> r_ground;
  double total = -1.0;
  std::vector<Violation> violations;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

TokenClass classify_token(std::string_view surface, bool sentence_initial,
                          const Lexicon& lexicon = Lexicon::builtin());

// Word tokens of a text as byte spans. A word is a maximal run of ASCII
// letters and non-ASCII bytes; apostrophes split words ("it's" -> it, s).
// Tokens after . ! ? or at a segment start are sentence-initial.
struct WordToken {
  Span span;
  bool sentence_initial = false;
};
std::vector<WordToken> word_tokens(std::string_view text, const std::vector<std::size_t>& segment_starts = {});

// Segment start offsets (plain text) of every <gdi> tag, sorted.
std::vector<std::size_t> segment_starts(const GroundedStory& story);

struct TokenContext {
  const GroundingTag* grounding = nullptr;  // innermost enclosing gdo/gda
  bool in_location = false;                 // inside some gdl
};
TokenContext token_context(const GroundedStory& story, Span token);

double compute_r_char(const CotDocument& cot, std::size_t frame_count);
double compute_r_obj(const CotDocument& cot, std::size_t frame_count);
double compute_r_reid(double r_char, double r_obj, bool is_real, const RewardConfig& cfg);

GroundingCounts count_groundings(const GroundedStory& story, const Lexicon& lexicon = Lexicon::builtin());
double compute_r_ground(const GroundingCounts& counts, const RewardConfig& cfg);

// Parses and validates the generated output against the sample's images; an
// invalid output scores cfg.invalid_penalty with the violations attached.
RewardBreakdown compute_reward(const StorySample& sample, std::string_view generated_cot,
                               std::string_view generated_story, const RewardConfig& cfg = {});

// Corpus-level view of a batch of rewards. Component means and both totals
// cover valid candidates only; total_with_penalty averages every candidate,
// counting invalid ones at their penalty.
struct RewardAggregate {
  std::size_t candidates = 0;
  std::size_t valid = 0;
  std::optional<double> r_char;
  std::optional<double> r_obj;
  std::optional<double> r_reid;
  std::optional<double> r_ground;
  std::optional<double> total_per_sample;  // mean of per-candidate totals
  std::optional<double> total_of_means;    // weights applied to the mean components
  std::optional<double> total_with_penalty;

  friend bool operator==(const RewardAggregate&, const RewardAggregate&) = default;
};
RewardAggregate aggregate_rewards(const std::vector<RewardBreakdown>& rewards, const RewardConfig& cfg = {});

}  // namespace groundreward
