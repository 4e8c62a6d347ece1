#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundreward/story_model.hpp"

namespace groundreward {

enum class RuleId {
  AnalysisPerImage,  // one CoT analysis section per input image
  CharIdFormat,      // character table rows use charN ids
  ObjIdPrefix,       // object rows use objN, setting rows use lmN / bgN
  BboxBounds,        // every box lies inside its frame
  Phases,            // the five narrative phases, nothing else
  TableSchema,       // the three tables exist with the required columns
  GdiCount,          // one <gdi imageK> segment per input image
  StoryIdUnknown,    // story ids are a subset of the CoT ids
  CotParse,          // CoT text could not be parsed
  StoryParse,        // story markup could not be parsed
  MissingOutput,     // no generated output was supplied for a sample
};

std::string_view rule_name(RuleId rule);
std::optional<RuleId> rule_from_name(std::string_view name);

struct Violation {
  RuleId rule_id;
  std::optional<std::size_t> frame_index;
  std::optional<EntityId> entity_id;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Violation> violations;

  void add(Violation v);
  void merge(const ValidationReport& other);
  bool has(RuleId rule) const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

inline constexpr std::string_view kNarrativePhases[] = {
    "Introduction", "Development", "Conflict", "Turning Point", "Conclusion"};

// All violations are accumulated; checks run in rule order.
ValidationReport validate_cot(const CotDocument& cot, const std::vector<ImageMeta>& images);

ValidationReport validate_story(const GroundedStory& story, const CotDocument& cot,
                                const std::vector<ImageMeta>& images);

// Parse and validate CoT plus story against the images. Parse failures are
// reported as CotParse / StoryParse violations. On success the parsed
// documents are written to the optional out-parameters.
ValidationReport validate_output(const std::vector<ImageMeta>& images, std::string_view cot_text,
                                 std::string_view story_text, CotDocument* cot_out = nullptr,
                                 GroundedStory* story_out = nullptr);

// Fraction of samples whose own cot_text / story_text parse and validate.
// Throws std::invalid_argument on an empty corpus.
double well_structured_rate(const std::vector<StorySample>& corpus);

}  // namespace groundreward
