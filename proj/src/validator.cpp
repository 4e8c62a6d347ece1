#include "groundreward/validator.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>

#include "text_util.hpp"

namespace groundreward {

namespace {

constexpr std::array<std::pair<RuleId, std::string_view>, 11> kRuleNames = {{
    {RuleId::AnalysisPerImage, "analysis_per_image"},
    {RuleId::CharIdFormat, "char_id_format"},
    {RuleId::ObjIdPrefix, "obj_id_prefix"},
    {RuleId::BboxBounds, "bbox_bounds"},
    {RuleId::Phases, "phases"},
    {RuleId::TableSchema, "table_schema"},
    {RuleId::GdiCount, "gdi_count"},
    {RuleId::StoryIdUnknown, "story_id_unknown"},
    {RuleId::CotParse, "cot_parse"},
    {RuleId::StoryParse, "story_parse"},
    {RuleId::MissingOutput, "missing_output"},
}};

std::string frame_label(std::size_t frame_index) { return "frame " + std::to_string(frame_index + 1); }

void check_analyses(const CotDocument& cot, std::size_t image_count, ValidationReport& report) {
  std::vector<int> seen(image_count, 0);
  for (const auto& fa : cot.frame_analyses) {
    if (fa.frame_index >= image_count) {
      report.add({RuleId::AnalysisPerImage, fa.frame_index, std::nullopt,
                  "analysis for " + frame_label(fa.frame_index) + " but only " +
                      std::to_string(image_count) + " images"});
      continue;
    }
    if (++seen[fa.frame_index] == 2) {
      report.add({RuleId::AnalysisPerImage, fa.frame_index, std::nullopt,
                  "duplicate analysis for " + frame_label(fa.frame_index)});
    }
  }
  for (std::size_t i = 0; i < image_count; ++i) {
    if (seen[i] == 0) {
      report.add({RuleId::AnalysisPerImage, i, std::nullopt, "no analysis section for " + frame_label(i)});
    }
  }
}

void check_id_prefixes(const CotDocument& cot, ValidationReport& report) {
  for (std::size_t i = 0; i < cot.entities.size(); ++i) {
    const EntityId& id = cot.entities[i].id;
    switch (cot.entity_tables[i]) {
      case TableCategory::Characters:
        if (!id.is_character()) {
          report.add({RuleId::CharIdFormat, std::nullopt, id,
                      "character table row uses '" + id.str() + "', expected charN"});
        }
        break;
      case TableCategory::Objects:
        if (id.entity_class() != EntityClass::Object) {
          report.add({RuleId::ObjIdPrefix, std::nullopt, id,
                      "object table row uses '" + id.str() + "', expected objN"});
        }
        break;
      case TableCategory::Settings:
        if (id.entity_class() != EntityClass::Landmark && id.entity_class() != EntityClass::Background) {
          report.add({RuleId::ObjIdPrefix, std::nullopt, id,
                      "setting table row uses '" + id.str() + "', expected lmN or bgN"});
        }
        break;
    }
  }
}

void check_boxes(const CotDocument& cot, const std::vector<ImageMeta>& images, ValidationReport& report) {
  for (const auto& entity : cot.entities) {
    for (const auto& [frame, box] : entity.appearances) {
      if (frame >= images.size()) {
        report.add({RuleId::BboxBounds, frame, entity.id,
                    entity.id.str() + " has a box in " + frame_label(frame) + " beyond the image count"});
      } else if (!box_within(box, images[frame])) {
        report.add({RuleId::BboxBounds, frame, entity.id,
                    entity.id.str() + " box " + std::to_string(box.x1) + "," + std::to_string(box.y1) +
                        "," + std::to_string(box.x2) + "," + std::to_string(box.y2) + " outside " +
                        std::to_string(images[frame].width) + "x" + std::to_string(images[frame].height)});
      }
    }
  }
}

void check_phases(const CotDocument& cot, ValidationReport& report) {
  std::set<std::string> present;
  for (const auto& p : cot.narrative_phases) present.insert(detail::to_lower(detail::trim(p)));
  std::set<std::string> canonical;
  for (auto name : kNarrativePhases) {
    std::string key = detail::to_lower(name);
    canonical.insert(key);
    if (!present.contains(key)) {
      report.add({RuleId::Phases, std::nullopt, std::nullopt, "missing phase '" + std::string(name) + "'"});
    }
  }
  for (const auto& p : cot.narrative_phases) {
    if (!canonical.contains(detail::to_lower(detail::trim(p)))) {
      report.add({RuleId::Phases, std::nullopt, std::nullopt, "unknown phase '" + p + "'"});
    }
  }
}

void check_tables(const CotDocument& cot, ValidationReport& report) {
  for (auto category : {TableCategory::Characters, TableCategory::Objects, TableCategory::Settings}) {
    auto it = std::find_if(cot.raw_tables.begin(), cot.raw_tables.end(),
                           [&](const RawTable& t) { return t.category == category; });
    std::string name(category_name(category));
    if (it == cot.raw_tables.end()) {
      report.add({RuleId::TableSchema, std::nullopt, std::nullopt, "missing " + name + " table"});
      continue;
    }
    if (!it->column(cot_columns::kId)) {
      report.add({RuleId::TableSchema, std::nullopt, std::nullopt, name + " table lacks an ID column"});
    }
    if (!it->column(cot_columns::kName) && !it->column(cot_columns::kDescription)) {
      report.add({RuleId::TableSchema, std::nullopt, std::nullopt,
                  name + " table lacks a Name or Description column"});
    }
    if (!it->column(cot_columns::kBoxes)) {
      report.add({RuleId::TableSchema, std::nullopt, std::nullopt,
                  name + " table lacks a Bounding Boxes column"});
    }
  }
}

}  // namespace

std::string_view rule_name(RuleId rule) {
  for (const auto& [r, name] : kRuleNames) {
    if (r == rule) return name;
  }
  return "";
}

std::optional<RuleId> rule_from_name(std::string_view name) {
  for (const auto& [r, n] : kRuleNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

void ValidationReport::add(Violation v) {
  violations.push_back(std::move(v));
  valid = false;
}

void ValidationReport::merge(const ValidationReport& other) {
  for (const auto& v : other.violations) add(v);
}

bool ValidationReport::has(RuleId rule) const {
  return std::any_of(violations.begin(), violations.end(),
                     [rule](const Violation& v) { return v.rule_id == rule; });
}

ValidationReport validate_cot(const CotDocument& cot, const std::vector<ImageMeta>& images) {
  ValidationReport report;
  check_analyses(cot, images.size(), report);
  check_id_prefixes(cot, report);
  check_boxes(cot, images, report);
  check_phases(cot, report);
  check_tables(cot, report);
  return report;
}

ValidationReport validate_story(const GroundedStory& story, const CotDocument& cot,
                                const std::vector<ImageMeta>& images) {
  ValidationReport report;
  std::size_t gdi_count = 0;
  for (const auto& tag : story.tags) {
    if (tag.kind != TagKind::ImageSegment) continue;
    ++gdi_count;
    if (tag.frame_index >= images.size()) {
      report.add({RuleId::GdiCount, tag.frame_index, std::nullopt,
                  "<gdi image" + std::to_string(tag.frame_index + 1) + "> but only " +
                      std::to_string(images.size()) + " images"});
    }
  }
  if (gdi_count != images.size()) {
    report.add({RuleId::GdiCount, std::nullopt, std::nullopt,
                std::to_string(gdi_count) + " <gdi> segments for " + std::to_string(images.size()) +
                    " images"});
  }

  std::set<EntityId> reported;
  for (const auto& tag : story.tags) {
    for (const auto& id : tag.entity_ids) {
      if (cot.find(id) || !reported.insert(id).second) continue;
      report.add({RuleId::StoryIdUnknown, tag.frame_index, id,
                  "<" + std::string(tag_name(tag.kind)) + "> references " + id.str() +
                      ", which is not in the chain-of-thought tables"});
    }
  }
  return report;
}

ValidationReport validate_output(const std::vector<ImageMeta>& images, std::string_view cot_text,
                                 std::string_view story_text, CotDocument* cot_out,
                                 GroundedStory* story_out) {
  ValidationReport report;
  std::optional<CotDocument> cot;
  std::optional<GroundedStory> story;
  try {
    cot = parse_cot(cot_text, images);
  } catch (const ParseError& e) {
    report.add({RuleId::CotParse, std::nullopt, std::nullopt, e.what()});
  }
  try {
    story = parse_story(story_text);
  } catch (const ParseError& e) {
    report.add({RuleId::StoryParse, std::nullopt, std::nullopt, e.what()});
  }
  if (cot) report.merge(validate_cot(*cot, images));
  if (cot && story) report.merge(validate_story(*story, *cot, images));
  if (cot && cot_out) *cot_out = std::move(*cot);
  if (story && story_out) *story_out = std::move(*story);
  return report;
}

double well_structured_rate(const std::vector<StorySample>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("well_structured_rate: empty corpus");
  std::size_t ok = 0;
  for (const auto& sample : corpus) {
    if (validate_output(sample.images, sample.cot_text, sample.story_text).valid) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(corpus.size());
}

}  // namespace groundreward
