#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace groundreward {

enum class EntityClass { Character, Object, Landmark, Background };

// Persistent entity identifier, canonical text form "<prefix><ordinal>" with
// prefix in {char, obj, lm, bg} and ordinal >= 1 without leading zeros.
class EntityId {
 public:
  EntityId() = default;
  EntityId(EntityClass cls, unsigned ordinal);

  // Returns nullopt for anything that is not a canonical id.
  static std::optional<EntityId> parse(std::string_view text);

  EntityClass entity_class() const { return class_; }
  unsigned ordinal() const { return ordinal_; }
  bool is_character() const { return class_ == EntityClass::Character; }
  // obj, lm and bg all count as the object side of the reward.
  bool is_object_like() const { return !is_character(); }

  std::string str() const;

  friend auto operator<=>(const EntityId&, const EntityId&) = default;

 private:
  EntityClass class_ = EntityClass::Character;
  unsigned ordinal_ = 1;
};

std::string_view prefix_of(EntityClass cls);

struct BoundingBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct ImageMeta {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::string source_story_id;

  friend bool operator==(const ImageMeta&, const ImageMeta&) = default;
};

// True when 0 <= x1 < x2 <= width and 0 <= y1 < y2 <= height.
bool box_within(const BoundingBox& box, const ImageMeta& image);

struct EntityRecord {
  EntityId id;
  std::string display_name;
  std::map<std::string, std::string> attributes;
  std::map<std::size_t, BoundingBox> appearances;  // frame index -> box

  friend bool operator==(const EntityRecord&, const EntityRecord&) = default;
};

struct FrameAnalysis {
  std::size_t frame_index = 0;
  std::size_t line = 0;  // 1-based line of the section header
  std::vector<EntityId> referenced_entity_ids;

  friend bool operator==(const FrameAnalysis&, const FrameAnalysis&) = default;
};

enum class TableCategory { Characters, Objects, Settings };

std::string_view category_name(TableCategory category);

// Column headers of the per-category entity tables (matched case-insensitively).
namespace cot_columns {
inline constexpr std::string_view kId = "ID";
inline constexpr std::string_view kName = "Name";
inline constexpr std::string_view kDescription = "Description";
inline constexpr std::string_view kBoxes = "Bounding Boxes";
}  // namespace cot_columns

struct RawTable {
  TableCategory category = TableCategory::Characters;
  std::size_t line = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;

  friend bool operator==(const RawTable&, const RawTable&) = default;
};

struct CotDocument {
  std::vector<FrameAnalysis> frame_analyses;
  std::vector<EntityRecord> entities;
  // Which table each entity row came from, parallel to `entities`.
  std::vector<TableCategory> entity_tables;
  std::vector<std::string> narrative_phases;
  std::vector<RawTable> raw_tables;

  const EntityRecord* find(const EntityId& id) const;

  friend bool operator==(const CotDocument&, const CotDocument&) = default;
};

enum class TagKind { ImageSegment, EntityRef, ActionRef, LocationRef };

// "gdi", "gdo", "gda", "gdl"
std::string_view tag_name(TagKind kind);

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool contains(std::size_t pos) const { return pos >= begin && pos < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct GroundingTag {
  TagKind kind = TagKind::ImageSegment;
  std::vector<EntityId> entity_ids;  // empty for gdi
  std::string inner_text;            // markup stripped
  Span char_span;                    // whole element in the raw story text
  Span plain_span;                   // inner text in GroundedStory::plain_text
  std::size_t frame_index = 0;
  std::optional<std::size_t> parent;  // index of the enclosing tag

  friend bool operator==(const GroundingTag&, const GroundingTag&) = default;
};

struct StorySegment {
  std::size_t frame_index = 0;
  std::string text;

  friend bool operator==(const StorySegment&, const StorySegment&) = default;
};

struct GroundedStory {
  std::vector<StorySegment> segments;
  std::vector<GroundingTag> tags;  // document order of the opening tags
  std::string plain_text;

  friend bool operator==(const GroundedStory&, const GroundedStory&) = default;
};

struct StorySample {
  std::string sample_id;
  bool is_real = true;
  std::vector<ImageMeta> images;
  std::string cot_text;
  std::string story_text;

  friend bool operator==(const StorySample&, const StorySample&) = default;
};

// Raised by the CoT and story parsers. `position` is a 1-based line for CoT
// input and a 0-based byte offset for story input.
class ParseError : public std::runtime_error {
 public:
  enum class Source { Cot, Story };

  ParseError(Source source, std::size_t position, const std::string& reason);

  Source source() const { return source_; }
  std::size_t position() const { return position_; }
  const std::string& reason() const { return reason_; }

 private:
  Source source_;
  std::size_t position_;
  std::string reason_;
};

CotDocument parse_cot(std::string_view cot_text, const std::vector<ImageMeta>& images);

GroundedStory parse_story(std::string_view story_text);

// Canonical markup: "<gdi imageK>", "<gdo id1 id2>", closing tags "</gdo>".
std::string render_story(const GroundedStory& story);

}  // namespace groundreward
