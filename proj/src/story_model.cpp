#include "groundreward/story_model.hpp"

#include <array>
#include <charconv>

namespace groundreward {

namespace {

constexpr std::array<std::pair<EntityClass, std::string_view>, 4> kPrefixes = {{
    {EntityClass::Character, "char"},
    {EntityClass::Object, "obj"},
    {EntityClass::Landmark, "lm"},
    {EntityClass::Background, "bg"},
}};

std::string describe(ParseError::Source source, std::size_t position, const std::string& reason) {
  if (source == ParseError::Source::Cot) {
    return "cot line " + std::to_string(position) + ": " + reason;
  }
  return "story offset " + std::to_string(position) + ": " + reason;
}

}  // namespace

EntityId::EntityId(EntityClass cls, unsigned ordinal) : class_(cls), ordinal_(ordinal) {
  if (ordinal == 0) throw std::invalid_argument("entity ordinal must be >= 1");
}

std::optional<EntityId> EntityId::parse(std::string_view text) {
  for (const auto& [cls, prefix] : kPrefixes) {
    if (!text.starts_with(prefix)) continue;
    std::string_view digits = text.substr(prefix.size());
    // "char" and "obj" share no prefix with each other, so the first hit decides.
    if (digits.empty() || digits.size() > 9 || digits.front() == '0') return std::nullopt;
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
    return EntityId(cls, value);
  }
  return std::nullopt;
}

std::string EntityId::str() const {
  return std::string(prefix_of(class_)) + std::to_string(ordinal_);
}

std::string_view prefix_of(EntityClass cls) {
  for (const auto& [c, prefix] : kPrefixes) {
    if (c == cls) return prefix;
  }
  return "";
}

bool box_within(const BoundingBox& box, const ImageMeta& image) {
  return box.x1 >= 0 && box.y1 >= 0 && box.x1 < box.x2 && box.y1 < box.y2 &&
         box.x2 <= image.width && box.y2 <= image.height;
}

std::string_view category_name(TableCategory category) {
  switch (category) {
    case TableCategory::Characters:
      return "characters";
    case TableCategory::Objects:
      return "objects";
    case TableCategory::Settings:
      return "settings";
  }
  return "";
}

const EntityRecord* CotDocument::find(const EntityId& id) const {
  for (const auto& e : entities) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::string_view tag_name(TagKind kind) {
  switch (kind) {
    case TagKind::ImageSegment:
      return "gdi";
    case TagKind::EntityRef:
      return "gdo";
    case TagKind::ActionRef:
      return "gda";
    case TagKind::LocationRef:
      return "gdl";
  }
  return "";
}

ParseError::ParseError(Source source, std::size_t position, const std::string& reason)
    : std::runtime_error(describe(source, position, reason)),
      source_(source),
      position_(position),
      reason_(reason) {}

}  // namespace groundreward
