#include <charconv>

#include "groundreward/story_model.hpp"
#include "text_util.hpp"

namespace groundreward {

namespace {

[[noreturn]] void fail(std::size_t offset, const std::string& reason) {
  throw ParseError(ParseError::Source::Story, offset, reason);
}

std::optional<TagKind> kind_from_name(std::string_view name) {
  if (name == "gdi") return TagKind::ImageSegment;
  if (name == "gdo") return TagKind::EntityRef;
  if (name == "gda") return TagKind::ActionRef;
  if (name == "gdl") return TagKind::LocationRef;
  return std::nullopt;
}

// "image3" -> 3
std::optional<std::size_t> image_ordinal(std::string_view attr) {
  if (!attr.starts_with("image")) return std::nullopt;
  std::string_view digits = attr.substr(5);
  if (digits.empty() || digits.front() == '0') return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

struct TagToken {
  TagKind kind;
  bool closing = false;
  std::string_view body;  // attribute text of an opening tag
  std::size_t end = 0;    // one past '>'
};

// Recognizes "<gdX ...>" / "</gdX>" at `pos`; anything else is literal text.
std::optional<TagToken> scan_tag(std::string_view text, std::size_t pos) {
  std::size_t i = pos + 1;
  bool closing = false;
  if (i < text.size() && text[i] == '/') {
    closing = true;
    ++i;
  }
  if (text.size() < i + 3) return std::nullopt;
  auto kind = kind_from_name(text.substr(i, 3));
  if (!kind) return std::nullopt;
  std::size_t after = i + 3;
  if (after < text.size() && text[after] != '>' && !detail::is_space(text[after])) {
    return std::nullopt;  // e.g. "<gdox"
  }
  std::size_t close = text.find('>', after);
  std::size_t next_open = text.find('<', after);
  if (close == std::string_view::npos || (next_open != std::string_view::npos && next_open < close)) {
    fail(pos, "unterminated <" + std::string(closing ? "/" : "") + std::string(tag_name(*kind)) + "> tag");
  }
  TagToken tok{*kind, closing, detail::trim(text.substr(after, close - after)), close + 1};
  if (closing && !tok.body.empty()) fail(pos, "closing tag with attributes");
  return tok;
}

struct OpenTag {
  std::size_t tag_index;
  std::size_t raw_begin;
};

}  // namespace

GroundedStory parse_story(std::string_view text) {
  GroundedStory story;
  std::vector<OpenTag> stack;
  std::size_t current_frame = 0;
  bool in_segment = false;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t lt = text.find('<', pos);
    if (lt == std::string_view::npos) lt = text.size();
    story.plain_text.append(text.substr(pos, lt - pos));
    if (lt == text.size()) break;

    auto tok = scan_tag(text, lt);
    if (!tok) {
      story.plain_text.push_back('<');
      pos = lt + 1;
      continue;
    }

    if (tok->closing) {
      if (stack.empty()) fail(lt, "</" + std::string(tag_name(tok->kind)) + "> without an opening tag");
      GroundingTag& tag = story.tags[stack.back().tag_index];
      if (tag.kind != tok->kind) {
        fail(lt, "</" + std::string(tag_name(tok->kind)) + "> closes <" +
                     std::string(tag_name(tag.kind)) + ">");
      }
      tag.plain_span.end = story.plain_text.size();
      tag.char_span = {stack.back().raw_begin, tok->end};
      tag.inner_text = story.plain_text.substr(tag.plain_span.begin);
      if (tag.kind == TagKind::ImageSegment) {
        story.segments.push_back({tag.frame_index, tag.inner_text});
        in_segment = false;
      }
      stack.pop_back();
      pos = tok->end;
      continue;
    }

    GroundingTag tag;
    tag.kind = tok->kind;
    tag.plain_span.begin = story.plain_text.size();
    if (!stack.empty()) tag.parent = stack.back().tag_index;
    if (tok->kind == TagKind::ImageSegment) {
      if (!stack.empty()) fail(lt, "<gdi> nested inside another tag");
      auto ordinal = image_ordinal(tok->body);
      if (!ordinal) fail(lt, "<gdi> needs an imageK attribute, got '" + std::string(tok->body) + "'");
      tag.frame_index = *ordinal - 1;
      current_frame = tag.frame_index;
      in_segment = true;
    } else {
      if (!in_segment) {
        fail(lt, "<" + std::string(tag_name(tok->kind)) + "> outside any <gdi> segment");
      }
      tag.frame_index = current_frame;
      auto ids = detail::split_ws(tok->body);
      if (ids.empty()) fail(lt, "<" + std::string(tag_name(tok->kind)) + "> without entity id");
      for (auto id_text : ids) {
        auto id = EntityId::parse(id_text);
        if (!id) fail(lt, "invalid entity id '" + std::string(id_text) + "'");
        tag.entity_ids.push_back(*id);
      }
    }
    stack.push_back({story.tags.size(), lt});
    story.tags.push_back(std::move(tag));
    pos = tok->end;
  }

  if (!stack.empty()) {
    const auto& open = stack.back();
    fail(open.raw_begin, "unclosed <" + std::string(tag_name(story.tags[open.tag_index].kind)) + "> tag");
  }
  return story;
}

namespace {

std::string open_markup(const GroundingTag& tag) {
  std::string out = "<" + std::string(tag_name(tag.kind));
  if (tag.kind == TagKind::ImageSegment) {
    out += " image" + std::to_string(tag.frame_index + 1);
  } else {
    for (const auto& id : tag.entity_ids) out += " " + id.str();
  }
  out += ">";
  return out;
}

}  // namespace

std::string render_story(const GroundedStory& story) {
  const std::string& plain = story.plain_text;
  std::string out;
  std::size_t cursor = 0;
  std::vector<std::size_t> stack;

  auto emit_to = [&](std::size_t offset) {
    if (offset > cursor) {
      out.append(plain, cursor, offset - cursor);
      cursor = offset;
    }
  };
  auto close_top = [&] {
    const GroundingTag& top = story.tags[stack.back()];
    emit_to(top.plain_span.end);
    out += "</" + std::string(tag_name(top.kind)) + ">";
    stack.pop_back();
  };

  for (std::size_t i = 0; i < story.tags.size(); ++i) {
    const GroundingTag& tag = story.tags[i];
    while (!stack.empty() && (!tag.parent || stack.back() != *tag.parent)) close_top();
    emit_to(tag.plain_span.begin);
    out += open_markup(tag);
    stack.push_back(i);
  }
  while (!stack.empty()) close_top();
  emit_to(plain.size());
  return out;
}

}  // namespace groundreward
