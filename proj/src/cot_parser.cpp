#include <array>
#include <charconv>

#include "groundreward/story_model.hpp"
#include "text_util.hpp"

namespace groundreward {

using detail::iequals;
using detail::trim;

std::optional<std::size_t> RawTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (iequals(columns[i], name)) return i;
  }
  return std::nullopt;
}

namespace {

enum class Section { None, Frame, Table, Phases };

[[noreturn]] void fail(std::size_t line, const std::string& reason) {
  throw ParseError(ParseError::Source::Cot, line, reason);
}

std::optional<long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// "Frame 3" / "Image 3" -> 3
std::optional<std::size_t> frame_heading(std::string_view heading) {
  for (std::string_view word : {std::string_view("frame"), std::string_view("image")}) {
    if (heading.size() > word.size() && iequals(heading.substr(0, word.size()), word) &&
        detail::is_space(heading[word.size()])) {
      auto n = parse_int(heading.substr(word.size()));
      if (!n) return std::nullopt;
      return static_cast<std::size_t>(*n < 1 ? 0 : *n);
    }
  }
  return std::nullopt;
}

std::optional<TableCategory> table_heading(std::string_view heading) {
  if (iequals(heading, "characters")) return TableCategory::Characters;
  if (iequals(heading, "objects")) return TableCategory::Objects;
  if (iequals(heading, "settings") || iequals(heading, "setting")) return TableCategory::Settings;
  return std::nullopt;
}

std::vector<std::string> table_cells(std::string_view line) {
  line = trim(line);
  line.remove_prefix(1);  // leading '|'
  if (!line.empty() && line.back() == '|') line.remove_suffix(1);
  std::vector<std::string> cells;
  for (auto part : detail::split(line, '|')) cells.emplace_back(trim(part));
  return cells;
}

bool is_separator_row(const std::vector<std::string>& cells) {
  if (cells.empty()) return false;
  for (const auto& c : cells) {
    if (c.empty() || c.find_first_not_of("-: ") != std::string::npos) return false;
  }
  return true;
}

EntityId parse_id_or_fail(std::string_view text, std::size_t line) {
  auto id = EntityId::parse(trim(text));
  if (!id) fail(line, "invalid entity id '" + std::string(trim(text)) + "'");
  return *id;
}

// "frame_1: 10,20,110,220; frame_3: 5,5,50,60"
std::map<std::size_t, BoundingBox> parse_boxes(std::string_view cell, std::size_t line) {
  std::map<std::size_t, BoundingBox> boxes;
  if (trim(cell).empty()) return boxes;
  for (auto entry : detail::split(cell, ';')) {
    entry = trim(entry);
    if (entry.empty()) continue;
    auto colon = entry.find(':');
    if (colon == std::string_view::npos) fail(line, "bounding box entry without ':'");
    std::string_view key = trim(entry.substr(0, colon));
    if (key.size() <= 6 || !iequals(key.substr(0, 6), "frame_")) {
      fail(line, "bounding box key must be frame_k, got '" + std::string(key) + "'");
    }
    auto k = parse_int(key.substr(6));
    if (!k || *k < 1) fail(line, "bad frame number in '" + std::string(key) + "'");
    auto coords = detail::split(entry.substr(colon + 1), ',');
    if (coords.size() != 4) fail(line, "bounding box needs 4 coordinates");
    std::array<int, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
      auto c = parse_int(coords[i]);
      if (!c) fail(line, "non-numeric coordinate '" + std::string(trim(coords[i])) + "'");
      v[i] = static_cast<int>(*c);
    }
    auto frame = static_cast<std::size_t>(*k - 1);
    if (!boxes.emplace(frame, BoundingBox{v[0], v[1], v[2], v[3]}).second) {
      fail(line, "duplicate box for " + std::string(key));
    }
  }
  return boxes;
}

class CotParser {
 public:
  CotDocument run(std::string_view text) {
    if (trim(text).empty()) fail(1, "empty chain-of-thought");
    std::size_t line_no = 0;
    for (auto line : detail::split(text, '\n')) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      handle_line(line, line_no);
    }
    return std::move(doc_);
  }

 private:
  void handle_line(std::string_view raw, std::size_t line_no) {
    std::string_view line = trim(raw);
    if (line.starts_with('#')) {
      start_section(line, line_no);
      return;
    }
    switch (section_) {
      case Section::Frame:
        frame_line(line, line_no);
        break;
      case Section::Table:
        table_line(line, line_no);
        break;
      case Section::Phases:
        phase_line(line);
        break;
      case Section::None:
        break;
    }
  }

  void start_section(std::string_view line, std::size_t line_no) {
    std::string_view heading = trim(line.substr(line.find_first_not_of('#')));
    if (auto frame = frame_heading(heading)) {
      if (*frame == 0) fail(line_no, "frame numbers start at 1");
      section_ = Section::Frame;
      doc_.frame_analyses.push_back({*frame - 1, line_no, {}});
      return;
    }
    if (auto category = table_heading(heading)) {
      for (const auto& t : doc_.raw_tables) {
        if (t.category == *category) {
          fail(line_no, "duplicate " + std::string(category_name(*category)) + " table");
        }
      }
      section_ = Section::Table;
      doc_.raw_tables.push_back({*category, line_no, {}, {}});
      return;
    }
    if (iequals(heading, "narrative phases") || iequals(heading, "narrative structure")) {
      section_ = Section::Phases;
      return;
    }
    section_ = Section::None;
  }

  void frame_line(std::string_view line, std::size_t line_no) {
    auto colon = line.find(':');
    if (colon == std::string_view::npos || !iequals(trim(line.substr(0, colon)), "entities")) {
      return;
    }
    auto& ids = doc_.frame_analyses.back().referenced_entity_ids;
    for (auto part : detail::split(line.substr(colon + 1), ',')) {
      if (trim(part).empty()) continue;
      ids.push_back(parse_id_or_fail(part, line_no));
    }
  }

  void table_line(std::string_view line, std::size_t line_no) {
    if (!line.starts_with('|')) return;
    RawTable& table = doc_.raw_tables.back();
    auto cells = table_cells(line);
    if (table.columns.empty()) {
      table.columns = std::move(cells);
      table.line = line_no;
      return;
    }
    if (table.rows.empty() && is_separator_row(cells)) return;
    if (cells.size() != table.columns.size()) {
      fail(line_no, "row has " + std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(table.columns.size()));
    }
    add_entity(table, cells, line_no);
    table.rows.push_back(std::move(cells));
  }

  void add_entity(const RawTable& table, const std::vector<std::string>& cells, std::size_t line_no) {
    auto id_col = table.column(cot_columns::kId);
    if (!id_col) return;  // schema problem, reported by the validator
    EntityRecord rec;
    rec.id = parse_id_or_fail(cells[*id_col], line_no);
    if (doc_.find(rec.id)) fail(line_no, "duplicate entity id '" + rec.id.str() + "'");
    auto name_col = table.column(cot_columns::kName);
    if (!name_col) name_col = table.column(cot_columns::kDescription);
    auto box_col = table.column(cot_columns::kBoxes);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == *id_col) continue;
      if (name_col && i == *name_col) {
        rec.display_name = cells[i];
      } else if (box_col && i == *box_col) {
        rec.appearances = parse_boxes(cells[i], line_no);
      } else {
        rec.attributes[table.columns[i]] = cells[i];
      }
    }
    doc_.entities.push_back(std::move(rec));
    doc_.entity_tables.push_back(table.category);
  }

  void phase_line(std::string_view line) {
    std::string_view item;
    if (line.starts_with("- ") || line.starts_with("* ")) {
      item = line.substr(2);
    } else {
      // "1. Introduction: ..."
      auto dot = line.find(". ");
      if (dot == std::string_view::npos || dot == 0 ||
          line.substr(0, dot).find_first_not_of("0123456789") != std::string_view::npos) {
        return;
      }
      item = line.substr(dot + 2);
    }
    auto colon = item.find(':');
    std::string_view name = trim(colon == std::string_view::npos ? item : item.substr(0, colon));
    // Markdown emphasis around the phase name.
    while (!name.empty() && name.front() == '*') name.remove_prefix(1);
    while (!name.empty() && name.back() == '*') name.remove_suffix(1);
    name = trim(name);
    if (!name.empty()) doc_.narrative_phases.emplace_back(name);
  }

  CotDocument doc_;
  Section section_ = Section::None;
};

}  // namespace

CotDocument parse_cot(std::string_view cot_text, [[maybe_unused]] const std::vector<ImageMeta>& images) {
  return CotParser().run(cot_text);
}

}  // namespace groundreward
