#pragma once

// Builders for CoT / story text and randomized corpora used across tests.

#include <algorithm>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "groundreward/story_model.hpp"
#include "groundreward/validator.hpp"

namespace fixtures {

using groundreward::BoundingBox;
using groundreward::ImageMeta;
using groundreward::StorySample;

inline const std::vector<std::string>& five_phases() {
  static const std::vector<std::string> phases{"Introduction", "Development", "Conflict", "Turning Point",
                                               "Conclusion"};
  return phases;
}

inline std::vector<ImageMeta> images(std::size_t n, int width = 640, int height = 480,
                                     const std::string& story = "story") {
  std::vector<ImageMeta> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({story + "_img" + std::to_string(i + 1), width, height, story});
  }
  return out;
}

// Box k of a small deterministic family that fits a 640x480 frame.
inline BoundingBox box(int k) { return {10 + 7 * k, 20 + 5 * k, 110 + 7 * k, 220 + 5 * k}; }

struct Ent {
  std::string id;
  std::string name;
  std::map<std::size_t, BoundingBox> boxes;  // 0-based frame -> box
};

// CoT text in the markdown wire format. Every switch defaults to a
// conforming document so single-rule violations are one assignment away.
struct Cot {
  std::size_t frames = 3;
  std::vector<Ent> characters;
  std::vector<Ent> objects;
  std::vector<Ent> settings;
  std::vector<std::string> phases = five_phases();
  std::vector<std::size_t> analysis_frames;  // 1-based, empty means 1..frames
  bool settings_table = true;
  bool boxes_column = true;

  std::string text() const {
    std::string out = "## Image Analysis\n\n";
    std::vector<std::size_t> sections = analysis_frames;
    if (sections.empty()) {
      for (std::size_t k = 1; k <= frames; ++k) sections.push_back(k);
    }
    for (std::size_t k : sections) {
      out += "### Frame " + std::to_string(k) + "\n";
      std::string ids;
      for (const auto* group : {&characters, &objects, &settings}) {
        for (const auto& e : *group) {
          if (!e.boxes.contains(k - 1)) continue;
          if (!ids.empty()) ids += ", ";
          ids += e.id;
        }
      }
      out += "Entities: " + ids + "\n\n";
    }
    table(out, "Characters", characters, true);
    table(out, "Objects", objects, true);
    table(out, "Settings", settings, settings_table);
    out += "### Narrative Phases\n";
    for (const auto& p : phases) out += "- " + p + ": the story moves on.\n";
    return out;
  }

 private:
  void table(std::string& out, const char* title, const std::vector<Ent>& rows, bool present) const {
    if (!present) return;
    out += std::string("### ") + title + "\n";
    out += boxes_column ? "| ID | Name | Bounding Boxes |\n|----|------|----------------|\n"
                        : "| ID | Name |\n|----|------|\n";
    for (const auto& e : rows) {
      out += "| " + e.id + " | " + e.name + " |";
      if (boxes_column) {
        std::string cell;
        for (const auto& [frame, b] : e.boxes) {
          if (!cell.empty()) cell += "; ";
          cell += "frame_" + std::to_string(frame + 1) + ": " + std::to_string(b.x1) + "," + std::to_string(b.y1) +
                  "," + std::to_string(b.x2) + "," + std::to_string(b.y2);
        }
        out += " " + cell + " |";
      }
      out += "\n";
    }
    out += "\n";
  }
};

inline Ent everywhere(const std::string& id, const std::string& name, std::size_t frames) {
  Ent e{id, name, {}};
  for (std::size_t f = 0; f < frames; ++f) e.boxes[f] = box(static_cast<int>(f));
  return e;
}

// <gdi image1>seg1</gdi>\n<gdi image2>seg2</gdi>...
inline std::string story(const std::vector<std::string>& segments) {
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) out += "\n";
    out += "<gdi image" + std::to_string(i + 1) + ">" + segments[i] + "</gdi>";
  }
  return out;
}

// A conforming three-frame sample: two characters, one object, one landmark.
struct Conforming {
  Cot cot;
  std::vector<std::string> segments;
  std::vector<ImageMeta> imgs = images(3);

  Conforming() {
    cot.frames = 3;
    cot.characters = {everywhere("char1", "Mara", 3), Ent{"char2", "Tomas", {{0, box(1)}, {2, box(2)}}}};
    cot.objects = {Ent{"obj1", "lantern", {{1, box(3)}}}};
    cot.settings = {everywhere("lm1", "bridge", 3)};
    segments = {
        "<gdo char1>Mara</gdo> <gda char1>waits</gda> on <gdl lm1>the bridge</gdl> with <gdo char2>Tomas</gdo>.",
        "<gdo char1>She</gdo> lifts <gdo obj1>the lantern</gdo> and <gdo obj1>it</gdo> glows.",
        "<gdo char2>He</gdo> <gda char2>laughs</gda> as <gdo char1>she</gdo> crosses <gdl lm1>the bridge</gdl>.",
    };
  }
  std::string cot_text() const { return cot.text(); }
  std::string story_text() const { return story(segments); }
};

inline const char* kNames[] = {"Mara", "Tomas", "Ilse", "Bram", "Noor", "Kasia", "Oren", "Lida"};
inline const char* kThings[] = {"lantern", "kite", "satchel", "bicycle", "map", "violin"};
inline const char* kPlaces[] = {"bridge", "tower", "harbor", "orchard"};

// Random conforming (CoT, story) for `frames` images of 640x480. Each
// entity appears in its first frame plus each later frame with
// probability `persistence`.
struct Generated {
  std::string cot_text;
  std::string story_text;
};

inline Generated random_output(std::mt19937& rng, std::size_t frames, double persistence) {
  std::uniform_int_distribution<int> n_chars(1, 3), n_objs(0, 2), n_sets(0, 1), box_k(0, 20);
  std::bernoulli_distribution keep(persistence), coin(0.5);
  Cot cot;
  cot.frames = frames;
  auto make = [&](const std::string& prefix, int ordinal, const std::string& name) {
    Ent e{prefix + std::to_string(ordinal), name, {}};
    std::uniform_int_distribution<std::size_t> first_frame(0, frames - 1);
    std::size_t first = first_frame(rng);
    for (std::size_t f = 0; f < frames; ++f) {
      if (f == first || keep(rng)) e.boxes[f] = box(box_k(rng));
    }
    return e;
  };
  int nc = n_chars(rng), no = n_objs(rng), ns = n_sets(rng);
  for (int i = 1; i <= nc; ++i) cot.characters.push_back(make("char", i, kNames[(i - 1) % 8]));
  for (int i = 1; i <= no; ++i) cot.objects.push_back(make("obj", i, kThings[(i - 1) % 6]));
  for (int i = 1; i <= ns; ++i) cot.settings.push_back(make("lm", i, kPlaces[(i - 1) % 4]));

  std::vector<std::string> segments;
  for (std::size_t f = 0; f < frames; ++f) {
    std::string seg;
    for (const auto& c : cot.characters) {
      if (!c.boxes.contains(f)) continue;
      if (!seg.empty()) seg += " ";
      seg += "<gdo " + c.id + ">" + c.name + "</gdo> <gda " + c.id + ">walks</gda> on.";
      seg += coin(rng) ? " <gdo " + c.id + ">She</gdo> smiles." : " She smiles.";
    }
    for (const auto& o : cot.objects) {
      if (!o.boxes.contains(f)) continue;
      seg += " The <gdo " + o.id + ">" + o.name + "</gdo> sways.";
      seg += coin(rng) ? " <gdo " + o.id + ">It</gdo> creaks." : " It creaks.";
    }
    for (const auto& s : cot.settings) {
      if (!s.boxes.contains(f)) continue;
      seg += " Near <gdl " + s.id + ">the " + s.name + "</gdl> the light fades.";
    }
    if (seg.empty()) seg = "Nothing moves.";
    segments.push_back(seg);
  }
  return {cot.text(), story(segments)};
}

// N real stories with gold annotations, 3 to 8 frames each.
inline std::vector<StorySample> real_corpus(std::size_t n, unsigned seed = 7) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> frames(3, 8);
  std::vector<StorySample> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "real_%03zu", i);
    std::size_t n_frames = frames(rng);
    auto gen = random_output(rng, n_frames, 0.7);
    out.push_back({id, true, images(n_frames, 640, 480, id), gen.cot_text, gen.story_text});
  }
  return out;
}

}  // namespace fixtures
