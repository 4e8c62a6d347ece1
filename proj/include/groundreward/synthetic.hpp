#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "groundreward/story_model.hpp"

namespace groundreward {

// Image counts of the real corpus, in corpus order.
class CorpusIndex {
 public:
  explicit CorpusIndex(std::vector<std::size_t> image_counts);
  static CorpusIndex from_corpus(const std::vector<StorySample>& real_stories);

  std::size_t story_count() const { return image_counts_.size(); }
  std::size_t image_count(std::size_t story_idx) const { return image_counts_.at(story_idx); }

  friend bool operator==(const CorpusIndex&, const CorpusIndex&) = default;

 private:
  std::vector<std::size_t> image_counts_;
};

struct FramePick {
  std::size_t story_idx = 0;
  std::size_t img_idx = 0;

  friend bool operator==(const FramePick&, const FramePick&) = default;
};

struct SyntheticSpec {
  std::uint64_t synthetic_index = 0;
  std::size_t frame_count = 0;
  std::vector<FramePick> picks;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

inline constexpr std::size_t kMinSyntheticFrames = 5;
inline constexpr std::size_t kMaxSyntheticFrames = 15;

// story_idx = (s*17 + i*31) mod N, img_idx = (s + i*7) mod |I_story_idx|
FramePick sample_pick(std::uint64_t s, std::uint64_t i, const CorpusIndex& idx);

// n = 5 + (s mod 11), so every n lands in [5, 15].
std::size_t synthetic_frame_count(std::uint64_t s);

SyntheticSpec make_spec(std::uint64_t s, const CorpusIndex& idx);

enum class CorpusRatio {
  Double,  // one synthetic story per real story
  Half,    // 2:1 real to synthetic, ceil(N/2)
};

std::size_t synthetic_count(const CorpusIndex& idx, CorpusRatio ratio);

// Specs for s = 0 .. count-1.
std::vector<SyntheticSpec> extend_corpus(const CorpusIndex& idx, std::size_t count);
std::vector<SyntheticSpec> extend_corpus(const CorpusIndex& idx, CorpusRatio ratio = CorpusRatio::Double);

struct FrameProvenance {
  std::size_t frame_index = 0;
  std::size_t story_idx = 0;
  std::size_t img_idx = 0;
  std::string source_sample_id;
  std::string image_id;

  friend bool operator==(const FrameProvenance&, const FrameProvenance&) = default;
};

struct SyntheticStory {
  StorySample sample;
  std::vector<FrameProvenance> provenance;

  friend bool operator==(const SyntheticStory&, const SyntheticStory&) = default;
};

class CorpusLookupError : public std::out_of_range {
 public:
  CorpusLookupError(std::size_t story_idx, std::size_t img_idx, const std::string& what);
  std::size_t story_idx() const { return story_idx_; }
  std::size_t img_idx() const { return img_idx_; }

 private:
  std::size_t story_idx_;
  std::size_t img_idx_;
};

std::string synthetic_sample_id(std::uint64_t s);

// Assembles synthetic story `s` from the real corpus. The sample carries no
// gold CoT or story text. Throws CorpusLookupError when a pick falls outside
// `real_stories`.
SyntheticStory build_synthetic_story(std::uint64_t s, const CorpusIndex& idx,
                                     const std::vector<StorySample>& real_stories);

}  // namespace groundreward
