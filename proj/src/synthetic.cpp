#include "groundreward/synthetic.hpp"

namespace groundreward {

CorpusIndex::CorpusIndex(std::vector<std::size_t> image_counts) : image_counts_(std::move(image_counts)) {
  if (image_counts_.empty()) throw std::invalid_argument("corpus index needs at least one story");
  for (std::size_t j = 0; j < image_counts_.size(); ++j) {
    if (image_counts_[j] == 0) {
      throw std::invalid_argument("story " + std::to_string(j) + " has no images");
    }
  }
}

CorpusIndex CorpusIndex::from_corpus(const std::vector<StorySample>& real_stories) {
  std::vector<std::size_t> counts;
  counts.reserve(real_stories.size());
  for (const auto& s : real_stories) counts.push_back(s.images.size());
  return CorpusIndex(std::move(counts));
}

FramePick sample_pick(std::uint64_t s, std::uint64_t i, const CorpusIndex& idx) {
  const std::uint64_t n = idx.story_count();
  // Reduce before multiplying so large s cannot overflow.
  std::uint64_t story = ((s % n) * 17 % n + (i % n) * 31 % n) % n;
  const std::uint64_t images = idx.image_count(story);
  std::uint64_t img = (s % images + (i % images) * 7 % images) % images;
  return {static_cast<std::size_t>(story), static_cast<std::size_t>(img)};
}

std::size_t synthetic_frame_count(std::uint64_t s) {
  return kMinSyntheticFrames + static_cast<std::size_t>(s % (kMaxSyntheticFrames - kMinSyntheticFrames + 1));
}

SyntheticSpec make_spec(std::uint64_t s, const CorpusIndex& idx) {
  SyntheticSpec spec;
  spec.synthetic_index = s;
  spec.frame_count = synthetic_frame_count(s);
  spec.picks.reserve(spec.frame_count);
  for (std::size_t i = 0; i < spec.frame_count; ++i) spec.picks.push_back(sample_pick(s, i, idx));
  return spec;
}

std::size_t synthetic_count(const CorpusIndex& idx, CorpusRatio ratio) {
  const std::size_t n = idx.story_count();
  return ratio == CorpusRatio::Double ? n : (n + 1) / 2;
}

std::vector<SyntheticSpec> extend_corpus(const CorpusIndex& idx, std::size_t count) {
  std::vector<SyntheticSpec> specs;
  specs.reserve(count);
  for (std::size_t s = 0; s < count; ++s) specs.push_back(make_spec(s, idx));
  return specs;
}

std::vector<SyntheticSpec> extend_corpus(const CorpusIndex& idx, CorpusRatio ratio) {
  return extend_corpus(idx, synthetic_count(idx, ratio));
}

CorpusLookupError::CorpusLookupError(std::size_t story_idx, std::size_t img_idx, const std::string& what)
    : std::out_of_range(what), story_idx_(story_idx), img_idx_(img_idx) {}

std::string synthetic_sample_id(std::uint64_t s) { return "synthetic_" + std::to_string(s); }

SyntheticStory build_synthetic_story(std::uint64_t s, const CorpusIndex& idx,
                                     const std::vector<StorySample>& real_stories) {
  SyntheticSpec spec = make_spec(s, idx);
  SyntheticStory out;
  out.sample.sample_id = synthetic_sample_id(s);
  out.sample.is_real = false;
  for (std::size_t frame = 0; frame < spec.picks.size(); ++frame) {
    const FramePick& pick = spec.picks[frame];
    if (pick.story_idx >= real_stories.size() ||
        pick.img_idx >= real_stories[pick.story_idx].images.size()) {
      throw CorpusLookupError(pick.story_idx, pick.img_idx,
                              "synthetic " + std::to_string(s) + " frame " + std::to_string(frame) +
                                  ": no image " + std::to_string(pick.img_idx) + " in story " +
                                  std::to_string(pick.story_idx));
    }
    const StorySample& source = real_stories[pick.story_idx];
    ImageMeta image = source.images[pick.img_idx];
    if (image.source_story_id.empty()) image.source_story_id = source.sample_id;
    out.provenance.push_back({frame, pick.story_idx, pick.img_idx, source.sample_id, image.image_id});
    out.sample.images.push_back(std::move(image));
  }
  return out;
}

}  // namespace groundreward
