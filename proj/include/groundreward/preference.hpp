#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "groundreward/reward.hpp"

namespace groundreward {

struct CandidateResponse {
  std::string sample_id;
  std::string cot_text;
  std::string story_text;
  RewardBreakdown reward;
  bool is_real = true;
  std::vector<ImageMeta> images;

  friend bool operator==(const CandidateResponse&, const CandidateResponse&) = default;
};

struct PreferencePair {
  std::string sample_id;
  CandidateResponse chosen;
  CandidateResponse rejected;
  double margin = 0.0;

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

inline constexpr double kDefaultMinMargin = 0.05;
inline constexpr double kDefaultDpoBeta = 0.1;

// Chosen is the highest-reward candidate, rejected the lowest. Equal rewards
// are ordered by (story_text, cot_text) ascending so the result does not
// depend on input order. Returns nullopt below `min_margin` or with fewer
// than two candidates.
std::optional<PreferencePair> build_pair(std::vector<CandidateResponse> candidates,
                                         double min_margin = kDefaultMinMargin);

struct DpoInputs {
  double logp_policy_chosen = 0.0;
  double logp_policy_rejected = 0.0;
  double logp_ref_chosen = 0.0;
  double logp_ref_rejected = 0.0;
  double beta = kDefaultDpoBeta;
};

// -log sigmoid(beta * ((pc - rc) - (pr - rr))). Throws std::invalid_argument
// on non-finite input or beta <= 0.
double dpo_loss(const DpoInputs& in);

// -log sigmoid(z), evaluated as softplus(-z).
double neg_log_sigmoid(double z);

struct PairSummary {
  std::size_t samples = 0;
  std::size_t pairs = 0;
  double pair_yield = 0.0;
  std::size_t real_pairs = 0;
  std::size_t synthetic_pairs = 0;
  std::size_t real_samples = 0;
  std::size_t synthetic_samples = 0;
  std::optional<double> margin_min;
  std::optional<double> margin_max;
  std::optional<double> margin_mean;
  // Margin counts in buckets [0.05,0.1), [0.1,0.2), [0.2,0.5), [0.5,1), [1,2].
  std::vector<std::size_t> margin_histogram;
};

inline constexpr double kMarginBucketEdges[] = {0.1, 0.2, 0.5, 1.0};

struct CorpusPairs {
  std::vector<PreferencePair> pairs;  // ordered by sample_id
  PairSummary summary;
};

// Groups candidates by sample_id and builds at most one pair per group.
CorpusPairs build_corpus_pairs(const std::vector<CandidateResponse>& scored,
                               double min_margin = kDefaultMinMargin);

}  // namespace groundreward
