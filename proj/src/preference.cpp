#include "groundreward/preference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace groundreward {

namespace {

bool ranks_before(const CandidateResponse& a, const CandidateResponse& b) {
  if (a.reward.total != b.reward.total) return a.reward.total > b.reward.total;
  return std::tie(a.story_text, a.cot_text) < std::tie(b.story_text, b.cot_text);
}

}  // namespace

std::optional<PreferencePair> build_pair(std::vector<CandidateResponse> candidates, double min_margin) {
  if (candidates.size() < 2) return std::nullopt;
  std::sort(candidates.begin(), candidates.end(), ranks_before);
  const CandidateResponse& best = candidates.front();
  const CandidateResponse& worst = candidates.back();
  double margin = best.reward.total - worst.reward.total;
  if (!(margin >= min_margin) || margin <= 0.0) return std::nullopt;
  return PreferencePair{best.sample_id, best, worst, margin};
}

double neg_log_sigmoid(double z) {
  // softplus(x) = max(x, 0) + log1p(exp(-|x|)) with x = -z
  double x = -z;
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double dpo_loss(const DpoInputs& in) {
  for (double v : {in.logp_policy_chosen, in.logp_policy_rejected, in.logp_ref_chosen, in.logp_ref_rejected,
                   in.beta}) {
    if (!std::isfinite(v)) throw std::invalid_argument("dpo_loss: non-finite input");
  }
  if (in.beta <= 0.0) throw std::invalid_argument("dpo_loss: beta must be positive");
  double chosen = in.logp_policy_chosen - in.logp_ref_chosen;
  double rejected = in.logp_policy_rejected - in.logp_ref_rejected;
  return neg_log_sigmoid(in.beta * (chosen - rejected));
}

CorpusPairs build_corpus_pairs(const std::vector<CandidateResponse>& scored, double min_margin) {
  std::map<std::string, std::vector<CandidateResponse>> groups;
  for (const auto& c : scored) groups[c.sample_id].push_back(c);

  CorpusPairs out;
  PairSummary& sum = out.summary;
  sum.margin_histogram.assign(std::size(kMarginBucketEdges) + 1, 0);
  double margin_total = 0.0;
  for (auto& [id, group] : groups) {
    bool is_real = group.front().is_real;
    ++sum.samples;
    ++(is_real ? sum.real_samples : sum.synthetic_samples);
    auto pair = build_pair(std::move(group), min_margin);
    if (!pair) continue;
    ++(is_real ? sum.real_pairs : sum.synthetic_pairs);
    margin_total += pair->margin;
    sum.margin_min = std::min(sum.margin_min.value_or(pair->margin), pair->margin);
    sum.margin_max = std::max(sum.margin_max.value_or(pair->margin), pair->margin);
    auto bucket = static_cast<std::size_t>(
        std::upper_bound(std::begin(kMarginBucketEdges), std::end(kMarginBucketEdges), pair->margin) -
        std::begin(kMarginBucketEdges));
    ++sum.margin_histogram[bucket];
    out.pairs.push_back(std::move(*pair));
  }
  sum.pairs = out.pairs.size();
  sum.pair_yield = sum.samples == 0 ? 0.0 : static_cast<double>(sum.pairs) / static_cast<double>(sum.samples);
  if (sum.pairs > 0) sum.margin_mean = margin_total / static_cast<double>(sum.pairs);
  return out;
}

}  // namespace groundreward
