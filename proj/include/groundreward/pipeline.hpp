#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>

#include "groundreward/jsonio.hpp"
#include "groundreward/synthetic.hpp"

namespace httplib {
class Server;
}

namespace groundreward {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Each command reads/writes streams and returns an exit code. Diagnostics
// go to `err`.

// Writes one {"sample_id", "valid", "violations"} line per sample (or
// {"line", "error"} for malformed input) and a JSON summary with the
// well-structured rate.
int cmd_validate(std::istream& corpus, std::ostream& report, std::ostream& summary, std::ostream& err);

// Scores every candidate in `outputs` ({"sample_id","cot_text","story_text"}
// lines, any number per sample) against `corpus`. Rows come out ordered by
// sample_id, then candidate order. Samples with no output get a penalty row.
// `summary`, when given, receives reward aggregates for all, real and
// synthetic candidates.
int cmd_score(std::istream& corpus, std::istream& outputs, std::ostream& scored, const Settings& settings,
              std::ostream& err, std::ostream* summary = nullptr);

struct SynthOptions {
  CorpusRatio ratio = CorpusRatio::Double;
  std::optional<std::size_t> count;  // overrides ratio
};

// Writes synthetic StorySample lines plus a provenance document.
int cmd_synth(std::istream& real_corpus, std::ostream& synthetic, std::ostream& provenance,
              const SynthOptions& options, std::ostream& err);

int cmd_pairs(std::istream& scored, std::ostream& pairs, std::ostream* summary, double min_margin,
              std::ostream& err);

// `predictions` lines may be plain outputs ({"cot_text","story_text"}),
// scored rows, or preference pairs (the chosen side is evaluated). The
// first prediction per sample_id is used.
int cmd_eval(std::istream& gold_corpus, std::istream& predictions, std::ostream& metrics,
             std::ostream& persistence_csv, std::ostream& pronoun_csv, const Settings& settings, std::ostream& err);

// The single scoring path shared by `score` and the HTTP service. Payload:
// {"images", "cot_text", "story_text", "is_real", "config"?}. Throws
// std::invalid_argument (or a json exception) on a malformed payload.
json score_payload(const json& payload, const Settings& base);

// Registers POST /v1/score and GET /healthz.
void configure_service(httplib::Server& server, const Settings& settings);

}  // namespace groundreward
