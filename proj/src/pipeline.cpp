#include "groundreward/pipeline.hpp"

#include <algorithm>
#include <future>
#include <iomanip>
#include <sstream>
#include <map>
#include <thread>
#include <variant>

#include <httplib.h>

namespace groundreward {

namespace {

// Order-preserving parallel map over independent items.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, Fn fn) {
  using Out = decltype(fn(items.front()));
  std::vector<Out> results(items.size());
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, items.size()));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < items.size(); i += workers) results[i] = fn(items[i]);
    }));
  }
  for (auto& j : jobs) j.get();
  return results;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

struct LoadedCorpus {
  std::vector<StorySample> samples;
  bool had_errors = false;
};

LoadedCorpus load_corpus(std::istream& in, std::ostream& err, const char* what) {
  LoadedCorpus out;
  for (auto& line : read_jsonl(in)) {
    if (auto* msg = std::get_if<std::string>(&line.value)) {
      err << what << " line " << line.line_no << ": " << *msg << '\n';
      out.had_errors = true;
      continue;
    }
    try {
      out.samples.push_back(std::get<json>(line.value).get<StorySample>());
    } catch (const std::exception& e) {
      err << what << " line " << line.line_no << ": " << e.what() << '\n';
      out.had_errors = true;
    }
  }
  return out;
}

}  // namespace

int cmd_validate(std::istream& corpus, std::ostream& report, std::ostream& summary, std::ostream& err) {
  std::vector<StorySample> samples;
  // Report rows in input order: a sample index, or an error row for a malformed line.
  std::vector<std::variant<std::size_t, json>> order;
  std::size_t bad_lines = 0;
  for (auto& line : read_jsonl(corpus)) {
    std::string error;
    if (auto* msg = std::get_if<std::string>(&line.value)) {
      error = *msg;
    } else {
      try {
        samples.push_back(std::get<json>(line.value).get<StorySample>());
        order.emplace_back(samples.size() - 1);
        continue;
      } catch (const std::exception& e) {
        error = e.what();
      }
    }
    ++bad_lines;
    err << "corpus line " << line.line_no << ": " << error << '\n';
    order.emplace_back(json{{"line", line.line_no}, {"error", error}});
  }

  auto reports = parallel_map(samples, [](const StorySample& s) {
    return validate_output(s.images, s.cot_text, s.story_text);
  });
  std::size_t valid = 0;
  for (const auto& entry : order) {
    if (const auto* row = std::get_if<json>(&entry)) {
      write_jsonl_line(report, *row);
      continue;
    }
    std::size_t i = std::get<std::size_t>(entry);
    if (reports[i].valid) ++valid;
    json row = reports[i];
    row["sample_id"] = samples[i].sample_id;
    write_jsonl_line(report, row);
  }
  json sum{{"samples", samples.size()},
           {"valid", valid},
           {"malformed_lines", bad_lines},
           {"well_structured_rate", samples.empty() ? json(nullptr) : json(well_structured_rate(samples))}};
  summary << sum.dump(2) << '\n';
  return bad_lines == 0 ? kExitOk : kExitData;
}

int cmd_score(std::istream& corpus_in, std::istream& outputs_in, std::ostream& scored, const Settings& settings,
              std::ostream& err, std::ostream* summary) {
  LoadedCorpus corpus = load_corpus(corpus_in, err, "corpus");
  bool data_error = corpus.had_errors;

  std::map<std::string, const StorySample*> by_id;
  for (const auto& s : corpus.samples) {
    if (!by_id.emplace(s.sample_id, &s).second) {
      err << "duplicate sample_id '" << s.sample_id << "' in corpus\n";
      data_error = true;
    }
  }

  std::map<std::string, std::vector<std::pair<std::string, std::string>>> outputs;
  for (auto& line : read_jsonl(outputs_in)) {
    if (auto* msg = std::get_if<std::string>(&line.value)) {
      err << "outputs line " << line.line_no << ": " << *msg << '\n';
      data_error = true;
      continue;
    }
    const json& j = std::get<json>(line.value);
    try {
      auto id = j.at("sample_id").get<std::string>();
      if (!by_id.contains(id)) {
        err << "outputs line " << line.line_no << ": unknown sample_id '" << id << "'\n";
        data_error = true;
        continue;
      }
      outputs[id].emplace_back(j.value("cot_text", std::string()), j.value("story_text", std::string()));
    } catch (const std::exception& e) {
      err << "outputs line " << line.line_no << ": " << e.what() << '\n';
      data_error = true;
    }
  }

  struct Job {
    const StorySample* sample;
    int index;
    const std::pair<std::string, std::string>* output;  // null when missing
  };
  std::vector<Job> jobs;
  for (const auto& [id, sample] : by_id) {
    auto it = outputs.find(id);
    if (it == outputs.end()) {
      jobs.push_back({sample, 0, nullptr});
      continue;
    }
    for (std::size_t k = 0; k < it->second.size(); ++k) {
      jobs.push_back({sample, static_cast<int>(k), &it->second[k]});
    }
  }

  auto candidates = parallel_map(jobs, [&](const Job& job) {
    CandidateResponse c;
    c.sample_id = job.sample->sample_id;
    c.is_real = job.sample->is_real;
    c.images = job.sample->images;
    if (job.output) {
      c.cot_text = job.output->first;
      c.story_text = job.output->second;
      json payload{{"images", c.images}, {"cot_text", c.cot_text}, {"story_text", c.story_text}, {"is_real", c.is_real}};
      c.reward = score_payload(payload, settings).get<RewardBreakdown>();
    } else {
      c.reward.valid = false;
      c.reward.total = settings.reward.invalid_penalty;
      c.reward.violations.push_back({RuleId::MissingOutput, std::nullopt, std::nullopt, "no output for sample"});
    }
    return c;
  });
  for (std::size_t k = 0; k < candidates.size(); ++k) write_jsonl_line(scored, candidate_to_json(candidates[k], jobs[k].index));
  if (summary) {
    std::vector<RewardBreakdown> all, real, synthetic;
    for (const auto& c : candidates) {
      all.push_back(c.reward);
      (c.is_real ? real : synthetic).push_back(c.reward);
    }
    json sum{{"all", aggregate_rewards(all, settings.reward)},
             {"real", aggregate_rewards(real, settings.reward)},
             {"synthetic", aggregate_rewards(synthetic, settings.reward)}};
    *summary << sum.dump(2) << '\n';
  }
  return data_error ? kExitData : kExitOk;
}

int cmd_synth(std::istream& real_corpus, std::ostream& synthetic, std::ostream& provenance,
              const SynthOptions& options, std::ostream& err) {
  LoadedCorpus corpus = load_corpus(real_corpus, err, "corpus");
  if (corpus.had_errors) return kExitData;
  std::vector<StorySample> real;
  for (auto& s : corpus.samples) {
    if (s.is_real) real.push_back(std::move(s));
  }
  if (real.empty()) {
    err << "synth: corpus has no real stories\n";
    return kExitData;
  }
  CorpusIndex idx = CorpusIndex::from_corpus(real);
  std::size_t count = options.count ? *options.count : synthetic_count(idx, options.ratio);

  json stories = json::array();
  try {
    for (const auto& spec : extend_corpus(idx, count)) {
      SyntheticStory story = build_synthetic_story(spec.synthetic_index, idx, real);
      write_jsonl_line(synthetic, story.sample);
      json entry = spec;
      entry["sample_id"] = story.sample.sample_id;
      entry["frames"] = story.provenance;
      stories.push_back(std::move(entry));
    }
  } catch (const CorpusLookupError& e) {
    err << "synth: " << e.what() << '\n';
    return kExitData;
  }
  json doc{{"real_story_count", idx.story_count()},
           {"ratio", options.count ? "count" : (options.ratio == CorpusRatio::Double ? "double" : "half")},
           {"synthetic_count", count},
           {"frame_count_rule", "5 + (s mod 11)"},
           {"stories", stories}};
  provenance << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_pairs(std::istream& scored_in, std::ostream& pairs_out, std::ostream* summary, double min_margin,
              std::ostream& err) {
  std::vector<CandidateResponse> scored;
  bool data_error = false;
  for (auto& line : read_jsonl(scored_in)) {
    if (auto* msg = std::get_if<std::string>(&line.value)) {
      err << "scored line " << line.line_no << ": " << *msg << '\n';
      data_error = true;
      continue;
    }
    try {
      scored.push_back(candidate_from_json(std::get<json>(line.value)));
    } catch (const std::exception& e) {
      err << "scored line " << line.line_no << ": " << e.what() << '\n';
      data_error = true;
    }
  }
  CorpusPairs result = build_corpus_pairs(scored, min_margin);
  for (const auto& p : result.pairs) write_jsonl_line(pairs_out, p);
  if (summary) {
    json s = result.summary;
    s["min_margin"] = min_margin;
    *summary << s.dump(2) << '\n';
  }
  return data_error ? kExitData : kExitOk;
}

namespace {

std::optional<std::pair<std::string, std::string>> prediction_texts(const json& j) {
  if (j.contains("chosen")) {
    const json& c = j.at("chosen");
    return std::pair{c.value("cot", std::string()), c.value("story", std::string())};
  }
  if (j.contains("cot_text") || j.contains("story_text")) {
    return std::pair{j.value("cot_text", std::string()), j.value("story_text", std::string())};
  }
  return std::nullopt;
}

json class_triplet(double c, double o, double t) { return json{{"char", c}, {"obj", o}, {"total", t}}; }

void write_persistence(std::ostream& csv, const char* split, const std::vector<CotDocument>& docs) {
  if (docs.empty()) return;
  PersistenceCurve curve = persistence_curve(docs);
  for (std::size_t k = 0; k < curve.max_frames; ++k) {
    csv << split << ',' << (k + 1) << ',' << csv_number(curve.characters[k]) << ','
        << csv_number(curve.objects[k]) << ',' << csv_number(curve.total[k]) << '\n';
  }
}

}  // namespace

int cmd_eval(std::istream& gold_in, std::istream& pred_in, std::ostream& metrics, std::ostream& persistence_csv,
             std::ostream& pronoun_csv, const Settings& settings, std::ostream& err) {
  LoadedCorpus gold = load_corpus(gold_in, err, "gold");
  bool data_error = gold.had_errors;

  std::map<std::string, std::pair<std::string, std::string>> preds;
  for (auto& line : read_jsonl(pred_in)) {
    if (auto* msg = std::get_if<std::string>(&line.value)) {
      err << "predictions line " << line.line_no << ": " << *msg << '\n';
      data_error = true;
      continue;
    }
    const json& j = std::get<json>(line.value);
    auto texts = prediction_texts(j);
    if (!j.contains("sample_id") || !texts) {
      err << "predictions line " << line.line_no << ": needs sample_id and prediction text\n";
      data_error = true;
      continue;
    }
    preds.emplace(j.at("sample_id").get<std::string>(), std::move(*texts));
  }

  Counts chars, objs, all;
  std::vector<double> aps;
  std::vector<TokenList> cand_tokens;
  std::vector<std::vector<TokenList>> ref_tokens;
  double rouge_sum = 0.0;
  std::size_t language_pairs = 0;
  std::size_t evaluated = 0, well_structured = 0, matched_stories = 0;
  std::vector<CotDocument> cot_all, cot_real, cot_synth;
  std::vector<GroundedStory> pred_stories;

  for (const auto& sample : gold.samples) {
    auto it = preds.find(sample.sample_id);
    if (it == preds.end()) continue;
    ++evaluated;
    AnnotatedStory pred;
    pred.frame_count = sample.images.size();
    ValidationReport pred_report =
        validate_output(sample.images, it->second.first, it->second.second, &pred.cot, &pred.story);
    if (pred_report.valid) {
      ++well_structured;
      cot_all.push_back(pred.cot);
      (sample.is_real ? cot_real : cot_synth).push_back(pred.cot);
    }
    if (!pred_report.has(RuleId::StoryParse)) pred_stories.push_back(pred.story);

    if (sample.cot_text.empty() && sample.story_text.empty()) continue;  // no gold annotation
    AnnotatedStory gold_doc;
    gold_doc.frame_count = sample.images.size();
    ValidationReport gold_report =
        validate_output(sample.images, sample.cot_text, sample.story_text, &gold_doc.cot, &gold_doc.story);
    if (gold_report.has(RuleId::CotParse) || gold_report.has(RuleId::StoryParse)) {
      err << "gold sample '" << sample.sample_id << "' does not parse, skipped\n";
      data_error = true;
      continue;
    }
    ++matched_stories;
    MatchResult m = match_references(pred, gold_doc, settings.match);
    chars += m.characters;
    objs += m.objects;
    all += m.combined;
    if (m.gold_count > 0) aps.push_back(average_precision_11pt(m.ordered_outcomes, m.gold_count));

    TokenList cand = tokenize_words(pred.story.plain_text);
    TokenList ref = tokenize_words(gold_doc.story.plain_text);
    rouge_sum += rouge_l(cand, ref).f;
    ++language_pairs;
    cand_tokens.push_back(std::move(cand));
    ref_tokens.push_back({std::move(ref)});
  }

  PrecisionRecall pc = prf(chars), po = prf(objs), pt = prf(all);
  json out;
  out["precision"] = class_triplet(pc.precision, po.precision, pt.precision);
  out["recall"] = class_triplet(pc.recall, po.recall, pt.recall);
  out["f1"] = class_triplet(pc.f1, po.f1, pt.f1);
  out["mAP"] = aps.empty() ? json(nullptr) : json(map_over_stories(aps));
  out["language"] = {{"bleu4", language_pairs ? json(corpus_bleu4(cand_tokens, ref_tokens)) : json(nullptr)},
                     {"rouge_l", language_pairs ? json(rouge_sum / static_cast<double>(language_pairs)) : json(nullptr)}};
  out["counts"] = {{"char", {{"tp", chars.tp}, {"fp", chars.fp}, {"fn", chars.fn}}},
                   {"obj", {{"tp", objs.tp}, {"fp", objs.fp}, {"fn", objs.fn}}},
                   {"total", {{"tp", all.tp}, {"fp", all.fp}, {"fn", all.fn}}}};
  out["stories"] = {{"gold", gold.samples.size()},
                    {"evaluated", evaluated},
                    {"with_gold_annotation", matched_stories},
                    {"in_map", aps.size()}};
  out["well_structured_rate"] = evaluated ? json(static_cast<double>(well_structured) / evaluated) : json(nullptr);
  out["match"] = {{"iou_threshold", settings.match.iou_threshold},
                  {"require_class_match", settings.match.require_class_match}};
  metrics << out.dump(2) << '\n';

  persistence_csv << "split,n,characters,objects,total\n";
  write_persistence(persistence_csv, "all", cot_all);
  write_persistence(persistence_csv, "real", cot_real);
  write_persistence(persistence_csv, "synthetic", cot_synth);

  pronoun_csv << "pronoun,total,grounded,ungrounded_pct\n";
  for (const auto& [word, stats] : pronoun_report(pred_stories, settings.reward.lexicon)) {
    pronoun_csv << word << ',' << stats.total << ',' << stats.grounded << ',' << csv_number(stats.ungrounded_pct())
                << '\n';
  }
  return data_error ? kExitData : kExitOk;
}

json score_payload(const json& payload, const Settings& base) {
  if (!payload.is_object()) throw std::invalid_argument("payload must be a JSON object");
  Settings settings = base;
  if (payload.contains("config") && !payload.at("config").is_null()) apply_settings(payload.at("config"), settings);
  StorySample sample;
  sample.sample_id = payload.value("sample_id", std::string());
  payload.at("images").get_to(sample.images);
  payload.at("is_real").get_to(sample.is_real);
  auto cot = payload.at("cot_text").get<std::string>();
  auto story = payload.at("story_text").get<std::string>();
  return compute_reward(sample, cot, story, settings.reward);
}

void configure_service(httplib::Server& server, const Settings& settings) {
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  server.Post("/v1/score", [settings](const httplib::Request& req, httplib::Response& res) {
    try {
      json payload = json::parse(req.body);
      json body = score_payload(payload, settings);
      res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(-1, ' ', false, json::error_handler_t::replace),
                      "application/json");
    }
  });
}

}  // namespace groundreward
