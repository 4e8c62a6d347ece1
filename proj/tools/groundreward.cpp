// Command-line front end: validate, score, synth, pairs, eval, serve.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <httplib.h>

#include "groundreward/pipeline.hpp"

namespace gr = groundreward;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::unique_ptr<std::istream> open_input(const std::string& path) {
  if (path.empty() || path == "-") return std::make_unique<std::istream>(std::cin.rdbuf());
  auto in = std::make_unique<std::ifstream>(path);
  if (!*in) throw UsageError("cannot open '" + path + "'");
  return in;
}

std::unique_ptr<std::ostream> open_output(const std::string& path) {
  if (path.empty() || path == "-") return std::make_unique<std::ostream>(std::cout.rdbuf());
  auto out = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*out) throw UsageError("cannot write '" + path + "'");
  return out;
}

// Output path with its extension replaced, e.g. metrics.json -> metrics_persistence.csv.
std::string sibling_path(const std::string& path, const std::string& suffix) {
  if (path.empty() || path == "-") return "";
  auto dot = path.find_last_of('.');
  auto slash = path.find_last_of('/');
  std::string stem = (dot != std::string::npos && (slash == std::string::npos || dot > slash)) ? path.substr(0, dot) : path;
  return stem + suffix;
}

struct Flags {
  std::string input;
  std::string outputs;
  std::string out;
  std::string summary;
  std::string provenance;
  std::string persistence_csv;
  std::string pronoun_csv;
  std::string ratio = "double";
  std::optional<std::size_t> count;
  std::optional<double> iou;
  std::optional<double> alpha;
  std::optional<double> beta_reid;
  std::optional<double> gamma;
  std::optional<double> delta;
  std::optional<double> min_margin;
  std::string host = "0.0.0.0";
  int port = 8080;
};

gr::Settings load_settings(const Flags& flags) {
  gr::Settings settings;
  if (const char* path = std::getenv("GROUND_REWARD_CONFIG"); path && *path) {
    std::ifstream in(path);
    if (!in) throw UsageError(std::string("cannot open GROUND_REWARD_CONFIG file '") + path + "'");
    try {
      gr::apply_settings(gr::json::parse(in), settings);
    } catch (const std::exception& e) {
      throw UsageError(std::string("bad config file: ") + e.what());
    }
  }
  gr::json overrides = gr::json::object();
  if (flags.alpha) overrides["alpha"] = *flags.alpha;
  if (flags.beta_reid) overrides["beta_reid"] = *flags.beta_reid;
  if (flags.gamma) overrides["gamma"] = *flags.gamma;
  if (flags.delta) overrides["delta"] = *flags.delta;
  if (flags.iou) overrides["iou_threshold"] = *flags.iou;
  if (flags.min_margin) overrides["min_margin"] = *flags.min_margin;
  try {
    gr::apply_settings(overrides, settings);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  return settings;
}

void add_weight_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--alpha", f.alpha, "character weight of the re-identification score");
  cmd->add_option("--beta-reid", f.beta_reid, "object weight of the re-identification score");
  cmd->add_option("--gamma", f.gamma, "character weight of the grounding score");
  cmd->add_option("--delta", f.delta, "object weight of the grounding score");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded storytelling reward toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto* validate = app.add_subcommand("validate", "validate the CoT and story of every corpus sample");
  validate->add_option("--input", f.input, "corpus JSONL")->required();
  validate->add_option("--out", f.out, "per-sample report JSONL (default stdout)");
  validate->add_option("--summary", f.summary, "summary JSON (default stderr)");

  auto* score = app.add_subcommand("score", "score generated outputs with the contrastive reward");
  score->add_option("--input", f.input, "corpus JSONL")->required();
  score->add_option("--outputs", f.outputs, "generated outputs JSONL")->required();
  score->add_option("--out", f.out, "scored candidates JSONL (default stdout)");
  score->add_option("--summary", f.summary, "reward aggregates JSON");
  add_weight_flags(score, f);

  auto* synth = app.add_subcommand("synth", "assemble synthetic negative stories");
  synth->add_option("--input", f.input, "real corpus JSONL")->required();
  synth->add_option("--out", f.out, "synthetic corpus JSONL (default stdout)");
  synth->add_option("--provenance", f.provenance, "provenance JSON (default <out>.provenance.json)");
  synth->add_option("--ratio", f.ratio, "double: one per real story, half: 2:1 real to synthetic")
      ->check(CLI::IsMember({"double", "half"}));
  synth->add_option("--count", f.count, "explicit number of synthetic stories");

  auto* pairs = app.add_subcommand("pairs", "build DPO preference pairs from scored candidates");
  pairs->add_option("--input", f.input, "scored candidates JSONL")->required();
  pairs->add_option("--out", f.out, "pairs JSONL (default stdout)");
  pairs->add_option("--summary", f.summary, "summary JSON");
  pairs->add_option("--min-margin", f.min_margin, "minimum chosen-rejected reward gap");

  auto* eval = app.add_subcommand("eval", "grounding, mAP, persistence, pronoun and language metrics");
  eval->add_option("--input", f.input, "gold corpus JSONL")->required();
  eval->add_option("--outputs", f.outputs, "predictions JSONL (outputs, scored rows or pairs)")->required();
  eval->add_option("--out", f.out, "metrics JSON (default stdout)");
  eval->add_option("--persistence-csv", f.persistence_csv, "default <out>_persistence.csv");
  eval->add_option("--pronoun-csv", f.pronoun_csv, "default <out>_pronouns.csv");
  eval->add_option("--iou", f.iou, "IoU threshold for a true positive");

  auto* serve = app.add_subcommand("serve", "HTTP scoring service");
  serve->add_option("--port", f.port, "listen port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", f.host, "bind address");
  add_weight_flags(serve, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? gr::kExitOk : gr::kExitUsage;
  }

  try {
    gr::Settings settings = load_settings(f);

    if (validate->parsed()) {
      auto in = open_input(f.input);
      auto out = open_output(f.out);
      std::unique_ptr<std::ostream> summary =
          f.summary.empty() ? std::make_unique<std::ostream>(std::cerr.rdbuf()) : open_output(f.summary);
      return gr::cmd_validate(*in, *out, *summary, std::cerr);
    }
    if (score->parsed()) {
      auto in = open_input(f.input);
      auto outputs = open_input(f.outputs);
      auto out = open_output(f.out);
      std::unique_ptr<std::ostream> summary = f.summary.empty() ? nullptr : open_output(f.summary);
      return gr::cmd_score(*in, *outputs, *out, settings, std::cerr, summary.get());
    }
    if (synth->parsed()) {
      auto in = open_input(f.input);
      auto out = open_output(f.out);
      std::string prov_path = f.provenance.empty() ? sibling_path(f.out, ".provenance.json") : f.provenance;
      std::unique_ptr<std::ostream> prov =
          prov_path.empty() ? std::make_unique<std::ostream>(std::cerr.rdbuf()) : open_output(prov_path);
      gr::SynthOptions opts;
      opts.ratio = f.ratio == "half" ? gr::CorpusRatio::Half : gr::CorpusRatio::Double;
      opts.count = f.count;
      return gr::cmd_synth(*in, *out, *prov, opts, std::cerr);
    }
    if (pairs->parsed()) {
      auto in = open_input(f.input);
      auto out = open_output(f.out);
      std::unique_ptr<std::ostream> summary = f.summary.empty() ? nullptr : open_output(f.summary);
      return gr::cmd_pairs(*in, *out, summary.get(), settings.min_margin, std::cerr);
    }
    if (eval->parsed()) {
      auto gold = open_input(f.input);
      auto preds = open_input(f.outputs);
      auto out = open_output(f.out);
      std::string pers = f.persistence_csv.empty() ? sibling_path(f.out, "_persistence.csv") : f.persistence_csv;
      std::string pron = f.pronoun_csv.empty() ? sibling_path(f.out, "_pronouns.csv") : f.pronoun_csv;
      if (pers.empty() || pron.empty()) {
        throw UsageError("eval writing to stdout needs --persistence-csv and --pronoun-csv");
      }
      auto pers_out = open_output(pers);
      auto pron_out = open_output(pron);
      return gr::cmd_eval(*gold, *preds, *out, *pers_out, *pron_out, settings, std::cerr);
    }
    if (serve->parsed()) {
      httplib::Server server;
      gr::configure_service(server, settings);
      std::cerr << "listening on " << f.host << ":" << f.port << '\n';
      if (!server.listen(f.host, f.port)) {
        std::cerr << "cannot bind " << f.host << ":" << f.port << '\n';
        return gr::kExitUsage;
      }
      return gr::kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gr::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gr::kExitData;
  }
  return gr::kExitUsage;
}
