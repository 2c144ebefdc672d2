// Copyright 2026 The egpkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// egp: detect grammar constructs in learner essays, classify attempts,
// evaluate against annotations, and score proficiency.
//
//   egp detect   --catalog egp.csv --corpus pairs.jsonl --engine rules --out run/
//   egp evaluate --detections run/detections.csv --annotations gold.jsonl --out run/
//   egp score    --catalog egp.csv --detections run/detections.csv --meta essays.csv --out run/
//
// Every flag may also come from --config (TOML/INI, keys named like the flags).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "egp/corpus.h"
#include "egp/error.h"
#include "egp/llm_client.h"
#include "egp/pipeline.h"
#include "egp/ruleset.h"
#include "egp/scoring.h"
#include "egp/text.h"
#include "json.hpp"

namespace {

using egp::Error;
using egp::ErrorKind;

struct Options {
  std::string catalog;
  std::string corpus;
  std::string annotations;
  std::string meta;
  std::string detections;
  std::vector<std::string> rules;
  std::string engine = "rules";
  std::string mode = "successful";
  std::string thresholds;
  std::string candidates;
  int folds = 5;
  std::uint64_t seed = 0;
  std::string aggregation = "mean-of-folds";
  std::string denominator = "same-mode";
  unsigned threads = 0;
  std::string out;

  std::string llm_url;
  std::string llm_model;
  int max_in_flight = 4;
  int timeout_ms = 60000;
  std::string cache_dir;

  std::string cache_action = "stats";
};

void Require(const std::string &value, const char *flag, const char *command) {
  if (value.empty()) {
    throw Error(ErrorKind::kSchema,
                std::string(command) + " requires " + flag);
  }
}

void Emit(const Options &opt, const std::string &name, const std::string &content) {
  std::filesystem::create_directories(opt.out);
  const std::string path = (std::filesystem::path(opt.out) / name).string();
  egp::WriteFile(path, content);
  std::cerr << "wrote " << path << "\n";
}

egp::Catalog LoadCatalog(const Options &opt, const char *command) {
  Require(opt.catalog, "--catalog", command);
  return egp::Catalog(egp::LoadEgpCatalog(opt.catalog));
}

egp::ThresholdConfig Thresholds(const Options &opt) {
  return opt.thresholds.empty() ? egp::ThresholdConfig{}
                                : egp::ThresholdConfig::Parse(opt.thresholds);
}

egp::AttemptMode Mode(const Options &opt) {
  auto mode = egp::TryParseAttemptMode(opt.mode);
  if (!mode) {
    throw Error(ErrorKind::kValue,
                "--mode must be general or successful here, got '" + opt.mode + "'");
  }
  return *mode;
}

egp::Denominator DenominatorOf(const Options &opt) {
  if (opt.denominator == "same-mode") return egp::Denominator::kSameMode;
  if (opt.denominator == "general") return egp::Denominator::kGeneral;
  throw Error(ErrorKind::kValue, "--denominator must be same-mode or general");
}

egp::LlmConfig LlmSettings(const Options &opt) {
  egp::LlmConfig config;
  config.base_url = opt.llm_url;
  config.model = opt.llm_model;
  config.max_in_flight = opt.max_in_flight;
  config.timeout = std::chrono::milliseconds(opt.timeout_ms);
  config.cache_dir = opt.cache_dir;
  egp::ApplyApiKeyFromEnvironment(config);
  config.Validate();
  return config;
}

int RunDetect(const Options &opt) {
  const egp::Catalog catalog = LoadCatalog(opt, "detect");
  Require(opt.corpus, "--corpus", "detect");
  Require(opt.out, "--out", "detect");
  const auto engine = egp::TryParseEngine(opt.engine);
  if (!engine) {
    throw Error(ErrorKind::kValue,
                "--engine must be rules, llm or rules-then-llm, got '" + opt.engine + "'");
  }
  std::optional<egp::LlmConfig> llm;
  if (*engine != egp::Engine::kRules) {
    if (opt.llm_url.empty() || opt.llm_model.empty()) {
      throw Error(ErrorKind::kValue, "engine " + opt.engine +
                                         " requires --llm-url and --llm-model");
    }
    llm = LlmSettings(opt);
  }
  const std::vector<egp::SentencePair> pairs = egp::LoadSentencePairs(opt.corpus);

  std::vector<egp::Detection> detections;
  if (*engine == egp::Engine::kRules) {
    const auto detectors = egp::AssembleRules(catalog, opt.rules, egp::RuleMode::kDetector);
    detections = egp::DetectWithRules(pairs, detectors);
    std::cerr << detectors.size() << " detectors over " << pairs.size() << " pairs\n";
    Emit(opt, "detections.csv", egp::DetectionsCsv(std::move(detections)));
    return 0;
  }

  egp::LlmClient client(*llm);
  std::vector<egp::Rule> filters;
  if (*engine == egp::Engine::kRulesThenLlm) {
    filters = egp::AssembleRules(catalog, opt.rules, egp::RuleMode::kFilter);
  }
  egp::LlmDetectStats stats;
  detections = egp::DetectWithLlm(pairs, catalog, client,
                                  *engine == egp::Engine::kRulesThenLlm ? &filters : nullptr,
                                  stats);
  std::cerr << stats.prompts << " prompts, " << stats.filtered_out
            << " sides filtered out, " << client.network_calls() << " network calls\n";
  Emit(opt, "detections.csv", egp::DetectionsCsv(std::move(detections)));
  if (!stats.errors.empty()) {
    for (std::size_t i = 0; i < stats.errors.size() && i < 10; ++i) {
      std::cerr << "prompt " << stats.errors[i].index << ": " << stats.errors[i].message
                << "\n";
    }
    throw Error(stats.errors.front().kind,
                std::to_string(stats.errors.size()) + " prompts failed");
  }
  return 0;
}

int RunClassify(const Options &opt) {
  const egp::Catalog catalog = LoadCatalog(opt, "classify");
  Require(opt.detections, "--detections", "classify");
  Require(opt.out, "--out", "classify");
  const auto detections = egp::LoadDetections(opt.detections);
  const auto rows = egp::ClassifyDetections(detections, catalog, Thresholds(opt));
  Emit(opt, "classes.csv", egp::ClassesCsv(rows));
  return 0;
}

int RunEvaluate(const Options &opt) {
  Require(opt.detections, "--detections", "evaluate");
  Require(opt.annotations, "--annotations", "evaluate");
  Require(opt.out, "--out", "evaluate");
  const auto detections = egp::LoadDetections(opt.detections);
  const auto annotations = egp::LoadAnnotations(opt.annotations);
  Emit(opt, "evaluation.json",
       egp::EvaluationJson(egp::EvaluateDetections(detections, annotations)));
  return 0;
}

nlohmann::ordered_json CorrelationJson(const egp::CorrelationReport &r) {
  return {{"essays_used", r.used}, {"essays_excluded", r.excluded},
          {"pcc", r.pcc}, {"src", r.src}};
}

int RunScore(const Options &opt) {
  const egp::Catalog catalog = LoadCatalog(opt, "score");
  Require(opt.detections, "--detections", "score");
  Require(opt.meta, "--meta", "score");
  Require(opt.out, "--out", "score");
  egp::ScoringOptions scoring;
  scoring.thresholds = Thresholds(opt);
  scoring.denominator = DenominatorOf(opt);
  const auto detections = egp::LoadDetections(opt.detections);
  const auto meta = egp::LoadEssayMeta(opt.meta);
  const auto scores = egp::ScoreEssays(detections, meta, catalog, scoring);
  Emit(opt, "scores.csv", egp::ScoresCsv(scores));

  nlohmann::ordered_json report = {{"thresholds", nlohmann::ordered_json::parse(
                                                      scoring.thresholds.ToJson())}};
  for (egp::AttemptMode mode : {egp::AttemptMode::kGeneral, egp::AttemptMode::kSuccessful}) {
    report[std::string(egp::AttemptModeName(mode))] =
        CorrelationJson(egp::Correlate(scores, mode));
  }
  Emit(opt, "correlations.json", report.dump(2) + "\n");
  return 0;
}

std::vector<double> ParseCandidates(const std::string &text) {
  std::vector<double> values;
  for (const std::string &field : egp::Split(text, ",")) {
    const double v = egp::ParseDouble(egp::Trim(field));
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::kValue, "candidate threshold outside [0, 1]: " + field);
    }
    values.push_back(v);
  }
  return values;
}

int RunTune(const Options &opt) {
  const egp::Catalog catalog = LoadCatalog(opt, "tune");
  Require(opt.detections, "--detections", "tune");
  Require(opt.meta, "--meta", "tune");
  Require(opt.out, "--out", "tune");
  egp::TuningOptions tuning;
  if (!opt.candidates.empty()) tuning.candidates = ParseCandidates(opt.candidates);
  tuning.folds = opt.folds;
  tuning.seed = opt.seed;
  tuning.mode = Mode(opt);
  tuning.denominator = DenominatorOf(opt);
  tuning.threads = opt.threads;
  if (opt.aggregation == "pooled") {
    tuning.aggregation = egp::CvAggregation::kPooled;
  } else if (opt.aggregation != "mean-of-folds") {
    throw Error(ErrorKind::kValue, "--aggregation must be mean-of-folds or pooled");
  }
  const auto detections = egp::LoadDetections(opt.detections);
  const auto essays = egp::GroupDetections(detections, egp::LoadEssayMeta(opt.meta));
  const egp::TuningResult result = egp::GridSearch(essays, catalog, tuning);
  Emit(opt, "tuning.json", egp::TuningJson(result, tuning));
  return 0;
}

int RunAnalyze(const Options &opt) {
  const egp::Catalog catalog = LoadCatalog(opt, "analyze");
  Require(opt.detections, "--detections", "analyze");
  Require(opt.meta, "--meta", "analyze");
  Require(opt.out, "--out", "analyze");
  const auto detections = egp::LoadDetections(opt.detections);
  const auto tables = egp::Analyze(detections, egp::LoadEssayMeta(opt.meta), catalog,
                                   Thresholds(opt), Mode(opt));
  Emit(opt, "cumulative.csv", tables.cumulative_csv);
  Emit(opt, "auc.csv", tables.auc_csv);
  Emit(opt, "ecdf.csv", tables.ecdf_csv);
  Emit(opt, "attempts.csv", tables.attempts_csv);
  return 0;
}

int RunCache(const Options &opt) {
  Require(opt.cache_dir, "--cache-dir", "cache");
  egp::ResponseCache cache(opt.cache_dir);
  if (opt.cache_action == "stats") {
    std::cout << cache.DiskEntries() << " entries in " << opt.cache_dir << "\n";
  } else if (opt.cache_action == "clear") {
    std::cout << "removed " << cache.ClearDisk() << " entries\n";
  } else {
    throw Error(ErrorKind::kValue, "cache action must be stats or clear");
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Grammar-construct attempt detection and proficiency scoring"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--catalog", opt.catalog, "EGP catalog CSV");
  app.add_option("--corpus", opt.corpus, "sentence pairs JSONL");
  app.add_option("--annotations", opt.annotations, "gold attempt labels JSONL");
  app.add_option("--meta", opt.meta, "essay metadata CSV (essay_id,cefr)");
  app.add_option("--detections", opt.detections, "detections CSV from detect");
  app.add_option("--rules", opt.rules, "extra rule-definition JSON files");
  app.add_option("--engine", opt.engine, "rules | llm | rules-then-llm")
      ->capture_default_str();
  app.add_option("--mode", opt.mode, "general | successful")->capture_default_str();
  app.add_option("--thresholds", opt.thresholds,
                 "one value, six comma-separated values (A1..C2) or a JSON object");
  app.add_option("--candidates", opt.candidates, "comma-separated tuning candidates");
  app.add_option("--folds", opt.folds, "cross-validation folds")->capture_default_str();
  app.add_option("--seed", opt.seed, "fold-assignment seed")->capture_default_str();
  app.add_option("--aggregation", opt.aggregation, "mean-of-folds | pooled")
      ->capture_default_str();
  app.add_option("--denominator", opt.denominator, "same-mode | general")
      ->capture_default_str();
  app.add_option("--threads", opt.threads, "worker threads for tuning (0: all cores)");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--llm-url", opt.llm_url, "chat-completions base URL, e.g. http://host/v1");
  app.add_option("--llm-model", opt.llm_model, "model name sent to the endpoint");
  app.add_option("--max-in-flight", opt.max_in_flight, "concurrent LLM requests")
      ->capture_default_str();
  app.add_option("--timeout-ms", opt.timeout_ms, "per-request timeout")
      ->capture_default_str();
  app.add_option("--cache-dir", opt.cache_dir, "on-disk LLM response cache");

  auto *detect = app.add_subcommand("detect", "run construct detectors over a corpus");
  auto *classify = app.add_subcommand("classify", "apply per-level thresholds to detections");
  auto *evaluate = app.add_subcommand("evaluate", "precision/recall/F1 against annotations");
  auto *score = app.add_subcommand("score", "attempt scores and correlations per essay");
  auto *tune = app.add_subcommand("tune", "cross-validated threshold grid search");
  auto *analyze = app.add_subcommand("analyze", "level distributions and AUC tables");
  auto *cache = app.add_subcommand("cache", "inspect or clear the LLM response cache");
  cache->add_option("action", opt.cache_action, "stats | clear")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*detect) return RunDetect(opt);
    if (*classify) return RunClassify(opt);
    if (*evaluate) return RunEvaluate(opt);
    if (*score) return RunScore(opt);
    if (*tune) return RunTune(opt);
    if (*analyze) return RunAnalyze(opt);
    if (*cache) return RunCache(opt);
  } catch (const Error &e) {
    std::cerr << "egp: " << egp::ErrorKindName(e.kind()) << ": " << e.what() << "\n";
    return egp::ExitCodeFor(e.kind());
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "egp: io: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
