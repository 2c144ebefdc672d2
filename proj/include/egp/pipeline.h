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

#ifndef EGP_PIPELINE_H_
#define EGP_PIPELINE_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egp/attempts.h"
#include "egp/corpus.h"
#include "egp/llm_client.h"
#include "egp/ruleset.h"
#include "egp/scoring.h"

namespace egp {

enum class Engine { kRules, kLlm, kRulesThenLlm };

std::optional<Engine> TryParseEngine(std::string_view name);

// ---- detection tables ----------------------------------------------------------
//
// CSV: essay_id,index,egp_id,p_o,p_c, sorted by (essay_id, index, egp_id).

std::string DetectionsCsv(std::vector<Detection> detections);
std::vector<Detection> ParseDetectionsCsv(std::string_view csv_text);
std::vector<Detection> LoadDetections(const std::string &path);

// Built-in rules for catalog statements that have one, then rules from
// `rule_files` in the requested mode (a file rule replaces a built-in with
// the same id). Rules for ids outside the catalog are dropped.
std::vector<Rule> AssembleRules(const Catalog &catalog,
                                const std::vector<std::string> &rule_files,
                                RuleMode mode);

// One 0/1 detection per (pair, rule).
std::vector<Detection> DetectWithRules(std::span<const SentencePair> pairs,
                                       std::span<const Rule> detectors);

struct LlmDetectStats {
  std::size_t prompts = 0;        // sides sent to the classifier
  std::size_t filtered_out = 0;   // sides fixed to 0 by a filter
  std::vector<ItemError> errors;  // index into prompts order
};

// Every catalog statement on both sides of every pair. With `filters`, a
// side is only classified when the statement's filter matches it; other
// sides get probability 0. Statements without a filter are always
// classified. Failed items are left out of the result and reported in
// `stats`.
std::vector<Detection> DetectWithLlm(std::span<const SentencePair> pairs,
                                     const Catalog &catalog, LlmClient &client,
                                     const std::vector<Rule> *filters,
                                     LlmDetectStats &stats);

// ---- classification and evaluation --------------------------------------------

struct ClassifiedDetection {
  Detection detection;
  AttemptClass attempt = AttemptClass::kNone;
};

// Per-level thresholds applied to both sides.
std::vector<ClassifiedDetection> ClassifyDetections(std::span<const Detection> detections,
                                                    const Catalog &catalog,
                                                    const ThresholdConfig &thresholds);
std::string ClassesCsv(std::span<const ClassifiedDetection> rows);

struct TaskMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::size_t gold_positives = 0;
};

struct StatementMetrics {
  int egp_id = 0;
  std::size_t items = 0;
  bool probabilistic = false;  // false: evaluated at its single operating point
  std::map<Task, TaskMetrics> tasks;
};

struct EvaluationReport {
  std::vector<StatementMetrics> statements;  // ascending egp_id
  std::map<Task, TaskMetrics> macro;         // mean over statements with defined values
};

// Detections whose probabilities are all 0 or 1 are scored at tau = 0.5;
// anything else uses the best F1 along the max-precision envelope. F1 is
// undefined only without gold positives; no predicted positives gives 0.
// Throws kCoverage listing annotations that have no detection.
EvaluationReport EvaluateDetections(std::span<const Detection> detections,
                                    std::span<const AttemptAnnotation> annotations);
std::string EvaluationJson(const EvaluationReport &report);

// ---- essay scoring -----------------------------------------------------------------

struct EssayScore {
  std::string essay_id;
  CefrBand cefr = CefrBand::kA1;
  std::optional<double> general;
  std::optional<double> successful;
  std::size_t n_attempts = 0;  // unique general attempts
};

struct ScoringOptions {
  ThresholdConfig thresholds;
  LevelWeights weights;
  Denominator denominator = Denominator::kSameMode;
};

// One row per essay in `meta`, ascending essay id. Throws kJoin when a
// detection names an essay missing from `meta`.
std::vector<EssayScore> ScoreEssays(std::span<const Detection> detections,
                                    const EssayMetaTable &meta, const Catalog &catalog,
                                    const ScoringOptions &options);
std::string ScoresCsv(std::span<const EssayScore> scores);

struct CorrelationReport {
  std::size_t used = 0;
  std::size_t excluded = 0;  // essays without attempts
  double pcc = 0.0;
  double src = 0.0;
};

// Throws kEvaluation when fewer than two essays have scores or a side is
// constant.
CorrelationReport Correlate(std::span<const EssayScore> scores, AttemptMode mode);

// Every essay in `meta` with its detections. Throws kJoin as ScoreEssays.
std::vector<EssayDetections> GroupDetections(std::span<const Detection> detections,
                                             const EssayMetaTable &meta);

std::string TuningJson(const TuningResult &result, const TuningOptions &options);

// ---- analyses ----------------------------------------------------------------------

struct AnalysisTables {
  std::string cumulative_csv;  // band,attempts,status,C2,C1,B2,B1,A2,A1
  std::string auc_csv;         // essay_id,band,auc
  std::string ecdf_csv;        // band,auc,fraction
  std::string attempts_csv;    // attempts grouped by super/subcategory
};

AnalysisTables Analyze(std::span<const Detection> detections, const EssayMetaTable &meta,
                       const Catalog &catalog, const ThresholdConfig &thresholds,
                       AttemptMode mode);

}  // namespace egp

#endif  // EGP_PIPELINE_H_
