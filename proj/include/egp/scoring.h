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

#ifndef EGP_SCORING_H_
#define EGP_SCORING_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egp/cefr.h"
#include "egp/corpus.h"

namespace egp {

// w(l) per base level; must be strictly increasing.
struct LevelWeights {
  std::array<double, kNumLevels> values = {1, 2, 3, 4, 5, 6};

  double operator[](CefrLevel level) const { return values[LevelIndex(level)]; }
  double min() const { return values.front(); }
  double max() const { return values.back(); }
  // Throws kValue.
  void Validate() const;
};

enum class AttemptMode {
  kGeneral,     // construct present in the corrected sentence
  kSuccessful,  // present in both original and corrected sentence
};

std::string_view AttemptModeName(AttemptMode mode);
std::optional<AttemptMode> TryParseAttemptMode(std::string_view name);

// Detector output for one statement on one sentence pair. Rule engines
// produce 0/1; the LLM produces probabilities.
struct Detection {
  std::string essay_id;
  int index = 0;
  int egp_id = 0;
  double p_o = 0.0;
  double p_c = 0.0;

  bool operator==(const Detection &) const = default;
};

struct LabeledDetection {
  int egp_id = 0;
  bool y_o = false;
  bool y_c = false;
};

// One threshold per base level, applied to both sides.
struct ThresholdConfig {
  std::array<double, kNumLevels> values = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5};

  double operator[](CefrLevel level) const { return values[LevelIndex(level)]; }
  static ThresholdConfig Uniform(double tau);
  // Accepts a single number, six comma-separated numbers (A1..C2), or a
  // JSON object keyed by level. Throws kValue.
  static ThresholdConfig Parse(std::string_view text);
  std::string ToJson() const;
};

// y = p >= threshold of the statement's level.
std::vector<LabeledDetection> LabelDetections(std::span<const Detection> detections,
                                              const Catalog &catalog,
                                              const ThresholdConfig &thresholds);

// Whether each statement was attempted at least once. Repeats count once.
std::map<int, bool> UniqueIndicators(std::span<const LabeledDetection> preds,
                                     AttemptMode mode);

// Positive indicators per level. Throws kCatalog on unknown ids.
std::array<std::size_t, kNumLevels> LevelCounts(
    const std::map<int, bool> &indicators, const Catalog &catalog);

// sum_l w(l) n_l / sum_l n_l; nullopt when there are no attempts.
std::optional<double> ScoreFromCounts(
    const std::array<std::size_t, kNumLevels> &counts,
    const LevelWeights &weights);

// Weighted numerator from `numerator` counts over the total of
// `denominator` counts (e.g. successful over general attempts).
std::optional<double> ScoreFromCounts(
    const std::array<std::size_t, kNumLevels> &numerator,
    const std::array<std::size_t, kNumLevels> &denominator,
    const LevelWeights &weights);

std::optional<double> AttemptScore(const std::map<int, bool> &indicators,
                                   const Catalog &catalog,
                                   const LevelWeights &weights);

// A1 -> 1, A2 -> 2, A2+ -> 2.5, ..., C2 -> 6.
double EncodeCefr(CefrBand band);
double EncodeCefr(std::string_view label);  // throws kValue

// Sample Pearson correlation. Throws kValue on length mismatch and
// kEvaluation for fewer than two values or a constant vector.
double Pcc(std::span<const double> x, std::span<const double> y);

// Pearson correlation of average ranks.
double Src(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> FractionalRanks(std::span<const double> values);

// ---- threshold tuning --------------------------------------------------------

enum class CvAggregation {
  kMeanOfFolds,  // mean of per-fold SRC
  kPooled,       // SRC over all held-out scores together
};

enum class Denominator {
  kSameMode,  // successful scores normalise by successful attempts
  kGeneral,   // successful scores normalise by general attempts
};

struct EssayDetections {
  std::string essay_id;
  CefrBand cefr = CefrBand::kA1;
  std::vector<Detection> detections;
};

struct TuningOptions {
  std::vector<double> candidates = {0.70, 0.80, 0.90, 0.95, 0.99};
  int folds = 5;
  std::uint64_t seed = 0;
  AttemptMode mode = AttemptMode::kSuccessful;
  CvAggregation aggregation = CvAggregation::kMeanOfFolds;
  Denominator denominator = Denominator::kSameMode;
  LevelWeights weights;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Fold of each essay id: ids are sorted, shuffled with a seeded
// mt19937_64 Fisher-Yates pass, and dealt round-robin.
std::map<std::string, int> AssignFolds(std::vector<std::string> essay_ids,
                                       int folds, std::uint64_t seed);

struct CvEvaluation {
  double objective = -1.0;
  std::vector<std::optional<double>> fold_src;  // nullopt: undefined (-1)
  std::size_t undefined_folds = 0;
};

// Scores every essay under `thresholds` and computes the CV objective.
CvEvaluation EvaluateThresholds(std::span<const EssayDetections> essays,
                                const Catalog &catalog,
                                const ThresholdConfig &thresholds,
                                const TuningOptions &options);

struct TuningResult {
  ThresholdConfig thresholds;
  CvEvaluation evaluation;
  std::size_t configs_evaluated = 0;
  std::size_t undefined_fold_events = 0;  // across all configs
};

// Exhaustive search over candidates^6 configs. Ties go to the
// lexicographically smallest threshold vector (A1 first). Throws kValue
// for an empty candidate set, folds < 2, or fewer essays than folds.
TuningResult GridSearch(std::span<const EssayDetections> essays,
                        const Catalog &catalog, const TuningOptions &options);

// ---- distribution analyses ---------------------------------------------------

// Level axis of cumulative curves, highest level first.
inline constexpr std::array<CefrLevel, kNumLevels> kDescendingLevels = {
    CefrLevel::kC2, CefrLevel::kC1, CefrLevel::kB2,
    CefrLevel::kB1, CefrLevel::kA2, CefrLevel::kA1};

using CumulativeCurve = std::array<double, kNumLevels>;

// Fraction of attempts at each level or higher, C2 first; nullopt when
// there are no attempts.
std::optional<CumulativeCurve> CumulativeFromCounts(
    const std::array<std::size_t, kNumLevels> &counts);

struct EssayLevelCounts {
  std::string essay_id;
  CefrBand band = CefrBand::kA1;
  std::array<std::size_t, kNumLevels> counts{};
};

struct CumulativeRow {
  CefrBand band = CefrBand::kA1;
  std::size_t attempts = 0;
  std::optional<CumulativeCurve> fractions;
};

// One row per band present in the input, in band order. Attempts are
// pooled over the essays of a band.
std::vector<CumulativeRow> CumulativeLevelDistribution(
    std::span<const EssayLevelCounts> essays);

struct EssayCurve {
  std::string essay_id;
  CefrBand band = CefrBand::kA1;
  CumulativeCurve curve{};
};

struct EcdfPoint {
  CefrBand band = CefrBand::kA1;
  double auc = 0.0;
  double fraction = 0.0;  // share of the band's essays with AUC <= auc
};

struct AucAnalysis {
  std::vector<double> essay_auc;  // aligned with the input curves
  std::vector<EcdfPoint> ecdf;    // band order, then ascending AUC
};

// Trapezoidal area with unit spacing between adjacent levels.
double TrapezoidAuc(const CumulativeCurve &curve);

AucAnalysis EcdfAuc(std::span<const EssayCurve> curves);

}  // namespace egp

#endif  // EGP_SCORING_H_
