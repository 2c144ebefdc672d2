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

#include "egp/scoring.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "egp/error.h"
#include "egp/text.h"
#include "json.hpp"

namespace egp {

void LevelWeights::Validate() const {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      throw Error(ErrorKind::kValue, "level weights must increase with level");
    }
  }
}

std::string_view AttemptModeName(AttemptMode mode) {
  return mode == AttemptMode::kGeneral ? "general" : "successful";
}

std::optional<AttemptMode> TryParseAttemptMode(std::string_view name) {
  if (name == "general") return AttemptMode::kGeneral;
  if (name == "successful") return AttemptMode::kSuccessful;
  return std::nullopt;
}

// ---- thresholds --------------------------------------------------------------

namespace {

double CheckUnit(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorKind::kValue,
                "threshold must lie in [0, 1], got " + FormatDouble(tau));
  }
  return tau;
}

}  // namespace

ThresholdConfig ThresholdConfig::Uniform(double tau) {
  ThresholdConfig config;
  config.values.fill(CheckUnit(tau));
  return config;
}

ThresholdConfig ThresholdConfig::Parse(std::string_view text) {
  text = Trim(text);
  ThresholdConfig config;
  if (!text.empty() && text.front() == '{') {
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorKind::kValue, std::string("thresholds: ") + e.what());
    }
    for (CefrLevel level : kAllLevels) {
      const std::string key(LevelName(level));
      if (!obj.contains(key) || !obj[key].is_number()) {
        throw Error(ErrorKind::kValue, "thresholds: missing level " + key);
      }
      config.values[LevelIndex(level)] = CheckUnit(obj[key].get<double>());
    }
    return config;
  }
  const std::vector<std::string> parts = Split(text, ",");
  if (parts.size() == 1) return Uniform(ParseDouble(parts[0]));
  if (parts.size() != kNumLevels) {
    throw Error(ErrorKind::kValue,
                "thresholds: expected 1 or 6 values, got " +
                    std::to_string(parts.size()));
  }
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    config.values[i] = CheckUnit(ParseDouble(parts[i]));
  }
  return config;
}

std::string ThresholdConfig::ToJson() const {
  nlohmann::ordered_json obj;
  for (CefrLevel level : kAllLevels) {
    obj[std::string(LevelName(level))] = values[LevelIndex(level)];
  }
  return obj.dump();
}

std::vector<LabeledDetection> LabelDetections(std::span<const Detection> detections,
                                              const Catalog &catalog,
                                              const ThresholdConfig &thresholds) {
  std::vector<LabeledDetection> out;
  out.reserve(detections.size());
  for (const Detection &d : detections) {
    const double tau = thresholds[catalog.LevelOf(d.egp_id)];
    out.push_back(LabeledDetection{d.egp_id, d.p_o >= tau, d.p_c >= tau});
  }
  return out;
}

// ---- attempt score -------------------------------------------------------------

std::map<int, bool> UniqueIndicators(std::span<const LabeledDetection> preds,
                                     AttemptMode mode) {
  std::map<int, bool> indicators;
  for (const LabeledDetection &p : preds) {
    const bool attempted =
        mode == AttemptMode::kGeneral ? p.y_c : (p.y_o && p.y_c);
    bool &slot = indicators[p.egp_id];
    slot = slot || attempted;
  }
  return indicators;
}

std::array<std::size_t, kNumLevels> LevelCounts(
    const std::map<int, bool> &indicators, const Catalog &catalog) {
  std::array<std::size_t, kNumLevels> counts{};
  for (const auto &[egp_id, positive] : indicators) {
    const CefrLevel level = catalog.LevelOf(egp_id);
    if (positive) ++counts[LevelIndex(level)];
  }
  return counts;
}

std::optional<double> ScoreFromCounts(
    const std::array<std::size_t, kNumLevels> &numerator,
    const std::array<std::size_t, kNumLevels> &denominator,
    const LevelWeights &weights) {
  double weighted = 0.0;
  std::size_t total = 0;
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    weighted += weights.values[l] * static_cast<double>(numerator[l]);
    total += denominator[l];
  }
  if (total == 0) return std::nullopt;
  return weighted / static_cast<double>(total);
}

std::optional<double> ScoreFromCounts(
    const std::array<std::size_t, kNumLevels> &counts,
    const LevelWeights &weights) {
  return ScoreFromCounts(counts, counts, weights);
}

std::optional<double> AttemptScore(const std::map<int, bool> &indicators,
                                   const Catalog &catalog,
                                   const LevelWeights &weights) {
  return ScoreFromCounts(LevelCounts(indicators, catalog), weights);
}

double EncodeCefr(CefrBand band) {
  switch (band) {
    case CefrBand::kA1: return 1.0;
    case CefrBand::kA2: return 2.0;
    case CefrBand::kA2Plus: return 2.5;
    case CefrBand::kB1: return 3.0;
    case CefrBand::kB1Plus: return 3.5;
    case CefrBand::kB2: return 4.0;
    case CefrBand::kB2Plus: return 4.5;
    case CefrBand::kC1: return 5.0;
    case CefrBand::kC1Plus: return 5.5;
    case CefrBand::kC2: return 6.0;
  }
  return 0.0;
}

double EncodeCefr(std::string_view label) { return EncodeCefr(ParseBand(label)); }

// ---- correlation ---------------------------------------------------------------

namespace {

// nullopt when the coefficient is undefined.
std::optional<double> TryPcc(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::optional<double> TrySrc(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2) return std::nullopt;
  const std::vector<double> rx = FractionalRanks(x);
  const std::vector<double> ry = FractionalRanks(y);
  return TryPcc(rx, ry);
}

void CheckCorrelationInput(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kValue, "correlation inputs differ in length");
  }
  if (x.size() < 2) {
    throw Error(ErrorKind::kEvaluation,
                "correlation needs at least two values, got " +
                    std::to_string(x.size()));
  }
}

}  // namespace

std::vector<double> FractionalRanks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Pcc(std::span<const double> x, std::span<const double> y) {
  CheckCorrelationInput(x, y);
  if (auto r = TryPcc(x, y)) return *r;
  throw Error(ErrorKind::kEvaluation, "PCC undefined for a constant vector");
}

double Src(std::span<const double> x, std::span<const double> y) {
  CheckCorrelationInput(x, y);
  if (auto r = TrySrc(x, y)) return *r;
  throw Error(ErrorKind::kEvaluation, "SRC undefined for a constant vector");
}

// ---- tuning --------------------------------------------------------------------

std::map<std::string, int> AssignFolds(std::vector<std::string> essay_ids,
                                       int folds, std::uint64_t seed) {
  if (folds < 1) throw Error(ErrorKind::kValue, "folds must be positive");
  std::sort(essay_ids.begin(), essay_ids.end());
  essay_ids.erase(std::unique(essay_ids.begin(), essay_ids.end()), essay_ids.end());
  // Explicit Fisher-Yates: std::shuffle's draws are implementation-defined.
  std::mt19937_64 rng(seed);
  for (std::size_t i = essay_ids.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(essay_ids[i - 1], essay_ids[j]);
  }
  std::map<std::string, int> assignment;
  for (std::size_t i = 0; i < essay_ids.size(); ++i) {
    assignment[essay_ids[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return assignment;
}

namespace {

constexpr double kUndefinedSrc = -1.0;

// Objectives closer than this count as tied; rank patterns that are
// mathematically equal can differ in the last bits.
constexpr double kTieTolerance = 1e-12;

// Per-essay, per-statement detection strength: a statement is attempted at
// threshold tau iff its strength is >= tau.
struct StatementStrength {
  CefrLevel level;
  double general;     // max p_c
  double successful;  // max min(p_o, p_c)
};

std::vector<StatementStrength> Strengths(const EssayDetections &essay,
                                         const Catalog &catalog) {
  std::map<int, StatementStrength> by_id;
  for (const Detection &d : essay.detections) {
    const CefrLevel level = catalog.LevelOf(d.egp_id);
    auto [it, inserted] = by_id.try_emplace(
        d.egp_id, StatementStrength{level, -1.0, -1.0});
    it->second.general = std::max(it->second.general, d.p_c);
    it->second.successful = std::max(it->second.successful, std::min(d.p_o, d.p_c));
  }
  std::vector<StatementStrength> out;
  for (const auto &[id, s] : by_id) out.push_back(s);
  return out;
}

double NumeratorStrength(const StatementStrength &s, AttemptMode mode) {
  return mode == AttemptMode::kGeneral ? s.general : s.successful;
}

double DenominatorStrength(const StatementStrength &s, const TuningOptions &o) {
  if (o.denominator == Denominator::kGeneral) return s.general;
  return NumeratorStrength(s, o.mode);
}

// Scores, essay CEFR encodings and fold ids for one config.
class CvScorer {
 public:
  CvScorer(std::span<const EssayDetections> essays, const TuningOptions &options)
      : options_(options) {
    std::vector<std::string> ids;
    for (const EssayDetections &e : essays) ids.push_back(e.essay_id);
    const auto folds = AssignFolds(ids, options.folds, options.seed);
    for (const EssayDetections &e : essays) {
      fold_of_.push_back(folds.at(e.essay_id));
      cefr_.push_back(EncodeCefr(e.cefr));
    }
  }

  CvEvaluation Evaluate(std::span<const std::optional<double>> scores) const {
    const int k = options_.folds;
    CvEvaluation eval;
    if (options_.aggregation == CvAggregation::kPooled) {
      std::optional<double> src = SrcOf(scores, -1);
      eval.fold_src.push_back(src);
      eval.undefined_folds = src ? 0 : 1;
      eval.objective = src.value_or(kUndefinedSrc);
      return eval;
    }
    double sum = 0.0;
    for (int f = 0; f < k; ++f) {
      std::optional<double> src = SrcOf(scores, f);
      if (!src) ++eval.undefined_folds;
      sum += src.value_or(kUndefinedSrc);
      eval.fold_src.push_back(src);
    }
    eval.objective = sum / static_cast<double>(k);
    return eval;
  }

 private:
  // fold < 0 selects every essay.
  std::optional<double> SrcOf(std::span<const std::optional<double>> scores,
                              int fold) const {
    std::vector<double> x, y;
    for (std::size_t e = 0; e < scores.size(); ++e) {
      if (fold >= 0 && fold_of_[e] != fold) continue;
      if (!scores[e]) continue;
      x.push_back(*scores[e]);
      y.push_back(cefr_[e]);
    }
    return TrySrc(x, y);
  }

  const TuningOptions &options_;
  std::vector<int> fold_of_;
  std::vector<double> cefr_;
};

void CheckTuningInput(std::span<const EssayDetections> essays,
                      const TuningOptions &options) {
  if (options.folds < 2) throw Error(ErrorKind::kValue, "folds must be >= 2");
  if (essays.size() < static_cast<std::size_t>(options.folds)) {
    throw Error(ErrorKind::kValue,
                "tuning needs at least as many essays as folds (" +
                    std::to_string(essays.size()) + " essays, " +
                    std::to_string(options.folds) + " folds)");
  }
  options.weights.Validate();
}

}  // namespace

CvEvaluation EvaluateThresholds(std::span<const EssayDetections> essays,
                                const Catalog &catalog,
                                const ThresholdConfig &thresholds,
                                const TuningOptions &options) {
  CheckTuningInput(essays, options);
  CvScorer scorer(essays, options);
  std::vector<std::optional<double>> scores;
  for (const EssayDetections &essay : essays) {
    std::array<std::size_t, kNumLevels> num{}, den{};
    for (const StatementStrength &s : Strengths(essay, catalog)) {
      const double tau = thresholds[s.level];
      if (NumeratorStrength(s, options.mode) >= tau) ++num[LevelIndex(s.level)];
      if (DenominatorStrength(s, options) >= tau) ++den[LevelIndex(s.level)];
    }
    scores.push_back(ScoreFromCounts(num, den, options.weights));
  }
  return scorer.Evaluate(scores);
}

TuningResult GridSearch(std::span<const EssayDetections> essays,
                        const Catalog &catalog, const TuningOptions &options) {
  CheckTuningInput(essays, options);
  std::vector<double> candidates = options.candidates;
  if (candidates.empty()) {
    throw Error(ErrorKind::kValue, "candidate threshold set is empty");
  }
  for (double c : candidates) CheckUnit(c);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  const std::size_t num_candidates = candidates.size();

  // counts[e][l][c]: statements of level l attempted at threshold c.
  const std::size_t num_essays = essays.size();
  auto index = [&](std::size_t e, std::size_t l, std::size_t c) {
    return (e * kNumLevels + l) * num_candidates + c;
  };
  std::vector<std::size_t> num(num_essays * kNumLevels * num_candidates, 0);
  std::vector<std::size_t> den(num.size(), 0);
  for (std::size_t e = 0; e < num_essays; ++e) {
    for (const StatementStrength &s : Strengths(essays[e], catalog)) {
      const std::size_t l = LevelIndex(s.level);
      for (std::size_t c = 0; c < num_candidates; ++c) {
        if (NumeratorStrength(s, options.mode) >= candidates[c]) ++num[index(e, l, c)];
        if (DenominatorStrength(s, options) >= candidates[c]) ++den[index(e, l, c)];
      }
    }
  }

  std::size_t total_configs = 1;
  for (std::size_t l = 0; l < kNumLevels; ++l) total_configs *= num_candidates;

  CvScorer scorer(essays, options);

  struct Best {
    double objective = -std::numeric_limits<double>::infinity();
    std::size_t config = 0;
    std::size_t undefined = 0;
  };
  // Config index digits (base num_candidates), A1 most significant, so a
  // smaller index is a lexicographically smaller threshold vector.
  auto digits_of = [&](std::size_t config) {
    std::array<std::size_t, kNumLevels> digits{};
    for (std::size_t l = kNumLevels; l-- > 0;) {
      digits[l] = config % num_candidates;
      config /= num_candidates;
    }
    return digits;
  };
  auto search_range = [&](std::size_t begin, std::size_t end) {
    Best best;
    std::vector<std::optional<double>> scores(num_essays);
    for (std::size_t config = begin; config < end; ++config) {
      const auto digits = digits_of(config);
      for (std::size_t e = 0; e < num_essays; ++e) {
        std::array<std::size_t, kNumLevels> n{}, d{};
        for (std::size_t l = 0; l < kNumLevels; ++l) {
          n[l] = num[index(e, l, digits[l])];
          d[l] = den[index(e, l, digits[l])];
        }
        scores[e] = ScoreFromCounts(n, d, options.weights);
      }
      const CvEvaluation eval = scorer.Evaluate(scores);
      best.undefined += eval.undefined_folds;
      if (eval.objective > best.objective + kTieTolerance) {
        best.objective = eval.objective;
        best.config = config;
      }
    }
    return best;
  };

  unsigned threads = options.threads ? options.threads
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total_configs));
  std::vector<Best> partial(threads);
  if (threads == 1) {
    partial[0] = search_range(0, total_configs);
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (total_configs + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(total_configs, t * chunk);
      const std::size_t end = std::min(total_configs, begin + chunk);
      workers.emplace_back([&, t, begin, end] { partial[t] = search_range(begin, end); });
    }
    for (std::thread &w : workers) w.join();
  }

  // Chunks are in ascending config order, so ties keep the earliest config.
  Best best;
  for (const Best &p : partial) {
    best.undefined += p.undefined;
    if (p.objective > best.objective + kTieTolerance) {
      best.objective = p.objective;
      best.config = p.config;
    }
  }

  TuningResult result;
  const auto digits = digits_of(best.config);
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    result.thresholds.values[l] = candidates[digits[l]];
  }
  result.evaluation = EvaluateThresholds(essays, catalog, result.thresholds, options);
  result.configs_evaluated = total_configs;
  result.undefined_fold_events = best.undefined;
  return result;
}

// ---- distributions -------------------------------------------------------------

std::optional<CumulativeCurve> CumulativeFromCounts(
    const std::array<std::size_t, kNumLevels> &counts) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) return std::nullopt;
  CumulativeCurve curve{};
  std::size_t running = 0;
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    running += counts[LevelIndex(kDescendingLevels[i])];
    curve[i] = static_cast<double>(running) / static_cast<double>(total);
  }
  return curve;
}

std::vector<CumulativeRow> CumulativeLevelDistribution(
    std::span<const EssayLevelCounts> essays) {
  std::map<CefrBand, std::array<std::size_t, kNumLevels>> pooled;
  for (const EssayLevelCounts &e : essays) {
    auto &counts = pooled[e.band];
    for (std::size_t l = 0; l < kNumLevels; ++l) counts[l] += e.counts[l];
  }
  std::vector<CumulativeRow> rows;
  for (const auto &[band, counts] : pooled) {
    CumulativeRow row;
    row.band = band;
    row.attempts = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    row.fractions = CumulativeFromCounts(counts);
    rows.push_back(row);
  }
  return rows;
}

double TrapezoidAuc(const CumulativeCurve &curve) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    area += (curve[i] + curve[i + 1]) / 2.0;
  }
  return area;
}

AucAnalysis EcdfAuc(std::span<const EssayCurve> curves) {
  AucAnalysis analysis;
  std::map<CefrBand, std::vector<double>> by_band;
  for (const EssayCurve &c : curves) {
    const double auc = TrapezoidAuc(c.curve);
    analysis.essay_auc.push_back(auc);
    by_band[c.band].push_back(auc);
  }
  for (auto &[band, aucs] : by_band) {
    std::sort(aucs.begin(), aucs.end());
    const double n = static_cast<double>(aucs.size());
    for (std::size_t i = 0; i < aucs.size(); ++i) {
      if (i + 1 < aucs.size() && aucs[i + 1] == aucs[i]) continue;
      analysis.ecdf.push_back(EcdfPoint{band, aucs[i], static_cast<double>(i + 1) / n});
    }
  }
  return analysis;
}

}  // namespace egp
