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

#include "egp/pipeline.h"

#include <algorithm>
#include <set>
#include <tuple>

#include "egp/csv.h"
#include "egp/error.h"
#include "egp/metrics.h"
#include "egp/text.h"
#include "json.hpp"

namespace egp {

using json = nlohmann::ordered_json;

std::optional<Engine> TryParseEngine(std::string_view name) {
  if (name == "rules") return Engine::kRules;
  if (name == "llm") return Engine::kLlm;
  if (name == "rules-then-llm") return Engine::kRulesThenLlm;
  return std::nullopt;
}

namespace {

using DetectionKey = std::tuple<std::string, int, int>;

DetectionKey KeyOf(const Detection &d) { return {d.essay_id, d.index, d.egp_id}; }

void SortDetections(std::vector<Detection> &detections) {
  std::sort(detections.begin(), detections.end(),
            [](const Detection &a, const Detection &b) { return KeyOf(a) < KeyOf(b); });
}

std::string Optional(const std::optional<double> &value) {
  return value ? FormatDouble(*value) : "";
}

}  // namespace

// ---- detection tables ----------------------------------------------------------

std::string DetectionsCsv(std::vector<Detection> detections) {
  SortDetections(detections);
  std::string out = CsvLine({"essay_id", "index", "egp_id", "p_o", "p_c"});
  for (const Detection &d : detections) {
    out += CsvLine({d.essay_id, std::to_string(d.index), std::to_string(d.egp_id),
                    FormatDouble(d.p_o), FormatDouble(d.p_c)});
  }
  return out;
}

std::vector<Detection> ParseDetectionsCsv(std::string_view csv_text) {
  const CsvTable table = CsvTable::Parse(csv_text);
  table.RequireColumns({"essay_id", "index", "egp_id", "p_o", "p_c"});
  const std::size_t c_essay = table.Column("essay_id");
  const std::size_t c_index = table.Column("index");
  const std::size_t c_egp = table.Column("egp_id");
  const std::size_t c_po = table.Column("p_o");
  const std::size_t c_pc = table.Column("p_c");
  std::vector<Detection> out;
  std::set<DetectionKey> seen;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto &row = table.rows()[r];
    const std::string where = "row " + std::to_string(r + 2) + ": ";
    if (row.size() != table.header().size()) {
      throw Error(ErrorKind::kParse, where + "wrong number of fields");
    }
    Detection d;
    try {
      d.essay_id = row[c_essay];
      d.index = static_cast<int>(ParseInt(row[c_index]));
      d.egp_id = static_cast<int>(ParseInt(row[c_egp]));
      d.p_o = ParseDouble(row[c_po]);
      d.p_c = ParseDouble(row[c_pc]);
    } catch (const Error &e) {
      throw Error(e.kind(), where + e.what());
    }
    for (double p : {d.p_o, d.p_c}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorKind::kValue, where + "probability outside [0, 1]");
      }
    }
    if (!seen.insert(KeyOf(d)).second) {
      throw Error(ErrorKind::kValue, where + "duplicate detection");
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Detection> LoadDetections(const std::string &path) {
  try {
    return ParseDetectionsCsv(ReadFile(path));
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::vector<Rule> AssembleRules(const Catalog &catalog,
                                const std::vector<std::string> &rule_files,
                                RuleMode mode) {
  std::map<int, Rule> by_id;
  for (int id : BuiltinIds()) {
    if (!catalog.Find(id)) continue;
    by_id.insert_or_assign(id, mode == RuleMode::kDetector ? BuiltinDetector(id)
                                                           : BuiltinFilter(id));
  }
  for (const std::string &path : rule_files) {
    for (Rule &rule : LoadRuleFile(path)) {
      if (rule.mode != mode || !catalog.Find(rule.egp_id)) continue;
      by_id.insert_or_assign(rule.egp_id, std::move(rule));
    }
  }
  std::vector<Rule> rules;
  for (auto &[id, rule] : by_id) rules.push_back(std::move(rule));
  return rules;
}

std::vector<Detection> DetectWithRules(std::span<const SentencePair> pairs,
                                       std::span<const Rule> detectors) {
  std::vector<Detection> out;
  for (const SentencePair &pair : pairs) {
    const auto original = RunDetectors(detectors, pair.original);
    const auto corrected = RunDetectors(detectors, pair.corrected);
    for (const auto &[egp_id, hit] : original) {
      out.push_back(Detection{pair.essay_id, pair.index, egp_id, hit ? 1.0 : 0.0,
                              corrected.at(egp_id) ? 1.0 : 0.0});
    }
  }
  SortDetections(out);
  return out;
}

std::vector<Detection> DetectWithLlm(std::span<const SentencePair> pairs,
                                     const Catalog &catalog, LlmClient &client,
                                     const std::vector<Rule> *filters,
                                     LlmDetectStats &stats) {
  std::map<int, const Rule *> filter_of;
  if (filters) {
    for (const Rule &rule : *filters) filter_of[rule.egp_id] = &rule;
  }

  // Each (pair, statement) gets two slots; a slot is either fixed to 0 by
  // the filter or refers to a prompt in `contexts`.
  struct Slot {
    std::optional<std::size_t> prompt;
  };
  std::vector<PromptContext> contexts;
  std::vector<std::array<Slot, 2>> slots;
  std::vector<std::pair<const SentencePair *, int>> owners;
  for (const SentencePair &pair : pairs) {
    for (const CanDoStatement &statement : catalog.statements()) {
      std::array<Slot, 2> both;
      const Sentence *sides[2] = {&pair.original, &pair.corrected};
      for (int s = 0; s < 2; ++s) {
        auto it = filter_of.find(statement.egp_id);
        if (it != filter_of.end() && !EvaluateRule(*it->second, *sides[s]).matched) {
          ++stats.filtered_out;
          continue;
        }
        both[s].prompt = contexts.size();
        contexts.push_back(PromptContext{statement, *sides[s]});
      }
      slots.push_back(both);
      owners.emplace_back(&pair, statement.egp_id);
    }
  }
  stats.prompts = contexts.size();

  BatchResult batch = client.ClassifyBatch(contexts);
  stats.errors = batch.errors;

  std::vector<Detection> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    double p[2] = {0.0, 0.0};
    bool ok = true;
    for (int s = 0; s < 2 && ok; ++s) {
      if (!slots[i][s].prompt) continue;
      const auto &answer = batch.results[*slots[i][s].prompt];
      if (answer) {
        p[s] = answer->p;
      } else {
        ok = false;
      }
    }
    if (!ok) continue;
    out.push_back(Detection{owners[i].first->essay_id, owners[i].first->index,
                            owners[i].second, p[0], p[1]});
  }
  SortDetections(out);
  return out;
}

// ---- classification and evaluation --------------------------------------------

std::vector<ClassifiedDetection> ClassifyDetections(std::span<const Detection> detections,
                                                    const Catalog &catalog,
                                                    const ThresholdConfig &thresholds) {
  std::vector<ClassifiedDetection> out;
  for (const Detection &d : detections) {
    const double tau = thresholds[catalog.LevelOf(d.egp_id)];
    out.push_back({d, ClassFromProbs(d.p_o, d.p_c, ThresholdPair{tau, tau})});
  }
  return out;
}

std::string ClassesCsv(std::span<const ClassifiedDetection> rows) {
  std::string out = CsvLine({"essay_id", "index", "egp_id", "class"});
  for (const ClassifiedDetection &row : rows) {
    out += CsvLine({row.detection.essay_id, std::to_string(row.detection.index),
                    std::to_string(row.detection.egp_id),
                    std::string(AttemptClassName(row.attempt))});
  }
  return out;
}

namespace {

constexpr Task kTasks[] = {Task::kGeneral, Task::kSuccessful, Task::kUnsuccessful};

TaskMetrics BinaryMetrics(std::span<const double> p_o, std::span<const double> p_c,
                          std::span<const AttemptClass> gold, Task task) {
  std::vector<bool> pred, truth;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    pred.push_back(OneVsRest(ClassFromProbs(p_o[i], p_c[i], {0.5, 0.5}), task));
    truth.push_back(OneVsRest(gold[i], task));
  }
  const Confusion c = ComputeConfusion(pred, truth);
  const PrecisionRecall pr = ComputePrecisionRecall(c);
  TaskMetrics m;
  m.precision = pr.precision;
  m.recall = pr.recall;
  m.gold_positives = c.tp + c.fn;
  if (pr.recall) m.f1 = pr.precision ? FBeta(*pr.precision, *pr.recall, 1.0) : 0.0;
  return m;
}

TaskMetrics EnvelopeMetrics(std::span<const double> p_o, std::span<const double> p_c,
                            std::span<const AttemptClass> gold, Task task) {
  TaskMetrics m;
  for (AttemptClass g : gold) m.gold_positives += OneVsRest(g, task);
  if (m.gold_positives == 0) return m;
  const std::vector<PrPoint> scatter = PrScatter(p_o, p_c, gold, task);
  const Envelope envelope = MaxPrecisionEnvelope(scatter);
  if (envelope.points.empty()) return m;
  const F1Point best = BestF1Point(envelope);
  m.precision = best.precision;
  m.recall = best.recall;
  m.f1 = best.f1;
  return m;
}

void Accumulate(std::map<Task, std::array<std::pair<double, std::size_t>, 3>> &sums,
                Task task, const TaskMetrics &m) {
  auto &slot = sums[task];
  const std::optional<double> values[3] = {m.precision, m.recall, m.f1};
  for (int k = 0; k < 3; ++k) {
    if (values[k]) {
      slot[k].first += *values[k];
      ++slot[k].second;
    }
  }
}

json TaskJson(const TaskMetrics &m) {
  auto opt = [](const std::optional<double> &v) -> json {
    return v ? json(*v) : json(nullptr);
  };
  return {{"precision", opt(m.precision)},
          {"recall", opt(m.recall)},
          {"f1", opt(m.f1)},
          {"gold_positives", m.gold_positives}};
}

}  // namespace

EvaluationReport EvaluateDetections(std::span<const Detection> detections,
                                    std::span<const AttemptAnnotation> annotations) {
  std::map<DetectionKey, const Detection *> lookup;
  for (const Detection &d : detections) lookup[KeyOf(d)] = &d;

  struct Columns {
    std::vector<double> p_o, p_c;
    std::vector<AttemptClass> gold;
  };
  std::map<int, Columns> by_statement;
  std::vector<std::string> missing;
  for (const AttemptAnnotation &a : annotations) {
    auto it = lookup.find({a.essay_id, a.index, a.egp_id});
    if (it == lookup.end()) {
      missing.push_back("(" + a.essay_id + ", " + std::to_string(a.index) + ", " +
                        std::to_string(a.egp_id) + ")");
      continue;
    }
    Columns &cols = by_statement[a.egp_id];
    cols.p_o.push_back(it->second->p_o);
    cols.p_c.push_back(it->second->p_c);
    cols.gold.push_back(ClassFromLabels(a.y_o, a.y_c));
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
      if (i > 0) list += ", ";
      list += missing[i];
    }
    if (missing.size() > 20) list += ", ...";
    throw Error(ErrorKind::kCoverage, std::to_string(missing.size()) +
                                          " annotated (essay, index, egp_id) "
                                          "without detections: " + list);
  }

  EvaluationReport report;
  std::map<Task, std::array<std::pair<double, std::size_t>, 3>> sums;
  for (const auto &[egp_id, cols] : by_statement) {
    StatementMetrics sm;
    sm.egp_id = egp_id;
    sm.items = cols.gold.size();
    auto binary = [](double p) { return p == 0.0 || p == 1.0; };
    sm.probabilistic = !(std::all_of(cols.p_o.begin(), cols.p_o.end(), binary) &&
                         std::all_of(cols.p_c.begin(), cols.p_c.end(), binary));
    for (Task task : kTasks) {
      const TaskMetrics m = sm.probabilistic
                                ? EnvelopeMetrics(cols.p_o, cols.p_c, cols.gold, task)
                                : BinaryMetrics(cols.p_o, cols.p_c, cols.gold, task);
      sm.tasks[task] = m;
      Accumulate(sums, task, m);
    }
    report.statements.push_back(std::move(sm));
  }
  for (Task task : kTasks) {
    TaskMetrics macro;
    const auto &slot = sums[task];
    std::optional<double> *fields[3] = {&macro.precision, &macro.recall, &macro.f1};
    for (int k = 0; k < 3; ++k) {
      if (slot[k].second > 0) {
        *fields[k] = slot[k].first / static_cast<double>(slot[k].second);
      }
    }
    for (const StatementMetrics &sm : report.statements) {
      macro.gold_positives += sm.tasks.at(task).gold_positives;
    }
    report.macro[task] = macro;
  }
  return report;
}

std::string EvaluationJson(const EvaluationReport &report) {
  json statements = json::array();
  for (const StatementMetrics &sm : report.statements) {
    json tasks = json::object();
    for (const auto &[task, m] : sm.tasks) tasks[std::string(TaskName(task))] = TaskJson(m);
    statements.push_back({{"egp_id", sm.egp_id},
                          {"items", sm.items},
                          {"operating_point", sm.probabilistic ? "max-f1-along-envelope"
                                                               : "single"},
                          {"tasks", tasks}});
  }
  json macro = json::object();
  for (const auto &[task, m] : report.macro) macro[std::string(TaskName(task))] = TaskJson(m);
  return json{{"statements", statements}, {"macro", macro}}.dump(2) + "\n";
}

// ---- essay scoring -----------------------------------------------------------------

std::vector<EssayDetections> GroupDetections(std::span<const Detection> detections,
                                             const EssayMetaTable &meta) {
  std::map<std::string, EssayDetections> grouped;
  for (const auto &[id, m] : meta) {
    grouped[id] = EssayDetections{id, m.cefr, {}};
  }
  std::set<std::string> unknown;
  for (const Detection &d : detections) {
    auto it = grouped.find(d.essay_id);
    if (it == grouped.end()) {
      unknown.insert(d.essay_id);
      continue;
    }
    it->second.detections.push_back(d);
  }
  if (!unknown.empty()) {
    std::string ids;
    for (const std::string &id : unknown) ids += (ids.empty() ? "" : ", ") + id;
    throw Error(ErrorKind::kJoin, "detections for essays missing from metadata: " + ids);
  }
  std::vector<EssayDetections> out;
  for (auto &[id, essay] : grouped) out.push_back(std::move(essay));
  return out;
}

std::vector<EssayScore> ScoreEssays(std::span<const Detection> detections,
                                    const EssayMetaTable &meta, const Catalog &catalog,
                                    const ScoringOptions &options) {
  options.weights.Validate();
  std::vector<EssayScore> out;
  for (const EssayDetections &essay : GroupDetections(detections, meta)) {
    const auto labeled = LabelDetections(essay.detections, catalog, options.thresholds);
    const auto general = LevelCounts(UniqueIndicators(labeled, AttemptMode::kGeneral), catalog);
    const auto successful =
        LevelCounts(UniqueIndicators(labeled, AttemptMode::kSuccessful), catalog);
    EssayScore score;
    score.essay_id = essay.essay_id;
    score.cefr = essay.cefr;
    score.general = ScoreFromCounts(general, options.weights);
    score.successful =
        options.denominator == Denominator::kGeneral
            ? ScoreFromCounts(successful, general, options.weights)
            : ScoreFromCounts(successful, options.weights);
    for (std::size_t n : general) score.n_attempts += n;
    out.push_back(std::move(score));
  }
  return out;
}

std::string ScoresCsv(std::span<const EssayScore> scores) {
  std::string out = CsvLine({"essay_id", "cefr", "encoded_cefr", "score_general",
                             "score_successful", "n_attempts"});
  for (const EssayScore &s : scores) {
    out += CsvLine({s.essay_id, std::string(BandName(s.cefr)),
                    FormatDouble(EncodeCefr(s.cefr)), Optional(s.general),
                    Optional(s.successful), std::to_string(s.n_attempts)});
  }
  return out;
}

CorrelationReport Correlate(std::span<const EssayScore> scores, AttemptMode mode) {
  CorrelationReport report;
  std::vector<double> predicted, reference;
  for (const EssayScore &s : scores) {
    const std::optional<double> &value =
        mode == AttemptMode::kGeneral ? s.general : s.successful;
    if (!value) {
      ++report.excluded;
      continue;
    }
    predicted.push_back(*value);
    reference.push_back(EncodeCefr(s.cefr));
  }
  report.used = predicted.size();
  report.pcc = Pcc(predicted, reference);
  report.src = Src(predicted, reference);
  return report;
}

std::string TuningJson(const TuningResult &result, const TuningOptions &options) {
  json thresholds = json::object();
  for (CefrLevel level : kAllLevels) {
    thresholds[std::string(LevelName(level))] = result.thresholds[level];
  }
  json folds = json::array();
  for (const auto &src : result.evaluation.fold_src) {
    folds.push_back(src ? json(*src) : json(nullptr));
  }
  return json{{"mode", AttemptModeName(options.mode)},
              {"aggregation", options.aggregation == CvAggregation::kPooled
                                  ? "pooled"
                                  : "mean-of-folds"},
              {"candidates", options.candidates},
              {"folds", options.folds},
              {"seed", options.seed},
              {"thresholds", thresholds},
              {"objective_src", result.evaluation.objective},
              {"fold_src", folds},
              {"configs_evaluated", result.configs_evaluated},
              {"undefined_fold_events", result.undefined_fold_events}}
             .dump(2) +
         "\n";
}

// ---- analyses ----------------------------------------------------------------------

AnalysisTables Analyze(std::span<const Detection> detections, const EssayMetaTable &meta,
                       const Catalog &catalog, const ThresholdConfig &thresholds,
                       AttemptMode mode) {
  AnalysisTables tables;
  std::vector<EssayLevelCounts> counts;
  std::vector<EssayCurve> curves;

  struct AttemptRow {
    std::string supercategory, subcategory, essay_id;
    int index;
    int egp_id;
    AttemptClass attempt;
  };
  std::vector<AttemptRow> attempts;

  for (const EssayDetections &essay : GroupDetections(detections, meta)) {
    const auto labeled = LabelDetections(essay.detections, catalog, thresholds);
    EssayLevelCounts c{essay.essay_id, essay.cefr,
                       LevelCounts(UniqueIndicators(labeled, mode), catalog)};
    if (auto curve = CumulativeFromCounts(c.counts)) {
      curves.push_back(EssayCurve{essay.essay_id, essay.cefr, *curve});
    }
    counts.push_back(std::move(c));
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      const AttemptClass cls = ClassFromLabels(labeled[i].y_o, labeled[i].y_c);
      if (cls == AttemptClass::kNone) continue;
      const CanDoStatement &s = catalog.At(labeled[i].egp_id);
      attempts.push_back({s.supercategory, s.subcategory, essay.essay_id,
                          essay.detections[i].index, s.egp_id, cls});
    }
  }

  std::vector<std::string> header = {"band", "attempts", "status"};
  for (CefrLevel level : kDescendingLevels) header.emplace_back(LevelName(level));
  tables.cumulative_csv = CsvLine(header);
  for (const CumulativeRow &row : CumulativeLevelDistribution(counts)) {
    std::vector<std::string> fields = {std::string(BandName(row.band)),
                                       std::to_string(row.attempts),
                                       row.fractions ? "ok" : "absent"};
    for (std::size_t i = 0; i < kNumLevels; ++i) {
      fields.push_back(row.fractions ? FormatDouble((*row.fractions)[i]) : "");
    }
    tables.cumulative_csv += CsvLine(fields);
  }

  const AucAnalysis auc = EcdfAuc(curves);
  tables.auc_csv = CsvLine({"essay_id", "band", "auc"});
  for (std::size_t i = 0; i < curves.size(); ++i) {
    tables.auc_csv += CsvLine({curves[i].essay_id, std::string(BandName(curves[i].band)),
                               FormatDouble(auc.essay_auc[i])});
  }
  tables.ecdf_csv = CsvLine({"band", "auc", "fraction"});
  for (const EcdfPoint &p : auc.ecdf) {
    tables.ecdf_csv += CsvLine({std::string(BandName(p.band)), FormatDouble(p.auc),
                                FormatDouble(p.fraction)});
  }

  std::sort(attempts.begin(), attempts.end(), [](const AttemptRow &a, const AttemptRow &b) {
    return std::tie(a.supercategory, a.subcategory, a.essay_id, a.index, a.egp_id) <
           std::tie(b.supercategory, b.subcategory, b.essay_id, b.index, b.egp_id);
  });
  tables.attempts_csv = CsvLine({"supercategory", "subcategory", "egp_id", "essay_id",
                                 "index", "class"});
  for (const AttemptRow &a : attempts) {
    tables.attempts_csv += CsvLine({a.supercategory, a.subcategory, std::to_string(a.egp_id),
                                    a.essay_id, std::to_string(a.index),
                                    std::string(AttemptClassName(a.attempt))});
  }
  return tables;
}

}  // namespace egp
