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

#include "egp/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "egp/csv.h"
#include "egp/error.h"
#include "egp/text.h"

namespace egp {

Confusion ComputeConfusion(const std::vector<bool> &pred,
                           const std::vector<bool> &gold) {
  if (pred.size() != gold.size()) {
    throw Error(ErrorKind::kValue, "prediction and gold lengths differ (" +
                                       std::to_string(pred.size()) + " vs " +
                                       std::to_string(gold.size()) + ")");
  }
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i]) {
      gold[i] ? ++c.tp : ++c.fp;
    } else {
      gold[i] ? ++c.fn : ++c.tn;
    }
  }
  return c;
}

PrecisionRecall ComputePrecisionRecall(const Confusion &c) {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0) {
    pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn > 0) {
    pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  return pr;
}

double FBeta(double precision, double recall, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::kValue, "beta must be positive");
  }
  if (!(precision >= 0.0 && precision <= 1.0 && recall >= 0.0 &&
        recall <= 1.0)) {
    throw Error(ErrorKind::kValue, "precision and recall must lie in [0, 1]");
  }
  if (precision == 0.0 && recall == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

std::vector<double> CandidateThresholds(std::span<const double> probs) {
  std::vector<double> values(probs.begin(), probs.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (!values.empty()) {
    values.push_back(
        std::nextafter(values.back(), std::numeric_limits<double>::infinity()));
  }
  return values;
}

std::vector<PrPoint> PrScatter(std::span<const double> p_o,
                               std::span<const double> p_c,
                               std::span<const AttemptClass> gold, Task task) {
  const std::size_t n = gold.size();
  if (p_o.size() != n || p_c.size() != n) {
    throw Error(ErrorKind::kValue, "probability and gold lengths differ");
  }
  std::vector<bool> gold_positive(n);
  for (std::size_t i = 0; i < n; ++i) gold_positive[i] = OneVsRest(gold[i], task);
  if (std::find(gold_positive.begin(), gold_positive.end(), true) ==
      gold_positive.end()) {
    throw Error(ErrorKind::kEvaluation, "no gold positives for task '" +
                                            std::string(TaskName(task)) +
                                            "'; recall is undefined");
  }

  const std::vector<double> taus_o = CandidateThresholds(p_o);
  const std::vector<double> taus_c = CandidateThresholds(p_c);
  std::vector<PrPoint> points;
  points.reserve(taus_o.size() * taus_c.size());
  std::vector<bool> pred(n);
  for (double tau_o : taus_o) {
    for (double tau_c : taus_c) {
      const ThresholdPair t{tau_o, tau_c};
      for (std::size_t i = 0; i < n; ++i) {
        pred[i] = OneVsRest(ClassFromProbs(p_o[i], p_c[i], t), task);
      }
      const PrecisionRecall pr =
          ComputePrecisionRecall(ComputeConfusion(pred, gold_positive));
      points.push_back(PrPoint{tau_o, tau_c, pr.precision, *pr.recall});
    }
  }
  return points;
}

Envelope MaxPrecisionEnvelope(std::span<const PrPoint> points) {
  if (points.empty()) {
    throw Error(ErrorKind::kValue, "cannot build an envelope from no points");
  }
  std::map<double, double> best;
  for (const PrPoint &p : points) {
    if (!p.precision) continue;
    auto [it, inserted] = best.emplace(p.recall, *p.precision);
    if (!inserted) it->second = std::max(it->second, *p.precision);
  }
  Envelope envelope;
  for (const auto &[recall, precision] : best) {
    envelope.points.push_back(EnvelopePoint{recall, precision});
  }
  return envelope;
}

F1Point BestF1Point(const Envelope &envelope) {
  if (envelope.points.empty()) {
    throw Error(ErrorKind::kValue, "empty envelope has no F1");
  }
  F1Point best{-1.0, 0.0, 0.0};
  for (const EnvelopePoint &p : envelope.points) {
    const double f1 = FBeta(p.max_precision, p.recall, 1.0);
    if (f1 > best.f1) best = F1Point{f1, p.max_precision, p.recall};
  }
  return best;
}

double BestF1(const Envelope &envelope) { return BestF1Point(envelope).f1; }

double CohenKappa(const std::vector<bool> &a, const std::vector<bool> &b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kValue, "rating lists differ in length");
  }
  if (a.empty()) throw Error(ErrorKind::kValue, "rating lists are empty");
  const double n = static_cast<double>(a.size());
  std::size_t agree = 0, a_pos = 0, b_pos = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    a_pos += a[i];
    b_pos += b[i];
  }
  const double p_obs = static_cast<double>(agree) / n;
  const double pa = static_cast<double>(a_pos) / n;
  const double pb = static_cast<double>(b_pos) / n;
  const double p_exp = pa * pb + (1.0 - pa) * (1.0 - pb);
  // Both raters constant and identical.
  if (p_exp == 1.0) return 1.0;
  return (p_obs - p_exp) / (1.0 - p_exp);
}

std::string ScatterCsv(std::span<const PrPoint> points) {
  std::string out = CsvLine({"tau_o", "tau_c", "precision", "recall"});
  for (const PrPoint &p : points) {
    out += CsvLine({FormatDouble(p.tau_o), FormatDouble(p.tau_c),
                    p.precision ? FormatDouble(*p.precision) : "",
                    FormatDouble(p.recall)});
  }
  return out;
}

std::string EnvelopeCsv(const Envelope &envelope) {
  std::string out = CsvLine({"recall", "max_precision"});
  for (const EnvelopePoint &p : envelope.points) {
    out += CsvLine({FormatDouble(p.recall), FormatDouble(p.max_precision)});
  }
  return out;
}

}  // namespace egp
