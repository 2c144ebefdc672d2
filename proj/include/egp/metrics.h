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

#ifndef EGP_METRICS_H_
#define EGP_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "egp/attempts.h"

namespace egp {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion &) const = default;
};

// Throws kValue on a length mismatch.
Confusion ComputeConfusion(const std::vector<bool> &pred,
                           const std::vector<bool> &gold);

// nullopt where the denominator is zero.
struct PrecisionRecall {
  std::optional<double> precision;
  std::optional<double> recall;
};

PrecisionRecall ComputePrecisionRecall(const Confusion &c);

// (1 + b^2) p r / (b^2 p + r); 0 when p = r = 0.
double FBeta(double precision, double recall, double beta);

struct PrPoint {
  double tau_o = 0.0;
  double tau_c = 0.0;
  std::optional<double> precision;
  double recall = 0.0;

  bool operator==(const PrPoint &) const = default;
};

// Distinct observed values in ascending order plus one value just above the
// maximum. With >= comparisons these reach every achievable labelling.
std::vector<double> CandidateThresholds(std::span<const double> probs);

// One point per (tau_o, tau_c) candidate pair, tau_o major. Throws kValue
// on length mismatch and kEvaluation when the task has no gold positives.
std::vector<PrPoint> PrScatter(std::span<const double> p_o,
                               std::span<const double> p_c,
                               std::span<const AttemptClass> gold, Task task);

struct EnvelopePoint {
  double recall = 0.0;
  double max_precision = 0.0;
  bool operator==(const EnvelopePoint &) const = default;
};

// Highest precision at each exact recall value, recall ascending. Recalls
// with no defined precision are omitted.
struct Envelope {
  std::vector<EnvelopePoint> points;
  bool operator==(const Envelope &) const = default;
};

// Throws kValue on empty input.
Envelope MaxPrecisionEnvelope(std::span<const PrPoint> points);

struct F1Point {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Maximum F1 along the envelope (first point on ties). Throws kValue when
// the envelope is empty.
F1Point BestF1Point(const Envelope &envelope);
double BestF1(const Envelope &envelope);

// Throws kValue on empty or mismatched input.
double CohenKappa(const std::vector<bool> &a, const std::vector<bool> &b);

// CSV exports: tau_o,tau_c,precision,recall and recall,max_precision.
// An undefined precision is written as an empty field.
std::string ScatterCsv(std::span<const PrPoint> points);
std::string EnvelopeCsv(const Envelope &envelope);

}  // namespace egp

#endif  // EGP_METRICS_H_
