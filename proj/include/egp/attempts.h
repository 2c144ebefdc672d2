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

#ifndef EGP_ATTEMPTS_H_
#define EGP_ATTEMPTS_H_

#include <optional>
#include <string_view>

namespace egp {

// Outcome of a construct attempt in an (original, corrected) pair.
enum class AttemptClass {
  kSuccessful,    // present in both sides
  kUnsuccessful,  // absent in the original, present in the correction
  kNone,          // no attempt, or another error
};

// One-vs-rest projections of AttemptClass.
enum class Task {
  kGeneral,       // successful or unsuccessful vs none
  kSuccessful,    // successful vs rest
  kUnsuccessful,  // unsuccessful vs rest
};

struct ThresholdPair {
  double tau_o = 0.5;  // original side
  double tau_c = 0.5;  // corrected side
};

// Throws kValue unless both thresholds lie in [0, 1].
ThresholdPair MakeThresholdPair(double tau_o, double tau_c);

AttemptClass ClassFromLabels(bool y_o, bool y_c);

// Positive means p >= tau on that side.
AttemptClass ClassFromProbs(double p_o, double p_c, const ThresholdPair &t);

bool OneVsRest(AttemptClass c, Task task);

std::string_view AttemptClassName(AttemptClass c);  // "successful", ...
std::string_view TaskName(Task task);               // "general", ...
std::optional<Task> TryParseTask(std::string_view name);

}  // namespace egp

#endif  // EGP_ATTEMPTS_H_
