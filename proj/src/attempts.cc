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

#include "egp/attempts.h"

#include <string>

#include "egp/error.h"

namespace egp {

ThresholdPair MakeThresholdPair(double tau_o, double tau_c) {
  auto check = [](double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
      throw Error(ErrorKind::kValue,
                  "threshold must lie in [0, 1], got " + std::to_string(tau));
    }
  };
  check(tau_o);
  check(tau_c);
  return ThresholdPair{tau_o, tau_c};
}

AttemptClass ClassFromLabels(bool y_o, bool y_c) {
  if (y_c) return y_o ? AttemptClass::kSuccessful : AttemptClass::kUnsuccessful;
  return AttemptClass::kNone;
}

AttemptClass ClassFromProbs(double p_o, double p_c, const ThresholdPair &t) {
  return ClassFromLabels(p_o >= t.tau_o, p_c >= t.tau_c);
}

bool OneVsRest(AttemptClass c, Task task) {
  switch (task) {
    case Task::kGeneral: return c != AttemptClass::kNone;
    case Task::kSuccessful: return c == AttemptClass::kSuccessful;
    case Task::kUnsuccessful: return c == AttemptClass::kUnsuccessful;
  }
  return false;
}

std::string_view AttemptClassName(AttemptClass c) {
  switch (c) {
    case AttemptClass::kSuccessful: return "successful";
    case AttemptClass::kUnsuccessful: return "unsuccessful";
    case AttemptClass::kNone: return "none";
  }
  return "none";
}

std::string_view TaskName(Task task) {
  switch (task) {
    case Task::kGeneral: return "general";
    case Task::kSuccessful: return "successful";
    case Task::kUnsuccessful: return "unsuccessful";
  }
  return "general";
}

std::optional<Task> TryParseTask(std::string_view name) {
  if (name == "general") return Task::kGeneral;
  if (name == "successful") return Task::kSuccessful;
  if (name == "unsuccessful") return Task::kUnsuccessful;
  return std::nullopt;
}

}  // namespace egp
