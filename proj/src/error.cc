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

#include "egp/error.h"

namespace egp {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValue: return "value error";
    case ErrorKind::kNotFound: return "not found";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kJoin: return "join error";
    case ErrorKind::kCompile: return "rule compile error";
    case ErrorKind::kCatalog: return "catalog error";
    case ErrorKind::kCoverage: return "coverage error";
    case ErrorKind::kTransport: return "transport error";
    case ErrorKind::kClassification: return "classification error";
    case ErrorKind::kEvaluation: return "evaluation error";
  }
  return "error";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kTransport:
    case ErrorKind::kClassification:
      return 3;
    case ErrorKind::kEvaluation:
      return 4;
    default:
      return 2;
  }
}

}  // namespace egp
