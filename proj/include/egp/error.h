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

#ifndef EGP_ERROR_H_
#define EGP_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace egp {

// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kSchema,          // missing or unexpected columns / fields
  kParse,           // malformed input text
  kValue,           // value outside its domain
  kNotFound,        // unknown identifier
  kIo,              // local file could not be read or written
  kJoin,            // cross-file reference could not be resolved
  kCompile,         // invalid rule definition
  kCatalog,         // statement id missing from the catalog
  kCoverage,        // annotations without matching detections
  kTransport,       // completion endpoint unreachable or failing
  kClassification,  // endpoint answered but Yes/No could not be read
  kEvaluation,      // metric undefined on the given data
};

std::string_view ErrorKindName(ErrorKind kind);

// 2 = input/schema, 3 = external service, 4 = evaluation undefined.
int ExitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace egp

#endif  // EGP_ERROR_H_
