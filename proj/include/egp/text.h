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

#ifndef EGP_TEXT_H_
#define EGP_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace egp {

// Replaces U+2018 / U+2019 with an ASCII apostrophe.
std::string NormalizeApostrophes(std::string_view text);

// Apostrophe-normalized, ASCII-lowercased form used for lexical matching.
std::string FoldWord(std::string_view word);

std::string_view Trim(std::string_view text);
std::string_view TrimLeft(std::string_view text);

std::vector<std::string> Split(std::string_view text, std::string_view sep);

// Shortest representation that round-trips through ParseDouble.
std::string FormatDouble(double value);

// Strict parsers: the whole string must be consumed. Throw kValue.
double ParseDouble(std::string_view text);
long long ParseInt(std::string_view text);

// Reads a whole file. Throws ErrorKind::kIo.
std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);

}  // namespace egp

#endif  // EGP_TEXT_H_
