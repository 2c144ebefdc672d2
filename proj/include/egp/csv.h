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

#ifndef EGP_CSV_H_
#define EGP_CSV_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace egp {

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF.
class CsvTable {
 public:
  // Parses `text`; the first record is the header. Throws kParse on an
  // unterminated quote.
  static CsvTable Parse(std::string_view text);

  const std::vector<std::string> &header() const { return header_; }
  const std::vector<std::vector<std::string>> &rows() const { return rows_; }

  // Column position by name. Throws kSchema naming the column if absent.
  std::size_t Column(std::string_view name) const;
  bool HasColumn(std::string_view name) const;

  // Throws kSchema listing the first missing column.
  void RequireColumns(const std::vector<std::string_view> &names) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string CsvEscape(std::string_view field);
std::string CsvLine(const std::vector<std::string> &fields);

}  // namespace egp

#endif  // EGP_CSV_H_
