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

#ifndef EGP_CEFR_H_
#define EGP_CEFR_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace egp {

// The six base levels. Statements in the catalog carry only these.
enum class CefrLevel { kA1 = 0, kA2, kB1, kB2, kC1, kC2 };

inline constexpr std::size_t kNumLevels = 6;
inline constexpr std::array<CefrLevel, kNumLevels> kAllLevels = {
    CefrLevel::kA1, CefrLevel::kA2, CefrLevel::kB1,
    CefrLevel::kB2, CefrLevel::kC1, CefrLevel::kC2};

// Holistic essay bands, including the plus bands used by some corpora.
enum class CefrBand {
  kA1 = 0, kA2, kA2Plus, kB1, kB1Plus, kB2, kB2Plus, kC1, kC1Plus, kC2
};

inline constexpr std::size_t kNumBands = 10;
inline constexpr std::array<CefrBand, kNumBands> kAllBands = {
    CefrBand::kA1, CefrBand::kA2, CefrBand::kA2Plus, CefrBand::kB1,
    CefrBand::kB1Plus, CefrBand::kB2, CefrBand::kB2Plus, CefrBand::kC1,
    CefrBand::kC1Plus, CefrBand::kC2};

inline constexpr std::size_t LevelIndex(CefrLevel level) {
  return static_cast<std::size_t>(level);
}

std::string_view LevelName(CefrLevel level);
std::string_view BandName(CefrBand band);

std::optional<CefrLevel> TryParseLevel(std::string_view text);
std::optional<CefrBand> TryParseBand(std::string_view text);

// Throw ErrorKind::kValue on anything outside the closed sets.
CefrLevel ParseLevel(std::string_view text);
CefrBand ParseBand(std::string_view text);

// The band a statement level corresponds to (A1 -> A1, ...).
CefrBand BandOf(CefrLevel level);

}  // namespace egp

#endif  // EGP_CEFR_H_
