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

#include "egp/cefr.h"

#include <string>

#include "egp/error.h"

namespace egp {
namespace {

constexpr std::array<std::string_view, kNumLevels> kLevelNames = {
    "A1", "A2", "B1", "B2", "C1", "C2"};

constexpr std::array<std::string_view, kNumBands> kBandNames = {
    "A1", "A2", "A2+", "B1", "B1+", "B2", "B2+", "C1", "C1+", "C2"};

}  // namespace

std::string_view LevelName(CefrLevel level) {
  return kLevelNames[LevelIndex(level)];
}

std::string_view BandName(CefrBand band) {
  return kBandNames[static_cast<std::size_t>(band)];
}

std::optional<CefrLevel> TryParseLevel(std::string_view text) {
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    if (kLevelNames[i] == text) return kAllLevels[i];
  }
  return std::nullopt;
}

std::optional<CefrBand> TryParseBand(std::string_view text) {
  for (std::size_t i = 0; i < kNumBands; ++i) {
    if (kBandNames[i] == text) return kAllBands[i];
  }
  return std::nullopt;
}

CefrLevel ParseLevel(std::string_view text) {
  if (auto level = TryParseLevel(text)) return *level;
  throw Error(ErrorKind::kValue,
              "CEFR level must be one of A1..C2, got '" + std::string(text) +
                  "'");
}

CefrBand ParseBand(std::string_view text) {
  if (auto band = TryParseBand(text)) return *band;
  throw Error(ErrorKind::kValue,
              "unknown CEFR band '" + std::string(text) + "'");
}

CefrBand BandOf(CefrLevel level) {
  switch (level) {
    case CefrLevel::kA1: return CefrBand::kA1;
    case CefrLevel::kA2: return CefrBand::kA2;
    case CefrLevel::kB1: return CefrBand::kB1;
    case CefrLevel::kB2: return CefrBand::kB2;
    case CefrLevel::kC1: return CefrBand::kC1;
    case CefrLevel::kC2: return CefrBand::kC2;
  }
  return CefrBand::kA1;
}

}  // namespace egp
