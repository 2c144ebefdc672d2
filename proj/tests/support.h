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

// Shared helpers for the unit and acceptance binaries: fixture loading,
// synthetic data and reference implementations used as oracles.

#ifndef EGP_TESTS_SUPPORT_H_
#define EGP_TESTS_SUPPORT_H_

#include <atomic>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "egp/attempts.h"
#include "egp/corpus.h"
#include "egp/llm_client.h"
#include "egp/ruleset.h"
#include "egp/scoring.h"

namespace egp::testing {

std::string FixturePath(const std::string &name);
std::string CliPath();

// ---- rule pack ------------------------------------------------------------------

struct RulePackCase {
  std::string sent_id;
  int egp_id = 0;
  bool expected = false;
  Sentence sentence;
};

std::vector<RulePackCase> LoadRulePack();
Catalog FixtureCatalog();

// Random tokens over a vocabulary that contains every trigger word and tag
// the built-in rules look at. Heads form a tree rooted at a random token.
Sentence RandomSentence(std::mt19937_64 &rng);

// The sentence and statement used for the EGP 19 prompt.
PromptContext Egp19PromptContext();
extern const char kEgp19Prompt[];

// ---- oracles --------------------------------------------------------------------

namespace oracle {

AttemptClass Classify(double p_o, double p_c, double tau_o, double tau_c);
bool InTask(AttemptClass c, Task task);

struct ScatterPoint {
  double tau_o, tau_c;
  std::optional<double> precision;
  double recall;
};

// Exhaustive: all pairs of candidate thresholds, each pair evaluated with
// plain counting.
std::vector<ScatterPoint> Scatter(const std::vector<double> &p_o,
                                  const std::vector<double> &p_c,
                                  const std::vector<AttemptClass> &gold, Task task);
// (recall, max precision) pairs in ascending recall.
std::vector<std::pair<double, double>> Envelope(const std::vector<ScatterPoint> &points);
double BestF1(const std::vector<std::pair<double, double>> &envelope);

double Pcc(const std::vector<double> &x, const std::vector<double> &y);
std::vector<double> AverageRanks(const std::vector<double> &x);
double Src(const std::vector<double> &x, const std::vector<double> &y);
double Kappa(const std::vector<bool> &a, const std::vector<bool> &b);

// Weighted mean of level weights over positive statements; nullopt when
// nothing is positive.
std::optional<double> Score(const std::vector<CefrLevel> &positive_levels);

struct GridAnswer {
  std::array<double, kNumLevels> thresholds{};
  double objective = 0.0;
};

// Loops over every config, scores every essay from its raw detections and
// averages per-fold SRC (undefined fold = -1). Ties keep the
// lexicographically smallest vector (A1 first).
GridAnswer GridSearch(const std::vector<EssayDetections> &essays, const Catalog &catalog,
                      const std::vector<double> &candidates, int folds, std::uint64_t seed,
                      AttemptMode mode);

}  // namespace oracle

// ---- synthetic data ---------------------------------------------------------------

// Catalog with `per_level` statements per CEFR level, ids 1000 + 10 * level
// + k, each with one example.
Catalog SyntheticCatalog(int per_level);

struct PlantedCorpus {
  Catalog catalog;
  std::vector<Rule> detectors;
  std::vector<SentencePair> pairs;
  EssayMetaTable meta;
};

// `essays` essays spread evenly over the six levels. Every sentence of an
// essay carries marker words of its planted level only; the detectors fire
// on those markers. Some corrected sentences drop a marker, so general and
// successful indicators differ.
PlantedCorpus MakePlantedCorpus(int essays, std::uint64_t seed);

// Random probability detections for `essays` essays over `catalog`.
std::vector<EssayDetections> RandomEssayDetections(const Catalog &catalog, int essays,
                                                   std::uint64_t seed);

// ---- LLM transport ------------------------------------------------------------------

// Chat-completions body whose first token has the given alternatives.
std::string ChatResponse(const std::vector<std::pair<std::string, double>> &alternatives);

class ScriptedTransport : public Transport {
 public:
  using Handler = std::function<HttpResponse(const std::string &body, int call)>;
  explicit ScriptedTransport(Handler handler) : handler_(std::move(handler)) {}

  HttpResponse PostJson(const std::string &url, const std::string &body,
                        const std::string &api_key,
                        std::chrono::milliseconds timeout) override;

  int calls() const { return calls_.load(); }
  int max_concurrent() const { return max_concurrent_.load(); }
  std::string last_url() const;
  std::string last_api_key() const;

 private:
  Handler handler_;
  std::atomic<int> calls_{0};
  std::atomic<int> active_{0};
  std::atomic<int> max_concurrent_{0};
  mutable std::mutex mu_;
  std::string last_url_;
  std::string last_api_key_;
};

}  // namespace egp::testing

#endif  // EGP_TESTS_SUPPORT_H_
