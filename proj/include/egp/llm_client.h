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

#ifndef EGP_LLM_CLIENT_H_
#define EGP_LLM_CLIENT_H_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egp/corpus.h"
#include "egp/error.h"

namespace egp {

struct PromptContext {
  CanDoStatement statement;
  Sentence sentence;
};

// Renders the classification prompt: instruction, quoted sentence,
// (form, UPOS, XPOS, dep) tuples, the Yes/No instruction, the statement
// with its categories and examples, and "Your answer:". Lines are joined
// with '\n' and there is no trailing newline. Throws kValue when the
// sentence has no tokens or the statement has no examples.
std::string BuildPrompt(const PromptContext &ctx);

// Python repr() of a string, as used in the token tuple list.
std::string PythonRepr(std::string_view text);

struct PresenceProbability {
  double p = 0.0;  // in [0, 1]
};

// exp(yes) / (exp(yes) + exp(no)), shifted by the max for stability.
// Throws kValue on non-finite input.
PresenceProbability SoftmaxConfidence(double logp_yes, double logp_no);

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

// Top alternatives of the first generated token. Understands the chat
// completions layout (choices[0].logprobs.content[0].top_logprobs) and the
// legacy completions layout (choices[0].logprobs.top_logprobs[0]).
// Throws kClassification on anything else.
std::vector<TokenLogprob> ParseFirstTokenLogprobs(std::string_view body);

// Yes/No variants are matched after folding case and leading whitespace;
// the best-scoring variant of each is used. If only one of them is
// reported the other counts as impossible. Throws kClassification when
// neither is present.
PresenceProbability ProbabilityFromAlternatives(std::span<const TokenLogprob> top);

struct LlmConfig {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model;
  int max_in_flight = 4;
  std::chrono::milliseconds timeout{60000};
  std::string cache_dir;  // empty: in-memory cache only
  int top_logprobs = 5;
  int max_attempts = 3;
  std::chrono::milliseconds backoff{500};  // doubled after each failure
  std::string api_key;  // sent as a bearer token when non-empty

  // Throws kValue.
  void Validate() const;
};

// Fills api_key from EGP_LLM_API_KEY when set.
void ApplyApiKeyFromEnvironment(LlmConfig &config);

struct HttpResponse {
  int status = 0;
  std::string body;
};

// POSTs a JSON body. Connection-level failures throw kTransport.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse PostJson(const std::string &url, const std::string &body,
                                const std::string &api_key,
                                std::chrono::milliseconds timeout) = 0;
};

std::unique_ptr<Transport> MakeHttpTransport();

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);

// Presence probabilities keyed by (model, prompt digest). Backed by one
// JSON file per digest under `dir` when `dir` is non-empty. The first
// value stored for a key wins.
class ResponseCache {
 public:
  explicit ResponseCache(std::string dir);

  static std::string Key(std::string_view model, std::string_view prompt);

  std::optional<double> Get(const std::string &key);
  // Returns the value now stored under `key`.
  double Put(const std::string &key, std::string_view model, double p);

  std::size_t DiskEntries() const;
  std::size_t ClearDisk();

 private:
  std::string PathFor(const std::string &key) const;

  std::string dir_;
  std::mutex mu_;
  std::map<std::string, double> memory_;
};

struct ItemError {
  std::size_t index = 0;
  ErrorKind kind = ErrorKind::kClassification;
  std::string message;
};

struct BatchResult {
  std::vector<std::optional<PresenceProbability>> results;  // input order
  std::vector<ItemError> errors;                            // by index
};

// Thread-safe. At most max_in_flight requests are outstanding at a time.
class LlmClient {
 public:
  explicit LlmClient(LlmConfig config, std::unique_ptr<Transport> transport = nullptr);

  PresenceProbability Classify(const PromptContext &ctx);
  PresenceProbability ClassifyPrompt(const std::string &prompt);

  // Order-preserving; identical prompts are sent once. Failures are
  // reported per item.
  BatchResult ClassifyBatch(std::span<const PromptContext> contexts);

  std::size_t network_calls() const { return network_calls_.load(); }
  const LlmConfig &config() const { return config_; }

 private:
  double Query(const std::string &prompt);

  LlmConfig config_;
  std::unique_ptr<Transport> transport_;
  ResponseCache cache_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> network_calls_{0};
};

}  // namespace egp

#endif  // EGP_LLM_CLIENT_H_
