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

#include "egp/llm_client.h"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "egp/text.h"
#include "httplib.h"
#include "json.hpp"

namespace egp {

using json = nlohmann::json;

// ---- prompt -------------------------------------------------------------------

namespace {

constexpr std::string_view kReadInstruction =
    "Read this sentence written by an L2 learner of English and its "
    "respective PoS, grammatical, and universal dependency tags associated "
    "to each token:";

// "SuperCategory, SuperCategory" is reproduced as the template has it.
constexpr std::string_view kAnswerInstruction =
    "Does the following can-do statement apply to this sentence? Just answer "
    "Yes or No without adding any comments, notes, or explanations. The "
    "SuperCategory, SuperCategory, and Guideword entries will help you "
    "contextualise the can-do statement better. Furthermore, you will see "
    "one or more examples written by other L2 learners for which the can-do "
    "statement applies.";

}  // namespace

std::string PythonRepr(std::string_view text) {
  const bool has_single = text.find('\'') != std::string_view::npos;
  const bool has_double = text.find('"') != std::string_view::npos;
  const char quote = has_single && !has_double ? '"' : '\'';
  std::string out(1, quote);
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c == quote) out.push_back('\\');
        out.push_back(c);
    }
  }
  out.push_back(quote);
  return out;
}

std::string BuildPrompt(const PromptContext &ctx) {
  if (ctx.sentence.tokens.empty()) {
    throw Error(ErrorKind::kValue, "cannot build a prompt for a sentence without tokens");
  }
  if (ctx.statement.examples.empty()) {
    throw Error(ErrorKind::kValue, "statement " +
                                       std::to_string(ctx.statement.egp_id) +
                                       " has no examples for the prompt");
  }
  std::string tuples = "[";
  for (std::size_t i = 0; i < ctx.sentence.tokens.size(); ++i) {
    const TaggedToken &t = ctx.sentence.tokens[i];
    if (i > 0) tuples += ", ";
    tuples += "(" + PythonRepr(t.form) + ", " + PythonRepr(t.upos) + ", " +
              PythonRepr(t.xpos) + ", " + PythonRepr(t.dep) + ")";
  }
  tuples += "]";

  std::string prompt;
  prompt += kReadInstruction;
  prompt += "\n'" + ctx.sentence.text + "'";
  prompt += "\n" + tuples;
  prompt += "\n";
  prompt += kAnswerInstruction;
  prompt += "\nCan-do statement: " + ctx.statement.statement;
  prompt += "\nSuperCategory: " + ctx.statement.supercategory;
  prompt += "\nSubCategory: " + ctx.statement.subcategory;
  prompt += "\nGuideword: " + ctx.statement.guideword;
  prompt += "\nExample(s):";
  for (const std::string &example : ctx.statement.examples) {
    prompt += "\n" + example;
  }
  prompt += "\nYour answer:";
  return prompt;
}

// ---- probabilities --------------------------------------------------------------

PresenceProbability SoftmaxConfidence(double logp_yes, double logp_no) {
  if (!std::isfinite(logp_yes) || !std::isfinite(logp_no)) {
    throw Error(ErrorKind::kValue, "log probabilities must be finite");
  }
  const double shift = std::max(logp_yes, logp_no);
  const double yes = std::exp(logp_yes - shift);
  const double no = std::exp(logp_no - shift);
  return PresenceProbability{yes / (yes + no)};
}

std::vector<TokenLogprob> ParseFirstTokenLogprobs(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kClassification,
                std::string("response is not JSON: ") + e.what());
  }
  std::vector<TokenLogprob> out;
  try {
    const json &logprobs = doc.at("choices").at(0).at("logprobs");
    if (logprobs.contains("content") && logprobs["content"].is_array()) {
      for (const json &alt : logprobs["content"].at(0).at("top_logprobs")) {
        out.push_back({alt.at("token").get<std::string>(),
                       alt.at("logprob").get<double>()});
      }
      return out;
    }
    if (logprobs.contains("top_logprobs")) {
      for (const auto &[token, lp] : logprobs["top_logprobs"].at(0).items()) {
        out.push_back({token, lp.get<double>()});
      }
      return out;
    }
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kClassification,
                std::string("malformed logprobs in response: ") + e.what());
  }
  throw Error(ErrorKind::kClassification, "response carries no top logprobs");
}

PresenceProbability ProbabilityFromAlternatives(std::span<const TokenLogprob> top) {
  std::optional<double> yes, no;
  for (const TokenLogprob &alt : top) {
    const std::string folded = FoldWord(TrimLeft(alt.token));
    std::optional<double> *slot =
        folded == "yes" ? &yes : (folded == "no" ? &no : nullptr);
    if (slot && (!*slot || alt.logprob > **slot)) *slot = alt.logprob;
  }
  if (!yes && !no) {
    std::string seen;
    for (const TokenLogprob &alt : top) {
      if (!seen.empty()) seen += ", ";
      seen += PythonRepr(alt.token);
    }
    throw Error(ErrorKind::kClassification,
                "neither Yes nor No among the first-token alternatives [" + seen + "]");
  }
  if (!no) return PresenceProbability{1.0};
  if (!yes) return PresenceProbability{0.0};
  return SoftmaxConfidence(*yes, *no);
}

// ---- configuration and transport ------------------------------------------------

void LlmConfig::Validate() const {
  if (base_url.empty()) throw Error(ErrorKind::kValue, "LLM base_url is empty");
  if (model.empty()) throw Error(ErrorKind::kValue, "LLM model is empty");
  if (max_in_flight < 1) throw Error(ErrorKind::kValue, "max_in_flight must be >= 1");
  if (top_logprobs < 5) throw Error(ErrorKind::kValue, "top_logprobs must be >= 5");
  if (max_attempts < 1) throw Error(ErrorKind::kValue, "max_attempts must be >= 1");
}

void ApplyApiKeyFromEnvironment(LlmConfig &config) {
  if (const char *key = std::getenv("EGP_LLM_API_KEY")) config.api_key = key;
}

namespace {

class HttplibTransport : public Transport {
 public:
  HttpResponse PostJson(const std::string &url, const std::string &body,
                        const std::string &api_key,
                        std::chrono::milliseconds timeout) override {
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
      throw Error(ErrorKind::kValue, "URL needs a scheme: '" + url + "'");
    }
    const std::size_t path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path =
        path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
        timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    auto result = client.Post(path, headers, body, "application/json");
    if (!result) {
      throw Error(ErrorKind::kTransport, "request to " + url + " failed: " +
                                             httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
  }
};

bool Retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

std::unique_ptr<Transport> MakeHttpTransport() {
  return std::make_unique<HttplibTransport>();
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kValue, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---- cache ------------------------------------------------------------------------

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create cache dir '" + dir_ + "'");
  }
}

std::string ResponseCache::Key(std::string_view model, std::string_view prompt) {
  std::string material(model);
  material.push_back('\0');
  material.append(prompt);
  return Sha256Hex(material);
}

std::string ResponseCache::PathFor(const std::string &key) const {
  return (std::filesystem::path(dir_) / (key + ".json")).string();
}

std::optional<double> ResponseCache::Get(const std::string &key) {
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  if (dir_.empty()) return std::nullopt;
  const std::string path = PathFor(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const json record = json::parse(ReadFile(path));
    const double p = record.at("p").get<double>();
    memory_.emplace(key, p);
    return p;
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kIo, "corrupt cache record '" + path + "': " + e.what());
  }
}

double ResponseCache::Put(const std::string &key, std::string_view model, double p) {
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = memory_.emplace(key, p);
  if (!inserted) return it->second;
  if (!dir_.empty()) {
    const std::string path = PathFor(key);
    if (std::filesystem::exists(path)) {
      try {
        it->second = json::parse(ReadFile(path)).at("p").get<double>();
        return it->second;
      } catch (const json::exception &) {
        // Unreadable record: replaced below.
      }
    }
    const json record = {{"model", model}, {"digest", key}, {"p", p}};
    const std::string tmp = path + ".tmp";
    WriteFile(tmp, record.dump() + "\n");
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot write cache record '" + path + "'");
  }
  return p;
}

std::size_t ResponseCache::DiskEntries() const {
  if (dir_.empty() || !std::filesystem::exists(dir_)) return 0;
  std::size_t n = 0;
  for (const auto &entry : std::filesystem::directory_iterator(dir_)) {
    n += entry.path().extension() == ".json";
  }
  return n;
}

std::size_t ResponseCache::ClearDisk() {
  std::lock_guard<std::mutex> lock(mu_);
  memory_.clear();
  if (dir_.empty() || !std::filesystem::exists(dir_)) return 0;
  std::size_t n = 0;
  for (const auto &entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".json") {
      std::filesystem::remove(entry.path());
      ++n;
    }
  }
  return n;
}

// ---- client -----------------------------------------------------------------------

namespace {

const LlmConfig &Validated(const LlmConfig &config) {
  config.Validate();
  return config;
}

}  // namespace

LlmClient::LlmClient(LlmConfig config, std::unique_ptr<Transport> transport)
    : config_(Validated(config)),
      transport_(transport ? std::move(transport) : MakeHttpTransport()),
      cache_(config_.cache_dir),
      in_flight_(config_.max_in_flight) {}

PresenceProbability LlmClient::Classify(const PromptContext &ctx) {
  return ClassifyPrompt(BuildPrompt(ctx));
}

PresenceProbability LlmClient::ClassifyPrompt(const std::string &prompt) {
  const std::string key = ResponseCache::Key(config_.model, prompt);
  if (auto cached = cache_.Get(key)) return PresenceProbability{*cached};
  const double p = Query(prompt);
  return PresenceProbability{cache_.Put(key, config_.model, p)};
}

double LlmClient::Query(const std::string &prompt) {
  const json request = {
      {"model", config_.model},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"max_tokens", 1},
      {"temperature", 0},
      {"logprobs", true},
      {"top_logprobs", config_.top_logprobs}};
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  const std::string body = request.dump();

  std::chrono::milliseconds delay = config_.backoff;
  std::string last_failure;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    HttpResponse response;
    in_flight_.acquire();
    try {
      ++network_calls_;
      response = transport_->PostJson(url, body, config_.api_key, config_.timeout);
    } catch (const Error &e) {
      in_flight_.release();
      if (e.kind() != ErrorKind::kTransport) throw;
      last_failure = e.what();
      continue;
    }
    in_flight_.release();
    if (response.status == 200) {
      return ProbabilityFromAlternatives(ParseFirstTokenLogprobs(response.body)).p;
    }
    last_failure = "HTTP " + std::to_string(response.status) + ": " +
                   response.body.substr(0, 200);
    if (!Retryable(response.status)) break;
  }
  throw Error(ErrorKind::kTransport, "completion request failed after retries (" +
                                         last_failure + ")");
}

BatchResult LlmClient::ClassifyBatch(std::span<const PromptContext> contexts) {
  BatchResult batch;
  batch.results.resize(contexts.size());

  // Distinct prompts, each remembering the items that share it.
  std::vector<std::string> prompts;
  std::vector<std::vector<std::size_t>> owners;
  std::map<std::string, std::size_t> slot_of;
  std::vector<ItemError> early;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    std::string prompt;
    try {
      prompt = BuildPrompt(contexts[i]);
    } catch (const Error &e) {
      early.push_back(ItemError{i, e.kind(), e.what()});
      continue;
    }
    auto [it, inserted] = slot_of.emplace(prompt, prompts.size());
    if (inserted) {
      prompts.push_back(std::move(prompt));
      owners.emplace_back();
    }
    owners[it->second].push_back(i);
  }

  std::vector<std::optional<PresenceProbability>> answers(prompts.size());
  std::vector<std::optional<ItemError>> failures(prompts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u = next++; u < prompts.size(); u = next++) {
      try {
        answers[u] = ClassifyPrompt(prompts[u]);
      } catch (const Error &e) {
        failures[u] = ItemError{0, e.kind(), e.what()};
      } catch (const std::exception &e) {
        failures[u] = ItemError{0, ErrorKind::kTransport, e.what()};
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config_.max_in_flight), prompts.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker);
  if (workers > 0) worker();
  for (std::thread &t : threads) t.join();

  for (std::size_t u = 0; u < prompts.size(); ++u) {
    for (std::size_t i : owners[u]) {
      if (answers[u]) {
        batch.results[i] = answers[u];
      } else {
        ItemError error = *failures[u];
        error.index = i;
        early.push_back(std::move(error));
      }
    }
  }
  std::sort(early.begin(), early.end(),
            [](const ItemError &a, const ItemError &b) { return a.index < b.index; });
  batch.errors = std::move(early);
  return batch;
}

}  // namespace egp
