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

#include "support.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "egp/text.h"
#include "json.hpp"

namespace egp::testing {

std::string FixturePath(const std::string &name) {
  return std::string(EGP_FIXTURE_DIR) + "/" + name;
}

std::string CliPath() { return EGP_CLI_PATH; }

// ---- rule pack ------------------------------------------------------------------

std::vector<RulePackCase> LoadRulePack() {
  const std::string text = ReadFile(FixturePath("rule_pack.conllu"));
  std::vector<RulePackCase> cases;
  std::string block;
  auto flush = [&] {
    if (Trim(block).empty()) {
      block.clear();
      return;
    }
    RulePackCase c;
    for (const std::string &line : Split(block, "\n")) {
      if (line.rfind("# egp_id = ", 0) == 0) c.egp_id = static_cast<int>(ParseInt(line.substr(11)));
      if (line.rfind("# expected = ", 0) == 0) c.expected = line.substr(13) == "1";
    }
    const auto parsed = ParseConlluBlocks(block);
    c.sent_id = parsed.at(0).sent_id;
    c.sentence = parsed.at(0).sentence;
    cases.push_back(std::move(c));
    block.clear();
  };
  for (const std::string &line : Split(text, "\n")) {
    if (Trim(line).empty()) {
      flush();
    } else {
      block += line + "\n";
    }
  }
  flush();
  return cases;
}

Catalog FixtureCatalog() { return Catalog(LoadEgpCatalog(FixturePath("egp_catalog.csv"))); }

Sentence RandomSentence(std::mt19937_64 &rng) {
  static const std::vector<std::string> kForms = {
      "better", "worse", "further", "farther", "elder", "eldest", "best", "worst",
      "more", "less", "most", "enough", "big", "not", "n't", "?", ".", "that",
      "who", "whom", "which", "as", "soon", "long", "by", "the", "time", "after",
      "when", "while", "since", "until", "once", "now", "so", "in", "case", "if",
      "unless", "provided", "either", "or", "another", "other", "would", "will",
      "come", "came", "used", "use", "to", "did", "didn't", "was", "were", "is",
      "be", "everything", "everyone", "house", "I", "you", "it", "BETTER", "Used"};
  static const std::vector<std::string> kUpos = {"ADJ", "ADV", "NOUN", "VERB", "AUX",
                                                 "PART", "SCONJ", "ADP", "DET", "PRON",
                                                 "PUNCT", "CCONJ"};
  static const std::vector<std::string> kXpos = {"JJ", "JJR", "JJS", "VB", "VBD", "VBN",
                                                 "VBZ", "NN", "IN", "RB", "MD", "TO",
                                                 "DT", "PRP", "."};
  static const std::vector<std::string> kDeps = {"relcl", "auxpass", "nsubj", "nsubjpass",
                                                 "dobj", "advmod", "aux", "root", "mark",
                                                 "det", "amod", "punct"};
  static const std::vector<std::string> kLemmas = {"be", "would", "not", "use", "do"};
  auto pick = [&rng](const std::vector<std::string> &v) -> const std::string & {
    return v[rng() % v.size()];
  };
  Sentence s;
  const std::size_t n = 1 + rng() % 14;
  for (std::size_t i = 0; i < n; ++i) {
    TaggedToken t;
    t.form = pick(kForms);
    t.lemma = rng() % 3 == 0 ? pick(kLemmas) : FoldWord(t.form);
    t.upos = pick(kUpos);
    t.xpos = pick(kXpos);
    t.dep = pick(kDeps);
    s.tokens.push_back(std::move(t));
  }
  const std::size_t root = rng() % n;
  for (std::size_t i = 0; i < n; ++i) {
    s.tokens[i].head = i == root ? i : rng() % n;
  }
  // Break cycles: anything that does not reach the root hangs off it.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t node = i;
    bool reaches = false;
    for (std::size_t steps = 0; steps <= n; ++steps) {
      if (node == root) {
        reaches = true;
        break;
      }
      node = s.tokens[node].head;
    }
    if (!reaches) s.tokens[i].head = root;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) s.text += " ";
    s.text += s.tokens[i].form;
  }
  return s;
}

const char kEgp19Prompt[] =
    "Read this sentence written by an L2 learner of English and its respective PoS, "
    "grammatical, and universal dependency tags associated to each token:\n"
    "'Without a high English level, it would be impossible to get a job or to continue "
    "my further studies.'\n"
    "[('Without', 'ADP', 'IN', 'prep'), ('a', 'DET', 'DT', 'det'), ('high', 'ADJ', 'JJ', "
    "'amod'), ('English', 'ADJ', 'JJ', 'amod'), ('level', 'NOUN', 'NN', 'pobj'), (',', "
    "'PUNCT', ',', 'punct'), ('it', 'PRON', 'PRP', 'nsubj'), ('would', 'AUX', 'MD', "
    "'aux'), ('be', 'AUX', 'VB', 'ROOT'), ('impossible', 'ADJ', 'JJ', 'acomp'), ('to', "
    "'PART', 'TO', 'aux'), ('get', 'VERB', 'VB', 'xcomp'), ('a', 'DET', 'DT', 'det'), "
    "('job', 'NOUN', 'NN', 'dobj'), ('or', 'CCONJ', 'CC', 'cc'), ('to', 'PART', 'TO', "
    "'aux'), ('continue', 'VERB', 'VB', 'conj'), ('my', 'PRON', 'PRP$', 'poss'), "
    "('further', 'ADJ', 'JJ', 'amod'), ('studies', 'NOUN', 'NNS', 'dobj'), ('.', "
    "'PUNCT', '.', 'punct')]\n"
    "Does the following can-do statement apply to this sentence? Just answer Yes or No "
    "without adding any comments, notes, or explanations. The SuperCategory, "
    "SuperCategory, and Guideword entries will help you contextualise the can-do "
    "statement better. Furthermore, you will see one or more examples written by other "
    "L2 learners for which the can-do statement applies.\n"
    "Can-do statement: Can form irregular comparative adjectives.\n"
    "SuperCategory: ADJECTIVES\n"
    "SubCategory: comparatives\n"
    "Guideword: FORM: IRREGULAR\n"
    "Example(s):\n"
    "What colour do you think is better?\n"
    "For further information, contact Joey Hung.\n"
    "Your answer:";

PromptContext Egp19PromptContext() {
  static const char *kTokens[][4] = {
      {"Without", "ADP", "IN", "prep"},   {"a", "DET", "DT", "det"},
      {"high", "ADJ", "JJ", "amod"},      {"English", "ADJ", "JJ", "amod"},
      {"level", "NOUN", "NN", "pobj"},    {",", "PUNCT", ",", "punct"},
      {"it", "PRON", "PRP", "nsubj"},     {"would", "AUX", "MD", "aux"},
      {"be", "AUX", "VB", "ROOT"},        {"impossible", "ADJ", "JJ", "acomp"},
      {"to", "PART", "TO", "aux"},        {"get", "VERB", "VB", "xcomp"},
      {"a", "DET", "DT", "det"},          {"job", "NOUN", "NN", "dobj"},
      {"or", "CCONJ", "CC", "cc"},        {"to", "PART", "TO", "aux"},
      {"continue", "VERB", "VB", "conj"}, {"my", "PRON", "PRP$", "poss"},
      {"further", "ADJ", "JJ", "amod"},   {"studies", "NOUN", "NNS", "dobj"},
      {".", "PUNCT", ".", "punct"}};
  PromptContext ctx;
  ctx.sentence.text =
      "Without a high English level, it would be impossible to get a job or to continue "
      "my further studies.";
  for (const auto &row : kTokens) {
    ctx.sentence.tokens.push_back(TaggedToken{row[0], FoldWord(row[0]), row[1], row[2],
                                              row[3], 8});
  }
  ctx.statement = FixtureCatalog().At(19);
  return ctx;
}

// ---- oracles --------------------------------------------------------------------

namespace oracle {

AttemptClass Classify(double p_o, double p_c, double tau_o, double tau_c) {
  const bool o = p_o >= tau_o;
  const bool c = p_c >= tau_c;
  if (c) return o ? AttemptClass::kSuccessful : AttemptClass::kUnsuccessful;
  return AttemptClass::kNone;
}

bool InTask(AttemptClass c, Task task) {
  switch (task) {
    case Task::kGeneral: return c != AttemptClass::kNone;
    case Task::kSuccessful: return c == AttemptClass::kSuccessful;
    case Task::kUnsuccessful: return c == AttemptClass::kUnsuccessful;
  }
  return false;
}

namespace {

std::vector<double> Candidates(const std::vector<double> &p) {
  std::set<double> values(p.begin(), p.end());
  std::vector<double> out(values.begin(), values.end());
  out.push_back(std::nextafter(*values.rbegin(), 2.0));
  return out;
}

}  // namespace

std::vector<ScatterPoint> Scatter(const std::vector<double> &p_o,
                                  const std::vector<double> &p_c,
                                  const std::vector<AttemptClass> &gold, Task task) {
  std::vector<ScatterPoint> out;
  for (double to : Candidates(p_o)) {
    for (double tc : Candidates(p_c)) {
      int tp = 0, fp = 0, positives = 0;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        const bool truth = InTask(gold[i], task);
        const bool pred = InTask(Classify(p_o[i], p_c[i], to, tc), task);
        positives += truth;
        tp += pred && truth;
        fp += pred && !truth;
      }
      ScatterPoint point{to, tc, std::nullopt, double(tp) / double(positives)};
      if (tp + fp > 0) point.precision = double(tp) / double(tp + fp);
      out.push_back(point);
    }
  }
  return out;
}

std::vector<std::pair<double, double>> Envelope(const std::vector<ScatterPoint> &points) {
  std::vector<double> recalls;
  for (const ScatterPoint &p : points) {
    if (p.precision) recalls.push_back(p.recall);
  }
  std::sort(recalls.begin(), recalls.end());
  recalls.erase(std::unique(recalls.begin(), recalls.end()), recalls.end());
  std::vector<std::pair<double, double>> out;
  for (double r : recalls) {
    double best = -1.0;
    for (const ScatterPoint &p : points) {
      if (p.precision && p.recall == r) best = std::max(best, *p.precision);
    }
    out.emplace_back(r, best);
  }
  return out;
}

double BestF1(const std::vector<std::pair<double, double>> &envelope) {
  double best = 0.0;
  for (const auto &[r, p] : envelope) {
    if (p + r > 0) best = std::max(best, 2 * p * r / (p + r));
  }
  return best;
}

double Pcc(const std::vector<double> &x, const std::vector<double> &y) {
  const long double n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double num = n * sxy - sx * sy;
  const long double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  return static_cast<double>(num / den);
}

std::vector<double> AverageRanks(const std::vector<double> &x) {
  std::vector<double> ranks;
  for (double v : x) {
    int below = 0, equal = 0;
    for (double u : x) {
      below += u < v;
      equal += u == v;
    }
    ranks.push_back(1.0 + below + (equal - 1) / 2.0);
  }
  return ranks;
}

double Src(const std::vector<double> &x, const std::vector<double> &y) {
  return Pcc(AverageRanks(x), AverageRanks(y));
}

double Kappa(const std::vector<bool> &a, const std::vector<bool> &b) {
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) ++tp;
    if (!a[i] && !b[i]) ++tn;
    if (a[i] && !b[i]) ++fp;
    if (!a[i] && b[i]) ++fn;
  }
  const double den = (tp + fp) * (fp + tn) + (tp + fn) * (fn + tn);
  if (den == 0) return 1.0;
  return 2 * (tp * tn - fn * fp) / den;
}

std::optional<double> Score(const std::vector<CefrLevel> &positive_levels) {
  if (positive_levels.empty()) return std::nullopt;
  double sum = 0;
  for (CefrLevel l : positive_levels) sum += static_cast<double>(LevelIndex(l) + 1);
  return sum / static_cast<double>(positive_levels.size());
}

namespace {

std::optional<double> SrcOrNothing(const std::vector<double> &x,
                                   const std::vector<double> &y) {
  if (x.size() < 2) return std::nullopt;
  auto constant = [](const std::vector<double> &v) {
    return std::all_of(v.begin(), v.end(), [&](double u) { return u == v[0]; });
  };
  if (constant(x) || constant(y)) return std::nullopt;
  return Src(x, y);
}

}  // namespace

GridAnswer GridSearch(const std::vector<EssayDetections> &essays, const Catalog &catalog,
                      const std::vector<double> &candidates_in, int folds,
                      std::uint64_t seed, AttemptMode mode) {
  std::vector<double> candidates = candidates_in;
  std::sort(candidates.begin(), candidates.end());

  // Folds: sorted ids, Fisher-Yates with mt19937_64, round-robin.
  std::vector<std::string> ids;
  for (const auto &e : essays) ids.push_back(e.essay_id);
  std::sort(ids.begin(), ids.end());
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng() % i]);
  std::map<std::string, int> fold_of;
  for (std::size_t i = 0; i < ids.size(); ++i) fold_of[ids[i]] = int(i % folds);

  GridAnswer best{{}, -1e300};
  std::array<std::size_t, kNumLevels> digit{};
  const std::size_t m = candidates.size();
  while (true) {
    std::array<double, kNumLevels> tau{};
    for (std::size_t l = 0; l < kNumLevels; ++l) tau[l] = candidates[digit[l]];

    std::vector<std::optional<double>> scores;
    for (const EssayDetections &essay : essays) {
      std::set<int> attempted;
      for (const Detection &d : essay.detections) {
        const double t = tau[LevelIndex(catalog.LevelOf(d.egp_id))];
        const bool hit = mode == AttemptMode::kGeneral ? d.p_c >= t
                                                      : (d.p_o >= t && d.p_c >= t);
        if (hit) attempted.insert(d.egp_id);
      }
      std::vector<CefrLevel> levels;
      for (int id : attempted) levels.push_back(catalog.LevelOf(id));
      scores.push_back(Score(levels));
    }
    double total = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<double> x, y;
      for (std::size_t e = 0; e < essays.size(); ++e) {
        if (fold_of[essays[e].essay_id] != f || !scores[e]) continue;
        x.push_back(*scores[e]);
        y.push_back(EncodeCefr(essays[e].cefr));
      }
      total += SrcOrNothing(x, y).value_or(-1.0);
    }
    const double objective = total / folds;
    if (objective > best.objective + 1e-12) best = GridAnswer{tau, objective};

    // Next vector in lexicographic order, C2 varying fastest.
    std::size_t l = kNumLevels;
    while (l > 0 && ++digit[l - 1] == m) digit[--l] = 0;
    if (l == 0) break;
  }
  return best;
}

}  // namespace oracle

// ---- synthetic data ---------------------------------------------------------------

Catalog SyntheticCatalog(int per_level) {
  std::vector<CanDoStatement> statements;
  for (CefrLevel level : kAllLevels) {
    for (int k = 0; k < per_level; ++k) {
      CanDoStatement s;
      s.egp_id = 1000 + 10 * static_cast<int>(LevelIndex(level)) + k;
      s.level = level;
      s.statement = "Synthetic construct " + std::to_string(s.egp_id) + ".";
      s.supercategory = "SYNTHETIC";
      s.subcategory = std::string(LevelName(level));
      s.guideword = "FORM";
      s.examples = {"mk" + std::to_string(s.egp_id) + " here."};
      statements.push_back(std::move(s));
    }
  }
  return Catalog(std::move(statements));
}

namespace {

Sentence MarkerSentence(const std::vector<std::string> &words) {
  Sentence s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const bool marker = words[i].rfind("mk", 0) == 0;
    s.tokens.push_back(TaggedToken{words[i], words[i], marker ? "NOUN" : "DET",
                                   marker ? "NN" : "DT", i == 0 ? "root" : "dep", 0});
    if (i > 0) s.text += " ";
    s.text += words[i];
  }
  return s;
}

}  // namespace

PlantedCorpus MakePlantedCorpus(int essays, std::uint64_t seed) {
  constexpr int kPerLevel = 3;
  PlantedCorpus corpus;
  corpus.catalog = SyntheticCatalog(kPerLevel);
  for (const CanDoStatement &s : corpus.catalog.statements()) {
    nlohmann::json def = {
        {"schema", 1},
        {"egp_id", s.egp_id},
        {"mode", "detector"},
        {"clauses",
         {{{"kind", "token-match"},
           {"predicate", {{"kind", "form-in-set"},
                          {"values", {"mk" + std::to_string(s.egp_id)}}}}}}}};
    corpus.detectors.push_back(CompileRule(def.dump()));
  }
  std::mt19937_64 rng(seed);
  for (int e = 0; e < essays; ++e) {
    const CefrLevel level = kAllLevels[static_cast<std::size_t>(e) % kNumLevels];
    char id[16];
    std::snprintf(id, sizeof id, "essay%03d", e);
    corpus.meta[id] = EssayMeta{BandOf(level), std::nullopt};
    const int sentences = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < sentences; ++i) {
      const int k = static_cast<int>(rng() % kPerLevel);
      const std::string marker =
          "mk" + std::to_string(1000 + 10 * static_cast<int>(LevelIndex(level)) + k);
      std::vector<std::string> corrected = {"the", marker, "the"};
      std::vector<std::string> original = corrected;
      // The first sentence always keeps its marker on both sides.
      if (i > 0 && rng() % 3 == 0) original[1] = "the";
      SentencePair pair;
      pair.essay_id = id;
      pair.index = i;
      pair.original = MarkerSentence(original);
      pair.corrected = MarkerSentence(corrected);
      corpus.pairs.push_back(std::move(pair));
    }
  }
  return corpus;
}

std::vector<EssayDetections> RandomEssayDetections(const Catalog &catalog, int essays,
                                                   std::uint64_t seed) {
  static const double kProbs[] = {0.3, 0.6, 0.75, 0.8, 0.85, 0.9, 0.92, 0.95, 0.97, 0.99, 1.0};
  std::mt19937_64 rng(seed);
  const auto &statements = catalog.statements();
  std::vector<EssayDetections> out;
  for (int e = 0; e < essays; ++e) {
    EssayDetections essay;
    char id[16];
    std::snprintf(id, sizeof id, "r%03d", e);
    essay.essay_id = id;
    essay.cefr = kAllBands[rng() % kNumBands];
    const int n = 2 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      Detection d;
      d.essay_id = id;
      d.index = i;
      d.egp_id = statements[rng() % statements.size()].egp_id;
      d.p_o = kProbs[rng() % std::size(kProbs)];
      d.p_c = kProbs[rng() % std::size(kProbs)];
      essay.detections.push_back(d);
    }
    out.push_back(std::move(essay));
  }
  return out;
}

// ---- LLM transport ------------------------------------------------------------------

std::string ChatResponse(const std::vector<std::pair<std::string, double>> &alternatives) {
  nlohmann::json top = nlohmann::json::array();
  for (const auto &[token, lp] : alternatives) top.push_back({{"token", token}, {"logprob", lp}});
  nlohmann::json first = {{"token", alternatives.empty() ? "" : alternatives[0].first},
                          {"logprob", alternatives.empty() ? 0.0 : alternatives[0].second},
                          {"top_logprobs", top}};
  nlohmann::json doc = {
      {"id", "cmpl-test"},
      {"choices",
       {{{"index", 0},
         {"message", {{"role", "assistant"}, {"content", first["token"]}}},
         {"logprobs", {{"content", {first}}}}}}}};
  return doc.dump();
}

HttpResponse ScriptedTransport::PostJson(const std::string &url, const std::string &body,
                                         const std::string &api_key,
                                         std::chrono::milliseconds) {
  const int call = calls_++;
  const int now = ++active_;
  int seen = max_concurrent_.load();
  while (now > seen && !max_concurrent_.compare_exchange_weak(seen, now)) {
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    last_url_ = url;
    last_api_key_ = api_key;
  }
  HttpResponse response;
  try {
    response = handler_(body, call);
  } catch (...) {
    --active_;
    throw;
  }
  --active_;
  return response;
}

std::string ScriptedTransport::last_url() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_url_;
}

std::string ScriptedTransport::last_api_key() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_api_key_;
}

}  // namespace egp::testing
