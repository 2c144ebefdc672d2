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

#include "egp/ruleset.h"

#include <algorithm>

#include "egp/error.h"
#include "egp/text.h"
#include "json.hpp"

namespace egp {

using json = nlohmann::json;

// ---- TokenPredicate ---------------------------------------------------------

TokenPredicate::TokenPredicate(Kind kind, std::vector<std::string> values,
                               std::vector<TokenPredicate> children)
    : kind_(kind), values_(std::move(values)), children_(std::move(children)) {
  std::sort(values_.begin(), values_.end());
  values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
}

namespace {

std::vector<std::string> FoldAll(std::vector<std::string> words) {
  for (std::string &w : words) w = FoldWord(w);
  return words;
}

bool Contains(const std::vector<std::string> &sorted, const std::string &x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

}  // namespace

TokenPredicate TokenPredicate::FormIn(std::vector<std::string> words) {
  return TokenPredicate(Kind::kFormIn, FoldAll(std::move(words)), {});
}
TokenPredicate TokenPredicate::LemmaIn(std::vector<std::string> words) {
  return TokenPredicate(Kind::kLemmaIn, FoldAll(std::move(words)), {});
}
TokenPredicate TokenPredicate::UposIs(std::vector<std::string> tags) {
  return TokenPredicate(Kind::kUposIs, std::move(tags), {});
}
TokenPredicate TokenPredicate::XposIs(std::vector<std::string> tags) {
  return TokenPredicate(Kind::kXposIs, std::move(tags), {});
}
TokenPredicate TokenPredicate::DepIs(std::vector<std::string> tags) {
  return TokenPredicate(Kind::kDepIs, std::move(tags), {});
}
TokenPredicate TokenPredicate::Not(TokenPredicate inner) {
  std::vector<TokenPredicate> children;
  children.push_back(std::move(inner));
  return TokenPredicate(Kind::kNot, {}, std::move(children));
}
TokenPredicate TokenPredicate::AllOf(std::vector<TokenPredicate> items) {
  return TokenPredicate(Kind::kAllOf, {}, std::move(items));
}

bool TokenPredicate::Matches(const TaggedToken &token) const {
  switch (kind_) {
    case Kind::kFormIn: return Contains(values_, FoldWord(token.form));
    case Kind::kLemmaIn: return Contains(values_, FoldWord(token.lemma));
    case Kind::kUposIs: return Contains(values_, token.upos);
    case Kind::kXposIs: return Contains(values_, token.xpos);
    case Kind::kDepIs: return Contains(values_, token.dep);
    case Kind::kNot: return !children_.front().Matches(token);
    case Kind::kAllOf:
      return std::all_of(children_.begin(), children_.end(),
                         [&](const TokenPredicate &p) { return p.Matches(token); });
  }
  return false;
}

int TokenPredicate::Depth() const {
  int deepest = 0;
  for (const TokenPredicate &child : children_) {
    deepest = std::max(deepest, child.Depth());
  }
  return deepest + 1;
}

// ---- validation -------------------------------------------------------------

namespace {

void CompileFail(const std::string &message) {
  throw Error(ErrorKind::kCompile, message);
}

void ValidatePredicate(const TokenPredicate &p) {
  using Kind = TokenPredicate::Kind;
  if (p.Depth() > TokenPredicate::kMaxDepth) {
    CompileFail("predicate nesting deeper than " +
                std::to_string(TokenPredicate::kMaxDepth));
  }
  switch (p.kind()) {
    case Kind::kNot:
      if (p.children().size() != 1) CompileFail("'not' takes one predicate");
      break;
    case Kind::kAllOf:
      if (p.children().empty()) CompileFail("'all-of' needs predicates");
      break;
    default:
      if (p.values().empty() ||
          std::any_of(p.values().begin(), p.values().end(),
                      [](const std::string &v) { return v.empty(); })) {
        CompileFail("empty word or tag set");
      }
  }
  for (const TokenPredicate &child : p.children()) ValidatePredicate(child);
}

struct ClauseValidator {
  void operator()(const TokenMatchClause &c) const { ValidatePredicate(c.predicate); }
  void operator()(const SequenceClause &c) const {
    if (c.forms.empty()) CompileFail("sequence needs at least one form");
    for (const std::string &f : c.forms) {
      if (f.empty()) CompileFail("sequence contains an empty form");
    }
    if (c.not_preceded_by) {
      ValidatePredicate(c.not_preceded_by->predicate);
      if (c.not_preceded_by->window < 1) CompileFail("window must be >= 1");
    }
  }
  void operator()(const FollowsWithinClause &c) const {
    ValidatePredicate(c.first);
    ValidatePredicate(c.second);
    if (c.window && *c.window < 1) CompileFail("window must be >= 1");
  }
  void operator()(const SentenceContainsClause &c) const {
    ValidatePredicate(c.predicate);
  }
  void operator()(const SentenceLacksClause &c) const {
    ValidatePredicate(c.predicate);
    if (c.subtree_of) ValidatePredicate(*c.subtree_of);
  }
};

}  // namespace

void ValidateRule(const Rule &rule) {
  if (rule.groups.empty()) {
    CompileFail("rule " + std::to_string(rule.egp_id) + " has no clauses");
  }
  for (const ClauseGroup &group : rule.groups) {
    if (group.clauses.empty()) {
      CompileFail("rule " + std::to_string(rule.egp_id) +
                  " has an empty clause group");
    }
    for (const Clause &clause : group.clauses) {
      std::visit(ClauseValidator{}, clause);
    }
  }
}

// ---- JSON definitions -------------------------------------------------------
//
// {"schema": 1, "egp_id": 37, "mode": "detector",
//  "clauses": [ ... ]}                        one clause group, or
//  "any_of": [[ ... ], [ ... ]]                alternative clause groups
//
// Predicates: {"kind": "form-in-set", "values": [...]}, likewise
// lemma-in-set, upos-is, xpos-is, dep-is ("value" accepted for a single
// tag); {"kind": "not", "predicate": P}; {"kind": "all-of",
// "predicates": [P, ...]}.
//
// Clauses: {"kind": "token-match", "predicate": P}
//          {"kind": "sequence", "forms": [...],
//           "not_preceded_by": {"predicate": P, "window": k}}
//          {"kind": "follows-within", "first": P, "second": P,
//           "window": k, "direction": "after" | "before"}
//          {"kind": "sentence-contains", "predicate": P}
//          {"kind": "sentence-lacks", "predicate": P, "subtree_of": P}

namespace {

const json &Field(const json &obj, const char *key) {
  if (!obj.is_object() || !obj.contains(key)) {
    CompileFail(std::string("missing field '") + key + "'");
  }
  return obj[key];
}

std::vector<std::string> StringList(const json &obj) {
  std::vector<std::string> out;
  if (obj.contains("value")) {
    if (!obj["value"].is_string()) CompileFail("'value' must be a string");
    out.push_back(obj["value"].get<std::string>());
    return out;
  }
  const json &values = Field(obj, "values");
  if (!values.is_array()) CompileFail("'values' must be an array");
  for (const json &v : values) {
    if (!v.is_string()) CompileFail("'values' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  if (out.empty()) CompileFail("empty word or tag set");
  return out;
}

int WindowField(const json &obj) {
  const json &w = Field(obj, "window");
  if (!w.is_number_integer()) CompileFail("'window' must be an integer");
  return w.get<int>();
}

TokenPredicate PredicateFromJson(const json &obj, int depth) {
  if (depth > TokenPredicate::kMaxDepth) {
    CompileFail("predicate nesting deeper than " +
                std::to_string(TokenPredicate::kMaxDepth));
  }
  const json &kind_field = Field(obj, "kind");
  if (!kind_field.is_string()) CompileFail("'kind' must be a string");
  const std::string kind = kind_field.get<std::string>();
  if (kind == "form-in-set") return TokenPredicate::FormIn(StringList(obj));
  if (kind == "lemma-in-set") return TokenPredicate::LemmaIn(StringList(obj));
  if (kind == "upos-is") return TokenPredicate::UposIs(StringList(obj));
  if (kind == "xpos-is") return TokenPredicate::XposIs(StringList(obj));
  if (kind == "dep-is") return TokenPredicate::DepIs(StringList(obj));
  if (kind == "not") {
    return TokenPredicate::Not(PredicateFromJson(Field(obj, "predicate"), depth + 1));
  }
  if (kind == "all-of") {
    const json &items = Field(obj, "predicates");
    if (!items.is_array() || items.empty()) {
      CompileFail("'all-of' needs a non-empty 'predicates' array");
    }
    std::vector<TokenPredicate> children;
    for (const json &item : items) {
      children.push_back(PredicateFromJson(item, depth + 1));
    }
    return TokenPredicate::AllOf(std::move(children));
  }
  CompileFail("unknown predicate kind '" + kind + "'");
  return TokenPredicate::FormIn({});  // unreachable
}

Clause ClauseFromJson(const json &obj) {
  const json &kind_field = Field(obj, "kind");
  if (!kind_field.is_string()) CompileFail("'kind' must be a string");
  const std::string kind = kind_field.get<std::string>();
  if (kind == "token-match") {
    return TokenMatchClause{PredicateFromJson(Field(obj, "predicate"), 1)};
  }
  if (kind == "sentence-contains") {
    return SentenceContainsClause{PredicateFromJson(Field(obj, "predicate"), 1)};
  }
  if (kind == "sentence-lacks") {
    SentenceLacksClause c{PredicateFromJson(Field(obj, "predicate"), 1), std::nullopt};
    if (obj.contains("subtree_of")) {
      c.subtree_of = PredicateFromJson(obj["subtree_of"], 1);
    }
    return c;
  }
  if (kind == "sequence") {
    SequenceClause c;
    const json &forms = Field(obj, "forms");
    if (!forms.is_array()) CompileFail("'forms' must be an array");
    for (const json &f : forms) {
      if (!f.is_string()) CompileFail("'forms' entries must be strings");
      c.forms.push_back(FoldWord(f.get<std::string>()));
    }
    if (obj.contains("not_preceded_by")) {
      const json &lb = obj["not_preceded_by"];
      c.not_preceded_by = SequenceClause::Lookbehind{
          PredicateFromJson(Field(lb, "predicate"), 1), WindowField(lb)};
    }
    return c;
  }
  if (kind == "follows-within") {
    FollowsWithinClause c{PredicateFromJson(Field(obj, "first"), 1),
                          PredicateFromJson(Field(obj, "second"), 1),
                          std::nullopt, Direction::kAfter};
    if (obj.contains("window")) c.window = WindowField(obj);
    if (obj.contains("direction")) {
      const std::string dir = obj["direction"].is_string()
                                  ? obj["direction"].get<std::string>()
                                  : std::string();
      if (dir == "after") {
        c.direction = Direction::kAfter;
      } else if (dir == "before") {
        c.direction = Direction::kBefore;
      } else {
        CompileFail("direction must be 'after' or 'before'");
      }
    }
    return c;
  }
  CompileFail("unknown clause kind '" + kind + "'");
  return TokenMatchClause{TokenPredicate::FormIn({})};  // unreachable
}

ClauseGroup GroupFromJson(const json &clauses) {
  if (!clauses.is_array()) CompileFail("clause group must be an array");
  ClauseGroup group;
  for (const json &c : clauses) group.clauses.push_back(ClauseFromJson(c));
  return group;
}

Rule RuleFromJson(const json &obj) {
  if (!obj.is_object()) CompileFail("rule definition must be an object");
  const json &schema = Field(obj, "schema");
  if (!schema.is_number_integer() || schema.get<int>() != 1) {
    CompileFail("unsupported rule schema " + schema.dump());
  }
  Rule rule;
  const json &id = Field(obj, "egp_id");
  if (!id.is_number_integer()) CompileFail("'egp_id' must be an integer");
  rule.egp_id = id.get<int>();
  if (obj.contains("mode")) {
    const std::string mode =
        obj["mode"].is_string() ? obj["mode"].get<std::string>() : "";
    if (mode == "detector") {
      rule.mode = RuleMode::kDetector;
    } else if (mode == "filter") {
      rule.mode = RuleMode::kFilter;
    } else {
      CompileFail("mode must be 'detector' or 'filter'");
    }
  }
  const bool has_clauses = obj.contains("clauses");
  const bool has_any_of = obj.contains("any_of");
  if (has_clauses == has_any_of) {
    CompileFail("rule needs exactly one of 'clauses' or 'any_of'");
  }
  if (has_clauses) {
    rule.groups.push_back(GroupFromJson(obj["clauses"]));
  } else {
    if (!obj["any_of"].is_array()) CompileFail("'any_of' must be an array");
    for (const json &group : obj["any_of"]) {
      rule.groups.push_back(GroupFromJson(group));
    }
  }
  try {
    ValidateRule(rule);
  } catch (const Error &e) {
    throw Error(ErrorKind::kCompile,
                "rule " + std::to_string(rule.egp_id) + ": " + e.what());
  }
  return rule;
}

json PredicateToJson(const TokenPredicate &p) {
  using Kind = TokenPredicate::Kind;
  switch (p.kind()) {
    case Kind::kFormIn: return {{"kind", "form-in-set"}, {"values", p.values()}};
    case Kind::kLemmaIn: return {{"kind", "lemma-in-set"}, {"values", p.values()}};
    case Kind::kUposIs: return {{"kind", "upos-is"}, {"values", p.values()}};
    case Kind::kXposIs: return {{"kind", "xpos-is"}, {"values", p.values()}};
    case Kind::kDepIs: return {{"kind", "dep-is"}, {"values", p.values()}};
    case Kind::kNot:
      return {{"kind", "not"}, {"predicate", PredicateToJson(p.children().front())}};
    case Kind::kAllOf: {
      json items = json::array();
      for (const TokenPredicate &c : p.children()) items.push_back(PredicateToJson(c));
      return {{"kind", "all-of"}, {"predicates", items}};
    }
  }
  return {};
}

struct ClauseToJson {
  json operator()(const TokenMatchClause &c) const {
    return {{"kind", "token-match"}, {"predicate", PredicateToJson(c.predicate)}};
  }
  json operator()(const SequenceClause &c) const {
    json out = {{"kind", "sequence"}, {"forms", c.forms}};
    if (c.not_preceded_by) {
      out["not_preceded_by"] = {
          {"predicate", PredicateToJson(c.not_preceded_by->predicate)},
          {"window", c.not_preceded_by->window}};
    }
    return out;
  }
  json operator()(const FollowsWithinClause &c) const {
    json out = {{"kind", "follows-within"},
                {"first", PredicateToJson(c.first)},
                {"second", PredicateToJson(c.second)},
                {"direction", c.direction == Direction::kAfter ? "after" : "before"}};
    if (c.window) out["window"] = *c.window;
    return out;
  }
  json operator()(const SentenceContainsClause &c) const {
    return {{"kind", "sentence-contains"}, {"predicate", PredicateToJson(c.predicate)}};
  }
  json operator()(const SentenceLacksClause &c) const {
    json out = {{"kind", "sentence-lacks"}, {"predicate", PredicateToJson(c.predicate)}};
    if (c.subtree_of) out["subtree_of"] = PredicateToJson(*c.subtree_of);
    return out;
  }
};

}  // namespace

Rule CompileRule(std::string_view definition) {
  json obj;
  try {
    obj = json::parse(definition);
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kCompile, std::string("invalid JSON: ") + e.what());
  }
  return RuleFromJson(obj);
}

std::vector<Rule> LoadRuleFile(const std::string &path) {
  json doc;
  try {
    doc = json::parse(ReadFile(path));
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kCompile, path + ": invalid JSON: " + e.what());
  }
  std::vector<Rule> rules;
  try {
    if (doc.is_array()) {
      for (const json &item : doc) rules.push_back(RuleFromJson(item));
    } else {
      rules.push_back(RuleFromJson(doc));
    }
  } catch (const Error &e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
  return rules;
}

std::string RuleToJson(const Rule &rule) {
  json groups = json::array();
  for (const ClauseGroup &group : rule.groups) {
    json clauses = json::array();
    for (const Clause &c : group.clauses) clauses.push_back(std::visit(ClauseToJson{}, c));
    groups.push_back(clauses);
  }
  json out = {{"schema", 1},
              {"egp_id", rule.egp_id},
              {"mode", rule.mode == RuleMode::kDetector ? "detector" : "filter"}};
  if (groups.size() == 1) {
    out["clauses"] = groups.front();
  } else {
    out["any_of"] = groups;
  }
  return out.dump(2);
}

// ---- evaluation -------------------------------------------------------------

namespace {

class ClauseEvaluator {
 public:
  explicit ClauseEvaluator(const Sentence &sentence)
      : tokens_(sentence.tokens) {}

  std::optional<TokenSpan> operator()(const TokenMatchClause &c) const {
    return FirstMatch(c.predicate);
  }

  std::optional<TokenSpan> operator()(const SentenceContainsClause &c) const {
    return FirstMatch(c.predicate);
  }

  std::optional<TokenSpan> operator()(const SequenceClause &c) const {
    const std::size_t m = c.forms.size();
    if (m == 0 || m > tokens_.size()) return std::nullopt;
    for (std::size_t i = 0; i + m <= tokens_.size(); ++i) {
      bool equal = true;
      for (std::size_t k = 0; k < m && equal; ++k) {
        equal = FoldWord(tokens_[i + k].form) == c.forms[k];
      }
      if (!equal) continue;
      if (c.not_preceded_by) {
        const std::size_t window =
            static_cast<std::size_t>(c.not_preceded_by->window);
        const std::size_t from = i > window ? i - window : 0;
        bool blocked = false;
        for (std::size_t j = from; j < i && !blocked; ++j) {
          blocked = c.not_preceded_by->predicate.Matches(tokens_[j]);
        }
        if (blocked) continue;
      }
      return TokenSpan{i, i + m};
    }
    return std::nullopt;
  }

  std::optional<TokenSpan> operator()(const FollowsWithinClause &c) const {
    const std::size_t n = tokens_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!c.first.Matches(tokens_[i])) continue;
      const std::size_t reach = c.window ? static_cast<std::size_t>(*c.window) : n;
      if (c.direction == Direction::kAfter) {
        for (std::size_t j = i + 1; j < n && j - i <= reach; ++j) {
          if (c.second.Matches(tokens_[j])) return TokenSpan{i, j + 1};
        }
      } else {
        for (std::size_t d = 1; d <= reach && d <= i; ++d) {
          if (c.second.Matches(tokens_[i - d])) return TokenSpan{i - d, i + 1};
        }
      }
    }
    return std::nullopt;
  }

  std::optional<TokenSpan> operator()(const SentenceLacksClause &c) const {
    if (!c.subtree_of) {
      for (const TaggedToken &t : tokens_) {
        if (c.predicate.Matches(t)) return std::nullopt;
      }
      return TokenSpan{0, 0};
    }
    for (std::size_t anchor = 0; anchor < tokens_.size(); ++anchor) {
      if (!c.subtree_of->Matches(tokens_[anchor])) continue;
      bool clean = true;
      for (std::size_t u = 0; u < tokens_.size() && clean; ++u) {
        if (InSubtree(u, anchor) && c.predicate.Matches(tokens_[u])) {
          clean = false;
        }
      }
      if (clean) return TokenSpan{anchor, anchor + 1};
    }
    return std::nullopt;
  }

 private:
  std::optional<TokenSpan> FirstMatch(const TokenPredicate &p) const {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (p.Matches(tokens_[i])) return TokenSpan{i, i + 1};
    }
    return std::nullopt;
  }

  // Walks head links from `node`; a self-loop or a cycle ends the walk.
  bool InSubtree(std::size_t node, std::size_t root) const {
    for (std::size_t steps = 0; steps <= tokens_.size(); ++steps) {
      if (node == root) return true;
      if (node >= tokens_.size()) return false;
      const std::size_t head = tokens_[node].head;
      if (head == node) return false;
      node = head;
    }
    return false;
  }

  const std::vector<TaggedToken> &tokens_;
};

}  // namespace

RuleMatch EvaluateRule(const Rule &rule, const Sentence &sentence) {
  RuleMatch result;
  if (sentence.tokens.empty()) return result;
  ClauseEvaluator evaluator(sentence);
  for (const ClauseGroup &group : rule.groups) {
    std::vector<TokenSpan> spans;
    bool all = !group.clauses.empty();
    for (const Clause &clause : group.clauses) {
      std::optional<TokenSpan> span = std::visit(evaluator, clause);
      if (!span) {
        all = false;
        break;
      }
      if (span->end > span->start) spans.push_back(*span);
    }
    if (all) {
      result.matched = true;
      result.spans = std::move(spans);
      return result;
    }
  }
  return result;
}

std::map<int, bool> RunDetectors(std::span<const Rule> rules,
                                 const Sentence &sentence) {
  std::map<int, const Rule *> latest;
  for (const Rule &rule : rules) latest[rule.egp_id] = &rule;
  std::map<int, bool> out;
  for (const auto &[id, rule] : latest) {
    out[id] = EvaluateRule(*rule, sentence).matched;
  }
  return out;
}

}  // namespace egp
