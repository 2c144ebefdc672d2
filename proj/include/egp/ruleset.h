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

#ifndef EGP_RULESET_H_
#define EGP_RULESET_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "egp/corpus.h"

namespace egp {

// A test on a single token. Word sets are case- and apostrophe-folded;
// tag sets match exactly.
class TokenPredicate {
 public:
  enum class Kind { kFormIn, kLemmaIn, kUposIs, kXposIs, kDepIs, kNot, kAllOf };

  static constexpr int kMaxDepth = 4;

  static TokenPredicate FormIn(std::vector<std::string> words);
  static TokenPredicate LemmaIn(std::vector<std::string> words);
  static TokenPredicate UposIs(std::vector<std::string> tags);
  static TokenPredicate XposIs(std::vector<std::string> tags);
  static TokenPredicate DepIs(std::vector<std::string> tags);
  static TokenPredicate Not(TokenPredicate inner);
  static TokenPredicate AllOf(std::vector<TokenPredicate> items);

  bool Matches(const TaggedToken &token) const;

  Kind kind() const { return kind_; }
  const std::vector<std::string> &values() const { return values_; }
  const std::vector<TokenPredicate> &children() const { return children_; }

  // A leaf has depth 1.
  int Depth() const;

  bool operator==(const TokenPredicate &) const = default;

 private:
  TokenPredicate(Kind kind, std::vector<std::string> values,
                 std::vector<TokenPredicate> children);

  Kind kind_;
  std::vector<std::string> values_;  // sorted, unique
  std::vector<TokenPredicate> children_;
};

// Some token satisfies the predicate.
struct TokenMatchClause {
  TokenPredicate predicate;
  bool operator==(const TokenMatchClause &) const = default;
};

// Contiguous tokens whose folded forms equal `forms`, optionally rejected
// when one of the `window` tokens before the first matches `predicate`.
struct SequenceClause {
  struct Lookbehind {
    TokenPredicate predicate;
    int window = 1;
    bool operator==(const Lookbehind &) const = default;
  };
  std::vector<std::string> forms;
  std::optional<Lookbehind> not_preceded_by;
  bool operator==(const SequenceClause &) const = default;
};

enum class Direction {
  kAfter,   // `second` occurs after `first`
  kBefore,  // `second` occurs before `first`
};

// Tokens i (first) and j (second) with 1 <= |i - j| <= window in the given
// direction. No window means anywhere in that direction.
struct FollowsWithinClause {
  TokenPredicate first;
  TokenPredicate second;
  std::optional<int> window;
  Direction direction = Direction::kAfter;
  bool operator==(const FollowsWithinClause &) const = default;
};

struct SentenceContainsClause {
  TokenPredicate predicate;
  bool operator==(const SentenceContainsClause &) const = default;
};

// No token satisfies `predicate`. With `subtree_of`, satisfied when some
// token matching `subtree_of` has a dependency subtree (itself included)
// free of `predicate`.
struct SentenceLacksClause {
  TokenPredicate predicate;
  std::optional<TokenPredicate> subtree_of;
  bool operator==(const SentenceLacksClause &) const = default;
};

using Clause = std::variant<TokenMatchClause, SequenceClause,
                            FollowsWithinClause, SentenceContainsClause,
                            SentenceLacksClause>;

// All clauses must hold.
struct ClauseGroup {
  std::vector<Clause> clauses;
  bool operator==(const ClauseGroup &) const = default;
};

enum class RuleMode { kDetector, kFilter };

// Matches when any group matches.
struct Rule {
  int egp_id = 0;
  RuleMode mode = RuleMode::kDetector;
  std::vector<ClauseGroup> groups;
  bool operator==(const Rule &) const = default;
};

// Half-open token range [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const TokenSpan &) const = default;
};

struct RuleMatch {
  bool matched = false;
  std::vector<TokenSpan> spans;  // empty unless matched
};

// Throws kCompile when the rule breaks an invariant: no groups, an empty
// group, an empty word or tag set, nesting deeper than kMaxDepth, or a
// window below 1.
void ValidateRule(const Rule &rule);

// Parses one JSON rule definition (`schema: 1`). Throws kCompile.
Rule CompileRule(std::string_view definition);

// A rule file holds one definition or a JSON array of them.
std::vector<Rule> LoadRuleFile(const std::string &path);

// JSON definition accepted by CompileRule.
std::string RuleToJson(const Rule &rule);

RuleMatch EvaluateRule(const Rule &rule, const Sentence &sentence);

// One entry per distinct egp_id; a later rule replaces an earlier one.
std::map<int, bool> RunDetectors(std::span<const Rule> rules,
                                 const Sentence &sentence);

// ---- built-in rule pack -----------------------------------------------------

// Ids with a built-in detector and filter.
const std::vector<int> &BuiltinIds();

// Throw kNotFound for ids outside BuiltinIds().
Rule BuiltinDetector(int egp_id);
Rule BuiltinFilter(int egp_id);

}  // namespace egp

#endif  // EGP_RULESET_H_
