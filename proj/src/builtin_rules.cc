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

// Built-in detectors and recall-oriented pre-filters for the twelve
// statements with hand-written rules.

#include <algorithm>

#include "egp/error.h"
#include "egp/ruleset.h"

namespace egp {
namespace {

using P = TokenPredicate;

Clause Contains(TokenPredicate p) { return SentenceContainsClause{std::move(p)}; }
Clause Token(TokenPredicate p) { return TokenMatchClause{std::move(p)}; }
Clause Sequence(std::vector<std::string> forms) {
  return SequenceClause{std::move(forms), std::nullopt};
}

TokenPredicate All(std::vector<TokenPredicate> items) {
  return P::AllOf(std::move(items));
}

Rule Make(int egp_id, RuleMode mode, std::vector<ClauseGroup> groups) {
  Rule rule{egp_id, mode, std::move(groups)};
  ValidateRule(rule);
  return rule;
}

const std::vector<std::string> kIrregularComparatives = {
    "better", "worse", "further", "farther", "elder"};

// Time conjunctions from the detector description. The filter list adds
// "now", "long" and "soon" and lacks "by the time".
const std::vector<std::string> kTimeConjunctions = {
    "after", "before", "when", "while", "since",
    "as",    "once",   "until", "till", "whenever"};

const std::vector<std::string> kConditionalConjunctions = {
    "if", "unless", "provided", "providing", "supposing"};

Rule Detector(int egp_id) {
  constexpr RuleMode kMode = RuleMode::kDetector;
  switch (egp_id) {
    case 19:  // irregular comparative adjectives
      return Make(19, kMode,
                  {{{Token(All({P::FormIn(kIrregularComparatives),
                                P::UposIs({"ADJ"}), P::XposIs({"JJR"})}))}}});
    case 37:  // 'enough' right after an adjective
      return Make(37, kMode,
                  {{{FollowsWithinClause{P::FormIn({"enough"}), P::UposIs({"ADJ"}),
                                         1, Direction::kBefore}}}});
    case 209:  // negative interrogative
      return Make(209, kMode,
                  {{{Contains(P::LemmaIn({"not"})), Contains(P::FormIn({"?"}))}}});
    case 228:  // defining relative clause without a relative pronoun
      return Make(228, kMode,
                  {{{Contains(P::DepIs({"relcl"})),
                     SentenceLacksClause{P::FormIn({"that", "who", "whom", "which"}),
                                         P::DepIs({"relcl"})}}}});
    case 242:  // finite subordinate clause with a time conjunction
      return Make(242, kMode,
                  {{{Sequence({"as", "soon", "as"})}},
                   {{Sequence({"by", "the", "time"})}},
                   {{Sequence({"as", "long", "as"})}},
                   {{Token(All({P::FormIn(kTimeConjunctions),
                                P::UposIs({"SCONJ"})}))}}});
    case 249:  // conditional conjunctions
      return Make(249, kMode,
                  {{{Sequence({"so", "long", "as"})}},
                   {{Sequence({"as", "long", "as"})}},
                   {{Sequence({"in", "case"})}},
                   {{Contains(P::FormIn(kConditionalConjunctions))}}});
    case 266:  // either ... or
      return Make(266, kMode,
                  {{{FollowsWithinClause{P::FormIn({"either"}), P::FormIn({"or"}),
                                         std::nullopt, Direction::kAfter}}}});
    case 295:  // another
      return Make(295, kMode, {{{Contains(P::FormIn({"another"}))}}});
    case 367:  // future in the past with 'would'
      return Make(367, kMode,
                  {{{FollowsWithinClause{P::LemmaIn({"would"}), P::XposIs({"VB"}),
                                         5, Direction::kAfter},
                     Contains(P::XposIs({"VBD"}))}}});
    case 598:  // 'used to' for past habits
      return Make(598, kMode,
                  {{{SequenceClause{{"used", "to"},
                                    SequenceClause::Lookbehind{P::LemmaIn({"be"}), 2}}}},
                   {{Sequence({"did", "not", "use", "to"})}},
                   {{Sequence({"did", "n't", "use", "to"})}},
                   {{Sequence({"didn't", "use", "to"})}}});
    case 708:  // past simple passive
      return Make(708, kMode,
                  {{{Token(All({P::FormIn({"was", "were"}), P::DepIs({"auxpass"})}))}}});
    case 983:  // 'everything' as subject
      return Make(983, kMode,
                  {{{Token(All({P::FormIn({"everything"}),
                                P::DepIs({"nsubj", "nsubjpass"})}))}}});
  }
  throw Error(ErrorKind::kNotFound,
              "no built-in detector for egp_id " + std::to_string(egp_id));
}

Rule Filter(int egp_id) {
  constexpr RuleMode kMode = RuleMode::kFilter;
  switch (egp_id) {
    case 19: {
      std::vector<std::string> words = kIrregularComparatives;
      for (const char *w : {"eldest", "best", "worst", "furthest", "farthest",
                            "more", "less", "least", "most"}) {
        words.emplace_back(w);
      }
      return Make(19, kMode, {{{Contains(P::FormIn(std::move(words)))}}});
    }
    case 37:
      return Make(37, kMode, {{{Contains(P::FormIn({"enough"}))}}});
    case 209:
      return Make(209, kMode, {{{Contains(P::LemmaIn({"not"}))}}});
    case 228:
      return Make(228, kMode, {{{Contains(P::DepIs({"relcl"}))}}});
    case 242: {
      std::vector<std::string> words = kTimeConjunctions;
      for (const char *w : {"now", "long", "soon"}) words.emplace_back(w);
      // "by the time" keeps the filter a superset of the detector.
      return Make(242, kMode,
                  {{{Contains(P::FormIn(std::move(words)))}},
                   {{Sequence({"by", "the", "time"})}}});
    }
    case 249:
      return Make(249, kMode,
                  {{{Contains(P::FormIn(kConditionalConjunctions))}},
                   {{Sequence({"so", "long", "as"})}},
                   {{Sequence({"as", "long", "as"})}},
                   {{Sequence({"in", "case"})}}});
    case 266:
      return Make(266, kMode, {{{Contains(P::FormIn({"either"}))}}});
    case 295:
      return Make(295, kMode, {{{Contains(P::FormIn({"another"}))}}});
    case 367: {
      Rule rule = Detector(367);
      rule.mode = kMode;
      return rule;
    }
    case 598:
      return Make(598, kMode,
                  {{{Contains(P::FormIn({"used"}))}},
                   {{Sequence({"didn't", "use"})}},
                   {{Sequence({"did", "n't", "use"})}},
                   {{Sequence({"did", "not", "use"})}}});
    case 708:
      return Make(708, kMode,
                  {{{Contains(P::DepIs({"auxpass"})),
                     Contains(P::FormIn({"was", "were"}))}}});
    case 983:
      return Make(983, kMode, {{{Contains(P::FormIn({"everything"}))}}});
  }
  throw Error(ErrorKind::kNotFound,
              "no built-in filter for egp_id " + std::to_string(egp_id));
}

}  // namespace

const std::vector<int> &BuiltinIds() {
  static const std::vector<int> ids = {19,  37,  209, 228, 242, 249,
                                       266, 295, 367, 598, 708, 983};
  return ids;
}

Rule BuiltinDetector(int egp_id) { return Detector(egp_id); }
Rule BuiltinFilter(int egp_id) { return Filter(egp_id); }

}  // namespace egp
