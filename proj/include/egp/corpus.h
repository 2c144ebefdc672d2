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

#ifndef EGP_CORPUS_H_
#define EGP_CORPUS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egp/cefr.h"

namespace egp {

struct TaggedToken {
  std::string form;
  std::string lemma;
  std::string upos;  // universal PoS, e.g. ADJ
  std::string xpos;  // fine-grained tag, e.g. JJR
  std::string dep;   // dependency relation, e.g. relcl
  std::size_t head = 0;  // 0-based; the root points at itself

  bool operator==(const TaggedToken &) const = default;
};

struct Sentence {
  std::string text;
  std::vector<TaggedToken> tokens;

  bool operator==(const Sentence &) const = default;
};

// Checks the token invariants: non-empty forms, heads inside the sentence,
// and forms occurring in `text` in order (case and apostrophe folded,
// whitespace ignored). Throws kValue describing the first violation.
void ValidateSentence(const Sentence &sentence);

struct SentencePair {
  std::string essay_id;
  int index = 0;
  Sentence original;
  Sentence corrected;

  bool operator==(const SentencePair &) const = default;
};

struct Essay {
  std::string essay_id;
  CefrBand cefr = CefrBand::kA1;
  std::optional<std::string> prompt_id;
  std::vector<SentencePair> pairs;  // sorted by index

  bool operator==(const Essay &) const = default;
};

struct CanDoStatement {
  int egp_id = 0;
  std::string statement;
  std::string supercategory;
  std::string subcategory;
  std::string guideword;
  CefrLevel level = CefrLevel::kA1;
  std::vector<std::string> examples;
  bool lexical = false;

  bool operator==(const CanDoStatement &) const = default;
};

struct AttemptAnnotation {
  std::string essay_id;
  int index = 0;
  int egp_id = 0;
  bool y_o = false;  // construct present in the original sentence
  bool y_c = false;  // construct present in the corrected sentence

  bool operator==(const AttemptAnnotation &) const = default;
};

struct EssayMeta {
  CefrBand cefr = CefrBand::kA1;
  std::optional<std::string> prompt_id;
};

using EssayMetaTable = std::map<std::string, EssayMeta>;

// ---- EGP catalog -----------------------------------------------------------

// Header: egp_id,level,supercategory,subcategory,guideword,statement,
// examples,lexical. `examples` is `||`-separated.
std::vector<CanDoStatement> ParseEgpCatalog(std::string_view csv_text);
std::vector<CanDoStatement> LoadEgpCatalog(const std::string &path);
std::string SerializeEgpCatalog(const std::vector<CanDoStatement> &catalog);

// Lookup by id over a loaded catalog.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<CanDoStatement> statements);

  const std::vector<CanDoStatement> &statements() const { return statements_; }
  const CanDoStatement *Find(int egp_id) const;
  // Throws kCatalog for an unknown id.
  const CanDoStatement &At(int egp_id) const;
  CefrLevel LevelOf(int egp_id) const { return At(egp_id).level; }

 private:
  std::vector<CanDoStatement> statements_;
  std::map<int, std::size_t> by_id_;
};

// ---- CoNLL-U ---------------------------------------------------------------

struct ConlluSentence {
  std::string sent_id;  // from "# sent_id = ..." or the 1-based block number
  Sentence sentence;
};

// One entry per sentence block. Multiword ranges ("2-3") and empty nodes
// ("5.1") are skipped. Text comes from "# text = ..." when present,
// otherwise forms are joined honouring SpaceAfter=No.
std::vector<ConlluSentence> ParseConlluBlocks(std::string_view text);
std::vector<Sentence> ParseConllu(std::string_view text);

std::string SerializeConllu(const std::vector<ConlluSentence> &sentences);

// ---- sentence pairs, metadata, annotations ---------------------------------

// JSON-lines. Each side carries either `tokens` or a `conllu_ref` of the
// form {file, sent_id}; relative sidecar paths resolve against the
// directory of `path`.
std::vector<SentencePair> LoadSentencePairs(const std::string &path);
std::vector<SentencePair> ParseSentencePairs(std::string_view jsonl,
                                             const std::string &base_dir);
std::string SerializeSentencePairs(const std::vector<SentencePair> &pairs);

// CSV: essay_id,cefr,prompt_id
EssayMetaTable ParseEssayMeta(std::string_view csv_text);
EssayMetaTable LoadEssayMeta(const std::string &path);

std::vector<Essay> GroupIntoEssays(const std::vector<SentencePair> &pairs,
                                   const EssayMetaTable &meta);

// JSON-lines: {essay_id, index, egp_id, y_o, y_c}
std::vector<AttemptAnnotation> ParseAnnotations(std::string_view jsonl);
std::vector<AttemptAnnotation> LoadAnnotations(const std::string &path);
std::string SerializeAnnotations(
    const std::vector<AttemptAnnotation> &annotations);

}  // namespace egp

#endif  // EGP_CORPUS_H_
