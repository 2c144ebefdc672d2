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

#include "egp/corpus.h"

#include <algorithm>
#include <filesystem>
#include <set>
#include <utility>

#include "egp/csv.h"
#include "egp/error.h"
#include "egp/text.h"
#include "json.hpp"

namespace egp {

using json = nlohmann::json;

namespace {

std::string RowContext(std::size_t row) {
  // Row numbers count the header as row 1.
  return "row " + std::to_string(row + 2) + ": ";
}

Error Rethrow(const Error &error, const std::string &context) {
  return Error(error.kind(), context + error.what());
}

std::string StripAllSpace(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

}  // namespace

void ValidateSentence(const Sentence &sentence) {
  const std::string folded_text = StripAllSpace(FoldWord(sentence.text));
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const TaggedToken &token = sentence.tokens[i];
    if (token.form.empty()) {
      throw Error(ErrorKind::kValue,
                  "token " + std::to_string(i) + " has an empty form");
    }
    if (token.head >= sentence.tokens.size()) {
      throw Error(ErrorKind::kValue, "token " + std::to_string(i) +
                                         " has head " +
                                         std::to_string(token.head) +
                                         " outside the sentence");
    }
    const std::string form = StripAllSpace(FoldWord(token.form));
    std::size_t pos = folded_text.find(form, cursor);
    if (pos == std::string::npos) {
      throw Error(ErrorKind::kValue, "token '" + token.form +
                                         "' does not occur in order in '" +
                                         sentence.text + "'");
    }
    cursor = pos + form.size();
  }
}

// ---- catalog ----------------------------------------------------------------

std::vector<CanDoStatement> ParseEgpCatalog(std::string_view csv_text) {
  const CsvTable table = CsvTable::Parse(csv_text);
  if (table.header().empty()) {
    throw Error(ErrorKind::kSchema, "catalog has no header row");
  }
  table.RequireColumns({"egp_id", "level", "supercategory", "subcategory",
                        "guideword", "statement", "examples", "lexical"});
  const std::size_t c_id = table.Column("egp_id");
  const std::size_t c_level = table.Column("level");
  const std::size_t c_super = table.Column("supercategory");
  const std::size_t c_sub = table.Column("subcategory");
  const std::size_t c_guide = table.Column("guideword");
  const std::size_t c_statement = table.Column("statement");
  const std::size_t c_examples = table.Column("examples");
  const std::size_t c_lexical = table.Column("lexical");

  std::vector<CanDoStatement> catalog;
  std::set<int> seen;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto &row = table.rows()[r];
    if (row.size() != table.header().size()) {
      throw Error(ErrorKind::kParse,
                  RowContext(r) + "expected " +
                      std::to_string(table.header().size()) +
                      " fields, got " + std::to_string(row.size()));
    }
    CanDoStatement s;
    try {
      s.egp_id = static_cast<int>(ParseInt(row[c_id]));
      s.level = ParseLevel(Trim(row[c_level]));
    } catch (const Error &e) {
      throw Rethrow(e, RowContext(r));
    }
    if (!seen.insert(s.egp_id).second) {
      throw Error(ErrorKind::kValue, RowContext(r) + "duplicate egp_id " +
                                         std::to_string(s.egp_id));
    }
    s.supercategory = NormalizeApostrophes(row[c_super]);
    s.subcategory = NormalizeApostrophes(row[c_sub]);
    s.guideword = NormalizeApostrophes(row[c_guide]);
    s.statement = NormalizeApostrophes(row[c_statement]);
    for (const std::string &example : Split(row[c_examples], "||")) {
      std::string_view trimmed = Trim(example);
      if (!trimmed.empty()) s.examples.push_back(NormalizeApostrophes(trimmed));
    }
    const std::string lexical = FoldWord(Trim(row[c_lexical]));
    if (lexical == "true") {
      s.lexical = true;
    } else if (lexical == "false") {
      s.lexical = false;
    } else {
      throw Error(ErrorKind::kValue, RowContext(r) +
                                         "lexical must be true or false, got '" +
                                         row[c_lexical] + "'");
    }
    catalog.push_back(std::move(s));
  }
  return catalog;
}

std::vector<CanDoStatement> LoadEgpCatalog(const std::string &path) {
  try {
    return ParseEgpCatalog(ReadFile(path));
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Rethrow(e, path + ": ");
  }
}

std::string SerializeEgpCatalog(const std::vector<CanDoStatement> &catalog) {
  std::string out = CsvLine({"egp_id", "level", "supercategory", "subcategory",
                             "guideword", "statement", "examples", "lexical"});
  for (const CanDoStatement &s : catalog) {
    std::string examples;
    for (std::size_t i = 0; i < s.examples.size(); ++i) {
      if (i > 0) examples += "||";
      examples += s.examples[i];
    }
    out += CsvLine({std::to_string(s.egp_id), std::string(LevelName(s.level)),
                    s.supercategory, s.subcategory, s.guideword, s.statement,
                    examples, s.lexical ? "true" : "false"});
  }
  return out;
}

Catalog::Catalog(std::vector<CanDoStatement> statements)
    : statements_(std::move(statements)) {
  for (std::size_t i = 0; i < statements_.size(); ++i) {
    if (!by_id_.emplace(statements_[i].egp_id, i).second) {
      throw Error(ErrorKind::kValue, "duplicate egp_id " +
                                         std::to_string(statements_[i].egp_id));
    }
  }
}

const CanDoStatement *Catalog::Find(int egp_id) const {
  auto it = by_id_.find(egp_id);
  return it == by_id_.end() ? nullptr : &statements_[it->second];
}

const CanDoStatement &Catalog::At(int egp_id) const {
  if (const CanDoStatement *s = Find(egp_id)) return *s;
  throw Error(ErrorKind::kCatalog,
              "egp_id " + std::to_string(egp_id) + " is not in the catalog");
}

// ---- CoNLL-U ----------------------------------------------------------------

namespace {

struct PendingToken {
  TaggedToken token;
  long long head_1based = 0;
  bool space_after = true;
  std::size_t line = 0;
};

bool IsWordId(std::string_view id) {
  return id.find('-') == std::string_view::npos &&
         id.find('.') == std::string_view::npos;
}

std::string JoinForms(const std::vector<PendingToken> &tokens) {
  std::string text;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    text += tokens[i].token.form;
    if (tokens[i].space_after && i + 1 < tokens.size()) text.push_back(' ');
  }
  return text;
}

}  // namespace

std::vector<ConlluSentence> ParseConlluBlocks(std::string_view text) {
  std::vector<ConlluSentence> out;
  std::vector<PendingToken> tokens;
  std::optional<std::string> sent_id;
  std::optional<std::string> sent_text;
  bool in_block = false;

  auto flush = [&] {
    if (!in_block) return;
    ConlluSentence cs;
    cs.sent_id = sent_id ? *sent_id : std::to_string(out.size() + 1);
    const std::size_t n = tokens.size();
    for (std::size_t i = 0; i < n; ++i) {
      PendingToken &p = tokens[i];
      if (p.head_1based < 0 || static_cast<std::size_t>(p.head_1based) > n) {
        throw Error(ErrorKind::kParse,
                    "line " + std::to_string(p.line) + ": HEAD " +
                        std::to_string(p.head_1based) +
                        " outside the sentence");
      }
      p.token.head = p.head_1based == 0
                         ? i
                         : static_cast<std::size_t>(p.head_1based - 1);
    }
    cs.sentence.text = NormalizeApostrophes(sent_text ? *sent_text
                                                      : JoinForms(tokens));
    for (PendingToken &p : tokens) cs.sentence.tokens.push_back(std::move(p.token));
    out.push_back(std::move(cs));
    tokens.clear();
    sent_id.reset();
    sent_text.reset();
    in_block = false;
  };

  std::size_t line_no = 0;
  for (const std::string &raw : Split(text, "\n")) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (Trim(line).empty()) {
      flush();
      continue;
    }
    in_block = true;
    if (line.front() == '#') {
      std::string_view body = Trim(line.substr(1));
      auto value_of = [&](std::string_view key) -> std::optional<std::string> {
        if (body.substr(0, key.size()) != key) return std::nullopt;
        std::string_view rest = Trim(body.substr(key.size()));
        if (rest.empty() || rest.front() != '=') return std::nullopt;
        return std::string(Trim(rest.substr(1)));
      };
      if (auto v = value_of("sent_id")) sent_id = *v;
      if (auto v = value_of("text")) sent_text = *v;
      continue;
    }
    std::vector<std::string> cols = Split(line, "\t");
    if (cols.size() != 10) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                         ": expected 10 columns, got " +
                                         std::to_string(cols.size()));
    }
    if (!IsWordId(cols[0])) continue;
    PendingToken p;
    p.line = line_no;
    p.token.form = NormalizeApostrophes(cols[1]);
    p.token.lemma = NormalizeApostrophes(cols[2]);
    p.token.upos = cols[3];
    p.token.xpos = cols[4];
    p.token.dep = cols[7];
    try {
      p.head_1based = ParseInt(cols[6]);
    } catch (const Error &) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) +
                                         ": non-numeric HEAD '" + cols[6] +
                                         "'");
    }
    p.space_after = cols[9].find("SpaceAfter=No") == std::string::npos;
    tokens.push_back(std::move(p));
  }
  flush();
  return out;
}

std::vector<Sentence> ParseConllu(std::string_view text) {
  std::vector<Sentence> out;
  for (ConlluSentence &cs : ParseConlluBlocks(text)) {
    out.push_back(std::move(cs.sentence));
  }
  return out;
}

std::string SerializeConllu(const std::vector<ConlluSentence> &sentences) {
  std::string out;
  for (const ConlluSentence &cs : sentences) {
    out += "# sent_id = " + cs.sent_id + "\n";
    out += "# text = " + cs.sentence.text + "\n";
    const auto &tokens = cs.sentence.tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const TaggedToken &t = tokens[i];
      const std::size_t head = t.head == i ? 0 : t.head + 1;
      out += std::to_string(i + 1) + "\t" + t.form + "\t" + t.lemma + "\t" +
             t.upos + "\t" + t.xpos + "\t_\t" + std::to_string(head) + "\t" +
             t.dep + "\t_\t_\n";
    }
    out += "\n";
  }
  return out;
}

// ---- sentence pairs ---------------------------------------------------------

namespace {

std::string LineContext(std::size_t line) {
  return "line " + std::to_string(line) + ": ";
}

class SidecarCache {
 public:
  explicit SidecarCache(std::string base_dir) : base_dir_(std::move(base_dir)) {}

  const Sentence &Resolve(const std::string &file, const std::string &sent_id) {
    std::filesystem::path path(file);
    if (path.is_relative() && !base_dir_.empty()) path = base_dir_ / path;
    const std::string key = path.string();
    auto it = files_.find(key);
    if (it == files_.end()) {
      std::map<std::string, Sentence> by_id;
      for (ConlluSentence &cs : ParseConlluBlocks(ReadFile(key))) {
        by_id.emplace(cs.sent_id, std::move(cs.sentence));
      }
      it = files_.emplace(key, std::move(by_id)).first;
    }
    auto sit = it->second.find(sent_id);
    if (sit == it->second.end()) {
      throw Error(ErrorKind::kIo, "sent_id '" + sent_id + "' not found in '" +
                                      key + "'");
    }
    return sit->second;
  }

 private:
  std::filesystem::path base_dir_;
  std::map<std::string, std::map<std::string, Sentence>> files_;
};

std::string RequireString(const json &obj, const char *key) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw Error(ErrorKind::kParse,
                std::string("missing string field '") + key + "'");
  }
  return obj[key].get<std::string>();
}

std::string IdField(const json &obj, const char *key) {
  if (obj.contains(key) && obj[key].is_number_integer()) {
    return std::to_string(obj[key].get<long long>());
  }
  return RequireString(obj, key);
}

int RequireInt(const json &obj, const char *key) {
  if (!obj.contains(key) || !obj[key].is_number_integer()) {
    throw Error(ErrorKind::kParse,
                std::string("missing integer field '") + key + "'");
  }
  return obj[key].get<int>();
}

Sentence SideFromJson(const json &side, const char *name,
                      SidecarCache &sidecars) {
  if (!side.is_object()) {
    throw Error(ErrorKind::kParse,
                std::string("'") + name + "' must be an object");
  }
  Sentence sentence;
  if (side.contains("tokens")) {
    sentence.text = NormalizeApostrophes(RequireString(side, "text"));
    for (const json &t : side["tokens"]) {
      TaggedToken token;
      token.form = NormalizeApostrophes(RequireString(t, "form"));
      token.lemma = NormalizeApostrophes(t.value("lemma", ""));
      token.upos = t.value("upos", "");
      token.xpos = t.value("xpos", "");
      token.dep = t.value("dep", "");
      const int head = RequireInt(t, "head");
      if (head < 0) throw Error(ErrorKind::kValue, "negative head");
      token.head = static_cast<std::size_t>(head);
      sentence.tokens.push_back(std::move(token));
    }
  } else if (side.contains("conllu_ref")) {
    const json &ref = side["conllu_ref"];
    sentence = sidecars.Resolve(RequireString(ref, "file"), IdField(ref, "sent_id"));
    if (side.contains("text")) {
      sentence.text = NormalizeApostrophes(RequireString(side, "text"));
    }
  } else {
    throw Error(ErrorKind::kParse, std::string("'") + name +
                                       "' has neither tokens nor conllu_ref");
  }
  try {
    ValidateSentence(sentence);
  } catch (const Error &e) {
    throw Rethrow(e, std::string(name) + ": ");
  }
  return sentence;
}

json SideToJson(const Sentence &sentence) {
  json tokens = json::array();
  for (const TaggedToken &t : sentence.tokens) {
    tokens.push_back({{"form", t.form},
                      {"lemma", t.lemma},
                      {"upos", t.upos},
                      {"xpos", t.xpos},
                      {"dep", t.dep},
                      {"head", t.head}});
  }
  return {{"text", sentence.text}, {"tokens", tokens}};
}

template <typename Fn>
void ForEachJsonLine(std::string_view jsonl, Fn &&fn) {
  std::size_t line_no = 0;
  for (const std::string &line : Split(jsonl, "\n")) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception &e) {
      throw Error(ErrorKind::kParse, LineContext(line_no) + e.what());
    }
    if (!record.is_object()) {
      throw Error(ErrorKind::kParse,
                  LineContext(line_no) + "record must be a JSON object");
    }
    try {
      fn(record);
    } catch (const Error &e) {
      throw Rethrow(e, LineContext(line_no));
    } catch (const json::exception &e) {
      throw Error(ErrorKind::kParse, LineContext(line_no) + e.what());
    }
  }
}

}  // namespace

std::vector<SentencePair> ParseSentencePairs(std::string_view jsonl,
                                             const std::string &base_dir) {
  SidecarCache sidecars(base_dir);
  std::vector<SentencePair> pairs;
  ForEachJsonLine(jsonl, [&](const json &record) {
    SentencePair pair;
    pair.essay_id = IdField(record, "essay_id");
    pair.index = RequireInt(record, "index");
    if (!record.contains("original")) {
      throw Error(ErrorKind::kParse, "record missing 'original'");
    }
    if (!record.contains("corrected")) {
      throw Error(ErrorKind::kParse, "record missing 'corrected'");
    }
    pair.original = SideFromJson(record["original"], "original", sidecars);
    pair.corrected = SideFromJson(record["corrected"], "corrected", sidecars);
    pairs.push_back(std::move(pair));
  });
  return pairs;
}

std::vector<SentencePair> LoadSentencePairs(const std::string &path) {
  const std::string base =
      std::filesystem::path(path).parent_path().string();
  try {
    return ParseSentencePairs(ReadFile(path), base);
  } catch (const Error &e) {
    throw Rethrow(e, path + ": ");
  }
}

std::string SerializeSentencePairs(const std::vector<SentencePair> &pairs) {
  std::string out;
  for (const SentencePair &pair : pairs) {
    json record = {{"essay_id", pair.essay_id},
                   {"index", pair.index},
                   {"original", SideToJson(pair.original)},
                   {"corrected", SideToJson(pair.corrected)}};
    out += record.dump() + "\n";
  }
  return out;
}

// ---- essays -----------------------------------------------------------------

EssayMetaTable ParseEssayMeta(std::string_view csv_text) {
  const CsvTable table = CsvTable::Parse(csv_text);
  table.RequireColumns({"essay_id", "cefr"});
  const std::size_t c_id = table.Column("essay_id");
  const std::size_t c_cefr = table.Column("cefr");
  const bool has_prompt = table.HasColumn("prompt_id");
  const std::size_t c_prompt = has_prompt ? table.Column("prompt_id") : 0;

  EssayMetaTable meta;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto &row = table.rows()[r];
    if (row.size() != table.header().size()) {
      throw Error(ErrorKind::kParse,
                  RowContext(r) + "expected " +
                      std::to_string(table.header().size()) + " fields");
    }
    EssayMeta m;
    try {
      m.cefr = ParseBand(Trim(row[c_cefr]));
    } catch (const Error &e) {
      throw Rethrow(e, RowContext(r));
    }
    if (has_prompt && !Trim(row[c_prompt]).empty()) {
      m.prompt_id = std::string(Trim(row[c_prompt]));
    }
    const std::string id(Trim(row[c_id]));
    if (!meta.emplace(id, std::move(m)).second) {
      throw Error(ErrorKind::kValue,
                  RowContext(r) + "duplicate essay_id '" + id + "'");
    }
  }
  return meta;
}

EssayMetaTable LoadEssayMeta(const std::string &path) {
  try {
    return ParseEssayMeta(ReadFile(path));
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Rethrow(e, path + ": ");
  }
}

std::vector<Essay> GroupIntoEssays(const std::vector<SentencePair> &pairs,
                                   const EssayMetaTable &meta) {
  std::set<std::string> unknown;
  for (const SentencePair &pair : pairs) {
    if (!meta.count(pair.essay_id)) unknown.insert(pair.essay_id);
  }
  if (!unknown.empty()) {
    std::string ids;
    for (const std::string &id : unknown) {
      if (!ids.empty()) ids += ", ";
      ids += id;
    }
    throw Error(ErrorKind::kJoin, "essay ids missing from metadata: " + ids);
  }

  std::map<std::string, Essay> grouped;
  for (const SentencePair &pair : pairs) {
    auto [it, inserted] = grouped.try_emplace(pair.essay_id);
    if (inserted) {
      const EssayMeta &m = meta.at(pair.essay_id);
      it->second.essay_id = pair.essay_id;
      it->second.cefr = m.cefr;
      it->second.prompt_id = m.prompt_id;
    }
    it->second.pairs.push_back(pair);
  }

  std::vector<Essay> essays;
  for (auto &[id, essay] : grouped) {
    std::stable_sort(essay.pairs.begin(), essay.pairs.end(),
                     [](const SentencePair &a, const SentencePair &b) {
                       return a.index < b.index;
                     });
    for (std::size_t i = 1; i < essay.pairs.size(); ++i) {
      if (essay.pairs[i].index == essay.pairs[i - 1].index) {
        throw Error(ErrorKind::kValue,
                    "duplicate sentence index " +
                        std::to_string(essay.pairs[i].index) + " in essay '" +
                        id + "'");
      }
    }
    essays.push_back(std::move(essay));
  }
  return essays;
}

// ---- annotations ------------------------------------------------------------

namespace {

bool BinaryLabel(const json &record, const char *key) {
  if (!record.contains(key)) {
    throw Error(ErrorKind::kParse, std::string("missing field '") + key + "'");
  }
  const json &v = record[key];
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) {
    const long long x = v.get<long long>();
    if (x == 0 || x == 1) return x == 1;
  }
  throw Error(ErrorKind::kValue,
              std::string("'") + key + "' must be 0 or 1, got " + v.dump());
}

}  // namespace

std::vector<AttemptAnnotation> ParseAnnotations(std::string_view jsonl) {
  std::vector<AttemptAnnotation> out;
  ForEachJsonLine(jsonl, [&](const json &record) {
    AttemptAnnotation a;
    a.essay_id = IdField(record, "essay_id");
    a.index = RequireInt(record, "index");
    a.egp_id = RequireInt(record, "egp_id");
    a.y_o = BinaryLabel(record, "y_o");
    a.y_c = BinaryLabel(record, "y_c");
    out.push_back(std::move(a));
  });
  return out;
}

std::vector<AttemptAnnotation> LoadAnnotations(const std::string &path) {
  try {
    return ParseAnnotations(ReadFile(path));
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Rethrow(e, path + ": ");
  }
}

std::string SerializeAnnotations(
    const std::vector<AttemptAnnotation> &annotations) {
  std::string out;
  for (const AttemptAnnotation &a : annotations) {
    json record = {{"essay_id", a.essay_id},
                   {"index", a.index},
                   {"egp_id", a.egp_id},
                   {"y_o", a.y_o ? 1 : 0},
                   {"y_c", a.y_c ? 1 : 0}};
    out += record.dump() + "\n";
  }
  return out;
}

}  // namespace egp
