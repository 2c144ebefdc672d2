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

#include <filesystem>

#include "doctest.h"
#include "egp/corpus.h"
#include "egp/csv.h"
#include "egp/error.h"
#include "egp/text.h"
#include "support.h"

namespace egp {
namespace {

ErrorKind KindOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  FAIL("expected an egp::Error");
  return ErrorKind::kValue;
}

std::string MessageOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.what();
  }
  return "";
}

const char kConllu[] =
    "# sent_id = s1\n"
    "# text = I don't like it.\n"
    "1\tI\tI\tPRON\tPRP\t_\t4\tnsubj\t_\t_\n"
    "2-3\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "2\tdo\tdo\tAUX\tVBP\t_\t4\taux\t_\t_\n"
    "3\tn't\tnot\tPART\tRB\t_\t4\tneg\t_\t_\n"
    "4\tlike\tlike\tVERB\tVB\t_\t0\troot\t_\t_\n"
    "5\tit\tit\tPRON\tPRP\t_\t4\tdobj\t_\tSpaceAfter=No\n"
    "6\t.\t.\tPUNCT\t.\t_\t4\tpunct\t_\t_\n"
    "\n"
    "# sent_id = s2\n"
    "1\tWe\twe\tPRON\tPRP\t_\t2\tnsubj\t_\t_\n"
    "2\tleft\tleave\tVERB\tVBD\t_\t0\troot\t_\tSpaceAfter=No\n"
    "3\t.\t.\tPUNCT\t.\t_\t2\tpunct\t_\t_\n";

}  // namespace

TEST_CASE("csv parser handles quoting and blank lines") {
  const CsvTable t = CsvTable::Parse("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n\n1,2\n");
  REQUIRE(t.rows().size() == 2);
  CHECK(t.rows()[0][0] == "x, y");
  CHECK(t.rows()[0][1] == "he said \"hi\"");
  CHECK(t.Column("b") == 1);
  CHECK(KindOf([&] { t.Column("c"); }) == ErrorKind::kSchema);
  CHECK(CsvEscape("a,b") == "\"a,b\"");
  CHECK(CsvEscape("plain") == "plain");
}

TEST_CASE("catalog loads, looks up and round-trips") {
  const auto statements = LoadEgpCatalog(testing::FixturePath("egp_catalog.csv"));
  REQUIRE(statements.size() == 12);
  const Catalog catalog(statements);
  const CanDoStatement &s = catalog.At(19);
  CHECK(s.level == CefrLevel::kA2);
  CHECK(s.guideword == "FORM: IRREGULAR");
  REQUIRE(s.examples.size() == 2);
  CHECK(s.examples[1] == "For further information, contact Joey Hung.");
  CHECK(catalog.LevelOf(249) == CefrLevel::kB2);
  CHECK(catalog.Find(12345) == nullptr);
  CHECK(KindOf([&] { catalog.At(12345); }) == ErrorKind::kCatalog);

  const auto again = ParseEgpCatalog(SerializeEgpCatalog(statements));
  REQUIRE(again.size() == statements.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].egp_id == statements[i].egp_id);
    CHECK(again[i].examples == statements[i].examples);
    CHECK(again[i].statement == statements[i].statement);
    CHECK(again[i].lexical == statements[i].lexical);
  }
}

TEST_CASE("catalog rejects bad rows with their row number") {
  const std::string header =
      "egp_id,level,supercategory,subcategory,guideword,statement,examples,lexical\n";
  CHECK(KindOf([&] {
          ParseEgpCatalog(header + "1,A1,S,s,G,st,ex,false\n1,A2,S,s,G,st,ex,false\n");
        }) == ErrorKind::kValue);
  const std::string plus = MessageOf(
      [&] { ParseEgpCatalog(header + "1,A1,S,s,G,st,ex,false\n2,B1+,S,s,G,st,ex,false\n"); });
  CHECK(plus.find("row 3") != std::string::npos);
  CHECK(KindOf([&] { ParseEgpCatalog("egp_id,level\n1,A1\n"); }) == ErrorKind::kSchema);
}

TEST_CASE("conllu: multiword ranges skipped, heads 0-based, SpaceAfter honoured") {
  const auto blocks = ParseConlluBlocks(kConllu);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].sent_id == "s1");
  const Sentence &s = blocks[0].sentence;
  REQUIRE(s.tokens.size() == 6);
  CHECK(s.tokens[2].form == "n't");
  CHECK(s.tokens[2].lemma == "not");
  CHECK(s.tokens[0].head == 3);
  CHECK(s.tokens[3].head == 3);  // root points at itself
  CHECK(s.text == "I don't like it.");
  // No "# text": rebuilt from forms.
  CHECK(blocks[1].sentence.text == "We left.");
}

TEST_CASE("conllu round trip preserves tokens") {
  const auto blocks = ParseConlluBlocks(kConllu);
  const auto again = ParseConlluBlocks(SerializeConllu(blocks));
  REQUIRE(again.size() == blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CHECK(again[i].sent_id == blocks[i].sent_id);
    CHECK(again[i].sentence.tokens == blocks[i].sentence.tokens);
  }
}

TEST_CASE("conllu errors carry line numbers") {
  const std::string msg = MessageOf([] { ParseConllu("1\tI\tI\tPRON\n"); });
  CHECK(msg.find("line 1") != std::string::npos);
  CHECK(KindOf([] { ParseConllu("1\tI\tI\tPRON\tPRP\t_\tx\tnsubj\t_\t_\n"); }) ==
        ErrorKind::kParse);
}

TEST_CASE("sentence validation") {
  Sentence ok{"Hello world", {{"Hello", "hello", "INTJ", "UH", "root", 0},
                              {"world", "world", "NOUN", "NN", "dep", 0}}};
  CHECK_NOTHROW(ValidateSentence(ok));
  Sentence bad_head = ok;
  bad_head.tokens[1].head = 7;
  CHECK(KindOf([&] { ValidateSentence(bad_head); }) == ErrorKind::kValue);
  Sentence bad_form = ok;
  bad_form.tokens[1].form = "planet";
  CHECK(KindOf([&] { ValidateSentence(bad_form); }) == ErrorKind::kValue);
}

TEST_CASE("sentence pairs: inline tokens, sidecar references and errors") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "egp_corpus_test";
  fs::create_directories(dir);
  WriteFile((dir / "side.conllu").string(), kConllu);

  const std::string jsonl =
      R"({"essay_id":"e1","index":0,"original":{"conllu_ref":{"file":"side.conllu","sent_id":"s1"}},)"
      R"("corrected":{"text":"I don’t like it.","tokens":[)"
      R"({"form":"I","lemma":"I","upos":"PRON","xpos":"PRP","dep":"nsubj","head":3},)"
      R"({"form":"do","lemma":"do","upos":"AUX","xpos":"VBP","dep":"aux","head":3},)"
      R"({"form":"n’t","lemma":"not","upos":"PART","xpos":"RB","dep":"neg","head":3},)"
      R"({"form":"like","lemma":"like","upos":"VERB","xpos":"VB","dep":"root","head":3},)"
      R"({"form":"it","lemma":"it","upos":"PRON","xpos":"PRP","dep":"dobj","head":3},)"
      R"({"form":".","lemma":".","upos":"PUNCT","xpos":".","dep":"punct","head":3}]}})"
      "\n";
  const auto pairs = ParseSentencePairs(jsonl, dir.string());
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].original.tokens.size() == 6);
  CHECK(pairs[0].corrected.tokens[2].form == "n't");  // apostrophe normalised
  CHECK(pairs[0].corrected.text == "I don't like it.");

  // Serialised form inlines the sidecar tokens and parses back identically.
  const auto again = ParseSentencePairs(SerializeSentencePairs(pairs), dir.string());
  CHECK(again == pairs);

  CHECK(KindOf([&] {
          ParseSentencePairs(
              R"({"essay_id":"e1","index":0,"original":{"conllu_ref":{"file":"missing.conllu","sent_id":"s1"}},"corrected":{"conllu_ref":{"file":"side.conllu","sent_id":"s1"}}})",
              dir.string());
        }) == ErrorKind::kIo);
  const std::string msg = MessageOf([&] {
    ParseSentencePairs(
        "\n" R"({"essay_id":"e1","index":0,"original":{"conllu_ref":{"file":"side.conllu","sent_id":"s1"}}})",
        dir.string());
  });
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(KindOf([&] {
          ParseSentencePairs(R"({"essay_id":"e1","index":0,"original":{},"corrected":{}})",
                             dir.string());
        }) == ErrorKind::kParse);
  fs::remove_all(dir);
}

TEST_CASE("essay metadata and grouping") {
  const auto meta = ParseEssayMeta("essay_id,cefr,prompt_id\ne2,B1+,p1\ne1,A2,\n");
  CHECK(meta.at("e2").cefr == CefrBand::kB1Plus);
  CHECK(KindOf([] { ParseEssayMeta("essay_id,cefr\ne1,B3\n"); }) == ErrorKind::kValue);

  Sentence s{"x", {{"x", "x", "X", "X", "root", 0}}};
  std::vector<SentencePair> pairs = {{"e2", 1, s, s}, {"e1", 0, s, s}, {"e2", 0, s, s}};
  const auto essays = GroupIntoEssays(pairs, meta);
  REQUIRE(essays.size() == 2);
  CHECK(essays[0].essay_id == "e1");
  CHECK(essays[1].pairs.size() == 2);
  CHECK(essays[1].pairs[0].index == 0);

  pairs.push_back({"e9", 0, s, s});
  const std::string msg = MessageOf([&] { GroupIntoEssays(pairs, meta); });
  CHECK(msg.find("e9") != std::string::npos);
  CHECK(KindOf([&] { GroupIntoEssays(pairs, meta); }) == ErrorKind::kJoin);
}

TEST_CASE("annotations parse booleans and 0/1, reject other labels") {
  const auto a = ParseAnnotations(
      R"({"essay_id":"e1","index":0,"egp_id":19,"y_o":0,"y_c":1})"
      "\n"
      R"({"essay_id":"e1","index":1,"egp_id":37,"y_o":true,"y_c":true})"
      "\n");
  REQUIRE(a.size() == 2);
  CHECK(!a[0].y_o);
  CHECK(a[0].y_c);
  CHECK(a[1].y_o);
  CHECK(ParseAnnotations(SerializeAnnotations(a)).size() == 2);
  CHECK(KindOf([] {
          ParseAnnotations(R"({"essay_id":"e1","index":0,"egp_id":19,"y_o":2,"y_c":1})");
        }) == ErrorKind::kValue);
}

TEST_CASE("rule-pack fixture parses and every sentence validates") {
  const auto cases = testing::LoadRulePack();
  CHECK(cases.size() >= 240);
  for (const auto &c : cases) {
    CAPTURE(c.sent_id);
    CHECK_NOTHROW(ValidateSentence(c.sentence));
  }
}

}  // namespace egp
