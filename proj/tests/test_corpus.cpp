#include <algorithm>
#include <filesystem>
#include <sstream>

#include "ancon/corpus.hpp"
#include "ancon/error.hpp"
#include "ancon/utf8.hpp"
#include "doctest.h"

using namespace ancon;

TEST_CASE("utf8 round trip and malformed input") {
  const std::string text = "春眠不觉晓，A\xF0\x9F\x98\x80";
  const auto cps = utf8::decode(text);
  CHECK(cps.size() == 8);
  CHECK(cps[5] == U'，');
  CHECK(cps[7] == U'\U0001F600');
  CHECK(utf8::encode(cps) == text);

  CHECK_THROWS_AS(utf8::decode("\xE6\x98"), FormatError);
  CHECK_THROWS_AS(utf8::decode("\x80"), FormatError);
  CHECK_THROWS_AS(utf8::decode("\xC0\xAF"), FormatError);
}

TEST_CASE("sentences keep their closing marks") {
  const auto parts = split_sentences(std::u32string_view(U"天下大势，分久必合。合久必分！余"));
  REQUIRE(parts.size() == 4);
  CHECK(parts[0] == U"天下大势，");
  CHECK(parts[1] == U"分久必合。");
  CHECK(parts[2] == U"合久必分！");
  CHECK(parts[3] == U"余");
  CHECK(concat(parts) == U"天下大势，分久必合。合久必分！余");
  CHECK(split_sentences(std::u32string_view(U"")).empty());
  CHECK(split_sentences(std::u32string_view(U"甲，乙"), U"。").size() == 1);
}

TEST_CASE("passage jsonl reading") {
  std::istringstream in(
      "{\"id\": \"p1\", \"src\": [\"甲。\", \"乙。\"], \"tgt\": \"丙。丁！\"}\n"
      "\n"
      "{\"src\": \"戊。\", \"tgt\": [\"己。\"]}\n");
  const auto pairs = read_passage_pairs(in);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].id == "p1");
  CHECK(pairs[0].src == std::vector<CharSeq>{U"甲。", U"乙。"});
  CHECK(pairs[0].tgt == std::vector<CharSeq>{U"丙。", U"丁！"});
  CHECK(pairs[1].id == "3");

  std::ostringstream out;
  write_passage_pairs(out, pairs);
  std::istringstream back(out.str());
  const auto again = read_passage_pairs(back);
  REQUIRE(again.size() == 2);
  CHECK(again[1].src == pairs[1].src);
}

TEST_CASE("malformed passage lines name the line") {
  std::istringstream bad("{\"src\": [\"a\"], \"tgt\": [\"b\"]}\n{\"src\": 3, \"tgt\": []}\n");
  try {
    read_passage_pairs(bad);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).starts_with("line 2"));
  }
  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(read_passage_pairs(garbage), FormatError);
  CHECK_THROWS_AS(load_passage_pairs("/nonexistent/passages.jsonl"), IoError);
}

TEST_CASE("sentence pairs round trip through jsonl") {
  const std::vector<SentencePair> pairs{{U"臣本布衣", U"我本来是平民"}, {U"\"引号\"", U"反斜杠\\"}};
  std::ostringstream out;
  write_sentence_pairs(out, pairs);
  std::istringstream in(out.str());
  CHECK(read_sentence_pairs(in) == pairs);
}

namespace {

std::vector<SentencePair> numbered(std::size_t n) {
  std::vector<SentencePair> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back({CharSeq(1, U'a' + static_cast<char32_t>(i % 26)) + CharSeq(i / 26 + 1, U'x'), CharSeq(1, static_cast<char32_t>(0x4E00 + i))});
  return v;
}

}  // namespace

TEST_CASE("split sizes are floored with the remainder in train") {
  const auto ten = numbered(10);
  const auto s = split_dataset(ten, {0.8, 0.1, 0.1}, 3);
  CHECK(s.train.size() == 8);
  CHECK(s.dev.size() == 1);
  CHECK(s.test.size() == 1);

  // 57391 * 0.05 = 2869.55 floors to 2869 for dev and test.
  std::vector<SentencePair> big(57391);
  for (std::size_t i = 0; i < big.size(); ++i) big[i].src = CharSeq(1, static_cast<char32_t>(0x4E00 + i));
  const auto b = split_dataset(big, {0.9, 0.05, 0.05}, 1);
  CHECK(b.dev.size() == 2869);
  CHECK(b.test.size() == 2869);
  CHECK(b.train.size() == 51653);
}

TEST_CASE("split is a seeded partition") {
  const auto pairs = numbered(50);
  const auto a = split_dataset(pairs, {0.6, 0.2, 0.2}, 11);
  const auto b = split_dataset(pairs, {0.6, 0.2, 0.2}, 11);
  CHECK(a.train == b.train);
  CHECK(a.dev == b.dev);
  CHECK(a.test == b.test);

  std::vector<CharSeq> all;
  for (const auto* part : {&a.train, &a.dev, &a.test})
    for (const auto& p : *part) all.push_back(p.tgt);
  std::sort(all.begin(), all.end());
  std::vector<CharSeq> want;
  for (const auto& p : pairs) want.push_back(p.tgt);
  std::sort(want.begin(), want.end());
  CHECK(all == want);

  const auto c = split_dataset(pairs, {0.6, 0.2, 0.2}, 12);
  CHECK_FALSE(c.train == a.train);

  CHECK_THROWS_AS(split_dataset(pairs, {0.5, 0.2, 0.2}, 1), InvalidArgument);
  CHECK_THROWS_AS(split_dataset(pairs, {1.0, 0.0, 0.0}, 1), InvalidArgument);
}

TEST_CASE("vocabulary ids") {
  const std::vector<CharSeq> text{U"乙甲乙", U"丙甲"};
  const auto v = Vocab::build(text);
  CHECK(v.size() == Vocab::kReserved + 3);
  CHECK(v.characters() == std::vector<char32_t>{U'丙', U'乙', U'甲'});  // code point order
  CHECK(v.id(U'丙') == Vocab::kReserved);
  CHECK(v.id(U'甲') == Vocab::kReserved + 2);
  CHECK(v.id(U'丁') == Vocab::kUnk);
  for (const auto& s : text) CHECK(v.decode(v.encode(s)) == s);
  CHECK(v.decode(v.encode(U"甲丁")) == U"甲�");
  CHECK_THROWS_AS(v.character(Vocab::kEos), InvalidArgument);

  const auto frequent = Vocab::build(text, 2);
  CHECK(frequent.characters() == std::vector<char32_t>{U'乙', U'甲'});
}

TEST_CASE("vocabulary statistics") {
  const std::vector<CharSeq> train{U"abab"}, eval{U"abc"};
  const auto s = vocab_stats(train, eval);
  CHECK(s.vocab_size == 2);
  CHECK(s.eval_tokens == 3);
  CHECK(s.oov_tokens == 1);
  CHECK(s.oov_rate == doctest::Approx(1.0 / 3.0));

  const std::vector<CharSeq> subset{U"ba"};
  CHECK(vocab_stats(train, subset).oov_rate == 0.0);
  const std::vector<CharSeq> empty;
  CHECK_THROWS_AS(vocab_stats(empty, eval), InvalidArgument);
}
