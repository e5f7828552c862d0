#include <map>
#include <sstream>
#include <tuple>

#include "ancon/align.hpp"
#include "ancon/error.hpp"
#include "ancon/lcs.hpp"
#include "ancon/rng.hpp"
#include "doctest.h"

using namespace ancon;

namespace {

using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;

BlockScorer table_scorer(std::map<Key, double> table, double otherwise) {
  return [table = std::move(table), otherwise](std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) {
    const auto it = table.find({i1, i2, j1, j2});
    return it == table.end() ? otherwise : it->second;
  };
}

PassagePair random_passage(Rng& rng, std::size_t n, std::size_t m) {
  PassagePair p;
  p.id = "r";
  auto sentence = [&] {
    CharSeq s;
    const auto len = 1 + rng.below(6);
    for (std::size_t k = 0; k < len; ++k) s.push_back(0x4E00 + static_cast<char32_t>(rng.below(12)));
    return s;
  };
  for (std::size_t i = 0; i < n; ++i) p.src.push_back(sentence());
  for (std::size_t j = 0; j < m; ++j) p.tgt.push_back(sentence());
  return p;
}

}  // namespace

TEST_CASE("identical passages align one to one") {
  const PassagePair p{"id", {U"臣本布衣，", U"躬耕于南阳。"}, {U"臣本布衣，", U"躬耕于南阳。"}};
  const auto r = align_dp(p);
  REQUIRE(r.blocks.size() == 2);
  CHECK(r.blocks[0] == AlignmentBlock{{1, 1}, {1, 1}, 5.0});
  CHECK(r.blocks[1] == AlignmentBlock{{2, 2}, {2, 2}, 6.0});
  CHECK(r.total_score == 11.0);
  CHECK(check_alignment(r, 2, 2, {}).empty());
}

TEST_CASE("a merged target sentence takes a two to one block") {
  const PassagePair p{"m", {U"甲乙，", U"丙丁。", U"戊己。"}, {U"甲乙丙丁。", U"戊己。"}};
  const auto r = align_dp(p);
  REQUIRE(r.blocks.size() == 2);
  CHECK(r.blocks[0].src == IndexRange{1, 2});
  CHECK(r.blocks[0].tgt == IndexRange{1, 1});
  CHECK(r.blocks[1].src == IndexRange{3, 3});
}

TEST_CASE("dp matches exhaustive search on random passages") {
  Rng rng(5);
  for (int k = 0; k < 60; ++k) {
    const auto p = random_passage(rng, 1 + rng.below(5), 1 + rng.below(5));
    for (const auto tie : {TieBreak::finest, TieBreak::earliest}) {
      AlignConfig cfg;
      cfg.max_group = 1 + rng.below(3);
      cfg.tie_break = tie;
      cfg.allow_null_blocks = cfg.max_group < 5 && rng.bernoulli(0.5);
      const bool solvable = cfg.allow_null_blocks || (p.src.size() <= cfg.max_group * p.tgt.size() &&
                                                      p.tgt.size() <= cfg.max_group * p.src.size());
      if (!solvable) {
        CHECK_THROWS_AS(align_dp(p, cfg), InvalidArgument);
        continue;
      }
      const auto fast = align_dp(p, cfg);
      const auto slow = align_bruteforce(p, cfg);
      CHECK(fast.total_score == slow.total_score);
      CHECK(fast.blocks == slow.blocks);
      CHECK(check_alignment(fast, p.src.size(), p.tgt.size(), cfg).empty());
    }
  }
}

TEST_CASE("tie-break policies choose different optimal tilings") {
  // Two tilings of a 4 x 3 grid reach score 3: three blocks starting with
  // src 1-2, or two blocks starting with the single cell (1, 1).
  const auto scorer = table_scorer({{{1, 2, 1, 1}, 1.0},
                                    {{3, 3, 2, 2}, 1.0},
                                    {{4, 4, 3, 3}, 1.0},
                                    {{1, 1, 1, 1}, 1.0},
                                    {{2, 4, 2, 3}, 2.0}},
                                   -10.0);
  AlignConfig cfg;
  cfg.max_group = 3;

  cfg.tie_break = TieBreak::finest;
  const auto fine = solve_tiling(4, 3, cfg, scorer);
  CHECK(fine.total_score == 3.0);
  REQUIRE(fine.blocks.size() == 3);
  CHECK(fine.blocks[0].src == IndexRange{1, 2});
  CHECK(fine.blocks == enumerate_tilings(4, 3, cfg, scorer).blocks);

  cfg.tie_break = TieBreak::earliest;
  const auto early = solve_tiling(4, 3, cfg, scorer);
  CHECK(early.total_score == 3.0);
  REQUIRE(early.blocks.size() == 2);
  CHECK(early.blocks[0].src == IndexRange{1, 1});
  CHECK(early.blocks[1].src == IndexRange{2, 4});
  CHECK(early.blocks == enumerate_tilings(4, 3, cfg, scorer).blocks);
}

TEST_CASE("null blocks absorb an untranslated sentence") {
  const PassagePair p{"n", {U"甲。", U"多余。", U"乙。"}, {U"甲。", U"乙。"}};
  AlignConfig cfg;
  cfg.max_group = 1;
  CHECK_THROWS_AS(align_dp(p, cfg), InvalidArgument);

  cfg.allow_null_blocks = true;
  const auto r = align_dp(p, cfg);
  REQUIRE(r.blocks.size() == 3);
  CHECK(r.blocks[1].src == IndexRange{2, 2});
  CHECK(r.blocks[1].tgt.width() == 0);
  CHECK(r.total_score == 4.0);
  CHECK(check_alignment(r, 3, 2, cfg).empty());

  const auto pairs = block_pairs(p, r);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[1] == SentencePair{U"乙。", U"乙。"});
}

TEST_CASE("alignment checker rejects broken tilings") {
  AlignmentResult r;
  r.blocks = {{{1, 1}, {1, 1}, 1.0}, {{3, 3}, {2, 2}, 1.0}};
  r.total_score = 2.0;
  CHECK_FALSE(check_alignment(r, 3, 2, {}).empty());
  r.blocks = {{{1, 1}, {1, 2}, 1.0}};
  r.total_score = 5.0;
  CHECK_FALSE(check_alignment(r, 1, 2, {}).empty());
}

TEST_CASE("corpus alignment is the same for any thread count") {
  Rng rng(17);
  std::vector<PassagePair> passages;
  for (int k = 0; k < 20; ++k) {
    auto p = random_passage(rng, 2 + rng.below(4), 2 + rng.below(4));
    p.id = std::to_string(k);
    passages.push_back(std::move(p));
  }
  passages.push_back(PassagePair{"bad", {U"甲"}, {}});
  AlignConfig cfg;
  cfg.max_group = 3;
  const auto one = align_corpus(passages, cfg, 1);
  const auto four = align_corpus(passages, cfg, 4);
  CHECK(one.pairs == four.pairs);
  REQUIRE(one.failures.size() == 1);
  CHECK(one.failures[0].starts_with("bad: "));
  CHECK(one.passages.size() == passages.size() - 1);

  std::size_t non_null = 0;
  for (const auto& pa : one.passages)
    for (const auto& b : pa.result.blocks) non_null += b.src.width() > 0 && b.tgt.width() > 0;
  CHECK(non_null == one.pairs.size());
}

TEST_CASE("audit lines round trip") {
  const PassagePair p{"x", {U"甲。", U"乙。"}, {U"甲。", U"乙。"}};
  const std::vector<PassageAlignment> audit{{"x", align_dp(p)}};
  std::ostringstream out;
  write_alignments(out, audit);
  std::istringstream in(out.str());
  const auto back = read_alignments(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == "x");
  CHECK(back[0].result.blocks == audit[0].result.blocks);
  CHECK(back[0].result.total_score == audit[0].result.total_score);

  std::istringstream bad("{\"id\": \"x\", \"blocks\": [{\"src\": [1], \"tgt\": [1, 1]}]}\n");
  CHECK_THROWS_AS(read_alignments(bad), FormatError);
}
