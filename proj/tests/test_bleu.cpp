#include <cmath>

#include "ancon/bleu.hpp"
#include "ancon/error.hpp"
#include "doctest.h"

using namespace ancon;

namespace {

BleuReport one(std::u32string_view hyp, std::u32string_view ref, BleuConfig cfg = {}) {
  const std::vector<CharSeq> h{CharSeq(hyp)}, r{CharSeq(ref)};
  return bleu_corpus(h, r, cfg);
}

}  // namespace

TEST_CASE("identical text scores 100") {
  const auto r = one(U"我本来是平民", U"我本来是平民");
  CHECK(r.bleu == doctest::Approx(100.0));
  CHECK(r.brevity_penalty == 1.0);
  CHECK(r.matches == std::array<std::size_t, 4>{6, 5, 4, 3});
}

TEST_CASE("clipped counts") {
  const auto r = one(U"abab", U"aabb");
  CHECK(r.matches == std::array<std::size_t, 4>{4, 1, 0, 0});
  CHECK(r.totals == std::array<std::size_t, 4>{4, 3, 2, 1});
  CHECK(r.bleu == 0.0);

  // "the the the the" against "the cat": unigram matches clip at 1.
  const auto w = one(U"the the the the", U"the cat", {BleuTokens::whitespace, false});
  CHECK(w.matches[0] == 1);
  CHECK(w.totals[0] == 4);
}

TEST_CASE("brevity penalty") {
  const auto r = one(U"abcd", U"abcde");
  CHECK(r.brevity_penalty == doctest::Approx(std::exp(-0.25)));
  CHECK(r.bleu == doctest::Approx(100.0 * std::exp(-0.25)));
  CHECK(one(U"abcdef", U"abcde").brevity_penalty == 1.0);
}

TEST_CASE("corpus statistics are pooled before the geometric mean") {
  const std::vector<CharSeq> hyps{U"abcd", U"wxyz"}, refs{U"abcd", U"wxya"};
  const auto r = bleu_corpus(hyps, refs);
  CHECK(r.matches == std::array<std::size_t, 4>{7, 5, 3, 1});
  CHECK(r.totals == std::array<std::size_t, 4>{8, 6, 4, 2});
  const double want = 100.0 * std::exp((std::log(7.0 / 8) + std::log(5.0 / 6) + std::log(3.0 / 4) + std::log(0.5)) / 4);
  CHECK(r.bleu == doctest::Approx(want));
}

TEST_CASE("degenerate input") {
  const std::vector<CharSeq> empty_h{U"", U""}, refs{U"ab", U"cd"};
  CHECK(bleu_corpus(empty_h, refs).bleu == 0.0);
  const std::vector<CharSeq> short_refs{U"a"};
  CHECK_THROWS_AS(bleu_corpus(empty_h, short_refs), InvalidArgument);
  CHECK(bleu_sentence(U"abx", U"abc").bleu > 0.0);
  CHECK(bleu_signature({}).find("char") != std::string::npos);
}
