#include <thread>
#include <vector>

#include "ancon/error.hpp"
#include "ancon/lcs.hpp"
#include "ancon/rng.hpp"
#include "doctest.h"

using namespace ancon;

namespace {

// Plain recursion over prefixes; exponential, fine for short strings.
std::size_t lcs_recursive(std::u32string_view a, std::u32string_view b) {
  if (a.empty() || b.empty()) return 0;
  if (a.back() == b.back()) return 1 + lcs_recursive(a.substr(0, a.size() - 1), b.substr(0, b.size() - 1));
  return std::max(lcs_recursive(a.substr(0, a.size() - 1), b), lcs_recursive(a, b.substr(0, b.size() - 1)));
}

CharSeq random_text(Rng& rng, std::size_t len, std::size_t alphabet) {
  CharSeq s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(0x4E00 + static_cast<char32_t>(rng.below(alphabet)));
  return s;
}

}  // namespace

TEST_CASE("hand examples") {
  CHECK(lcs_len(U"ABCBDAB", U"BDCABA") == 4);
  CHECK(lcs_len(U"臣本布衣", U"我本来是平民布衣") == 3);
  CHECK(lcs_len(U"", U"abc") == 0);
  CHECK(lcs_len(U"abc", U"xyz") == 0);
  CHECK(lcs_len(U"春眠不觉晓", U"春眠不觉晓") == 5);
}

TEST_CASE("dp and bit-parallel agree with the recursive oracle") {
  Rng rng(1);
  for (int k = 0; k < 300; ++k) {
    const auto a = random_text(rng, rng.below(9), 1 + rng.below(5));
    const auto b = random_text(rng, rng.below(9), 1 + rng.below(5));
    const auto want = lcs_recursive(a, b);
    CHECK(lcs_len_dp(a, b) == want);
    CHECK(lcs_len_bitparallel(a, b) == want);
    CHECK(lcs_len_bitparallel(b, a) == want);
  }
}

TEST_CASE("bit-parallel handles multi-word patterns") {
  Rng rng(2);
  for (std::size_t len : {63u, 64u, 65u, 128u, 200u, 517u}) {
    const auto a = random_text(rng, len, 6);
    const auto b = random_text(rng, len + 13, 6);
    CHECK(lcs_len_bitparallel(a, b) == lcs_len_dp(a, b));
    const LcsPattern p(a);
    CHECK(p.lcs(b) == lcs_len_dp(a, b));
  }
}

TEST_CASE("block cache matches direct computation") {
  const std::vector<CharSeq> src{U"甲乙。", U"丙丁，", U"戊己。"};
  const std::vector<CharSeq> tgt{U"甲乙丙。", U"丁戊。", U"己。"};
  BlockLcsCache cache(src, tgt);
  CHECK(cache.src_count() == 3);
  CHECK(cache.src_group(1, 2) == U"甲乙。丙丁，");
  CHECK(cache.get(1, 2, 1, 1) == lcs_len(U"甲乙。丙丁，", U"甲乙丙。"));
  CHECK(cache.get(1, 3, 1, 3) == lcs_len(U"甲乙。丙丁，戊己。", U"甲乙丙。丁戊。己。"));
  const auto misses = cache.misses();
  CHECK(cache.get(1, 2, 1, 1) == lcs_block(src, tgt, 1, 2, 1, 1, cache));
  CHECK(cache.misses() == misses);
  CHECK(cache.hits() >= 2);
  CHECK_THROWS_AS(cache.get(2, 1, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(cache.get(1, 4, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(cache.get(0, 1, 1, 1), InvalidArgument);
}

TEST_CASE("block cache under concurrent use") {
  Rng rng(9);
  std::vector<CharSeq> src, tgt;
  for (int i = 0; i < 8; ++i) {
    src.push_back(random_text(rng, 10, 8));
    tgt.push_back(random_text(rng, 10, 8));
  }
  BlockLcsCache cache(src, tgt);
  std::vector<std::size_t> seen(4 * 64);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < 4; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t k = 0; k < 64; ++k) {
          const std::size_t i = 1 + k % 8, j = 1 + (k / 8) % 8;
          seen[w * 64 + k] = cache.get(i, std::min<std::size_t>(8, i + 1), j, j);
        }
      });
  }
  for (std::size_t k = 0; k < 64; ++k) {
    const std::size_t i = 1 + k % 8, j = 1 + (k / 8) % 8;
    const std::size_t i2 = std::min<std::size_t>(8, i + 1);
    CHECK(seen[k] == lcs_len_dp(src[i - 1] + (i2 > i ? src[i2 - 1] : CharSeq()), tgt[j - 1]));
    for (std::size_t w = 1; w < 4; ++w) CHECK(seen[w * 64 + k] == seen[k]);
  }
}
