#include "ancon/lcs.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "ancon/error.hpp"

namespace ancon {

std::size_t lcs_len_dp(std::u32string_view a, std::u32string_view b) {
  if (a.empty() || b.empty()) return 0;
  if (b.size() > a.size()) std::swap(a, b);
  std::vector<std::uint32_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (char32_t ca : a) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = ca == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

LcsPattern::LcsPattern(std::u32string_view pattern)
    : length_(pattern.size()), words_((pattern.size() + 63) / 64) {
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    auto [it, inserted] = slot_.try_emplace(pattern[i], static_cast<std::uint32_t>(slot_.size()));
    if (inserted) masks_.resize(masks_.size() + words_, 0);
    masks_[it->second * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

std::size_t LcsPattern::lcs(std::u32string_view text) const {
  if (length_ == 0 || text.empty()) return 0;
  // V starts all ones; each zero bit left at the end is one LCS match.
  std::vector<std::uint64_t> v(words_, ~std::uint64_t{0});
  for (char32_t ch : text) {
    auto it = slot_.find(ch);
    if (it == slot_.end()) continue;
    const std::uint64_t* m = masks_.data() + it->second * words_;
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      const std::uint64_t u = v[w] & m[w];
      const std::uint64_t sum1 = v[w] + u;
      const std::uint64_t c1 = sum1 < v[w];
      const std::uint64_t sum = sum1 + carry;
      const std::uint64_t c2 = sum < sum1;
      carry = c1 | c2;
      v[w] = sum | (v[w] & ~m[w]);
    }
  }
  std::size_t ones = 0;
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t word = v[w];
    const std::size_t used = std::min<std::size_t>(64, length_ - w * 64);
    if (used < 64) word &= (std::uint64_t{1} << used) - 1;
    ones += static_cast<std::size_t>(std::popcount(word));
  }
  return length_ - ones;
}

std::size_t lcs_len_bitparallel(std::u32string_view a, std::u32string_view b) {
  if (a.empty() || b.empty()) return 0;
  // Mask construction is the per-call overhead, so the shorter side is the pattern.
  if (a.size() > b.size()) std::swap(a, b);
  return LcsPattern(a).lcs(b);
}

std::size_t lcs_len(std::u32string_view a, std::u32string_view b) { return lcs_len_bitparallel(a, b); }

BlockLcsCache::BlockLcsCache(std::span<const CharSeq> src, std::span<const CharSeq> tgt) {
  if (src.size() >= 0xFFFF || tgt.size() >= 0xFFFF) throw InvalidArgument("passage too long for block cache");
  src_offsets_.push_back(0);
  for (const auto& s : src) {
    src_joined_ += s;
    src_offsets_.push_back(src_joined_.size());
  }
  tgt_offsets_.push_back(0);
  for (const auto& t : tgt) {
    tgt_joined_ += t;
    tgt_offsets_.push_back(tgt_joined_.size());
  }
}

std::uint64_t BlockLcsCache::key(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) {
  return (std::uint64_t(i1) << 48) | (std::uint64_t(i2) << 32) | (std::uint64_t(j1) << 16) | std::uint64_t(j2);
}

void BlockLcsCache::check(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) const {
  if (i1 < 1 || i1 > i2 || i2 > src_count() || j1 < 1 || j1 > j2 || j2 > tgt_count()) {
    throw InvalidArgument("block range out of bounds: src " + std::to_string(i1) + ".." + std::to_string(i2) +
                          " of " + std::to_string(src_count()) + ", tgt " + std::to_string(j1) + ".." +
                          std::to_string(j2) + " of " + std::to_string(tgt_count()));
  }
}

std::u32string_view BlockLcsCache::src_group(std::size_t i1, std::size_t i2) const {
  return std::u32string_view(src_joined_).substr(src_offsets_[i1 - 1], src_offsets_[i2] - src_offsets_[i1 - 1]);
}

std::u32string_view BlockLcsCache::tgt_group(std::size_t j1, std::size_t j2) const {
  return std::u32string_view(tgt_joined_).substr(tgt_offsets_[j1 - 1], tgt_offsets_[j2] - tgt_offsets_[j1 - 1]);
}

std::size_t BlockLcsCache::get(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) {
  check(i1, i2, j1, j2);
  const std::uint64_t k = key(i1, i2, j1, j2);
  std::lock_guard lock(mutex_);
  if (auto it = memo_.find(k); it != memo_.end()) {
    ++hits_;
    return it->second;
  }
  ++misses_;
  const std::uint64_t pkey = key(i1, i2, 0, 0);
  auto pit = patterns_.find(pkey);
  if (pit == patterns_.end()) pit = patterns_.emplace(pkey, LcsPattern(src_group(i1, i2))).first;
  const auto value = static_cast<std::uint32_t>(pit->second.lcs(tgt_group(j1, j2)));
  memo_.emplace(k, value);
  return value;
}

std::size_t BlockLcsCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t BlockLcsCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

std::size_t lcs_block(std::span<const CharSeq> src, std::span<const CharSeq> tgt, std::size_t i1, std::size_t i2,
                      std::size_t j1, std::size_t j2, BlockLcsCache& cache) {
  if (src.size() != cache.src_count() || tgt.size() != cache.tgt_count())
    throw InvalidArgument("block cache was built for a different passage pair");
  return cache.get(i1, i2, j1, j2);
}

}  // namespace ancon
