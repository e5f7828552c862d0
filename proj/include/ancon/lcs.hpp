#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ancon/corpus.hpp"

namespace ancon {

/// Reference LCS length: O(|a||b|) dynamic program over two rolling rows.
std::size_t lcs_len_dp(std::u32string_view a, std::u32string_view b);

/// Bit-parallel LCS length over 64-bit words (Allison-Dix recurrence).
/// Same result as lcs_len_dp, roughly 64x fewer inner-loop steps.
std::size_t lcs_len_bitparallel(std::u32string_view a, std::u32string_view b);

/// Length of the longest common subsequence; uses the bit-parallel kernel.
std::size_t lcs_len(std::u32string_view a, std::u32string_view b);

/// Precomputed match masks for one side, reusable against many texts.
class LcsPattern {
 public:
  explicit LcsPattern(std::u32string_view pattern);

  std::size_t length() const noexcept { return length_; }
  std::size_t lcs(std::u32string_view text) const;

 private:
  std::size_t length_ = 0;
  std::size_t words_ = 0;
  std::unordered_map<char32_t, std::uint32_t> slot_;
  std::vector<std::uint64_t> masks_;  // slot-major, words_ per slot
};

/// Memoized LCS lengths of sentence-group concatenations for one passage
/// pair. Ranges are 1-based and inclusive. Safe for concurrent use.
class BlockLcsCache {
 public:
  BlockLcsCache(std::span<const CharSeq> src, std::span<const CharSeq> tgt);

  std::size_t src_count() const noexcept { return src_offsets_.size() - 1; }
  std::size_t tgt_count() const noexcept { return tgt_offsets_.size() - 1; }

  /// Throws InvalidArgument when a range is empty or out of bounds.
  std::size_t get(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2);

  std::u32string_view src_group(std::size_t i1, std::size_t i2) const;
  std::u32string_view tgt_group(std::size_t j1, std::size_t j2) const;

  std::size_t hits() const;
  std::size_t misses() const;

 private:
  static std::uint64_t key(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2);
  void check(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) const;

  CharSeq src_joined_;
  CharSeq tgt_joined_;
  std::vector<std::size_t> src_offsets_;
  std::vector<std::size_t> tgt_offsets_;

  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::uint32_t> memo_;
  std::unordered_map<std::uint64_t, LcsPattern> patterns_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// LCS of src[i1..i2] joined against tgt[j1..j2] joined, 1-based inclusive.
/// `cache` must have been built from the same two sentence lists.
std::size_t lcs_block(std::span<const CharSeq> src, std::span<const CharSeq> tgt, std::size_t i1,
                      std::size_t i2, std::size_t j1, std::size_t j2, BlockLcsCache& cache);

}  // namespace ancon
