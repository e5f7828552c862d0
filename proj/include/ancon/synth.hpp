#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ancon/corpus.hpp"
#include "ancon/rng.hpp"

namespace ancon {

struct LanguageConfig {
  std::size_t source_chars = 300;   // size of the "ancient" alphabet
  std::size_t rewrite_chars = 200;  // target-only characters used by rewrites
  double zipf_exponent = 1.0;
  double shared_fraction = 0.5;     // share of the alphabet that maps onto itself
  double two_char_rewrites = 0.4;   // share of rewrites that expand to two characters
  char32_t source_base = 0x4E00;
  char32_t rewrite_base = 0x8000;
  std::uint64_t seed = 1;
};

/// A toy ancient/contemporary language pair: every source character either
/// survives unchanged in the translation or is rewritten into a fixed one or
/// two character word, and word order is preserved. Translations therefore
/// share characters in order with their sources, as the real pair does.
class SyntheticLanguage {
 public:
  explicit SyntheticLanguage(const LanguageConfig& cfg = {});

  const LanguageConfig& config() const noexcept { return cfg_; }
  std::span<const char32_t> alphabet() const noexcept { return alphabet_; }
  bool is_shared(char32_t ch) const;
  /// Fixed contemporary rendering of a source character.
  CharSeq rewrite(char32_t ch) const;

  /// Zipf-distributed source character.
  char32_t sample_char(Rng& rng) const;
  /// Clause-final punctuation, comma-heavy.
  char32_t sample_punctuation(Rng& rng) const;
  /// `length` content characters followed by one punctuation mark.
  CharSeq sample_sentence(Rng& rng, std::size_t length) const;

  /// Deterministic translation: shared characters kept, the rest rewritten,
  /// punctuation kept.
  CharSeq translate(std::u32string_view source) const;
  /// Noisy translation: each content character is kept with probability
  /// `overlap`, otherwise rewritten; punctuation kept.
  CharSeq translate(std::u32string_view source, double overlap, Rng& rng) const;

  static bool is_punctuation(char32_t ch);

 private:
  LanguageConfig cfg_;
  std::vector<char32_t> alphabet_;
  std::vector<double> cumulative_;  // Zipf CDF over alphabet_
  std::vector<CharSeq> rewrites_;
  std::vector<bool> shared_;
};

}  // namespace ancon
