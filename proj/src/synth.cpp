#include "ancon/synth.hpp"

#include <algorithm>
#include <cmath>

#include "ancon/error.hpp"

namespace ancon {

namespace {

constexpr char32_t kPunctuation[] = {U'，', U'。', U'；', U'！', U'？'};
constexpr double kPunctuationCdf[] = {0.5, 0.8, 0.9, 0.95, 1.0};

}  // namespace

SyntheticLanguage::SyntheticLanguage(const LanguageConfig& cfg) : cfg_(cfg) {
  if (cfg.source_chars == 0 || cfg.rewrite_chars == 0) throw InvalidArgument("synthetic alphabets must be non-empty");
  if (cfg.shared_fraction < 0 || cfg.shared_fraction > 1) throw InvalidArgument("shared_fraction must be in [0,1]");
  if (cfg.source_base + cfg.source_chars > cfg.rewrite_base && cfg.rewrite_base + cfg.rewrite_chars > cfg.source_base)
    throw InvalidArgument("source and rewrite alphabets overlap");

  Rng rng(cfg.seed);
  double total = 0.0;
  for (std::size_t k = 0; k < cfg.source_chars; ++k) {
    alphabet_.push_back(cfg.source_base + static_cast<char32_t>(k));
    total += 1.0 / std::pow(static_cast<double>(k + 1), cfg.zipf_exponent);
    cumulative_.push_back(total);
  }
  for (double& c : cumulative_) c /= total;

  for (std::size_t k = 0; k < cfg.source_chars; ++k) {
    shared_.push_back(rng.bernoulli(cfg.shared_fraction));
    CharSeq word;
    const std::size_t len = rng.bernoulli(cfg.two_char_rewrites) ? 2 : 1;
    for (std::size_t c = 0; c < len; ++c)
      word.push_back(cfg.rewrite_base + static_cast<char32_t>(rng.below(cfg.rewrite_chars)));
    rewrites_.push_back(std::move(word));
  }
}

bool SyntheticLanguage::is_punctuation(char32_t ch) {
  return std::find(std::begin(kPunctuation), std::end(kPunctuation), ch) != std::end(kPunctuation);
}

bool SyntheticLanguage::is_shared(char32_t ch) const {
  if (ch < cfg_.source_base || ch >= cfg_.source_base + cfg_.source_chars) return false;
  return shared_[ch - cfg_.source_base];
}

CharSeq SyntheticLanguage::rewrite(char32_t ch) const {
  if (ch < cfg_.source_base || ch >= cfg_.source_base + cfg_.source_chars) return CharSeq(1, ch);
  return rewrites_[ch - cfg_.source_base];
}

char32_t SyntheticLanguage::sample_char(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), alphabet_.size() - 1);
  return alphabet_[k];
}

char32_t SyntheticLanguage::sample_punctuation(Rng& rng) const {
  const double u = rng.uniform();
  for (std::size_t k = 0; k < std::size(kPunctuation); ++k)
    if (u < kPunctuationCdf[k]) return kPunctuation[k];
  return kPunctuation[0];
}

CharSeq SyntheticLanguage::sample_sentence(Rng& rng, std::size_t length) const {
  CharSeq s;
  for (std::size_t k = 0; k < length; ++k) s.push_back(sample_char(rng));
  s.push_back(sample_punctuation(rng));
  return s;
}

CharSeq SyntheticLanguage::translate(std::u32string_view source) const {
  CharSeq out;
  for (char32_t ch : source) {
    if (is_punctuation(ch) || is_shared(ch)) {
      out.push_back(ch);
    } else {
      out += rewrite(ch);
    }
  }
  return out;
}

CharSeq SyntheticLanguage::translate(std::u32string_view source, double overlap, Rng& rng) const {
  CharSeq out;
  for (char32_t ch : source) {
    if (is_punctuation(ch) || rng.bernoulli(overlap)) {
      out.push_back(ch);
    } else {
      out += rewrite(ch);
    }
  }
  return out;
}

}  // namespace ancon
