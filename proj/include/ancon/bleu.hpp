#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "ancon/corpus.hpp"

namespace ancon {

enum class BleuTokens { character, whitespace };

struct BleuConfig {
  BleuTokens tokens = BleuTokens::character;
  /// Add-one smoothing of the n >= 2 precisions (sentence-level diagnostics).
  bool smooth = false;
};

inline constexpr std::size_t kBleuOrder = 4;

struct BleuReport {
  double bleu = 0.0;  // 0..100
  std::array<double, kBleuOrder> precisions{};
  std::array<std::size_t, kBleuOrder> matches{};
  std::array<std::size_t, kBleuOrder> totals{};
  double brevity_penalty = 0.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
};

/// Corpus BLEU: clipped n-gram counts summed over sentences, geometric mean
/// of p1..p4, brevity penalty min(1, exp(1 - r/c)).
BleuReport bleu_corpus(std::span<const CharSeq> hyps, std::span<const CharSeq> refs, const BleuConfig& cfg = {});

/// Single-pair score; defaults to the smoothed variant.
BleuReport bleu_sentence(std::u32string_view hyp, std::u32string_view ref, BleuConfig cfg = {BleuTokens::character, true});

/// One-line description of the scoring configuration.
std::string bleu_signature(const BleuConfig& cfg);

std::string bleu_report_json(const BleuReport& report, const BleuConfig& cfg);

}  // namespace ancon
