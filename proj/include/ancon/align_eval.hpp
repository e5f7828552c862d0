#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ancon/align.hpp"
#include "ancon/synth.hpp"

namespace ancon {

struct AlignScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

/// Precision/recall/F1 from raw counts; F1 is 0 when P + R is 0.
AlignScore score_from_counts(std::size_t correct, std::size_t predicted, std::size_t gold);

/// Block-level exact match: a predicted block is correct when both of its
/// ranges equal those of some gold block.
AlignScore prf1(const AlignmentResult& pred, const AlignmentResult& gold);

struct GoldPassage {
  PassagePair pair;
  AlignmentResult gold;
};

struct SynthNoise {
  double merge_rate = 0.0;   // two source sentences rendered as one target sentence
  double split_rate = 0.0;   // one source sentence rendered as two target sentences
  double overlap = 0.6;      // chance a content character survives translation
  double punct_flip_rate = 0.0;  // chance a target sentence changes its final mark
};

struct SynthLayout {
  std::size_t min_sentences = 8;
  std::size_t max_sentences = 16;
  std::size_t min_length = 3;
  std::size_t max_length = 12;
  LanguageConfig language{};
};

/// Passage pairs with known sentence alignment, deterministic per seed.
std::vector<GoldPassage> synth_corpus(std::size_t n_passages, const SynthNoise& noise, std::uint64_t seed,
                                      const SynthLayout& layout = {});

struct BenchmarkRow {
  double overlap = 0.0;
  std::uint64_t seed = 0;
  AlignScore score;  // micro-averaged over the passages of one run
  double mean_f1 = 0.0;  // macro average of per-passage F1
};

using GoldAligner = std::function<AlignmentResult(const PassagePair&)>;

/// Scores `aligner` on each gold passage; returns per-passage scores.
std::vector<AlignScore> evaluate_alignments(std::span<const GoldPassage> corpus, const GoldAligner& aligner);

double mean_f1(std::span<const AlignScore> scores);
AlignScore micro_average(std::span<const AlignScore> scores);

/// One synthetic corpus per (overlap, seed), aligned with align_dp.
std::vector<BenchmarkRow> benchmark_alignment(std::span<const double> overlaps, std::span<const std::uint64_t> seeds,
                                              std::size_t n_passages, SynthNoise noise, const AlignConfig& cfg,
                                              const SynthLayout& layout = {});

/// CSV with header overlap,seed,precision,recall,f1,mean_f1.
void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows);

}  // namespace ancon
