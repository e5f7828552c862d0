#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ancon/corpus.hpp"

namespace ancon {

/// Inclusive, 1-based sentence index range. A null side has first == last + 1.
struct IndexRange {
  std::size_t first = 1;
  std::size_t last = 0;

  std::size_t width() const noexcept { return last + 1 - first; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct AlignmentBlock {
  IndexRange src;
  IndexRange tgt;
  double score = 0.0;

  friend bool operator==(const AlignmentBlock&, const AlignmentBlock&) = default;
};

struct AlignmentResult {
  std::vector<AlignmentBlock> blocks;
  double total_score = 0.0;
};

enum class TieBreak {
  finest,    // more blocks, then earliest block boundaries
  earliest,  // earliest block boundaries only
};

struct AlignConfig {
  std::size_t max_group = 5;
  bool allow_null_blocks = false;
  TieBreak tie_break = TieBreak::finest;
  std::size_t max_sentences = 5000;
};

/// Block scorer over 1-based inclusive ranges; both ranges are non-empty.
using BlockScorer = std::function<double(std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2)>;

/// Maximum-score monotone tiling of an n x m sentence grid with blocks of
/// shape (a, b), 1 <= a, b <= max_group, plus zero-scored (1,0)/(0,1) blocks
/// when null blocks are enabled. Ties follow cfg.tie_break.
AlignmentResult solve_tiling(std::size_t n, std::size_t m, const AlignConfig& cfg, const BlockScorer& score);

/// Exhaustive enumeration of every tiling; the verification oracle for
/// solve_tiling. Refuses n or m above `limit`.
AlignmentResult enumerate_tilings(std::size_t n, std::size_t m, const AlignConfig& cfg, const BlockScorer& score,
                                  std::size_t limit = 10);

/// Unsupervised alignment maximizing the summed LCS length of the blocks.
AlignmentResult align_dp(const PassagePair& pair, const AlignConfig& cfg = {});

/// Brute-force counterpart of align_dp for n, m <= 10.
AlignmentResult align_bruteforce(const PassagePair& pair, const AlignConfig& cfg = {});

/// Checks the tiling invariants (contiguous cover of 1..n and 1..m, shape
/// limits, score sum). Returns an empty string when valid.
std::string check_alignment(const AlignmentResult& result, std::size_t n, std::size_t m, const AlignConfig& cfg);

struct PassageAlignment {
  std::string id;
  AlignmentResult result;
};

struct CorpusAlignment {
  std::vector<SentencePair> pairs;
  std::vector<PassageAlignment> passages;
  std::vector<std::string> failures;  // "<id>: <message>" for skipped passages
};

using PassageAligner = std::function<AlignmentResult(const PassagePair&)>;

/// Aligns every passage (in parallel when threads > 1) and emits one
/// sentence pair per non-null block, in passage then block order.
CorpusAlignment align_corpus(std::span<const PassagePair> pairs, const AlignConfig& cfg, unsigned threads = 1);
CorpusAlignment align_corpus(std::span<const PassagePair> pairs, const PassageAligner& aligner, unsigned threads = 1);

/// Sentence pairs for the non-null blocks of one passage.
std::vector<SentencePair> block_pairs(const PassagePair& pair, const AlignmentResult& result);

// Audit format, one passage per line:
// {"id": str, "total_score": num, "blocks": [{"src": [i1, i2], "tgt": [j1, j2], "score": num}, ...]}
void write_alignments(std::ostream& out, std::span<const PassageAlignment> alignments);
void save_alignments(const std::filesystem::path& path, std::span<const PassageAlignment> alignments);
std::vector<PassageAlignment> read_alignments(std::istream& in);
std::vector<PassageAlignment> load_alignments(const std::filesystem::path& path);

}  // namespace ancon
