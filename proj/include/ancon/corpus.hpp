#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ancon {

/// A sentence or clause as code points. Characters are kept exactly as read;
/// no Unicode normalization is applied.
using CharSeq = std::u32string;

/// Clause-final marks used when no delimiter set is configured.
inline constexpr std::u32string_view kDefaultDelimiters = U"。！？；，";

struct PassagePair {
  std::string id;
  std::vector<CharSeq> src;
  std::vector<CharSeq> tgt;
};

struct SentencePair {
  CharSeq src;
  CharSeq tgt;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

/// Splits text after every delimiter. Delimiters stay attached to the clause
/// they close, so concatenating the result reproduces the input.
std::vector<CharSeq> split_sentences(std::u32string_view text,
                                     std::u32string_view delimiters = kDefaultDelimiters);
std::vector<CharSeq> split_sentences(std::string_view utf8_text,
                                     std::u32string_view delimiters = kDefaultDelimiters);

CharSeq concat(std::span<const CharSeq> parts);

// Passage-aligned JSON lines: {"id": str, "src": [str...], "tgt": [str...]}.
// A side given as a single string is split with `delimiters`.
std::vector<PassagePair> read_passage_pairs(std::istream& in,
                                            std::u32string_view delimiters = kDefaultDelimiters);
std::vector<PassagePair> load_passage_pairs(const std::filesystem::path& path,
                                            std::u32string_view delimiters = kDefaultDelimiters);
void write_passage_pairs(std::ostream& out, std::span<const PassagePair> pairs);
void save_passage_pairs(const std::filesystem::path& path, std::span<const PassagePair> pairs);

// Sentence-aligned JSON lines: {"src": str, "tgt": str}.
std::vector<SentencePair> read_sentence_pairs(std::istream& in);
std::vector<SentencePair> load_sentence_pairs(const std::filesystem::path& path);
void write_sentence_pairs(std::ostream& out, std::span<const SentencePair> pairs);
void save_sentence_pairs(const std::filesystem::path& path, std::span<const SentencePair> pairs);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<SentencePair> train;
  std::vector<SentencePair> dev;
  std::vector<SentencePair> test;
};

/// Seeded uniform shuffle, then dev and test take floor(N * ratio) items
/// each and train keeps the remainder.
DatasetSplit split_dataset(std::span<const SentencePair> pairs, SplitRatios ratios, std::uint64_t seed);

/// Character vocabulary with reserved ids for padding and sequence markers.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kReserved = 4;

  Vocab() = default;

  /// Every character seen at least `min_count` times gets an id, in code
  /// point order.
  static Vocab build(std::span<const CharSeq> sentences, std::size_t min_count = 1);
  static Vocab from_chars(std::span<const char32_t> chars);

  std::size_t size() const noexcept { return kReserved + chars_.size(); }
  bool contains(char32_t ch) const { return index_.contains(ch); }
  int id(char32_t ch) const;
  /// Character behind a non-reserved id.
  char32_t character(int id) const;
  const std::vector<char32_t>& characters() const noexcept { return chars_; }

  std::vector<int> encode(std::u32string_view text) const;
  /// Reserved ids are dropped, except UNK which renders as U+FFFD.
  CharSeq decode(std::span<const int> ids) const;

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, int> index_;
};

struct VocabStats {
  std::size_t vocab_size = 0;
  std::size_t eval_tokens = 0;
  std::size_t oov_tokens = 0;
  double oov_rate = 0.0;
};

/// Distinct characters of `train`, and the share of `eval` character tokens
/// missing from them.
VocabStats vocab_stats(std::span<const CharSeq> train, std::span<const CharSeq> eval);

}  // namespace ancon
