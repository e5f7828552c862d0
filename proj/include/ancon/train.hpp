#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ancon/corpus.hpp"
#include "ancon/seq2seq.hpp"

namespace ancon::nmt {

struct TrainOptions {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::size_t epochs = 10;
  std::size_t max_steps = 0;  // 0 means no limit
  std::uint64_t seed = 1;
  double clip = 5.0;          // global gradient norm; 0 disables
  double init_scale = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Stop after the first epoch whose mean loss falls below this value.
  double stop_loss = 0.0;
  std::size_t vocab_min_count = 1;
};

struct TrainLogEntry {
  std::size_t epoch = 0;
  std::size_t step = 0;  // optimizer steps taken so far
  double loss = 0.0;     // mean batch loss over the epoch

  friend bool operator==(const TrainLogEntry&, const TrainLogEntry&) = default;
};

struct TrainResult {
  Seq2SeqModel model;
  std::vector<TrainLogEntry> log;
  std::size_t steps = 0;
  std::size_t skipped = 0;  // pairs with an empty side or a target over max_decode_len
};

using EpochCallback = std::function<void(const TrainLogEntry&)>;

/// Shared character vocabulary over both sides of the training pairs.
Vocab build_shared_vocab(std::span<const SentencePair> pairs, std::size_t min_count = 1);

/// Mini-batch Adam on the mean token NLL with global-norm clipping. Pairs
/// are reshuffled every epoch from `seed`; the run is bit-reproducible.
/// Throws NumericError naming the step if the loss stops being finite.
TrainResult train(std::span<const SentencePair> corpus, const Seq2SeqConfig& cfg, const TrainOptions& opts,
                  const EpochCallback& on_epoch = {});

/// Same, continuing from an existing model (its vocabulary is kept).
TrainResult train(std::span<const SentencePair> corpus, Seq2SeqModel init, const TrainOptions& opts,
                  const EpochCallback& on_epoch = {});

/// Global L2 norm of all gradient entries.
double gradient_norm(const Seq2SeqParams& grad);

/// Translates every source in order, spread over `threads` workers.
std::vector<CharSeq> translate_all(const Seq2SeqModel& model, std::span<const CharSeq> sources, DecodeMode mode = {},
                                   std::size_t threads = 1);

/// Fraction of pairs whose translation equals the target exactly.
double exact_match(const Seq2SeqModel& model, std::span<const SentencePair> pairs, DecodeMode mode = {},
                   std::size_t threads = 1);

}  // namespace ancon::nmt
