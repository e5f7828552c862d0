#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ancon/corpus.hpp"

// Character-level encoder-decoder with a shared embedding table, a gated
// recurrent cell on both sides, predictive local attention and a
// pointer-generator output layer. All arithmetic is in double precision.

namespace ancon::nmt {

struct Seq2SeqConfig {
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t attn_window = 5;  // half-width D of the local window
  std::size_t max_decode_len = 100;
  bool share_embedding = true;
  bool use_copy = true;
  bool use_local_attention = true;

  void validate() const;
};

/// Dense row-major matrix; vectors are single-column tensors.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::size_t size() const noexcept { return data.size(); }
  double* row(std::size_t r) noexcept { return data.data() + r * cols; }
  const double* row(std::size_t r) const noexcept { return data.data() + r * cols; }
  void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

struct Seq2SeqParams {
  Tensor embedding;      // V x E; source side, and target side when shared
  Tensor tgt_embedding;  // V x E; empty when the embedding is shared
  Tensor enc_w;          // 3H x E   update, reset, candidate gates stacked
  Tensor enc_u;          // 3H x H
  Tensor enc_b;          // 3H
  Tensor dec_w;          // 3H x (E + H)   input is [embedding; context]
  Tensor dec_u;          // 3H x H
  Tensor dec_b;          // 3H
  Tensor attn_w;         // H x H   bilinear score h_i^T W s
  Tensor pivot_w;        // H x H
  Tensor pivot_v;        // H
  Tensor out_w;          // V x 2H  over [s_t; c_t]
  Tensor out_b;          // V
  Tensor gen_w;          // 2H + E  over [c_t; s_t; embedding]
  Tensor gen_b;          // 1

  using Field = Tensor Seq2SeqParams::*;
  static const std::array<std::pair<const char*, Field>, 15>& fields();

  /// Same shapes as the config asks for, all zeros.
  static Seq2SeqParams zeros(const Seq2SeqConfig& cfg, std::size_t vocab_size);
  /// Uniform(-scale, scale) on every entry, deterministic per seed.
  static Seq2SeqParams random(const Seq2SeqConfig& cfg, std::size_t vocab_size, std::uint64_t seed,
                              double scale = 0.1);

  std::size_t vocab_size() const noexcept { return embedding.rows; }
  const Tensor& decoder_embedding() const noexcept { return tgt_embedding.size() ? tgt_embedding : embedding; }
  Tensor& decoder_embedding() noexcept { return tgt_embedding.size() ? tgt_embedding : embedding; }

  std::size_t parameter_count() const;
  void zero();
  bool all_finite() const;
};

/// A source sentence mapped to model ids. Out-of-vocabulary characters are
/// UNK at the encoder input and get per-sentence extension ids V, V+1, ...
/// so the copy distribution can name them.
struct SourceIds {
  std::vector<int> input;     // encoder input ids
  std::vector<int> extended;  // copy target id for each source position
  std::vector<char32_t> oovs; // character behind extension id V + k
};

struct EncodedPair {
  SourceIds source;
  /// Gold output ids including the final EOS. With copy enabled, an OOV
  /// target present in the source uses its extension id; otherwise UNK.
  std::vector<int> target;
};

SourceIds encode_source(const Vocab& vocab, std::u32string_view src);
EncodedPair encode_pair(const Vocab& vocab, const SentencePair& pair, bool use_copy);

/// Encoder hidden states, one row per source position.
using EncoderStates = Tensor;

/// Runs the encoder recurrence. Throws InvalidArgument on empty input or
/// ids outside the vocabulary.
EncoderStates encode(std::span<const int> src_ids, const Seq2SeqParams& params, const Seq2SeqConfig& cfg);

struct AttentionOutput {
  std::vector<double> context;  // H
  std::vector<double> weights;  // n, zero outside [window_lo, window_hi]
  double pivot = 0.0;           // in (0, n); position i covers [i, i + 1)
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
};

/// Local attention: pivot p = n * sigmoid(v . tanh(W_p s)), bilinear scores
/// over positions whose centres lie within D of p, each shifted by the log of
/// a Gaussian (sd D/2) around p, then softmax. With local attention off the
/// window is the whole sentence and no Gaussian is applied.
AttentionOutput local_attention(std::span<const double> s_prev, const EncoderStates& h, const Seq2SeqParams& params,
                                const Seq2SeqConfig& cfg);

struct DecodeState {
  std::vector<double> hidden;  // s_t
  std::size_t step = 0;
  std::vector<int> produced;
};

/// Decoder state before the first step (the last encoder state).
DecodeState initial_state(const EncoderStates& h);

struct StepOverrides {
  std::optional<double> p_gen;  // replaces the computed gate when set
};

struct StepOutput {
  std::vector<double> distribution;  // V + number of source OOVs; sums to 1
  std::vector<double> p_vocab;       // V
  std::vector<double> copy;          // V + OOVs: attention mass routed by source identity
  double p_gen = 1.0;
  AttentionOutput attention;
  DecodeState state;
};

StepOutput decode_step(const DecodeState& state, int prev_id, const EncoderStates& h, const SourceIds& src,
                       const Seq2SeqParams& params, const Seq2SeqConfig& cfg, const StepOverrides& overrides = {});

/// Mean token negative log-likelihood under teacher forcing.
double loss(std::span<const EncodedPair> batch, const Seq2SeqParams& params, const Seq2SeqConfig& cfg);

enum class GradientFault {
  none,
  drop_update_gate_carry,  // omits the z * dh path of the recurrent cells
};

/// Loss and its exact gradient (written into `grad`, which is resized).
double loss_and_gradient(std::span<const EncodedPair> batch, const Seq2SeqParams& params, const Seq2SeqConfig& cfg,
                         Seq2SeqParams& grad, GradientFault fault = GradientFault::none);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<std::pair<std::string, double>> per_tensor;
  std::size_t coordinates = 0;
};

double relative_error(double analytic, double numeric);

/// Central-difference derivative of f along coordinate `index` of x.
double central_difference(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                          std::size_t index, double epsilon);

/// Central finite differences on `samples` random coordinates per tensor,
/// relative error |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const Seq2SeqParams& params, const Seq2SeqConfig& cfg, std::span<const EncodedPair> example,
                           double epsilon = 1e-4, std::size_t samples = 20, std::uint64_t seed = 0,
                           GradientFault fault = GradientFault::none);

struct Seq2SeqModel {
  Seq2SeqConfig config;
  Vocab vocab;
  Seq2SeqParams params;
};

struct DecodeMode {
  enum Kind { greedy, beam } kind = greedy;
  std::size_t beam_size = 1;
};

/// Decodes until EOS or max_decode_len; extension ids come back as the
/// source characters they stand for.
CharSeq translate(const Seq2SeqModel& model, std::u32string_view src, DecodeMode mode = {});

}  // namespace ancon::nmt
