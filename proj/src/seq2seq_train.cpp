#include "ancon/train.hpp"

#include <cmath>
#include <thread>

#include "ancon/error.hpp"
#include "ancon/rng.hpp"

namespace ancon::nmt {

Vocab build_shared_vocab(std::span<const SentencePair> pairs, std::size_t min_count) {
  std::vector<CharSeq> sides;
  sides.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    sides.push_back(p.src);
    sides.push_back(p.tgt);
  }
  return Vocab::build(sides, min_count);
}

double gradient_norm(const Seq2SeqParams& grad) {
  double sq = 0.0;
  for (const auto& [name, field] : Seq2SeqParams::fields())
    for (double v : (grad.*field).data) sq += v * v;
  return std::sqrt(sq);
}

namespace {

class Adam {
 public:
  Adam(const Seq2SeqParams& shape, const TrainOptions& opts)
      : m_(shape), v_(shape), opts_(opts) {
    m_.zero();
    v_.zero();
  }

  void step(Seq2SeqParams& params, const Seq2SeqParams& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    for (const auto& [name, field] : Seq2SeqParams::fields()) {
      auto& p = (params.*field).data;
      const auto& g = (grad.*field).data;
      auto& m = (m_.*field).data;
      auto& v = (v_.*field).data;
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * g[i];
        v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * g[i] * g[i];
        p[i] -= opts_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + opts_.adam_epsilon);
      }
    }
  }

 private:
  Seq2SeqParams m_, v_;
  const TrainOptions& opts_;
  std::size_t t_ = 0;
};

void scale_gradient(Seq2SeqParams& grad, double factor) {
  for (const auto& [name, field] : Seq2SeqParams::fields())
    for (double& v : (grad.*field).data) v *= factor;
}

}  // namespace

TrainResult train(std::span<const SentencePair> corpus, Seq2SeqModel init, const TrainOptions& opts,
                  const EpochCallback& on_epoch) {
  init.config.validate();
  if (corpus.empty()) throw InvalidArgument("training corpus is empty");
  if (opts.batch_size < 1) throw InvalidArgument("batch size must be at least 1");
  if (!(opts.learning_rate > 0)) throw InvalidArgument("learning rate must be positive");

  TrainResult result;
  std::vector<EncodedPair> data;
  for (const auto& p : corpus) {
    if (p.src.empty() || p.tgt.empty() || p.tgt.size() > init.config.max_decode_len) {
      ++result.skipped;
      continue;
    }
    data.push_back(encode_pair(init.vocab, p, init.config.use_copy));
  }
  if (data.empty()) throw InvalidArgument("no usable training pairs");

  result.model = std::move(init);
  Seq2SeqParams& params = result.model.params;
  Adam adam(params, opts);
  Rng rng(opts.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Seq2SeqParams grad;
  std::vector<EncodedPair> batch;
  bool done = false;
  for (std::size_t epoch = 1; epoch <= opts.epochs && !done; ++epoch) {
    rng.shuffle(std::span(order));
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
      if (opts.max_steps && result.steps >= opts.max_steps) {
        done = true;
        break;
      }
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + opts.batch_size); ++k)
        batch.push_back(data[order[k]]);
      const double l = loss_and_gradient(batch, params, result.model.config, grad);
      ++result.steps;
      if (!std::isfinite(l)) throw NumericError("non-finite loss at step " + std::to_string(result.steps));
      const double norm = gradient_norm(grad);
      if (!std::isfinite(norm))
        throw NumericError("non-finite gradient at step " + std::to_string(result.steps));
      if (opts.clip > 0 && norm > opts.clip) scale_gradient(grad, opts.clip / norm);
      adam.step(params, grad);
      sum += l;
      ++batches;
    }
    if (batches == 0) break;
    const TrainLogEntry entry{epoch, result.steps, sum / static_cast<double>(batches)};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (opts.stop_loss > 0 && entry.loss < opts.stop_loss) done = true;
    if (opts.max_steps && result.steps >= opts.max_steps) done = true;
  }
  if (!params.all_finite()) throw NumericError("parameters became non-finite");
  return result;
}

TrainResult train(std::span<const SentencePair> corpus, const Seq2SeqConfig& cfg, const TrainOptions& opts,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (corpus.empty()) throw InvalidArgument("training corpus is empty");
  Seq2SeqModel model;
  model.config = cfg;
  model.vocab = build_shared_vocab(corpus, opts.vocab_min_count);
  model.params = Seq2SeqParams::random(cfg, model.vocab.size(), opts.seed, opts.init_scale);
  return train(corpus, std::move(model), opts, on_epoch);
}

std::vector<CharSeq> translate_all(const Seq2SeqModel& model, std::span<const CharSeq> sources, DecodeMode mode,
                                   std::size_t threads) {
  std::vector<CharSeq> out(sources.size());
  threads = std::max<std::size_t>(1, std::min(threads, sources.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < sources.size(); ++i) out[i] = translate(model, sources[i], mode);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < sources.size(); i += threads) out[i] = translate(model, sources[i], mode);
      });
  }
  return out;
}

double exact_match(const Seq2SeqModel& model, std::span<const SentencePair> pairs, DecodeMode mode,
                   std::size_t threads) {
  if (pairs.empty()) throw InvalidArgument("exact match over an empty set");
  std::vector<CharSeq> sources;
  for (const auto& p : pairs) sources.push_back(p.src);
  const auto hyps = translate_all(model, sources, mode, threads);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) hit += hyps[i] == pairs[i].tgt;
  return static_cast<double>(hit) / static_cast<double>(pairs.size());
}

}  // namespace ancon::nmt
