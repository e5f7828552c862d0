#include "ancon/align_eval.hpp"

#include <iomanip>
#include <ostream>
#include <set>
#include <utility>

#include "ancon/error.hpp"
#include "ancon/lcs.hpp"

namespace ancon {

AlignScore score_from_counts(std::size_t correct, std::size_t predicted, std::size_t gold) {
  AlignScore s;
  s.correct = correct;
  s.predicted = predicted;
  s.gold = gold;
  s.precision = predicted ? static_cast<double>(correct) / static_cast<double>(predicted) : 0.0;
  s.recall = gold ? static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

AlignScore prf1(const AlignmentResult& pred, const AlignmentResult& gold) {
  using Key = std::pair<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>>;
  std::set<Key> gold_blocks;
  for (const auto& b : gold.blocks) gold_blocks.insert({{b.src.first, b.src.last}, {b.tgt.first, b.tgt.last}});
  std::size_t correct = 0;
  for (const auto& b : pred.blocks)
    if (gold_blocks.contains({{b.src.first, b.src.last}, {b.tgt.first, b.tgt.last}})) ++correct;
  return score_from_counts(correct, pred.blocks.size(), gold.blocks.size());
}

namespace {

char32_t flip_punctuation(char32_t mark, Rng& rng) {
  static constexpr char32_t kMarks[] = {U'，', U'。', U'；', U'！', U'？'};
  char32_t other = mark;
  while (other == mark) other = kMarks[rng.below(std::size(kMarks))];
  return other;
}

}  // namespace

std::vector<GoldPassage> synth_corpus(std::size_t n_passages, const SynthNoise& noise, std::uint64_t seed,
                                      const SynthLayout& layout) {
  if (!(noise.overlap > 0.0 && noise.overlap <= 1.0)) throw InvalidArgument("overlap must be in (0, 1]");
  for (double r : {noise.merge_rate, noise.split_rate, noise.punct_flip_rate})
    if (!(r >= 0.0 && r < 1.0)) throw InvalidArgument("noise rates must be in [0, 1)");
  if (noise.merge_rate + noise.split_rate >= 1.0) throw InvalidArgument("merge_rate + split_rate must be below 1");
  if (layout.min_sentences < 1 || layout.min_sentences > layout.max_sentences || layout.min_length < 1 ||
      layout.min_length > layout.max_length)
    throw InvalidArgument("degenerate synthetic layout");

  const SyntheticLanguage lang(layout.language);
  Rng rng(seed);
  std::vector<GoldPassage> out;
  out.reserve(n_passages);

  for (std::size_t p = 0; p < n_passages; ++p) {
    GoldPassage gp;
    gp.pair.id = "synth-" + std::to_string(p);
    const auto k = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(layout.min_sentences),
                                                        static_cast<std::int64_t>(layout.max_sentences)));
    for (std::size_t s = 0; s < k; ++s) {
      const auto len = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(layout.min_length),
                                                            static_cast<std::int64_t>(layout.max_length)));
      gp.pair.src.push_back(lang.sample_sentence(rng, len));
    }

    auto add_target = [&](CharSeq t) {
      if (noise.punct_flip_rate > 0 && !t.empty() && SyntheticLanguage::is_punctuation(t.back()) &&
          rng.bernoulli(noise.punct_flip_rate))
        t.back() = flip_punctuation(t.back(), rng);
      gp.pair.tgt.push_back(std::move(t));
    };

    std::size_t i = 0;
    while (i < k) {
      const double r = rng.uniform();
      const std::size_t j0 = gp.pair.tgt.size();
      if (r < noise.merge_rate && i + 1 < k) {
        add_target(lang.translate(gp.pair.src[i], noise.overlap, rng) +
                   lang.translate(gp.pair.src[i + 1], noise.overlap, rng));
        gp.gold.blocks.push_back({IndexRange{i + 1, i + 2}, IndexRange{j0 + 1, j0 + 1}, 0.0});
        i += 2;
        continue;
      }
      CharSeq t = lang.translate(gp.pair.src[i], noise.overlap, rng);
      if (r >= noise.merge_rate && r < noise.merge_rate + noise.split_rate && t.size() >= 3) {
        // Cut inside the content and close the first half with a comma.
        const auto cut = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(t.size()) - 2));
        CharSeq head = t.substr(0, cut);
        head.push_back(U'，');
        add_target(std::move(head));
        add_target(t.substr(cut));
        gp.gold.blocks.push_back({IndexRange{i + 1, i + 1}, IndexRange{j0 + 1, j0 + 2}, 0.0});
      } else {
        add_target(std::move(t));
        gp.gold.blocks.push_back({IndexRange{i + 1, i + 1}, IndexRange{j0 + 1, j0 + 1}, 0.0});
      }
      ++i;
    }

    BlockLcsCache cache(gp.pair.src, gp.pair.tgt);
    for (auto& b : gp.gold.blocks) {
      b.score = static_cast<double>(cache.get(b.src.first, b.src.last, b.tgt.first, b.tgt.last));
      gp.gold.total_score += b.score;
    }
    out.push_back(std::move(gp));
  }
  return out;
}

std::vector<AlignScore> evaluate_alignments(std::span<const GoldPassage> corpus, const GoldAligner& aligner) {
  std::vector<AlignScore> scores;
  scores.reserve(corpus.size());
  for (const auto& gp : corpus) scores.push_back(prf1(aligner(gp.pair), gp.gold));
  return scores;
}

double mean_f1(std::span<const AlignScore> scores) {
  if (scores.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : scores) sum += s.f1;
  return sum / static_cast<double>(scores.size());
}

AlignScore micro_average(std::span<const AlignScore> scores) {
  std::size_t correct = 0, predicted = 0, gold = 0;
  for (const auto& s : scores) {
    correct += s.correct;
    predicted += s.predicted;
    gold += s.gold;
  }
  return score_from_counts(correct, predicted, gold);
}

std::vector<BenchmarkRow> benchmark_alignment(std::span<const double> overlaps, std::span<const std::uint64_t> seeds,
                                              std::size_t n_passages, SynthNoise noise, const AlignConfig& cfg,
                                              const SynthLayout& layout) {
  std::vector<BenchmarkRow> rows;
  for (double overlap : overlaps) {
    for (std::uint64_t seed : seeds) {
      noise.overlap = overlap;
      const auto corpus = synth_corpus(n_passages, noise, seed, layout);
      const auto scores = evaluate_alignments(corpus, [&cfg](const PassagePair& p) { return align_dp(p, cfg); });
      rows.push_back(BenchmarkRow{overlap, seed, micro_average(scores), mean_f1(scores)});
    }
  }
  return rows;
}

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkRow> rows) {
  out << "overlap,seed,precision,recall,f1,mean_f1\n";
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(6);
  for (const auto& r : rows)
    out << r.overlap << ',' << r.seed << ',' << r.score.precision << ',' << r.score.recall << ',' << r.score.f1 << ','
        << r.mean_f1 << '\n';
  out.flags(flags);
}

}  // namespace ancon
