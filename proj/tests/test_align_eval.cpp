#include <sstream>

#include "ancon/align_eval.hpp"
#include "doctest.h"

using namespace ancon;

TEST_CASE("exact block match precision and recall") {
  AlignmentResult gold;
  gold.blocks = {{{1, 1}, {1, 1}}, {{2, 3}, {2, 2}}, {{4, 4}, {3, 3}}, {{5, 5}, {4, 4}}};
  AlignmentResult pred;
  pred.blocks = {{{1, 1}, {1, 1}}, {{2, 2}, {2, 2}}, {{3, 3}, {2, 2}}, {{4, 4}, {3, 3}}, {{5, 5}, {4, 4}}};
  // 3 of 5 predicted blocks match; 3 of 4 gold blocks recovered.
  const auto s = prf1(pred, gold);
  CHECK(s.correct == 3);
  CHECK(s.precision == doctest::Approx(0.6));
  CHECK(s.recall == doctest::Approx(0.75));
  CHECK(s.f1 == doctest::Approx(2 * 0.6 * 0.75 / 1.35));
  CHECK(prf1(gold, gold).f1 == 1.0);
}

TEST_CASE("scores from counts") {
  const auto s = score_from_counts(4, 5, 4);
  CHECK(s.precision == doctest::Approx(0.8));
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == doctest::Approx(0.888888888888889));
  const auto zero = score_from_counts(0, 0, 3);
  CHECK(zero.precision == 0.0);
  CHECK(zero.f1 == 0.0);
}

TEST_CASE("micro and macro averages") {
  const std::vector<AlignScore> scores{score_from_counts(1, 1, 1), score_from_counts(0, 3, 1)};
  const auto micro = micro_average(scores);
  CHECK(micro.precision == doctest::Approx(0.25));
  CHECK(micro.recall == doctest::Approx(0.5));
  CHECK(mean_f1(scores) == doctest::Approx(0.5));
}

TEST_CASE("synthetic corpora are valid tilings and seed deterministic") {
  const SynthNoise noise{0.2, 0.2, 0.6, 0.1};
  const auto a = synth_corpus(30, noise, 9);
  const auto b = synth_corpus(30, noise, 9);
  REQUIRE(a.size() == 30);
  AlignConfig cfg;
  cfg.max_group = 3;
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].pair.src == b[k].pair.src);
    CHECK(a[k].pair.tgt == b[k].pair.tgt);
    CHECK(a[k].gold.blocks == b[k].gold.blocks);
    AlignmentResult unscored = a[k].gold;
    for (auto& blk : unscored.blocks) blk.score = 0.0;
    unscored.total_score = 0.0;
    CHECK(check_alignment(unscored, a[k].pair.src.size(), a[k].pair.tgt.size(), cfg).empty());
  }
  CHECK_FALSE(synth_corpus(30, noise, 10)[0].pair.src == a[0].pair.src);
}

TEST_CASE("lcs alignment recovers clean synthetic gold") {
  const auto corpus = synth_corpus(30, {0.0, 0.0, 1.0, 0.0}, 3);
  const auto scores = evaluate_alignments(corpus, [](const PassagePair& p) { return align_dp(p); });
  CHECK(micro_average(scores).f1 == 1.0);
}

TEST_CASE("benchmark csv") {
  const std::vector<double> overlaps{0.5, 0.9};
  const std::vector<std::uint64_t> seeds{1};
  AlignConfig cfg;
  cfg.max_group = 3;
  const auto rows = benchmark_alignment(overlaps, seeds, 10, {0.1, 0.1, 0.6, 0.0}, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].score.f1 >= rows[0].score.f1);
  std::ostringstream out;
  write_benchmark_csv(out, rows);
  CHECK(out.str().starts_with("overlap,seed,precision,recall,f1,mean_f1\n"));
}
