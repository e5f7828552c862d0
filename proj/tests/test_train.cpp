#include <filesystem>
#include <sstream>

#include "ancon/checkpoint.hpp"
#include "ancon/error.hpp"
#include "ancon/train.hpp"
#include "doctest.h"

using namespace ancon;
using namespace ancon::nmt;

namespace {

Seq2SeqConfig tiny_config() {
  Seq2SeqConfig cfg;
  cfg.embed_dim = 8;
  cfg.hidden_dim = 16;
  cfg.attn_window = 3;
  cfg.max_decode_len = 12;
  return cfg;
}

const std::vector<SentencePair> kPairs{
    {U"甲乙丙", U"丙乙甲"}, {U"丁戊", U"戊丁"}, {U"己甲", U"甲己"}, {U"乙丁戊", U"戊丁乙"}};

}  // namespace

TEST_CASE("shared vocabulary covers both sides") {
  const std::vector<SentencePair> pairs{{U"甲乙", U"乙丙"}, {U"甲", U"丁"}};
  const auto v = build_shared_vocab(pairs);
  CHECK(v.characters() == std::vector<char32_t>{U'丁', U'丙', U'乙', U'甲'});
  CHECK(build_shared_vocab(pairs, 2).characters() == std::vector<char32_t>{U'乙', U'甲'});
}

TEST_CASE("training is bit-reproducible") {
  TrainOptions opts;
  opts.batch_size = 2;
  opts.epochs = 3;
  opts.seed = 5;
  const auto a = train(kPairs, tiny_config(), opts);
  const auto b = train(kPairs, tiny_config(), opts);
  CHECK(a.log == b.log);
  CHECK(a.steps == 6);
  CHECK(checkpoint_to_json(a.model) == checkpoint_to_json(b.model));

  opts.seed = 6;
  const auto c = train(kPairs, tiny_config(), opts);
  CHECK_FALSE(checkpoint_to_json(c.model) == checkpoint_to_json(a.model));
}

TEST_CASE("a single pair is memorized") {
  const std::vector<SentencePair> one{{U"春眠不觉晓", U"春天睡觉不知道天亮"}};
  TrainOptions opts;
  opts.batch_size = 1;
  opts.epochs = 2000;
  opts.learning_rate = 1e-2;
  opts.stop_loss = 0.01;
  std::size_t callbacks = 0;
  const auto r = train(one, tiny_config(), opts, [&](const TrainLogEntry&) { ++callbacks; });
  CHECK(callbacks == r.log.size());
  CHECK(r.log.back().loss < 0.01);
  CHECK(r.log.back().epoch < 2000);
  CHECK(translate(r.model, U"春眠不觉晓") == U"春天睡觉不知道天亮");
  CHECK(exact_match(r.model, one) == 1.0);
}

TEST_CASE("unusable pairs are skipped") {
  std::vector<SentencePair> pairs = kPairs;
  pairs.push_back({U"", U"甲"});
  pairs.push_back({U"甲", U""});
  pairs.push_back({U"甲", CharSeq(13, U'乙')});
  TrainOptions opts;
  opts.epochs = 1;
  const auto r = train(pairs, tiny_config(), opts);
  CHECK(r.skipped == 3);

  const std::vector<SentencePair> none{{U"", U""}};
  CHECK_THROWS_AS(train(none, tiny_config(), opts), InvalidArgument);
}

TEST_CASE("max steps and continued training") {
  TrainOptions opts;
  opts.batch_size = 1;
  opts.epochs = 10;
  opts.max_steps = 7;
  const auto r = train(kPairs, tiny_config(), opts);
  CHECK(r.steps == 7);
  const auto more = train(kPairs, r.model, opts);
  CHECK(more.steps == 7);
  CHECK(more.model.vocab.characters() == r.model.vocab.characters());
}

TEST_CASE("checkpoint round trip") {
  TrainOptions opts;
  opts.epochs = 2;
  const auto r = train(kPairs, tiny_config(), opts);
  const auto text = checkpoint_to_json(r.model);
  const auto back = checkpoint_from_json(text);
  CHECK(checkpoint_to_json(back) == text);
  for (const auto& [name, field] : Seq2SeqParams::fields()) CHECK((back.params.*field).data == (r.model.params.*field).data);
  for (const auto& p : kPairs) CHECK(translate(back, p.src) == translate(r.model, p.src));

  const auto path = std::filesystem::temp_directory_path() / "ancon_test_checkpoint.json";
  save_checkpoint(path, r.model);
  CHECK(checkpoint_to_json(load_checkpoint(path)) == text);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(checkpoint_from_json("{\"format\": \"something-else\"}"), FormatError);
  CHECK_THROWS_AS(checkpoint_from_json(text.substr(0, text.size() / 2)), FormatError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.json"), IoError);
}

TEST_CASE("training log csv") {
  const std::vector<TrainLogEntry> log{{1, 4, 2.5}, {2, 8, 0.1}};
  std::ostringstream out;
  write_train_log(out, log);
  CHECK(out.str() == "epoch,step,loss\n1,4,2.5\n2,8,0.10000000000000001\n");
}

TEST_CASE("parallel translation keeps order and output") {
  TrainOptions opts;
  opts.epochs = 2;
  const auto r = train(kPairs, tiny_config(), opts);
  std::vector<CharSeq> sources;
  for (int k = 0; k < 5; ++k)
    for (const auto& p : kPairs) sources.push_back(p.src);
  const auto one = translate_all(r.model, sources, {}, 1);
  const auto four = translate_all(r.model, sources, {}, 4);
  CHECK(one == four);
  CHECK(one[0] == translate(r.model, sources[0]));
  CHECK(gradient_norm(Seq2SeqParams::zeros(r.model.config, r.model.vocab.size())) == 0.0);
}
