#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ancon/align.hpp"
#include "ancon/align_eval.hpp"
#include "ancon/bleu.hpp"
#include "ancon/checkpoint.hpp"
#include "ancon/corpus.hpp"
#include "ancon/error.hpp"
#include "ancon/loglinear.hpp"
#include "ancon/simd.hpp"
#include "ancon/train.hpp"
#include "ancon/utf8.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string simd = "auto";
  std::string manifest;
};

// ---------------------------------------------------------------------------
// Plain-text and small helpers

std::vector<ancon::CharSeq> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ancon::IoError("cannot open input file: " + path.string());
  std::vector<ancon::CharSeq> lines;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      lines.push_back(ancon::utf8::decode(line));
    } catch (const ancon::FormatError& e) {
      throw ancon::FormatError(path.string() + ": line " + std::to_string(no) + ": " + e.what());
    }
  }
  return lines;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ancon::IoError("cannot open output file: " + path.string());
  return out;
}

void write_lines(const fs::path& path, std::span<const ancon::CharSeq> lines) {
  auto out = open_out(path);
  for (const auto& l : lines) out << ancon::utf8::encode(l) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::vector<ancon::SentencePair> oriented(std::vector<ancon::SentencePair> pairs, const std::string& direction) {
  if (direction == "c2a")
    for (auto& p : pairs) std::swap(p.src, p.tgt);
  return pairs;
}

std::string timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json option_snapshot(const CLI::App& app) {
  json cfg = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config" || name == "version") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_type_size() == 0 || opt->get_expected_max() == 0) {
        cfg[name] = true;
      } else if (res.size() == 1) {
        cfg[name] = res.front();
      } else {
        cfg[name] = res;
      }
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    } else if (opt->get_expected_max() == 0) {
      cfg[name] = false;
    }
  }
  return cfg;
}

// One manifest per run: next to the primary output, or in the working
// directory for commands that only print.
void write_manifest(const CLI::App& root, const CLI::App& cmd, const Globals& g, const std::string& primary_out,
                    const std::map<std::string, std::string>& inputs,
                    const std::map<std::string, std::string>& outputs) {
  json m;
  m["command"] = cmd.get_name();
  m["config"] = option_snapshot(cmd);
  m["global"] = option_snapshot(root);
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["seed"] = g.seed;
  m["version"] = kVersion;
  m["simd"] = std::string(ancon::simd::name(ancon::simd::active_backend()));
  m["timestamp"] = timestamp();
  fs::path path = !g.manifest.empty()      ? fs::path(g.manifest)
                  : !primary_out.empty()   ? fs::path(primary_out + ".manifest.json")
                                           : fs::path(cmd.get_name() + ".manifest.json");
  write_text(path, m.dump(2) + "\n");
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ancon::InvalidArgument(std::string("bad number for ") + what + ": '" + s + "'");
  }
}

json score_json(const ancon::AlignScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
          {"correct", s.correct},     {"predicted", s.predicted}, {"gold", s.gold}};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

struct AlignArgs {
  std::string in, out, audit, delimiters;
  std::size_t max_group = 5;
  bool allow_null = false;
  std::string model;
};

struct SplitArgs {
  std::string in, out_dir, ratios = "0.8,0.1,0.1";
};

struct StatsArgs {
  std::string train, eval, direction = "a2c";
};

struct TrainLoglinearArgs {
  std::string passages, gold, out;
  ancon::LogLinearTrainConfig cfg;
};

struct TrainArgs {
  std::string in, out, log, direction = "a2c", init;
  std::size_t limit = 0;
  ancon::nmt::Seq2SeqConfig model;
  ancon::nmt::TrainOptions opts;
  bool no_copy = false, global_attention = false, separate_embeddings = false;
};

struct TranslateArgs {
  std::string checkpoint, in, out, ref_out, format = "text", direction = "a2c", mode = "greedy";
  std::size_t beam = 4;
};

struct BleuArgs {
  std::string hyp, ref, tokens = "char", report;
  bool smooth = false, signature = false;
};

struct SynthArgs {
  std::size_t passages = 100, min_sentences = 8, max_sentences = 16;
  ancon::SynthNoise noise{0.2, 0.2, 0.6, 0.0};
  std::string out_passages, out_gold, out_pairs;
};

struct BenchArgs {
  std::size_t passages = 200, max_group = 5;
  std::string seeds = "1,2,3", overlaps = "0.4,0.6,0.8", out;
  double merge_rate = 0.2, split_rate = 0.2;
};

ancon::AlignConfig align_config(const AlignArgs& a) {
  ancon::AlignConfig cfg;
  cfg.max_group = a.max_group;
  cfg.allow_null_blocks = a.allow_null;
  return cfg;
}

std::u32string delimiters_of(const AlignArgs& a) {
  return a.delimiters.empty() ? std::u32string(ancon::kDefaultDelimiters) : ancon::utf8::decode(a.delimiters);
}

void finish_alignment(const ancon::CorpusAlignment& ca, const AlignArgs& a) {
  for (const auto& f : ca.failures) std::cerr << "warning: skipped passage " << f << '\n';
  ancon::save_sentence_pairs(a.out, ca.pairs);
  if (!a.audit.empty()) ancon::save_alignments(a.audit, ca.passages);
  std::cout << "aligned " << ca.passages.size() << " passages into " << ca.pairs.size() << " sentence pairs\n";
}

int run_align(const AlignArgs& a, const Globals& g) {
  const auto passages = ancon::load_passage_pairs(a.in, delimiters_of(a));
  finish_alignment(ancon::align_corpus(passages, align_config(a), g.threads), a);
  return 0;
}

int run_align_loglinear(const AlignArgs& a, const Globals& g) {
  const auto model = ancon::load_loglinear(a.model);
  const auto passages = ancon::load_passage_pairs(a.in, delimiters_of(a));
  const auto cfg = align_config(a);
  const ancon::PassageAligner aligner = [&](const ancon::PassagePair& p) { return ancon::align_loglinear(p, model, cfg); };
  finish_alignment(ancon::align_corpus(passages, aligner, g.threads), a);
  return 0;
}

int run_eval_align(const std::string& pred_path, const std::string& gold_path) {
  const auto pred = ancon::load_alignments(pred_path);
  const auto gold = ancon::load_alignments(gold_path);
  std::map<std::string, const ancon::AlignmentResult*> by_id;
  for (const auto& p : pred) by_id[p.id] = &p.result;
  std::vector<ancon::AlignScore> scores;
  std::size_t missing = 0;
  for (const auto& gp : gold) {
    auto it = by_id.find(gp.id);
    if (it == by_id.end()) {
      ++missing;
      scores.push_back(ancon::score_from_counts(0, 0, gp.result.blocks.size()));
    } else {
      scores.push_back(ancon::prf1(*it->second, gp.result));
    }
  }
  if (scores.empty()) throw ancon::InvalidArgument("gold file holds no passages");
  json j;
  j["passages"] = scores.size();
  j["missing_predictions"] = missing;
  j["micro"] = score_json(ancon::micro_average(scores));
  j["mean_f1"] = ancon::mean_f1(scores);
  std::cout << j.dump() << '\n';
  return 0;
}

int run_split(const SplitArgs& a, const Globals& g) {
  const auto parts = split_csv(a.ratios);
  if (parts.size() != 3) throw ancon::InvalidArgument("--ratios needs three comma-separated values");
  const ancon::SplitRatios r{parse_double(parts[0], "--ratios"), parse_double(parts[1], "--ratios"),
                             parse_double(parts[2], "--ratios")};
  const auto pairs = ancon::load_sentence_pairs(a.in);
  const auto split = ancon::split_dataset(pairs, r, g.seed);
  fs::create_directories(a.out_dir);
  ancon::save_sentence_pairs(fs::path(a.out_dir) / "train.jsonl", split.train);
  ancon::save_sentence_pairs(fs::path(a.out_dir) / "dev.jsonl", split.dev);
  ancon::save_sentence_pairs(fs::path(a.out_dir) / "test.jsonl", split.test);
  std::cout << "train " << split.train.size() << " dev " << split.dev.size() << " test " << split.test.size() << '\n';
  return 0;
}

int run_stats(const StatsArgs& a) {
  const auto train = oriented(ancon::load_sentence_pairs(a.train), a.direction);
  const auto eval = oriented(ancon::load_sentence_pairs(a.eval), a.direction);
  auto side = [](const std::vector<ancon::SentencePair>& v, bool src) {
    std::vector<ancon::CharSeq> out;
    for (const auto& p : v) out.push_back(src ? p.src : p.tgt);
    return out;
  };
  json j;
  j["train_pairs"] = train.size();
  j["eval_pairs"] = eval.size();
  for (bool src : {true, false}) {
    const auto s = ancon::vocab_stats(side(train, src), side(eval, src));
    j[src ? "source" : "target"] = {{"vocab_size", s.vocab_size},
                                    {"eval_tokens", s.eval_tokens},
                                    {"oov_tokens", s.oov_tokens},
                                    {"oov_rate", s.oov_rate}};
  }
  const auto shared = ancon::nmt::build_shared_vocab(train);
  j["shared_vocab_size"] = shared.characters().size();
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_train_loglinear(TrainLoglinearArgs a, const Globals& g) {
  const auto passages = ancon::load_passage_pairs(a.passages);
  const auto gold = ancon::load_alignments(a.gold);
  std::map<std::string, const ancon::AlignmentResult*> by_id;
  for (const auto& p : gold) by_id[p.id] = &p.result;
  std::vector<ancon::GoldPassage> data;
  for (const auto& p : passages) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) continue;
    const std::string err = ancon::check_alignment(*it->second, p.src.size(), p.tgt.size(), ancon::AlignConfig{
        std::max<std::size_t>(p.src.size(), p.tgt.size()), true, ancon::TieBreak::finest, 5000});
    if (!err.empty()) throw ancon::FormatError("gold alignment for '" + p.id + "': " + err);
    data.push_back({p, *it->second});
  }
  if (data.empty()) throw ancon::InvalidArgument("no passage has a gold alignment");
  a.cfg.seed = g.seed;
  const auto model = ancon::train_loglinear(data, a.cfg);
  ancon::save_loglinear(a.out, model);
  std::cout << "trained on " << data.size() << " passages\n";
  return 0;
}

int run_train(TrainArgs a, const Globals& g) {
  if (a.direction != "a2c" && a.direction != "c2a") throw ancon::InvalidArgument("--direction must be a2c or c2a");
  auto pairs = oriented(ancon::load_sentence_pairs(a.in), a.direction);
  if (a.limit && pairs.size() > a.limit) pairs.resize(a.limit);
  a.model.use_copy = !a.no_copy;
  a.model.use_local_attention = !a.global_attention;
  a.model.share_embedding = !a.separate_embeddings;
  a.opts.seed = g.seed;

  auto on_epoch = [](const ancon::nmt::TrainLogEntry& e) {
    std::cerr << "epoch " << e.epoch << " step " << e.step << " loss " << fixed(e.loss, 6) << '\n';
  };
  ancon::nmt::TrainResult result = a.init.empty()
                                       ? ancon::nmt::train(pairs, a.model, a.opts, on_epoch)
                                       : ancon::nmt::train(pairs, ancon::nmt::load_checkpoint(a.init), a.opts, on_epoch);
  ancon::nmt::save_checkpoint(a.out, result.model);
  if (!a.log.empty()) ancon::nmt::save_train_log(a.log, result.log);
  if (result.skipped) std::cerr << "warning: skipped " << result.skipped << " pairs (empty or too long)\n";
  std::cout << "trained " << result.steps << " steps on " << pairs.size() - result.skipped << " pairs\n";
  return 0;
}

int run_translate(const TranslateArgs& a, const Globals& g) {
  const auto model = ancon::nmt::load_checkpoint(a.checkpoint);
  std::vector<ancon::CharSeq> sources, refs;
  if (a.format == "jsonl") {
    for (const auto& p : oriented(ancon::load_sentence_pairs(a.in), a.direction)) {
      sources.push_back(p.src);
      refs.push_back(p.tgt);
    }
  } else if (a.format == "text") {
    sources = read_lines(a.in);
  } else {
    throw ancon::InvalidArgument("--format must be text or jsonl");
  }
  ancon::nmt::DecodeMode mode;
  if (a.mode == "beam") {
    mode.kind = ancon::nmt::DecodeMode::beam;
    mode.beam_size = a.beam;
  } else if (a.mode != "greedy") {
    throw ancon::InvalidArgument("--mode must be greedy or beam");
  }
  const auto hyps = ancon::nmt::translate_all(model, sources, mode, g.threads);
  write_lines(a.out, hyps);
  if (!a.ref_out.empty()) {
    if (a.format != "jsonl") throw ancon::InvalidArgument("--ref-out needs --format jsonl");
    write_lines(a.ref_out, refs);
  }
  std::cout << "translated " << hyps.size() << " sentences\n";
  return 0;
}

int run_eval_bleu(const BleuArgs& a) {
  ancon::BleuConfig cfg;
  if (a.tokens == "space") {
    cfg.tokens = ancon::BleuTokens::whitespace;
  } else if (a.tokens != "char") {
    throw ancon::InvalidArgument("--tokens must be char or space");
  }
  cfg.smooth = a.smooth;
  const auto hyps = read_lines(a.hyp);
  const auto refs = read_lines(a.ref);
  const auto report = ancon::bleu_corpus(hyps, refs, cfg);
  std::cout << fixed(report.bleu, 2) << '\n';
  if (a.signature) std::cout << ancon::bleu_signature(cfg) << '\n';
  if (!a.report.empty()) write_text(a.report, ancon::bleu_report_json(report, cfg) + "\n");
  return 0;
}

int run_synth(const SynthArgs& a, const Globals& g) {
  ancon::SynthLayout layout;
  layout.min_sentences = a.min_sentences;
  layout.max_sentences = a.max_sentences;
  const auto corpus = ancon::synth_corpus(a.passages, a.noise, g.seed, layout);
  std::vector<ancon::PassagePair> passages;
  std::vector<ancon::PassageAlignment> gold;
  std::vector<ancon::SentencePair> pairs;
  for (const auto& gp : corpus) {
    passages.push_back(gp.pair);
    gold.push_back({gp.pair.id, gp.gold});
    const auto bp = ancon::block_pairs(gp.pair, gp.gold);
    pairs.insert(pairs.end(), bp.begin(), bp.end());
  }
  ancon::save_passage_pairs(a.out_passages, passages);
  if (!a.out_gold.empty()) ancon::save_alignments(a.out_gold, gold);
  if (!a.out_pairs.empty()) ancon::save_sentence_pairs(a.out_pairs, pairs);
  std::cout << "wrote " << passages.size() << " passages\n";
  return 0;
}

int run_bench(const BenchArgs& a) {
  std::vector<double> overlaps;
  for (const auto& s : split_csv(a.overlaps)) overlaps.push_back(parse_double(s, "--overlaps"));
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_csv(a.seeds)) seeds.push_back(static_cast<std::uint64_t>(parse_double(s, "--seeds")));
  ancon::AlignConfig cfg;
  cfg.max_group = a.max_group;
  const auto rows =
      ancon::benchmark_alignment(overlaps, seeds, a.passages, ancon::SynthNoise{a.merge_rate, a.split_rate, 0.6, 0.0}, cfg);
  if (a.out.empty()) {
    ancon::write_benchmark_csv(std::cout, rows);
  } else {
    auto out = open_out(a.out);
    ancon::write_benchmark_csv(out, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence alignment and character-level translation for ancient and contemporary Chinese", "ancon"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key=value configuration file; keys are option names, prefixed by the command "
                                 "name and a dot for command options (train.epochs=5)");
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for alignment and decoding")->capture_default_str();
  app.add_option("--simd", g.simd, "Kernel backend: auto, scalar, avx2 or neon")->capture_default_str();
  app.add_option("--manifest", g.manifest, "Where to write the run manifest (default: next to the main output)");

  AlignArgs align;
  auto* c_align = app.add_subcommand("align", "Align passage pairs into sentence pairs with the LCS-sum program");
  c_align->add_option("--in", align.in, "Passage JSONL input")->required();
  c_align->add_option("--out", align.out, "Sentence-pair JSONL output")->required();
  c_align->add_option("--audit", align.audit, "Per-passage block audit JSONL");
  c_align->add_option("--max-group", align.max_group, "Most sentences on either side of a block")->capture_default_str();
  c_align->add_flag("--allow-null", align.allow_null, "Allow 1:0 and 0:1 blocks");
  c_align->add_option("--delimiters", align.delimiters, "Clause-final characters used to split string sides");

  AlignArgs align_ll;
  auto* c_align_ll = app.add_subcommand("align-loglinear", "Align passage pairs with a trained log-linear scorer");
  c_align_ll->add_option("--model", align_ll.model, "Model from train-loglinear")->required();
  c_align_ll->add_option("--in", align_ll.in, "Passage JSONL input")->required();
  c_align_ll->add_option("--out", align_ll.out, "Sentence-pair JSONL output")->required();
  c_align_ll->add_option("--audit", align_ll.audit, "Per-passage block audit JSONL");
  c_align_ll->add_option("--max-group", align_ll.max_group, "Most sentences on either side of a block")->capture_default_str();
  c_align_ll->add_flag("--allow-null", align_ll.allow_null, "Allow 1:0 and 0:1 blocks");
  c_align_ll->add_option("--delimiters", align_ll.delimiters, "Clause-final characters used to split string sides");

  std::string pred_path, gold_path;
  auto* c_eval_align = app.add_subcommand("eval-align", "Score predicted block audits against gold audits");
  c_eval_align->add_option("--pred", pred_path, "Predicted audit JSONL")->required();
  c_eval_align->add_option("--gold", gold_path, "Gold audit JSONL")->required();

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Shuffle sentence pairs into train/dev/test files");
  c_split->add_option("--in", split.in, "Sentence-pair JSONL input")->required();
  c_split->add_option("--out-dir", split.out_dir, "Directory for train.jsonl, dev.jsonl, test.jsonl")->required();
  c_split->add_option("--ratios", split.ratios, "train,dev,test fractions")->capture_default_str();

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Vocabulary size and OOV rate of each side");
  c_stats->add_option("--train", stats.train, "Training sentence pairs")->required();
  c_stats->add_option("--eval", stats.eval, "Evaluation sentence pairs")->required();
  c_stats->add_option("--direction", stats.direction, "a2c or c2a")->capture_default_str();

  TrainLoglinearArgs tll;
  auto* c_tll = app.add_subcommand("train-loglinear", "Fit the log-linear block scorer on gold alignments");
  c_tll->add_option("--passages", tll.passages, "Passage JSONL")->required();
  c_tll->add_option("--gold", tll.gold, "Gold audit JSONL")->required();
  c_tll->add_option("--out", tll.out, "Model JSON output")->required();
  c_tll->add_option("--max-group", tll.cfg.align.max_group, "Largest block side")->capture_default_str();
  c_tll->add_option("--negatives", tll.cfg.negatives_per_block, "Negative shapes per gold block")->capture_default_str();
  c_tll->add_option("--epochs", tll.cfg.epochs, "Gradient ascent epochs")->capture_default_str();
  c_tll->add_option("--lr", tll.cfg.learning_rate, "Learning rate")->capture_default_str();
  c_tll->add_option("--l2", tll.cfg.l2, "L2 penalty")->capture_default_str();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the character-level translator");
  c_train->add_option("--in", tr.in, "Training sentence pairs")->required();
  c_train->add_option("--out", tr.out, "Checkpoint JSON output")->required();
  c_train->add_option("--log", tr.log, "Training log CSV (epoch,step,loss)");
  c_train->add_option("--init", tr.init, "Continue from this checkpoint");
  c_train->add_option("--direction", tr.direction, "a2c trains src->tgt, c2a the reverse")->capture_default_str();
  c_train->add_option("--limit", tr.limit, "Use only the first N pairs (0 = all)")->capture_default_str();
  c_train->add_option("--embed", tr.model.embed_dim, "Embedding width")->capture_default_str();
  c_train->add_option("--hidden", tr.model.hidden_dim, "Recurrent state width")->capture_default_str();
  c_train->add_option("--window", tr.model.attn_window, "Local attention half-width")->capture_default_str();
  c_train->add_option("--max-len", tr.model.max_decode_len, "Longest target / decode length")->capture_default_str();
  c_train->add_flag("--no-copy", tr.no_copy, "Disable the copy mechanism");
  c_train->add_flag("--global-attention", tr.global_attention, "Attend over the whole source");
  c_train->add_flag("--separate-embeddings", tr.separate_embeddings, "Use distinct source and target embeddings");
  c_train->add_option("--lr", tr.opts.learning_rate, "Adam learning rate")->capture_default_str();
  c_train->add_option("--batch", tr.opts.batch_size, "Pairs per step")->capture_default_str();
  c_train->add_option("--epochs", tr.opts.epochs, "Passes over the data")->capture_default_str();
  c_train->add_option("--max-steps", tr.opts.max_steps, "Stop after this many steps (0 = no limit)")->capture_default_str();
  c_train->add_option("--clip", tr.opts.clip, "Global gradient norm clip (0 = off)")->capture_default_str();
  c_train->add_option("--init-scale", tr.opts.init_scale, "Uniform init half-range")->capture_default_str();
  c_train->add_option("--stop-loss", tr.opts.stop_loss, "Stop once an epoch's mean loss is below this")->capture_default_str();
  c_train->add_option("--min-count", tr.opts.vocab_min_count, "Minimum character count for the vocabulary")
      ->capture_default_str();

  TranslateArgs tl;
  auto* c_translate = app.add_subcommand("translate", "Translate sentences with a checkpoint");
  c_translate->add_option("--checkpoint", tl.checkpoint, "Checkpoint from train")->required();
  c_translate->add_option("--in", tl.in, "Input sentences")->required();
  c_translate->add_option("--out", tl.out, "Hypotheses, one per line")->required();
  c_translate->add_option("--format", tl.format, "text (one sentence per line) or jsonl (sentence pairs)")
      ->capture_default_str();
  c_translate->add_option("--direction", tl.direction, "Side of jsonl pairs used as source")->capture_default_str();
  c_translate->add_option("--ref-out", tl.ref_out, "With jsonl input, also write the references here");
  c_translate->add_option("--mode", tl.mode, "greedy or beam")->capture_default_str();
  c_translate->add_option("--beam", tl.beam, "Beam size for --mode beam")->capture_default_str();

  BleuArgs bl;
  auto* c_bleu = app.add_subcommand("eval-bleu", "Corpus BLEU of hypotheses against references");
  c_bleu->add_option("--hyp", bl.hyp, "Hypotheses, one per line")->required();
  c_bleu->add_option("--ref", bl.ref, "References, one per line")->required();
  c_bleu->add_option("--tokens", bl.tokens, "char or space")->capture_default_str();
  c_bleu->add_flag("--smooth", bl.smooth, "Add-one smoothing for n >= 2");
  c_bleu->add_flag("--signature", bl.signature, "Also print the scoring signature");
  c_bleu->add_option("--report", bl.report, "Write n-gram counts and precisions as JSON");

  SynthArgs sy;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic passage corpus with gold alignments");
  c_synth->add_option("--passages", sy.passages, "Number of passages")->capture_default_str();
  c_synth->add_option("--min-sentences", sy.min_sentences, "Fewest source sentences per passage")->capture_default_str();
  c_synth->add_option("--max-sentences", sy.max_sentences, "Most source sentences per passage")->capture_default_str();
  c_synth->add_option("--overlap", sy.noise.overlap, "Chance a content character survives translation")
      ->capture_default_str();
  c_synth->add_option("--merge-rate", sy.noise.merge_rate, "Rate of 2:1 merges")->capture_default_str();
  c_synth->add_option("--split-rate", sy.noise.split_rate, "Rate of 1:2 splits")->capture_default_str();
  c_synth->add_option("--punct-flip", sy.noise.punct_flip_rate, "Rate of changed sentence-final marks")
      ->capture_default_str();
  c_synth->add_option("--out-passages", sy.out_passages, "Passage JSONL output")->required();
  c_synth->add_option("--out-gold", sy.out_gold, "Gold audit JSONL output");
  c_synth->add_option("--out-pairs", sy.out_pairs, "Gold sentence pairs JSONL output");

  BenchArgs be;
  auto* c_bench = app.add_subcommand("bench-align", "Synthetic alignment benchmark over overlaps and seeds");
  c_bench->add_option("--passages", be.passages, "Passages per run")->capture_default_str();
  c_bench->add_option("--seeds", be.seeds, "Comma-separated seeds")->capture_default_str();
  c_bench->add_option("--overlaps", be.overlaps, "Comma-separated overlap levels")->capture_default_str();
  c_bench->add_option("--merge-rate", be.merge_rate, "Rate of 2:1 merges")->capture_default_str();
  c_bench->add_option("--split-rate", be.split_rate, "Rate of 1:2 splits")->capture_default_str();
  c_bench->add_option("--max-group", be.max_group, "Largest block side")->capture_default_str();
  c_bench->add_option("--out", be.out, "CSV output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (g.simd != "auto") ancon::simd::select(ancon::simd::parse_backend(g.simd));
    const CLI::App* cmd = app.get_subcommands().front();
    int rc = 0;
    std::map<std::string, std::string> in, out;
    std::string primary;
    if (cmd == c_align) {
      rc = run_align(align, g);
      in = {{"passages", align.in}};
      out = {{"pairs", align.out}, {"audit", align.audit}};
      primary = align.out;
    } else if (cmd == c_align_ll) {
      rc = run_align_loglinear(align_ll, g);
      in = {{"passages", align_ll.in}, {"model", align_ll.model}};
      out = {{"pairs", align_ll.out}, {"audit", align_ll.audit}};
      primary = align_ll.out;
    } else if (cmd == c_eval_align) {
      rc = run_eval_align(pred_path, gold_path);
      in = {{"pred", pred_path}, {"gold", gold_path}};
    } else if (cmd == c_split) {
      rc = run_split(split, g);
      in = {{"pairs", split.in}};
      out = {{"dir", split.out_dir}};
      primary = (fs::path(split.out_dir) / "split").string();
    } else if (cmd == c_stats) {
      rc = run_stats(stats);
      in = {{"train", stats.train}, {"eval", stats.eval}};
    } else if (cmd == c_tll) {
      rc = run_train_loglinear(tll, g);
      in = {{"passages", tll.passages}, {"gold", tll.gold}};
      out = {{"model", tll.out}};
      primary = tll.out;
    } else if (cmd == c_train) {
      rc = run_train(tr, g);
      in = {{"pairs", tr.in}, {"init", tr.init}};
      out = {{"checkpoint", tr.out}, {"log", tr.log}};
      primary = tr.out;
    } else if (cmd == c_translate) {
      rc = run_translate(tl, g);
      in = {{"checkpoint", tl.checkpoint}, {"sources", tl.in}};
      out = {{"hypotheses", tl.out}, {"references", tl.ref_out}};
      primary = tl.out;
    } else if (cmd == c_bleu) {
      rc = run_eval_bleu(bl);
      in = {{"hyp", bl.hyp}, {"ref", bl.ref}};
      out = {{"report", bl.report}};
      primary = bl.report;
    } else if (cmd == c_synth) {
      rc = run_synth(sy, g);
      out = {{"passages", sy.out_passages}, {"gold", sy.out_gold}, {"pairs", sy.out_pairs}};
      primary = sy.out_passages;
    } else if (cmd == c_bench) {
      rc = run_bench(be);
      out = {{"csv", be.out}};
      primary = be.out;
    }
    write_manifest(app, *cmd, g, primary, in, out);
    return rc;
  } catch (const ancon::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ancon::ErrorKind::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
