#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ancon/align.hpp"
#include "ancon/corpus.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace ancon;
namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::current_path() / "ancon_cli_test";

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = "cd '" + kDir.string() + "' && '" ANCON_CLI_PATH "' " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (const auto n = std::fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

struct Workspace {
  Workspace() {
    fs::remove_all(kDir);
    fs::create_directories(kDir);
  }
};

}  // namespace

TEST_CASE_FIXTURE(Workspace, "exit codes") {
  CHECK(run("--version").code == 0);
  CHECK(run("align --in missing.jsonl --out x.jsonl").code == 2);
  CHECK(run("align --bogus-flag").code == 1);
  CHECK(run("no-such-command").code == 1);
  {
    std::ofstream(kDir / "bad.jsonl") << "{\"src\": [\"a\"]\n";
  }
  CHECK(run("align --in bad.jsonl --out x.jsonl").code == 3);
  {
    std::ofstream(kDir / "pairs.jsonl") << "{\"src\": \"甲\", \"tgt\": \"乙\"}\n";
  }
  CHECK(run("split --in pairs.jsonl --out-dir s --ratios 0.5,0.2,0.2").code == 1);
}

TEST_CASE_FIXTURE(Workspace, "identical hypothesis and reference score 100") {
  {
    std::ofstream f(kDir / "ref.txt");
    f << "我本来是平民\n亲自在南阳耕田\n";
  }
  const auto r = run("eval-bleu --hyp ref.txt --ref ref.txt");
  CHECK(r.code == 0);
  CHECK(r.out.starts_with("100.00"));
}

TEST_CASE_FIXTURE(Workspace, "synthetic corpus through alignment, split and stats") {
  REQUIRE(run("--seed 3 synth --passages 12 --out-passages p.jsonl --out-gold gold.jsonl --out-pairs pairs.jsonl").code == 0);
  CHECK(count_lines(kDir / "p.jsonl") == 12);

  REQUIRE(run("align --in p.jsonl --out aligned.jsonl --audit audit.jsonl --max-group 3").code == 0);
  const auto audit = load_alignments(kDir / "audit.jsonl");
  std::size_t blocks = 0;
  for (const auto& a : audit) blocks += a.result.blocks.size();
  CHECK(count_lines(kDir / "aligned.jsonl") == blocks);
  CHECK(fs::exists(kDir / "aligned.jsonl.manifest.json"));

  const auto manifest = nlohmann::json::parse(slurp(kDir / "aligned.jsonl.manifest.json"));
  CHECK(manifest["command"] == "align");
  CHECK(manifest.contains("seed"));
  CHECK(manifest.contains("config"));

  const auto eval = run("eval-align --pred audit.jsonl --gold gold.jsonl");
  REQUIRE(eval.code == 0);
  const auto report = nlohmann::json::parse(eval.out);
  CHECK(report["passages"] == 12);
  CHECK(report["micro"]["f1"].get<double>() > 0.8);

  // Exactly ten pairs so the 8/1/1 split is exact.
  auto pairs = load_sentence_pairs(kDir / "pairs.jsonl");
  REQUIRE(pairs.size() >= 10);
  pairs.resize(10);
  save_sentence_pairs(kDir / "ten.jsonl", pairs);
  REQUIRE(run("split --in ten.jsonl --out-dir parts --ratios 0.8,0.1,0.1").code == 0);
  CHECK(count_lines(kDir / "parts/train.jsonl") == 8);
  CHECK(count_lines(kDir / "parts/dev.jsonl") == 1);
  CHECK(count_lines(kDir / "parts/test.jsonl") == 1);

  const auto stats = run("stats --train parts/train.jsonl --eval parts/test.jsonl");
  CHECK(stats.code == 0);
  CHECK(stats.out.find("oov") != std::string::npos);
}

TEST_CASE_FIXTURE(Workspace, "train and translate end to end") {
  std::vector<SentencePair> pairs{{U"甲乙丙", U"丙乙甲"}, {U"丁戊", U"戊丁"}};
  save_sentence_pairs(kDir / "train.jsonl", pairs);
  REQUIRE(run("train --in train.jsonl --out model.json --log log.csv --embed 4 --hidden 8 --epochs 3 --batch 1").code ==
          0);
  CHECK(count_lines(kDir / "log.csv") == 4);
  CHECK(slurp(kDir / "log.csv").starts_with("epoch,step,loss\n"));

  REQUIRE(run("translate --checkpoint model.json --in train.jsonl --format jsonl --out hyp.txt --ref-out ref.txt").code ==
          0);
  CHECK(count_lines(kDir / "ref.txt") == 2);
  std::ifstream hyp(kDir / "hyp.txt");
  std::size_t lines = 0;
  for (std::string line; std::getline(hyp, line);) ++lines;
  CHECK(lines == 2);

  CHECK(run("translate --checkpoint missing.json --in train.jsonl --format jsonl --out h.txt").code == 2);
  {
    std::ofstream(kDir / "junk.json") << "{}";
  }
  CHECK(run("translate --checkpoint junk.json --in train.jsonl --format jsonl --out h.txt").code == 3);
}
