#include "ancon/align.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>

#include "ancon/error.hpp"
#include "ancon/lcs.hpp"
#include "json.hpp"

namespace ancon {

namespace {

struct Shape {
  std::size_t a;
  std::size_t b;
};

// Ordered by (a, b) so that, from a fixed start, earlier shapes end at
// lexicographically earlier boundaries.
std::vector<Shape> allowed_shapes(const AlignConfig& cfg) {
  if (cfg.max_group < 1) throw InvalidArgument("max_group must be at least 1");
  std::vector<Shape> shapes;
  if (cfg.allow_null_blocks) shapes.push_back({0, 1});
  for (std::size_t a = 1; a <= cfg.max_group; ++a) {
    if (a == 1 && cfg.allow_null_blocks) shapes.push_back({1, 0});
    for (std::size_t b = 1; b <= cfg.max_group; ++b) shapes.push_back({a, b});
  }
  return shapes;
}

struct Cell {
  double score = -std::numeric_limits<double>::infinity();
  std::size_t blocks = 0;
  bool reachable = false;
};

bool better(double score, std::size_t blocks, const Cell& incumbent, TieBreak policy) {
  if (!incumbent.reachable) return true;
  if (score != incumbent.score) return score > incumbent.score;
  return policy == TieBreak::finest && blocks > incumbent.blocks;
}

bool same(double score, std::size_t blocks, const Cell& target, TieBreak policy) {
  return score == target.score && (policy != TieBreak::finest || blocks == target.blocks);
}

AlignmentBlock make_block(std::size_t i, std::size_t j, Shape s, double score) {
  return AlignmentBlock{IndexRange{i + 1, i + s.a}, IndexRange{j + 1, j + s.b}, score};
}

double shape_score(const BlockScorer& score, std::size_t i, std::size_t j, Shape s) {
  if (s.a == 0 || s.b == 0) return 0.0;
  return score(i + 1, i + s.a, j + 1, j + s.b);
}

[[noreturn]] void no_tiling(std::size_t n, std::size_t m) {
  throw InvalidArgument("no valid tiling of " + std::to_string(n) + " x " + std::to_string(m) +
                        " sentences; raise max_group or allow null blocks");
}

}  // namespace

AlignmentResult solve_tiling(std::size_t n, std::size_t m, const AlignConfig& cfg, const BlockScorer& score) {
  const auto shapes = allowed_shapes(cfg);
  const std::size_t width = m + 1;
  // best[i][j]: optimal completion from boundary (i, j) to (n, m).
  std::vector<Cell> best((n + 1) * width);
  best[n * width + m] = Cell{0.0, 0, true};

  for (std::size_t ii = n + 1; ii-- > 0;) {
    for (std::size_t jj = m + 1; jj-- > 0;) {
      if (ii == n && jj == m) continue;
      Cell& cell = best[ii * width + jj];
      for (const Shape s : shapes) {
        if (ii + s.a > n || jj + s.b > m) continue;
        const Cell& next = best[(ii + s.a) * width + jj + s.b];
        if (!next.reachable) continue;
        const double total = shape_score(score, ii, jj, s) + next.score;
        const std::size_t blocks = next.blocks + 1;
        if (better(total, blocks, cell, cfg.tie_break)) cell = Cell{total, blocks, true};
      }
    }
  }
  if (!best[0].reachable) no_tiling(n, m);

  AlignmentResult result;
  result.total_score = best[0].score;
  std::size_t i = 0, j = 0;
  while (i != n || j != m) {
    const Cell& here = best[i * width + j];
    bool advanced = false;
    for (const Shape s : shapes) {
      if (i + s.a > n || j + s.b > m) continue;
      const Cell& next = best[(i + s.a) * width + j + s.b];
      if (!next.reachable) continue;
      const double block = shape_score(score, i, j, s);
      if (same(block + next.score, next.blocks + 1, here, cfg.tie_break)) {
        result.blocks.push_back(make_block(i, j, s, block));
        i += s.a;
        j += s.b;
        advanced = true;
        break;
      }
    }
    if (!advanced) throw NumericError("alignment backtrack failed; block scorer is not deterministic");
  }
  return result;
}

AlignmentResult enumerate_tilings(std::size_t n, std::size_t m, const AlignConfig& cfg, const BlockScorer& score,
                                  std::size_t limit) {
  if (n > limit || m > limit)
    throw InvalidArgument("brute-force alignment limited to " + std::to_string(limit) + " sentences per side");
  const auto shapes = allowed_shapes(cfg);

  struct Step {
    std::size_t i, j;
    Shape s;
    double score;
  };
  std::vector<Step> path;
  std::optional<AlignmentResult> best;
  std::size_t best_blocks = 0;

  // Is `path` lexicographically earlier than `incumbent` by block end points?
  auto earlier = [](const std::vector<Step>& p, const AlignmentResult& incumbent) {
    for (std::size_t k = 0; k < std::min(p.size(), incumbent.blocks.size()); ++k) {
      const std::pair<std::size_t, std::size_t> a{p[k].i + p[k].s.a, p[k].j + p[k].s.b};
      const std::pair<std::size_t, std::size_t> b{incumbent.blocks[k].src.last, incumbent.blocks[k].tgt.last};
      if (a != b) return a < b;
    }
    return false;
  };

  auto visit = [&](auto&& self, std::size_t i, std::size_t j) -> void {
    if (i == n && j == m) {
      // Summed back to front, matching the suffix order of solve_tiling.
      double total = 0.0;
      for (std::size_t k = path.size(); k-- > 0;) total = path[k].score + total;
      const std::size_t blocks = path.size();
      bool take = !best.has_value();
      if (!take) {
        if (total != best->total_score) {
          take = total > best->total_score;
        } else if (cfg.tie_break == TieBreak::finest && blocks != best_blocks) {
          take = blocks > best_blocks;
        } else {
          take = earlier(path, *best);
        }
      }
      if (take) {
        AlignmentResult r;
        r.total_score = total;
        for (const Step& st : path) r.blocks.push_back(make_block(st.i, st.j, st.s, st.score));
        best = std::move(r);
        best_blocks = blocks;
      }
      return;
    }
    for (const Shape s : shapes) {
      if (i + s.a > n || j + s.b > m) continue;
      path.push_back(Step{i, j, s, shape_score(score, i, j, s)});
      self(self, i + s.a, j + s.b);
      path.pop_back();
    }
  };
  visit(visit, 0, 0);
  if (!best) no_tiling(n, m);
  return *best;
}

namespace {

void check_passage(const PassagePair& pair, const AlignConfig& cfg) {
  if (pair.src.empty() || pair.tgt.empty()) throw InvalidArgument("passage '" + pair.id + "' has an empty side");
  if (pair.src.size() > cfg.max_sentences || pair.tgt.size() > cfg.max_sentences) {
    throw InvalidArgument("passage '" + pair.id + "' exceeds " + std::to_string(cfg.max_sentences) +
                          " sentences; split it into smaller passages first");
  }
}

}  // namespace

AlignmentResult align_dp(const PassagePair& pair, const AlignConfig& cfg) {
  check_passage(pair, cfg);
  BlockLcsCache cache(pair.src, pair.tgt);
  return solve_tiling(pair.src.size(), pair.tgt.size(), cfg,
                      [&cache](std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) {
                        return static_cast<double>(cache.get(i1, i2, j1, j2));
                      });
}

AlignmentResult align_bruteforce(const PassagePair& pair, const AlignConfig& cfg) {
  check_passage(pair, cfg);
  BlockLcsCache cache(pair.src, pair.tgt);
  return enumerate_tilings(pair.src.size(), pair.tgt.size(), cfg,
                           [&cache](std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) {
                             return static_cast<double>(cache.get(i1, i2, j1, j2));
                           });
}

std::string check_alignment(const AlignmentResult& result, std::size_t n, std::size_t m, const AlignConfig& cfg) {
  std::size_t i = 0, j = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < result.blocks.size(); ++k) {
    const auto& b = result.blocks[k];
    const std::string where = "block " + std::to_string(k) + ": ";
    if (b.src.first != i + 1 || b.tgt.first != j + 1) return where + "not contiguous with its predecessor";
    const std::size_t a = b.src.width(), w = b.tgt.width();
    if (a == 0 || w == 0) {
      if (!cfg.allow_null_blocks) return where + "null block while null blocks are disabled";
      if (a + w != 1) return where + "null blocks must be 1:0 or 0:1";
    } else if (a > cfg.max_group || w > cfg.max_group) {
      return where + "shape exceeds max_group";
    }
    i = b.src.last;
    j = b.tgt.last;
    sum += b.score;
  }
  if (i != n || j != m) return "blocks do not cover both passages";
  if (std::abs(sum - result.total_score) > 1e-9 * std::max(1.0, std::abs(sum))) return "total_score != sum of blocks";
  return {};
}

std::vector<SentencePair> block_pairs(const PassagePair& pair, const AlignmentResult& result) {
  std::vector<SentencePair> out;
  for (const auto& b : result.blocks) {
    if (b.src.width() == 0 || b.tgt.width() == 0) continue;
    SentencePair sp;
    for (std::size_t i = b.src.first; i <= b.src.last; ++i) sp.src += pair.src.at(i - 1);
    for (std::size_t j = b.tgt.first; j <= b.tgt.last; ++j) sp.tgt += pair.tgt.at(j - 1);
    out.push_back(std::move(sp));
  }
  return out;
}

CorpusAlignment align_corpus(std::span<const PassagePair> pairs, const AlignConfig& cfg, unsigned threads) {
  return align_corpus(pairs, [&cfg](const PassagePair& p) { return align_dp(p, cfg); }, threads);
}

CorpusAlignment align_corpus(std::span<const PassagePair> pairs, const PassageAligner& aligner, unsigned threads) {
  std::vector<std::optional<AlignmentResult>> results(pairs.size());
  std::vector<std::string> errors(pairs.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t k = next++; k < pairs.size(); k = next++) {
      try {
        results[k] = aligner(pairs[k]);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pairs.size())));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  CorpusAlignment out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!results[k]) {
      out.failures.push_back(pairs[k].id + ": " + errors[k]);
      continue;
    }
    auto sp = block_pairs(pairs[k], *results[k]);
    out.pairs.insert(out.pairs.end(), std::make_move_iterator(sp.begin()), std::make_move_iterator(sp.end()));
    out.passages.push_back(PassageAlignment{pairs[k].id, std::move(*results[k])});
  }
  return out;
}

namespace {

using nlohmann::json;

json range_json(const IndexRange& r) { return json::array({r.first, r.last}); }

IndexRange range_from(const json& j, std::size_t line) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned())
    throw FormatError("line " + std::to_string(line) + ": range must be [first, last]");
  return IndexRange{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

}  // namespace

void write_alignments(std::ostream& out, std::span<const PassageAlignment> alignments) {
  for (const auto& pa : alignments) {
    json obj;
    obj["id"] = pa.id;
    obj["total_score"] = pa.result.total_score;
    obj["blocks"] = json::array();
    for (const auto& b : pa.result.blocks)
      obj["blocks"].push_back({{"src", range_json(b.src)}, {"tgt", range_json(b.tgt)}, {"score", b.score}});
    out << obj.dump() << '\n';
  }
}

void save_alignments(const std::filesystem::path& path, std::span<const PassageAlignment> alignments) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  write_alignments(out, alignments);
}

std::vector<PassageAlignment> read_alignments(std::istream& in) {
  std::vector<PassageAlignment> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fail = [line](const std::string& msg) -> FormatError {
      return FormatError("line " + std::to_string(line) + ": " + msg);
    };
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw fail(std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string()) throw fail("missing string field 'id'");
    if (!obj.contains("blocks") || !obj["blocks"].is_array()) throw fail("missing array field 'blocks'");
    PassageAlignment pa;
    pa.id = obj["id"].get<std::string>();
    double sum = 0.0;
    for (const auto& b : obj["blocks"]) {
      if (!b.is_object() || !b.contains("src") || !b.contains("tgt")) throw fail("block needs 'src' and 'tgt'");
      AlignmentBlock block{range_from(b["src"], line), range_from(b["tgt"], line), 0.0};
      if (b.contains("score")) {
        if (!b["score"].is_number()) throw fail("block score must be a number");
        block.score = b["score"].get<double>();
      }
      sum += block.score;
      pa.result.blocks.push_back(block);
    }
    pa.result.total_score = obj.contains("total_score") && obj["total_score"].is_number()
                                ? obj["total_score"].get<double>()
                                : sum;
    out.push_back(std::move(pa));
  }
  return out;
}

std::vector<PassageAlignment> load_alignments(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path.string());
  return read_alignments(in);
}

}  // namespace ancon
