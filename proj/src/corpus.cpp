#include "ancon/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_set>

#include "ancon/error.hpp"
#include "ancon/rng.hpp"
#include "ancon/utf8.hpp"
#include "json.hpp"

namespace ancon {

using nlohmann::json;

std::vector<CharSeq> split_sentences(std::u32string_view text, std::u32string_view delimiters) {
  std::vector<CharSeq> out;
  CharSeq current;
  for (char32_t ch : text) {
    current.push_back(ch);
    if (delimiters.find(ch) != std::u32string_view::npos) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<CharSeq> split_sentences(std::string_view utf8_text, std::u32string_view delimiters) {
  return split_sentences(std::u32string_view(utf8::decode(utf8_text)), delimiters);
}

CharSeq concat(std::span<const CharSeq> parts) {
  CharSeq out;
  for (const auto& p : parts) out += p;
  return out;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  return out;
}

[[noreturn]] void line_error(std::size_t line, const std::string& msg) {
  throw FormatError("line " + std::to_string(line) + ": " + msg);
}

json parse_line(const std::string& text, std::size_t line) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) line_error(line, "expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    line_error(line, std::string("invalid JSON: ") + e.what());
  }
}

CharSeq string_field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) line_error(line, std::string("missing field '") + key + "'");
  if (!it->is_string()) line_error(line, std::string("field '") + key + "' must be a string");
  try {
    return utf8::decode(it->get_ref<const std::string&>());
  } catch (const FormatError& e) {
    line_error(line, e.what());
  }
}

std::vector<CharSeq> sentence_list(const json& obj, const char* key, std::size_t line,
                                   std::u32string_view delimiters) {
  auto it = obj.find(key);
  if (it == obj.end()) line_error(line, std::string("missing field '") + key + "'");
  std::vector<CharSeq> out;
  try {
    if (it->is_string()) {
      out = split_sentences(it->get_ref<const std::string&>(), delimiters);
    } else if (it->is_array()) {
      for (const auto& s : *it) {
        if (!s.is_string()) line_error(line, std::string("field '") + key + "' must hold strings");
        auto seq = utf8::decode(s.get_ref<const std::string&>());
        if (seq.empty()) line_error(line, std::string("empty sentence in '") + key + "'");
        out.push_back(std::move(seq));
      }
    } else {
      line_error(line, std::string("field '") + key + "' must be an array of strings");
    }
  } catch (const FormatError& e) {
    if (std::string_view(e.what()).starts_with("line ")) throw;
    line_error(line, e.what());
  }
  if (out.empty()) line_error(line, std::string("field '") + key + "' has no sentences");
  return out;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<PassagePair> read_passage_pairs(std::istream& in, std::u32string_view delimiters) {
  std::vector<PassagePair> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const json obj = parse_line(text, line);
    PassagePair pair;
    if (auto it = obj.find("id"); it != obj.end()) {
      if (!it->is_string()) line_error(line, "field 'id' must be a string");
      pair.id = it->get<std::string>();
    } else {
      pair.id = std::to_string(line);
    }
    pair.src = sentence_list(obj, "src", line, delimiters);
    pair.tgt = sentence_list(obj, "tgt", line, delimiters);
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<PassagePair> load_passage_pairs(const std::filesystem::path& path, std::u32string_view delimiters) {
  auto in = open_input(path);
  return read_passage_pairs(in, delimiters);
}

void write_passage_pairs(std::ostream& out, std::span<const PassagePair> pairs) {
  for (const auto& p : pairs) {
    json obj;
    obj["id"] = p.id;
    obj["src"] = json::array();
    obj["tgt"] = json::array();
    for (const auto& s : p.src) obj["src"].push_back(utf8::encode(s));
    for (const auto& s : p.tgt) obj["tgt"].push_back(utf8::encode(s));
    out << obj.dump() << '\n';
  }
}

void save_passage_pairs(const std::filesystem::path& path, std::span<const PassagePair> pairs) {
  auto out = open_output(path);
  write_passage_pairs(out, pairs);
}

std::vector<SentencePair> read_sentence_pairs(std::istream& in) {
  std::vector<SentencePair> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const json obj = parse_line(text, line);
    SentencePair pair{string_field(obj, "src", line), string_field(obj, "tgt", line)};
    if (pair.src.empty() || pair.tgt.empty()) line_error(line, "empty sentence");
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<SentencePair> load_sentence_pairs(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_sentence_pairs(in);
}

void write_sentence_pairs(std::ostream& out, std::span<const SentencePair> pairs) {
  for (const auto& p : pairs) {
    json obj;
    obj["src"] = utf8::encode(p.src);
    obj["tgt"] = utf8::encode(p.tgt);
    out << obj.dump() << '\n';
  }
}

void save_sentence_pairs(const std::filesystem::path& path, std::span<const SentencePair> pairs) {
  auto out = open_output(path);
  write_sentence_pairs(out, pairs);
}

DatasetSplit split_dataset(std::span<const SentencePair> pairs, SplitRatios ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.dev > 0 && ratios.test > 0))
    throw InvalidArgument("split ratios must be positive");
  if (std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9)
    throw InvalidArgument("split ratios must sum to 1");

  DatasetSplit out;
  const std::size_t n = pairs.size();
  if (n == 0) return out;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span(order));

  // The epsilon keeps ratios like 2125/57391 from flooring one short.
  const auto portion = [n](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
  };
  const std::size_t n_dev = portion(ratios.dev);
  const std::size_t n_test = portion(ratios.test);
  const std::size_t n_train = n - n_dev - n_test;

  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = pairs[order[k]];
    if (k < n_train) {
      out.train.push_back(p);
    } else if (k < n_train + n_dev) {
      out.dev.push_back(p);
    } else {
      out.test.push_back(p);
    }
  }
  return out;
}

Vocab Vocab::build(std::span<const CharSeq> sentences, std::size_t min_count) {
  std::map<char32_t, std::size_t> counts;
  for (const auto& s : sentences)
    for (char32_t ch : s) ++counts[ch];
  std::vector<char32_t> chars;
  for (const auto& [ch, c] : counts)
    if (c >= min_count) chars.push_back(ch);
  return from_chars(chars);
}

Vocab Vocab::from_chars(std::span<const char32_t> chars) {
  Vocab v;
  for (char32_t ch : chars) {
    if (v.index_.contains(ch)) throw InvalidArgument("duplicate character in vocabulary");
    v.index_.emplace(ch, static_cast<int>(kReserved + v.chars_.size()));
    v.chars_.push_back(ch);
  }
  return v;
}

int Vocab::id(char32_t ch) const {
  auto it = index_.find(ch);
  return it == index_.end() ? kUnk : it->second;
}

char32_t Vocab::character(int id) const {
  if (id < kReserved || static_cast<std::size_t>(id) >= size())
    throw InvalidArgument("not a character id: " + std::to_string(id));
  return chars_[static_cast<std::size_t>(id - kReserved)];
}

std::vector<int> Vocab::encode(std::u32string_view text) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char32_t ch : text) ids.push_back(id(ch));
  return ids;
}

CharSeq Vocab::decode(std::span<const int> ids) const {
  CharSeq out;
  for (int id : ids) {
    if (id == kUnk) {
      out.push_back(U'�');
    } else if (id >= kReserved && static_cast<std::size_t>(id) < size()) {
      out.push_back(chars_[static_cast<std::size_t>(id - kReserved)]);
    }
  }
  return out;
}

VocabStats vocab_stats(std::span<const CharSeq> train, std::span<const CharSeq> eval) {
  std::unordered_set<char32_t> seen;
  std::size_t train_tokens = 0;
  for (const auto& s : train) {
    train_tokens += s.size();
    seen.insert(s.begin(), s.end());
  }
  if (train_tokens == 0) throw InvalidArgument("training side is empty");

  VocabStats stats;
  stats.vocab_size = seen.size();
  for (const auto& s : eval) {
    stats.eval_tokens += s.size();
    for (char32_t ch : s)
      if (!seen.contains(ch)) ++stats.oov_tokens;
  }
  if (stats.eval_tokens == 0) throw InvalidArgument("evaluation side is empty; OOV rate undefined");
  stats.oov_rate = static_cast<double>(stats.oov_tokens) / static_cast<double>(stats.eval_tokens);
  return stats;
}

}  // namespace ancon
