#include "ancon/checkpoint.hpp"

#include <fstream>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "ancon/error.hpp"
#include "json.hpp"

namespace ancon::nmt {

std::string checkpoint_to_json(const Seq2SeqModel& model) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  const auto& c = model.config;
  j["config"] = {{"embed_dim", c.embed_dim},
                 {"hidden_dim", c.hidden_dim},
                 {"attn_window", c.attn_window},
                 {"max_decode_len", c.max_decode_len},
                 {"share_embedding", c.share_embedding},
                 {"use_copy", c.use_copy},
                 {"use_local_attention", c.use_local_attention}};
  std::vector<std::uint32_t> chars;
  for (char32_t ch : model.vocab.characters()) chars.push_back(static_cast<std::uint32_t>(ch));
  j["vocab"] = chars;
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, field] : Seq2SeqParams::fields()) {
    const Tensor& t = model.params.*field;
    tensors[name] = {{"rows", t.rows}, {"cols", t.cols}, {"data", t.data}};
  }
  j["tensors"] = std::move(tensors);
  return j.dump();
}

Seq2SeqModel checkpoint_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat)
      throw FormatError(std::string("not a checkpoint (expected format ") + kCheckpointFormat + ")");
    Seq2SeqModel m;
    const auto& c = j.at("config");
    m.config.embed_dim = c.at("embed_dim").get<std::size_t>();
    m.config.hidden_dim = c.at("hidden_dim").get<std::size_t>();
    m.config.attn_window = c.at("attn_window").get<std::size_t>();
    m.config.max_decode_len = c.at("max_decode_len").get<std::size_t>();
    m.config.share_embedding = c.at("share_embedding").get<bool>();
    m.config.use_copy = c.at("use_copy").get<bool>();
    m.config.use_local_attention = c.at("use_local_attention").get<bool>();
    m.config.validate();
    std::vector<char32_t> chars;
    for (const auto& v : j.at("vocab")) chars.push_back(static_cast<char32_t>(v.get<std::uint32_t>()));
    m.vocab = Vocab::from_chars(chars);
    m.params = Seq2SeqParams::zeros(m.config, m.vocab.size());
    const auto& tensors = j.at("tensors");
    for (const auto& [name, field] : Seq2SeqParams::fields()) {
      Tensor& t = m.params.*field;
      const auto& jt = tensors.at(name);
      if (jt.at("rows").get<std::size_t>() != t.rows || jt.at("cols").get<std::size_t>() != t.cols)
        throw FormatError(std::string("tensor ") + name + " has the wrong shape");
      auto data = jt.at("data").get<std::vector<double>>();
      if (data.size() != t.size()) throw FormatError(std::string("tensor ") + name + " has the wrong size");
      t.data = std::move(data);
    }
    if (!m.params.all_finite()) throw FormatError("checkpoint holds non-finite values");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Seq2SeqModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  out << checkpoint_to_json(model) << '\n';
}

Seq2SeqModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

void write_train_log(std::ostream& out, std::span<const TrainLogEntry> log) {
  out << "epoch,step,loss\n";
  char buf[64];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%.17g", e.loss);
    out << e.epoch << ',' << e.step << ',' << buf << '\n';
  }
}

void save_train_log(const std::filesystem::path& path, std::span<const TrainLogEntry> log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  write_train_log(out, log);
}

}  // namespace ancon::nmt
