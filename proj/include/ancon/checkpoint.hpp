#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "ancon/seq2seq.hpp"
#include "ancon/train.hpp"

namespace ancon::nmt {

inline constexpr const char* kCheckpointFormat = "ancon-seq2seq/1";

/// JSON document holding the format tag, config, vocabulary characters and
/// every tensor. Doubles are written with round-trip precision.
std::string checkpoint_to_json(const Seq2SeqModel& model);
Seq2SeqModel checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Seq2SeqModel& model);
Seq2SeqModel load_checkpoint(const std::filesystem::path& path);

/// CSV with header epoch,step,loss.
void write_train_log(std::ostream& out, std::span<const TrainLogEntry> log);
void save_train_log(const std::filesystem::path& path, std::span<const TrainLogEntry> log);

}  // namespace ancon::nmt
