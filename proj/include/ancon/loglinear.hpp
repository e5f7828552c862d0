#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ancon/align.hpp"
#include "ancon/align_eval.hpp"

namespace ancon {

struct FeatureVector {
  double length = 0.0;         // log normal density of the target/source length ratio
  double pattern = 0.0;        // log prior of the block shape
  double cooccurrence = 0.0;   // LCS / longer side

  std::array<double, 3> as_array() const { return {length, pattern, cooccurrence}; }
};

struct LengthStats {
  double mean = 1.0;
  double variance = 1.0;
};

/// Supervised block scorer: weights . features + bias.
struct LogLinearModel {
  static constexpr const char* kFormat = "ancon-loglinear/1";

  std::array<double, 3> weights{0.0, 0.0, 1.0};
  double bias = 0.0;
  std::size_t max_group = 5;
  /// Row-major max_group x max_group table of log P(a:b), a,b >= 1.
  std::vector<double> log_pattern_prior;
  LengthStats length;

  /// Uniform pattern prior over the max_group^2 shapes.
  static LogLinearModel uniform(std::size_t max_group);

  double log_prior(std::size_t a, std::size_t b) const;
  double score(const FeatureVector& f) const;
};

/// Throws InvalidArgument on an empty source group.
FeatureVector extract_features(std::u32string_view src_group, std::u32string_view tgt_group, std::size_t a,
                               std::size_t b, const LogLinearModel& model);

struct LogLinearTrainConfig {
  AlignConfig align{};
  std::size_t negatives_per_block = 10;
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
  std::uint64_t seed = 13;
};

/// Length statistics and add-one smoothed pattern prior are counted from the
/// gold blocks; weights come from logistic regression of gold blocks against
/// competing blocks that start at the same boundary.
LogLinearModel train_loglinear(std::span<const GoldPassage> gold, const LogLinearTrainConfig& cfg = {});

/// Same search and tie-breaking as align_dp with the model as block scorer.
AlignmentResult align_loglinear(const PassagePair& pair, const LogLinearModel& model, const AlignConfig& cfg = {});

void save_loglinear(const std::filesystem::path& path, const LogLinearModel& model);
LogLinearModel load_loglinear(const std::filesystem::path& path);
std::string loglinear_to_json(const LogLinearModel& model);
LogLinearModel loglinear_from_json(const std::string& text);

}  // namespace ancon
