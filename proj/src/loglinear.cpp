#include "ancon/loglinear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ancon/error.hpp"
#include "ancon/lcs.hpp"
#include "ancon/rng.hpp"
#include "json.hpp"

namespace ancon {

LogLinearModel LogLinearModel::uniform(std::size_t max_group) {
  if (max_group < 1) throw InvalidArgument("max_group must be at least 1");
  LogLinearModel m;
  m.max_group = max_group;
  const double g = static_cast<double>(max_group);
  m.log_pattern_prior.assign(max_group * max_group, -std::log(g * g));
  return m;
}

double LogLinearModel::log_prior(std::size_t a, std::size_t b) const {
  if (a < 1 || b < 1 || a > max_group || b > max_group)
    throw InvalidArgument("block shape outside the model's pattern table");
  return log_pattern_prior[(a - 1) * max_group + (b - 1)];
}

double LogLinearModel::score(const FeatureVector& f) const {
  return weights[0] * f.length + weights[1] * f.pattern + weights[2] * f.cooccurrence + bias;
}

namespace {

double log_normal_density(double x, const LengthStats& s) {
  const double d = x - s.mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * s.variance) - d * d / (2.0 * s.variance);
}

FeatureVector features_with_lcs(std::size_t src_len, std::size_t tgt_len, std::size_t lcs, std::size_t a,
                                std::size_t b, const LogLinearModel& model) {
  if (src_len == 0) throw InvalidArgument("source group is empty");
  FeatureVector f;
  f.length = log_normal_density(static_cast<double>(tgt_len) / static_cast<double>(src_len), model.length);
  f.pattern = model.log_prior(a, b);
  f.cooccurrence = static_cast<double>(lcs) / static_cast<double>(std::max(src_len, tgt_len));
  return f;
}

}  // namespace

FeatureVector extract_features(std::u32string_view src_group, std::u32string_view tgt_group, std::size_t a,
                               std::size_t b, const LogLinearModel& model) {
  if (src_group.empty()) throw InvalidArgument("source group is empty");
  return features_with_lcs(src_group.size(), tgt_group.size(), lcs_len(src_group, tgt_group), a, b, model);
}

LogLinearModel train_loglinear(std::span<const GoldPassage> gold, const LogLinearTrainConfig& cfg) {
  const std::size_t G = cfg.align.max_group;
  LogLinearModel model = LogLinearModel::uniform(G);

  // Length ratio and pattern statistics from the gold blocks.
  std::vector<double> ratios;
  std::vector<double> pattern_counts(G * G, 0.0);
  std::size_t counted = 0;
  for (const auto& gp : gold) {
    BlockLcsCache cache(gp.pair.src, gp.pair.tgt);
    for (const auto& b : gp.gold.blocks) {
      if (b.src.width() == 0 || b.tgt.width() == 0) continue;
      const auto s = cache.src_group(b.src.first, b.src.last);
      const auto t = cache.tgt_group(b.tgt.first, b.tgt.last);
      ratios.push_back(static_cast<double>(t.size()) / static_cast<double>(s.size()));
      if (b.src.width() <= G && b.tgt.width() <= G) {
        pattern_counts[(b.src.width() - 1) * G + (b.tgt.width() - 1)] += 1.0;
        ++counted;
      }
    }
  }
  if (ratios.size() < 2) throw InvalidArgument("log-linear training needs at least 2 gold blocks");

  double mean = 0.0;
  for (double r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= static_cast<double>(ratios.size() - 1);
  model.length = LengthStats{mean, std::max(var, 1e-6)};

  const double denom = static_cast<double>(counted) + static_cast<double>(G * G);
  for (std::size_t k = 0; k < G * G; ++k) model.log_pattern_prior[k] = std::log((pattern_counts[k] + 1.0) / denom);

  // Positive and sampled negative blocks at every gold block boundary.
  std::vector<std::array<double, 3>> xs;
  std::vector<double> ys;
  Rng rng(cfg.seed);
  for (const auto& gp : gold) {
    const std::size_t n = gp.pair.src.size(), m = gp.pair.tgt.size();
    BlockLcsCache cache(gp.pair.src, gp.pair.tgt);
    auto feats = [&](std::size_t i, std::size_t j, std::size_t a, std::size_t b) {
      const auto s = cache.src_group(i + 1, i + a);
      const auto t = cache.tgt_group(j + 1, j + b);
      return features_with_lcs(s.size(), t.size(), cache.get(i + 1, i + a, j + 1, j + b), a, b, model).as_array();
    };
    for (const auto& blk : gp.gold.blocks) {
      const std::size_t a = blk.src.width(), b = blk.tgt.width();
      if (a == 0 || b == 0 || a > G || b > G) continue;
      const std::size_t i = blk.src.first - 1, j = blk.tgt.first - 1;
      xs.push_back(feats(i, j, a, b));
      ys.push_back(1.0);

      std::vector<std::pair<std::size_t, std::size_t>> alternatives;
      for (std::size_t aa = 1; aa <= G; ++aa)
        for (std::size_t bb = 1; bb <= G; ++bb)
          if ((aa != a || bb != b) && i + aa <= n && j + bb <= m) alternatives.emplace_back(aa, bb);
      rng.shuffle(std::span(alternatives));
      const std::size_t take = std::min(cfg.negatives_per_block, alternatives.size());
      for (std::size_t k = 0; k < take; ++k) {
        xs.push_back(feats(i, j, alternatives[k].first, alternatives[k].second));
        ys.push_back(0.0);
      }
    }
  }

  // Logistic regression on standardized features, folded back afterwards.
  const std::size_t N = xs.size();
  std::array<double, 3> mu{}, sd{};
  for (const auto& x : xs)
    for (std::size_t k = 0; k < 3; ++k) mu[k] += x[k];
  for (auto& v : mu) v /= static_cast<double>(N);
  for (const auto& x : xs)
    for (std::size_t k = 0; k < 3; ++k) sd[k] += (x[k] - mu[k]) * (x[k] - mu[k]);
  for (auto& v : sd) {
    v = std::sqrt(v / static_cast<double>(N));
    if (v < 1e-12) v = 0.0;
  }
  std::vector<std::array<double, 3>> zs(N);
  for (std::size_t e = 0; e < N; ++e)
    for (std::size_t k = 0; k < 3; ++k) zs[e][k] = sd[k] > 0 ? (xs[e][k] - mu[k]) / sd[k] : 0.0;

  std::array<double, 3> w{};
  double bias = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::array<double, 3> gw{};
    double gb = 0.0;
    for (std::size_t e = 0; e < N; ++e) {
      const double z = w[0] * zs[e][0] + w[1] * zs[e][1] + w[2] * zs[e][2] + bias;
      const double err = ys[e] - 1.0 / (1.0 + std::exp(-z));
      for (std::size_t k = 0; k < 3; ++k) gw[k] += err * zs[e][k];
      gb += err;
    }
    for (std::size_t k = 0; k < 3; ++k) w[k] += cfg.learning_rate * (gw[k] / static_cast<double>(N) - cfg.l2 * w[k]);
    bias += cfg.learning_rate * gb / static_cast<double>(N);
  }

  model.bias = bias;
  for (std::size_t k = 0; k < 3; ++k) {
    model.weights[k] = sd[k] > 0 ? w[k] / sd[k] : 0.0;
    model.bias -= model.weights[k] * mu[k];
  }
  if (!std::isfinite(model.bias) || !std::all_of(model.weights.begin(), model.weights.end(),
                                                 [](double v) { return std::isfinite(v); }))
    throw NumericError("log-linear training diverged");
  return model;
}

AlignmentResult align_loglinear(const PassagePair& pair, const LogLinearModel& model, const AlignConfig& cfg) {
  if (pair.src.empty() || pair.tgt.empty()) throw InvalidArgument("passage '" + pair.id + "' has an empty side");
  if (pair.src.size() > cfg.max_sentences || pair.tgt.size() > cfg.max_sentences)
    throw InvalidArgument("passage '" + pair.id + "' exceeds " + std::to_string(cfg.max_sentences) + " sentences");
  if (cfg.max_group > model.max_group) throw InvalidArgument("max_group exceeds the model's pattern table");
  BlockLcsCache cache(pair.src, pair.tgt);
  return solve_tiling(pair.src.size(), pair.tgt.size(), cfg,
                      [&](std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) {
                        const auto s = cache.src_group(i1, i2);
                        const auto t = cache.tgt_group(j1, j2);
                        return model.score(features_with_lcs(s.size(), t.size(), cache.get(i1, i2, j1, j2),
                                                             i2 + 1 - i1, j2 + 1 - j1, model));
                      });
}

std::string loglinear_to_json(const LogLinearModel& model) {
  nlohmann::json j;
  j["format"] = LogLinearModel::kFormat;
  j["weights"] = {{"length", model.weights[0]}, {"pattern", model.weights[1]}, {"cooccurrence", model.weights[2]}};
  j["bias"] = model.bias;
  j["max_group"] = model.max_group;
  j["log_pattern_prior"] = nlohmann::json::array();
  for (std::size_t a = 0; a < model.max_group; ++a) {
    std::vector<double> row(model.log_pattern_prior.begin() + static_cast<std::ptrdiff_t>(a * model.max_group),
                            model.log_pattern_prior.begin() + static_cast<std::ptrdiff_t>((a + 1) * model.max_group));
    j["log_pattern_prior"].push_back(row);
  }
  j["length"] = {{"mean", model.length.mean}, {"variance", model.length.variance}};
  return j.dump(2);
}

LogLinearModel loglinear_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != LogLinearModel::kFormat) throw FormatError("not a log-linear model document");
    LogLinearModel m;
    m.weights = {j.at("weights").at("length").get<double>(), j.at("weights").at("pattern").get<double>(),
                 j.at("weights").at("cooccurrence").get<double>()};
    m.bias = j.at("bias").get<double>();
    m.max_group = j.at("max_group").get<std::size_t>();
    m.log_pattern_prior.clear();
    const auto& table = j.at("log_pattern_prior");
    if (table.size() != m.max_group) throw FormatError("pattern table has the wrong number of rows");
    for (const auto& row : table) {
      if (row.size() != m.max_group) throw FormatError("pattern table row has the wrong width");
      for (const auto& v : row) m.log_pattern_prior.push_back(v.get<double>());
    }
    m.length = LengthStats{j.at("length").at("mean").get<double>(), j.at("length").at("variance").get<double>()};
    if (!(m.length.variance > 0)) throw FormatError("length variance must be positive");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid log-linear model: ") + e.what());
  }
}

void save_loglinear(const std::filesystem::path& path, const LogLinearModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  out << loglinear_to_json(model) << '\n';
}

LogLinearModel load_loglinear(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return loglinear_from_json(ss.str());
}

}  // namespace ancon
