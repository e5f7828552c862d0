#include "ancon/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "ancon/error.hpp"
#include "json.hpp"

namespace ancon {

namespace {

std::vector<std::u32string_view> tokenize(std::u32string_view text, BleuTokens mode) {
  std::vector<std::u32string_view> out;
  if (mode == BleuTokens::character) {
    for (std::size_t i = 0; i < text.size(); ++i) out.push_back(text.substr(i, 1));
    return out;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == U' ' || text[i] == U'\t' || text[i] == U'　')) ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != U' ' && text[j] != U'\t' && text[j] != U'　') ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

using NgramCounts = std::map<std::u32string, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::u32string_view>& toks, std::size_t n) {
  NgramCounts counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::u32string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key.push_back(U'\x1F');
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

void accumulate(BleuReport& r, std::u32string_view hyp, std::u32string_view ref, BleuTokens mode) {
  const auto h = tokenize(hyp, mode);
  const auto t = tokenize(ref, mode);
  r.hyp_len += h.size();
  r.ref_len += t.size();
  for (std::size_t n = 1; n <= kBleuOrder; ++n) {
    const auto hc = count_ngrams(h, n);
    const auto rc = count_ngrams(t, n);
    for (const auto& [gram, c] : hc) {
      r.totals[n - 1] += c;
      if (auto it = rc.find(gram); it != rc.end()) r.matches[n - 1] += std::min(c, it->second);
    }
  }
}

void finish(BleuReport& r, const BleuConfig& cfg) {
  bool any_zero = false;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    double m = static_cast<double>(r.matches[n]);
    double t = static_cast<double>(r.totals[n]);
    if (cfg.smooth && n > 0) {
      m += 1.0;
      t += 1.0;
    }
    r.precisions[n] = t > 0 ? m / t : 0.0;
    if (r.precisions[n] <= 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(r.precisions[n]);
    }
  }
  if (r.hyp_len == 0) {
    r.brevity_penalty = 0.0;
  } else {
    r.brevity_penalty =
        std::min(1.0, std::exp(1.0 - static_cast<double>(r.ref_len) / static_cast<double>(r.hyp_len)));
  }
  r.bleu = any_zero || r.hyp_len == 0 ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / kBleuOrder);
}

}  // namespace

BleuReport bleu_corpus(std::span<const CharSeq> hyps, std::span<const CharSeq> refs, const BleuConfig& cfg) {
  if (hyps.size() != refs.size())
    throw InvalidArgument("hypothesis/reference count mismatch: " + std::to_string(hyps.size()) + " vs " +
                          std::to_string(refs.size()));
  if (hyps.empty()) throw InvalidArgument("BLEU needs at least one sentence pair");
  BleuReport r;
  for (std::size_t i = 0; i < hyps.size(); ++i) accumulate(r, hyps[i], refs[i], cfg.tokens);
  finish(r, cfg);
  return r;
}

BleuReport bleu_sentence(std::u32string_view hyp, std::u32string_view ref, BleuConfig cfg) {
  BleuReport r;
  accumulate(r, hyp, ref, cfg.tokens);
  finish(r, cfg);
  return r;
}

std::string bleu_signature(const BleuConfig& cfg) {
  return std::string("BLEU|n:4|tok:") + (cfg.tokens == BleuTokens::character ? "char" : "whitespace") +
         "|smooth:" + (cfg.smooth ? "add-one(n>=2)" : "none") + "|bp:corpus|case:exact";
}

std::string bleu_report_json(const BleuReport& report, const BleuConfig& cfg) {
  nlohmann::json j;
  j["bleu"] = report.bleu;
  j["precisions"] = report.precisions;
  j["matches"] = report.matches;
  j["totals"] = report.totals;
  j["brevity_penalty"] = report.brevity_penalty;
  j["hyp_len"] = report.hyp_len;
  j["ref_len"] = report.ref_len;
  j["signature"] = bleu_signature(cfg);
  return j.dump();
}

}  // namespace ancon
