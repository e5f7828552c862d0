#include "ancon/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "ancon/error.hpp"
#include "ancon/rng.hpp"
#include "ancon/simd.hpp"

namespace ancon::nmt {

void Seq2SeqConfig::validate() const {
  if (embed_dim < 1 || hidden_dim < 1) throw InvalidArgument("embed_dim and hidden_dim must be at least 1");
  if (max_decode_len < 1) throw InvalidArgument("max_decode_len must be at least 1");
}

const std::array<std::pair<const char*, Seq2SeqParams::Field>, 15>& Seq2SeqParams::fields() {
  static const std::array<std::pair<const char*, Field>, 15> f{{
      {"embedding", &Seq2SeqParams::embedding},
      {"tgt_embedding", &Seq2SeqParams::tgt_embedding},
      {"enc_w", &Seq2SeqParams::enc_w},
      {"enc_u", &Seq2SeqParams::enc_u},
      {"enc_b", &Seq2SeqParams::enc_b},
      {"dec_w", &Seq2SeqParams::dec_w},
      {"dec_u", &Seq2SeqParams::dec_u},
      {"dec_b", &Seq2SeqParams::dec_b},
      {"attn_w", &Seq2SeqParams::attn_w},
      {"pivot_w", &Seq2SeqParams::pivot_w},
      {"pivot_v", &Seq2SeqParams::pivot_v},
      {"out_w", &Seq2SeqParams::out_w},
      {"out_b", &Seq2SeqParams::out_b},
      {"gen_w", &Seq2SeqParams::gen_w},
      {"gen_b", &Seq2SeqParams::gen_b},
  }};
  return f;
}

Seq2SeqParams Seq2SeqParams::zeros(const Seq2SeqConfig& cfg, std::size_t vocab_size) {
  cfg.validate();
  if (vocab_size <= static_cast<std::size_t>(Vocab::kUnk)) throw InvalidArgument("vocabulary too small");
  const std::size_t E = cfg.embed_dim, H = cfg.hidden_dim, V = vocab_size;
  Seq2SeqParams p;
  p.embedding = Tensor(V, E);
  if (!cfg.share_embedding) p.tgt_embedding = Tensor(V, E);
  p.enc_w = Tensor(3 * H, E);
  p.enc_u = Tensor(3 * H, H);
  p.enc_b = Tensor(3 * H, 1);
  p.dec_w = Tensor(3 * H, E + H);
  p.dec_u = Tensor(3 * H, H);
  p.dec_b = Tensor(3 * H, 1);
  p.attn_w = Tensor(H, H);
  p.pivot_w = Tensor(H, H);
  p.pivot_v = Tensor(H, 1);
  p.out_w = Tensor(V, 2 * H);
  p.out_b = Tensor(V, 1);
  p.gen_w = Tensor(2 * H + E, 1);
  p.gen_b = Tensor(1, 1);
  return p;
}

Seq2SeqParams Seq2SeqParams::random(const Seq2SeqConfig& cfg, std::size_t vocab_size, std::uint64_t seed,
                                    double scale) {
  Seq2SeqParams p = zeros(cfg, vocab_size);
  Rng rng(seed);
  for (const auto& [name, field] : fields())
    for (double& v : (p.*field).data) v = rng.uniform(-scale, scale);
  return p;
}

std::size_t Seq2SeqParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, field] : fields()) n += (this->*field).size();
  return n;
}

void Seq2SeqParams::zero() {
  for (const auto& [name, field] : fields()) (this->*field).zero();
}

bool Seq2SeqParams::all_finite() const {
  for (const auto& [name, field] : fields())
    for (double v : (this->*field).data)
      if (!std::isfinite(v)) return false;
  return true;
}

SourceIds encode_source(const Vocab& vocab, std::u32string_view src) {
  SourceIds out;
  const int V = static_cast<int>(vocab.size());
  std::map<char32_t, int> ext;
  for (char32_t ch : src) {
    const int id = vocab.id(ch);
    out.input.push_back(id);
    if (id != Vocab::kUnk) {
      out.extended.push_back(id);
      continue;
    }
    auto [it, inserted] = ext.try_emplace(ch, V + static_cast<int>(out.oovs.size()));
    if (inserted) out.oovs.push_back(ch);
    out.extended.push_back(it->second);
  }
  return out;
}

EncodedPair encode_pair(const Vocab& vocab, const SentencePair& pair, bool use_copy) {
  EncodedPair out;
  out.source = encode_source(vocab, pair.src);
  const int V = static_cast<int>(vocab.size());
  for (char32_t ch : pair.tgt) {
    int id = vocab.id(ch);
    if (id == Vocab::kUnk && use_copy) {
      auto it = std::find(out.source.oovs.begin(), out.source.oovs.end(), ch);
      if (it != out.source.oovs.end()) id = V + static_cast<int>(it - out.source.oovs.begin());
    }
    out.target.push_back(id);
  }
  out.target.push_back(Vocab::kEos);
  return out;
}

namespace {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

const simd::Kernels& K() { return simd::active(); }

// ---------------------------------------------------------------------------
// Gated recurrent cell
//   z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br)
//   n = tanh(Wn x + Un (r * h) + bn), h' = (1 - z) * n + z * h

struct GruStep {
  std::vector<double> z, r, n, rh, h;
};

void gru_forward(const Tensor& w, const Tensor& u, const Tensor& b, const double* x, const double* h_prev,
                 GruStep& out) {
  const std::size_t H = u.cols, in = w.cols;
  std::vector<double> pre(b.data);
  K().gemv(w.data.data(), 3 * H, in, x, pre.data());
  K().gemv(u.data.data(), 2 * H, H, h_prev, pre.data());
  out.z.resize(H);
  out.r.resize(H);
  out.n.resize(H);
  out.rh.resize(H);
  out.h.resize(H);
  for (std::size_t i = 0; i < H; ++i) {
    out.z[i] = sigmoid(pre[i]);
    out.r[i] = sigmoid(pre[H + i]);
    out.rh[i] = out.r[i] * h_prev[i];
  }
  K().gemv(u.row(2 * H), H, H, out.rh.data(), pre.data() + 2 * H);
  for (std::size_t i = 0; i < H; ++i) {
    out.n[i] = std::tanh(pre[2 * H + i]);
    out.h[i] = (1.0 - out.z[i]) * out.n[i] + out.z[i] * h_prev[i];
  }
}

// Accumulates parameter gradients, dx and dh_prev for one step given dh.
void gru_backward(const Tensor& w, const Tensor& u, Tensor& gw, Tensor& gu, Tensor& gb, const double* x,
                  const double* h_prev, const GruStep& st, const double* dh, double* dx, double* dh_prev,
                  GradientFault fault) {
  const std::size_t H = u.cols, in = w.cols;
  std::vector<double> da(3 * H), drh(H, 0.0);
  for (std::size_t i = 0; i < H; ++i) {
    const double z = st.z[i], n = st.n[i];
    da[i] = dh[i] * (h_prev[i] - n) * z * (1.0 - z);
    da[2 * H + i] = dh[i] * (1.0 - z) * (1.0 - n * n);
  }
  K().gemv_t(u.row(2 * H), H, H, da.data() + 2 * H, drh.data());
  for (std::size_t i = 0; i < H; ++i) {
    const double r = st.r[i];
    da[H + i] = drh[i] * h_prev[i] * r * (1.0 - r);
    if (fault != GradientFault::drop_update_gate_carry) dh_prev[i] += dh[i] * st.z[i];
    dh_prev[i] += drh[i] * r;
  }
  K().gemv_t(u.data.data(), 2 * H, H, da.data(), dh_prev);
  K().ger(gw.data.data(), 3 * H, in, da.data(), x);
  K().axpy(1.0, da.data(), gb.data.data(), 3 * H);
  if (dx) K().gemv_t(w.data.data(), 3 * H, in, da.data(), dx);
  K().ger(gu.data.data(), 2 * H, H, da.data(), h_prev);
  K().ger(gu.row(2 * H), H, H, da.data() + 2 * H, st.rh.data());
}

// ---------------------------------------------------------------------------
// Attention

struct AttnCache {
  std::vector<double> u;  // tanh(W_p s), local only
  std::vector<double> k;  // W_a s
  std::vector<double> a;  // n
  std::vector<double> c;  // H
  double p = 0.0;
  double sg = 0.0;
  std::size_t lo = 0, hi = 0;
};

void attention_forward(const double* s_prev, const EncoderStates& h, const Seq2SeqParams& P,
                       const Seq2SeqConfig& cfg, AttnCache& ac) {
  const std::size_t n = h.rows, H = h.cols;
  ac.k.assign(H, 0.0);
  K().gemv(P.attn_w.data.data(), H, H, s_prev, ac.k.data());
  ac.a.assign(n, 0.0);
  ac.c.assign(H, 0.0);

  const bool local = cfg.use_local_attention;
  const double D = static_cast<double>(cfg.attn_window);
  if (local) {
    ac.u.assign(H, 0.0);
    K().gemv(P.pivot_w.data.data(), H, H, s_prev, ac.u.data());
    for (double& v : ac.u) v = std::tanh(v);
    ac.sg = sigmoid(K().dot(P.pivot_v.data.data(), ac.u.data(), H));
    ac.p = static_cast<double>(n) * ac.sg;
    if (cfg.attn_window == 0) {
      ac.lo = ac.hi = std::min(static_cast<std::size_t>(ac.p), n - 1);
    } else {
      const double lo = std::ceil(ac.p - D - 0.5), hi = std::floor(ac.p + D - 0.5);
      ac.lo = lo <= 0 ? 0 : static_cast<std::size_t>(lo);
      ac.hi = std::min(n - 1, hi <= 0 ? std::size_t{0} : static_cast<std::size_t>(hi));
      // The cell holding the pivot is always inside the window.
      const std::size_t home = std::min(static_cast<std::size_t>(ac.p), n - 1);
      ac.lo = std::min(ac.lo, home);
      ac.hi = std::max(ac.hi, home);
    }
  } else {
    ac.lo = 0;
    ac.hi = n - 1;
  }

  const double inv_two_var = local && cfg.attn_window > 0 ? 2.0 / (D * D) : 0.0;  // 1 / (2 sigma^2), sigma = D/2
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = ac.lo; i <= ac.hi; ++i) {
    double logit = K().dot(h.row(i), ac.k.data(), H);
    if (inv_two_var > 0) {
      const double d = static_cast<double>(i) + 0.5 - ac.p;
      logit -= d * d * inv_two_var;
    }
    ac.a[i] = logit;
    mx = std::max(mx, logit);
  }
  double z = 0.0;
  for (std::size_t i = ac.lo; i <= ac.hi; ++i) {
    ac.a[i] = std::exp(ac.a[i] - mx);
    z += ac.a[i];
  }
  for (std::size_t i = ac.lo; i <= ac.hi; ++i) {
    ac.a[i] /= z;
    K().axpy(ac.a[i], h.row(i), ac.c.data(), H);
  }
}

// dc: gradient on the context; da_extra: direct gradient on the weights
// (copy path), may be empty. Accumulates into ds_prev and dh.
void attention_backward(const double* s_prev, const EncoderStates& h, const Seq2SeqParams& P,
                        const Seq2SeqConfig& cfg, const AttnCache& ac, const double* dc,
                        const std::vector<double>& da_extra, Seq2SeqParams& G, double* ds_prev, Tensor& dh) {
  const std::size_t H = h.cols;
  const std::size_t m = ac.hi - ac.lo + 1;
  std::vector<double> da(m);
  double mean = 0.0;
  for (std::size_t i = ac.lo; i <= ac.hi; ++i) {
    double g = K().dot(h.row(i), dc, H);
    if (!da_extra.empty()) g += da_extra[i];
    da[i - ac.lo] = g;
    mean += ac.a[i] * g;
    K().axpy(ac.a[i], dc, dh.row(i), H);
  }
  if (m == 1) return;  // single-position softmax has no gradient

  std::vector<double> dk(H, 0.0);
  double dp = 0.0;
  const bool gaussian = cfg.use_local_attention && cfg.attn_window > 0;
  const double D = static_cast<double>(cfg.attn_window);
  const double inv_var = gaussian ? 4.0 / (D * D) : 0.0;
  for (std::size_t i = ac.lo; i <= ac.hi; ++i) {
    const double dlogit = ac.a[i] * (da[i - ac.lo] - mean);
    if (dlogit == 0.0) continue;
    K().axpy(dlogit, h.row(i), dk.data(), H);
    K().axpy(dlogit, ac.k.data(), dh.row(i), H);
    if (gaussian) dp += dlogit * (static_cast<double>(i) + 0.5 - ac.p) * inv_var;
  }
  K().ger(G.attn_w.data.data(), H, H, dk.data(), s_prev);
  K().gemv_t(P.attn_w.data.data(), H, H, dk.data(), ds_prev);

  if (gaussian && dp != 0.0) {
    const double de = dp * static_cast<double>(h.rows) * ac.sg * (1.0 - ac.sg);
    K().axpy(de, ac.u.data(), G.pivot_v.data.data(), H);
    std::vector<double> dq(H);
    for (std::size_t i = 0; i < H; ++i) dq[i] = de * P.pivot_v.data[i] * (1.0 - ac.u[i] * ac.u[i]);
    K().ger(G.pivot_w.data.data(), H, H, dq.data(), s_prev);
    K().gemv_t(P.pivot_w.data.data(), H, H, dq.data(), ds_prev);
  }
}

// ---------------------------------------------------------------------------
// Decoder step

struct DecStep {
  int in_id = 0;
  AttnCache att;
  std::vector<double> inp;  // [x; c]
  GruStep gru;
  std::vector<double> pv;   // softmax over the vocabulary
  std::vector<double> gin;  // [c; s; x]
  double g = 1.0;
};

void check_id(int id, std::size_t V) {
  if (id < 0 || static_cast<std::size_t>(id) >= V) throw InvalidArgument("token id outside the vocabulary");
}

void step_forward(const Seq2SeqParams& P, const Seq2SeqConfig& cfg, const EncoderStates& h, const double* s_prev,
                  int in_id, DecStep& st) {
  const std::size_t E = cfg.embed_dim, H = cfg.hidden_dim, V = P.vocab_size();
  check_id(in_id, V);
  st.in_id = in_id;
  attention_forward(s_prev, h, P, cfg, st.att);

  const double* x = P.decoder_embedding().row(static_cast<std::size_t>(in_id));
  st.inp.resize(E + H);
  std::copy(x, x + E, st.inp.begin());
  std::copy(st.att.c.begin(), st.att.c.end(), st.inp.begin() + static_cast<std::ptrdiff_t>(E));
  gru_forward(P.dec_w, P.dec_u, P.dec_b, st.inp.data(), s_prev, st.gru);

  std::vector<double> o(2 * H);
  std::copy(st.gru.h.begin(), st.gru.h.end(), o.begin());
  std::copy(st.att.c.begin(), st.att.c.end(), o.begin() + static_cast<std::ptrdiff_t>(H));
  st.pv = P.out_b.data;
  K().gemv(P.out_w.data.data(), V, 2 * H, o.data(), st.pv.data());
  const double mx = *std::max_element(st.pv.begin(), st.pv.end());
  double z = 0.0;
  for (double& v : st.pv) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : st.pv) v /= z;

  if (cfg.use_copy) {
    st.gin.resize(2 * H + E);
    std::copy(st.att.c.begin(), st.att.c.end(), st.gin.begin());
    std::copy(st.gru.h.begin(), st.gru.h.end(), st.gin.begin() + static_cast<std::ptrdiff_t>(H));
    std::copy(x, x + E, st.gin.begin() + static_cast<std::ptrdiff_t>(2 * H));
    st.g = sigmoid(K().dot(P.gen_w.data.data(), st.gin.data(), 2 * H + E) + P.gen_b.data[0]);
  } else {
    st.g = 1.0;
  }
}

// Probability of extended id y under the step's output distribution.
double gold_probability(const DecStep& st, const SourceIds& src, int y, std::size_t V, bool use_copy,
                        double* copy_mass = nullptr) {
  const double pv = static_cast<std::size_t>(y) < V ? st.pv[static_cast<std::size_t>(y)] : 0.0;
  if (!use_copy) return pv;
  double c = 0.0;
  for (std::size_t i = 0; i < src.extended.size(); ++i)
    if (src.extended[i] == y) c += st.att.a[i];
  if (copy_mass) *copy_mass = c;
  return st.g * pv + (1.0 - st.g) * c;
}

int decoder_input(int prev_id, std::size_t V) {
  return static_cast<std::size_t>(prev_id) < V ? prev_id : Vocab::kUnk;
}

struct EncCache {
  std::vector<GruStep> steps;
  EncoderStates h;
};

void encode_cached(std::span<const int> ids, const Seq2SeqParams& P, const Seq2SeqConfig& cfg, EncCache& ec) {
  if (ids.empty()) throw InvalidArgument("cannot encode an empty sequence");
  const std::size_t H = cfg.hidden_dim, V = P.vocab_size();
  ec.steps.resize(ids.size());
  ec.h = Tensor(ids.size(), H);
  std::vector<double> zero(H, 0.0);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    check_id(ids[t], V);
    const double* h_prev = t ? ec.h.row(t - 1) : zero.data();
    gru_forward(P.enc_w, P.enc_u, P.enc_b, P.embedding.row(static_cast<std::size_t>(ids[t])), h_prev, ec.steps[t]);
    std::copy(ec.steps[t].h.begin(), ec.steps[t].h.end(), ec.h.row(t));
  }
}

void check_pair(const EncodedPair& ex, const Seq2SeqConfig& cfg) {
  if (ex.target.empty()) throw InvalidArgument("target must end with EOS");
  if (ex.target.size() - 1 > cfg.max_decode_len)
    throw InvalidArgument("target of " + std::to_string(ex.target.size() - 1) + " characters exceeds max_decode_len " +
                          std::to_string(cfg.max_decode_len));
}

std::size_t token_count(std::span<const EncodedPair> batch) {
  std::size_t n = 0;
  for (const auto& ex : batch) n += ex.target.size();
  return n;
}

double nll(double p) { return -std::log(std::max(p, std::numeric_limits<double>::min())); }

// Forward and (optionally) backward for one example; returns the summed NLL.
double example_pass(const EncodedPair& ex, const Seq2SeqParams& P, const Seq2SeqConfig& cfg, Seq2SeqParams* G,
                    double scale, GradientFault fault) {
  check_pair(ex, cfg);
  const std::size_t H = cfg.hidden_dim, E = cfg.embed_dim, V = P.vocab_size();
  const std::size_t n = ex.source.input.size();
  for (int y : ex.target)
    if (y < 0 || static_cast<std::size_t>(y) >= V + ex.source.oovs.size())
      throw InvalidArgument("target id outside the extended vocabulary");

  EncCache ec;
  encode_cached(ex.source.input, P, cfg, ec);
  const std::size_t T = ex.target.size();
  std::vector<DecStep> steps(T);
  std::vector<double> probs(T);
  double total = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double* s_prev = t ? steps[t - 1].gru.h.data() : ec.h.row(n - 1);
    const int in_id = t ? decoder_input(ex.target[t - 1], V) : Vocab::kBos;
    step_forward(P, cfg, ec.h, s_prev, in_id, steps[t]);
    probs[t] = gold_probability(steps[t], ex.source, ex.target[t], V, cfg.use_copy);
    total += nll(probs[t]);
  }
  if (!G) return total;

  Tensor dh(n, H);
  std::vector<double> carry(H, 0.0);  // dL/ds_t flowing back from step t+1
  Tensor& gdec_emb = G->decoder_embedding();
  for (std::size_t t = T; t-- > 0;) {
    const DecStep& st = steps[t];
    const int y = ex.target[t];
    const double* s_prev = t ? steps[t - 1].gru.h.data() : ec.h.row(n - 1);
    const double P_y = std::max(probs[t], std::numeric_limits<double>::min());
    const double dP = -scale / P_y;

    std::vector<double> ds(carry), dc(H, 0.0), dx(E, 0.0), da_copy;
    const bool in_vocab = static_cast<std::size_t>(y) < V;
    const double pv_y = in_vocab ? st.pv[static_cast<std::size_t>(y)] : 0.0;
    double dpv_y = dP;
    if (cfg.use_copy) {
      double copy_y = 0.0;
      gold_probability(st, ex.source, y, V, true, &copy_y);
      dpv_y = dP * st.g;
      const double dgate = dP * (pv_y - copy_y) * st.g * (1.0 - st.g);
      da_copy.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        if (ex.source.extended[i] == y) da_copy[i] = dP * (1.0 - st.g);
      K().axpy(dgate, st.gin.data(), G->gen_w.data.data(), 2 * H + E);
      G->gen_b.data[0] += dgate;
      K().axpy(dgate, P.gen_w.data.data(), dc.data(), H);
      K().axpy(dgate, P.gen_w.data.data() + H, ds.data(), H);
      K().axpy(dgate, P.gen_w.data.data() + 2 * H, dx.data(), E);
    }
    if (in_vocab) {
      // d/dlogits of P_vocab[y] scaled by dpv_y: pv_y * (e_y - pv).
      const double coef = dpv_y * pv_y;
      std::vector<double> dlogits(V);
      for (std::size_t j = 0; j < V; ++j) dlogits[j] = -coef * st.pv[j];
      dlogits[static_cast<std::size_t>(y)] += coef;
      std::vector<double> o(2 * H), dout(2 * H, 0.0);
      std::copy(st.gru.h.begin(), st.gru.h.end(), o.begin());
      std::copy(st.att.c.begin(), st.att.c.end(), o.begin() + static_cast<std::ptrdiff_t>(H));
      K().ger(G->out_w.data.data(), V, 2 * H, dlogits.data(), o.data());
      K().axpy(1.0, dlogits.data(), G->out_b.data.data(), V);
      K().gemv_t(P.out_w.data.data(), V, 2 * H, dlogits.data(), dout.data());
      K().axpy(1.0, dout.data(), ds.data(), H);
      K().axpy(1.0, dout.data() + H, dc.data(), H);
    }

    std::vector<double> dinp(E + H, 0.0), ds_prev(H, 0.0);
    gru_backward(P.dec_w, P.dec_u, G->dec_w, G->dec_u, G->dec_b, st.inp.data(), s_prev, st.gru, ds.data(),
                 dinp.data(), ds_prev.data(), fault);
    K().axpy(1.0, dinp.data(), dx.data(), E);
    K().axpy(1.0, dinp.data() + E, dc.data(), H);
    attention_backward(s_prev, ec.h, P, cfg, st.att, dc.data(), da_copy, *G, ds_prev.data(), dh);
    K().axpy(1.0, dx.data(), gdec_emb.row(static_cast<std::size_t>(st.in_id)), E);
    carry = std::move(ds_prev);
  }
  K().axpy(1.0, carry.data(), dh.row(n - 1), H);

  std::vector<double> dh_next(H, 0.0), zero(H, 0.0);
  for (std::size_t t = n; t-- > 0;) {
    std::vector<double> dht(dh.row(t), dh.row(t) + H);
    K().axpy(1.0, dh_next.data(), dht.data(), H);
    std::vector<double> dh_prev(H, 0.0), dx(E, 0.0);
    const double* h_prev = t ? ec.h.row(t - 1) : zero.data();
    const auto id = static_cast<std::size_t>(ex.source.input[t]);
    gru_backward(P.enc_w, P.enc_u, G->enc_w, G->enc_u, G->enc_b, P.embedding.row(id), h_prev, ec.steps[t], dht.data(),
                 dx.data(), dh_prev.data(), fault);
    K().axpy(1.0, dx.data(), G->embedding.row(id), E);
    dh_next = std::move(dh_prev);
  }
  return total;
}

}  // namespace

EncoderStates encode(std::span<const int> src_ids, const Seq2SeqParams& params, const Seq2SeqConfig& cfg) {
  EncCache ec;
  encode_cached(src_ids, params, cfg, ec);
  return std::move(ec.h);
}

AttentionOutput local_attention(std::span<const double> s_prev, const EncoderStates& h, const Seq2SeqParams& params,
                                const Seq2SeqConfig& cfg) {
  if (h.rows == 0) throw InvalidArgument("attention over an empty encoder sequence");
  if (s_prev.size() != h.cols) throw InvalidArgument("decoder state has the wrong width");
  AttnCache ac;
  attention_forward(s_prev.data(), h, params, cfg, ac);
  AttentionOutput out;
  out.context = std::move(ac.c);
  out.weights = std::move(ac.a);
  out.pivot = cfg.use_local_attention ? ac.p : static_cast<double>(h.rows) / 2.0;
  out.window_lo = ac.lo;
  out.window_hi = ac.hi;
  return out;
}

DecodeState initial_state(const EncoderStates& h) {
  if (h.rows == 0) throw InvalidArgument("empty encoder states");
  DecodeState s;
  s.hidden.assign(h.row(h.rows - 1), h.row(h.rows - 1) + h.cols);
  return s;
}

StepOutput decode_step(const DecodeState& state, int prev_id, const EncoderStates& h, const SourceIds& src,
                       const Seq2SeqParams& params, const Seq2SeqConfig& cfg, const StepOverrides& overrides) {
  const std::size_t V = params.vocab_size();
  if (state.hidden.size() != cfg.hidden_dim) throw InvalidArgument("decoder state has the wrong width");
  if (src.extended.size() != h.rows) throw InvalidArgument("source ids do not match the encoder states");
  DecStep st;
  step_forward(params, cfg, h, state.hidden.data(), decoder_input(prev_id, V), st);
  double g = cfg.use_copy ? st.g : 1.0;
  if (overrides.p_gen) g = *overrides.p_gen;

  StepOutput out;
  const std::size_t ext = V + src.oovs.size();
  out.p_vocab = st.pv;
  out.copy.assign(ext, 0.0);
  for (std::size_t i = 0; i < src.extended.size(); ++i) out.copy[static_cast<std::size_t>(src.extended[i])] += st.att.a[i];
  out.distribution.assign(ext, 0.0);
  for (std::size_t j = 0; j < V; ++j) out.distribution[j] = g * st.pv[j];
  if (g != 1.0)
    for (std::size_t j = 0; j < ext; ++j) out.distribution[j] += (1.0 - g) * out.copy[j];
  out.p_gen = g;
  out.attention.context = st.att.c;
  out.attention.weights = st.att.a;
  out.attention.pivot = st.att.p;
  out.attention.window_lo = st.att.lo;
  out.attention.window_hi = st.att.hi;
  out.state.hidden = std::move(st.gru.h);
  out.state.step = state.step + 1;
  out.state.produced = state.produced;
  out.state.produced.push_back(prev_id);
  return out;
}

double loss(std::span<const EncodedPair> batch, const Seq2SeqParams& params, const Seq2SeqConfig& cfg) {
  if (batch.empty()) throw InvalidArgument("loss of an empty batch");
  double total = 0.0;
  for (const auto& ex : batch) total += example_pass(ex, params, cfg, nullptr, 0.0, GradientFault::none);
  return total / static_cast<double>(token_count(batch));
}

double loss_and_gradient(std::span<const EncodedPair> batch, const Seq2SeqParams& params, const Seq2SeqConfig& cfg,
                         Seq2SeqParams& grad, GradientFault fault) {
  if (batch.empty()) throw InvalidArgument("loss of an empty batch");
  grad = Seq2SeqParams::zeros(cfg, params.vocab_size());
  const double scale = 1.0 / static_cast<double>(token_count(batch));
  double total = 0.0;
  for (const auto& ex : batch) total += example_pass(ex, params, cfg, &grad, scale, fault);
  return total * scale;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

double central_difference(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                          std::size_t index, double epsilon) {
  std::vector<double> probe(x.begin(), x.end());
  probe[index] = x[index] + epsilon;
  const double up = f(probe);
  probe[index] = x[index] - epsilon;
  const double down = f(probe);
  return (up - down) / (2.0 * epsilon);
}

GradCheckReport grad_check(const Seq2SeqParams& params, const Seq2SeqConfig& cfg, std::span<const EncodedPair> example,
                           double epsilon, std::size_t samples, std::uint64_t seed, GradientFault fault) {
  Seq2SeqParams grad;
  loss_and_gradient(example, params, cfg, grad, fault);
  if (!grad.all_finite()) throw NumericError("non-finite analytic gradient");

  GradCheckReport report;
  Rng rng(seed);
  Seq2SeqParams probe = params;
  for (const auto& [name, field] : Seq2SeqParams::fields()) {
    Tensor& t = probe.*field;
    if (t.size() == 0) continue;
    std::vector<std::size_t> coords(t.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    rng.shuffle(std::span(coords));
    coords.resize(std::min(samples, coords.size()));

    double worst = 0.0;
    for (std::size_t idx : coords) {
      const double saved = t.data[idx];
      t.data[idx] = saved + epsilon;
      const double up = loss(example, probe, cfg);
      t.data[idx] = saved - epsilon;
      const double down = loss(example, probe, cfg);
      t.data[idx] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = (grad.*field).data[idx];
      if (!std::isfinite(numeric)) throw NumericError("non-finite numeric gradient in " + std::string(name));
      worst = std::max(worst, relative_error(analytic, numeric));
      ++report.coordinates;
    }
    report.per_tensor.emplace_back(name, worst);
    report.max_relative_error = std::max(report.max_relative_error, worst);
  }
  return report;
}

namespace {

CharSeq render(const Seq2SeqModel& model, const SourceIds& src, std::span<const int> ids) {
  CharSeq out;
  const int V = static_cast<int>(model.vocab.size());
  for (int id : ids) {
    if (id >= V) {
      out.push_back(src.oovs[static_cast<std::size_t>(id - V)]);
    } else if (id == Vocab::kUnk) {
      out.push_back(U'�');
    } else if (id >= Vocab::kReserved) {
      out.push_back(model.vocab.character(id));
    }
  }
  return out;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

CharSeq translate(const Seq2SeqModel& model, std::u32string_view src, DecodeMode mode) {
  const auto& cfg = model.config;
  if (src.empty()) return {};
  const SourceIds ids = encode_source(model.vocab, src);
  const EncoderStates h = encode(ids.input, model.params, cfg);

  if (mode.kind == DecodeMode::greedy) {
    DecodeState state = initial_state(h);
    int prev = Vocab::kBos;
    std::vector<int> out;
    for (std::size_t t = 0; t < cfg.max_decode_len; ++t) {
      StepOutput step = decode_step(state, prev, h, ids, model.params, cfg);
      const int next = static_cast<int>(argmax(step.distribution));
      if (next == Vocab::kEos) break;
      out.push_back(next);
      prev = next;
      state = std::move(step.state);
    }
    return render(model, ids, out);
  }

  const std::size_t k = std::max<std::size_t>(1, mode.beam_size);
  struct Hyp {
    double score;
    std::vector<int> tokens;
    DecodeState state;
  };
  std::vector<Hyp> live{Hyp{0.0, {}, initial_state(h)}};
  std::vector<Hyp> finished;
  for (std::size_t t = 0; t < cfg.max_decode_len && !live.empty() && finished.size() < k; ++t) {
    struct Candidate {
      double score;
      std::size_t parent;
      int token;
      std::size_t step_index;
    };
    std::vector<Candidate> cands;
    std::vector<StepOutput> outputs;
    for (std::size_t b = 0; b < live.size(); ++b) {
      const int prev = live[b].tokens.empty() ? Vocab::kBos : live[b].tokens.back();
      outputs.push_back(decode_step(live[b].state, prev, h, ids, model.params, cfg));
      const auto& dist = outputs.back().distribution;
      std::vector<std::size_t> order(dist.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      const std::size_t top = std::min(k, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                        [&](std::size_t x, std::size_t y) { return dist[x] > dist[y] || (dist[x] == dist[y] && x < y); });
      for (std::size_t r = 0; r < top; ++r)
        cands.push_back({live[b].score + std::log(std::max(dist[order[r]], std::numeric_limits<double>::min())), b,
                         static_cast<int>(order[r]), outputs.size() - 1});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
      if (x.score != y.score) return x.score > y.score;
      if (x.parent != y.parent) return x.parent < y.parent;
      return x.token < y.token;
    });
    std::vector<Hyp> next;
    for (const auto& c : cands) {
      if (next.size() + finished.size() >= k) break;
      Hyp hyp{c.score, live[c.parent].tokens, outputs[c.step_index].state};
      if (c.token == Vocab::kEos) {
        finished.push_back(std::move(hyp));
      } else {
        hyp.tokens.push_back(c.token);
        next.push_back(std::move(hyp));
      }
    }
    live = std::move(next);
  }
  const auto& pool = finished.empty() ? live : finished;
  const auto best = std::max_element(pool.begin(), pool.end(), [](const Hyp& a, const Hyp& b) { return a.score < b.score; });
  return render(model, ids, best->tokens);
}

}  // namespace ancon::nmt
