#include "ntc/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace ntc {

namespace {

void check_unconsumed(bool& consumed, const char* what) {
  if (consumed) {
    throw std::logic_error(std::string(what) + ": cache already consumed");
  }
  consumed = true;
}

void check_length(std::size_t length, std::size_t t, const char* what) {
  if (length == 0) {
    throw std::invalid_argument(std::string(what) + ": empty sequence (length 0)");
  }
  if (length > t) {
    throw std::invalid_argument(std::string(what) + ": length " +
                                std::to_string(length) + " exceeds T " +
                                std::to_string(t));
  }
}

}  // namespace

// ---------------------------------------------------------------- embedding

Embedding::Embedding(ParamSet& ps, const std::string& prefix, std::size_t vocab_size,
                     std::size_t dim, Rng& rng)
    : vocab_size_(vocab_size), dim_(dim) {
  table_ = &ps.add_glorot(prefix + ".table", vocab_size, dim, {vocab_size, dim}, rng);
  for (std::size_t j = 0; j < dim; ++j) table_->value.at(0, j) = 0.0;  // pad row
}

Tensor Embedding::forward(const std::vector<int>& ids, EmbeddingCache& cache) const {
  Tensor out({ids.size(), dim_});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    const int id = ids[t];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size_) {
      throw std::out_of_range("embedding: id " + std::to_string(id) +
                              " out of range for vocab size " +
                              std::to_string(vocab_size_));
    }
    const double* src = table_->value.row(static_cast<std::size_t>(id));
    double* dst = out.row(t);
    for (std::size_t j = 0; j < dim_; ++j) dst[j] = src[j];
  }
  cache.ids = ids;
  cache.consumed = false;
  return out;
}

void Embedding::backward(EmbeddingCache& cache, const Tensor& grad_out) const {
  check_unconsumed(cache.consumed, "embedding");
  for (std::size_t t = 0; t < cache.ids.size(); ++t) {
    axpy(1.0, grad_out.row(t),
         table_->grad.row(static_cast<std::size_t>(cache.ids[t])), dim_);
  }
}

// ----------------------------------------------------------------- dropout

Tensor dropout_forward(const Tensor& x, double rate, Mode mode, Rng& rng,
                       DropoutCache& cache) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate must be in [0, 1), got " +
                                std::to_string(rate));
  }
  cache.consumed = false;
  if (mode == Mode::Eval) {
    cache.identity = true;
    cache.mask = Tensor();
    return x;
  }
  cache.identity = false;
  cache.mask = Tensor(x.shape());
  const double keep = 1.0 - rate;
  const double scale = 1.0 / keep;
  Tensor out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng.uniform() < keep ? scale : 0.0;
    cache.mask[i] = m;
    out[i] *= m;
  }
  return out;
}

Tensor dropout_backward(DropoutCache& cache, const Tensor& grad_out) {
  check_unconsumed(cache.consumed, "dropout");
  if (cache.identity) return grad_out;
  Tensor grad = grad_out;
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= cache.mask[i];
  return grad;
}

// --------------------------------------------------------------- simple RNN

RnnCell::RnnCell(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
                 std::size_t hidden, Rng& rng)
    : d_(input_dim), h_(hidden) {
  W_ = &ps.add_glorot(prefix + ".W", input_dim, hidden, {input_dim, hidden}, rng);
  U_ = &ps.add_glorot(prefix + ".U", hidden, hidden, {hidden, hidden}, rng);
  b_ = &ps.add(prefix + ".b", {hidden});
}

void RnnCell::step(const double* x, const double* h_prev, double* h_out) const {
  for (std::size_t j = 0; j < h_; ++j) h_out[j] = b_->value[j];
  vec_mat_accum(x, W_->value.data().data(), d_, h_, h_out);
  vec_mat_accum(h_prev, U_->value.data().data(), h_, h_, h_out);
  for (std::size_t j = 0; j < h_; ++j) h_out[j] = std::tanh(h_out[j]);
}

Tensor RnnCell::run(const Tensor& seq, std::size_t length, RnnSeqCache& cache,
                    bool reversed) const {
  if (seq.rank() != 2 || seq.dim(1) != d_) {
    throw std::invalid_argument("rnn: sequence shape " + seq.shape_str() +
                                " does not match input dim " + std::to_string(d_));
  }
  check_length(length, seq.dim(0), "rnn");
  const std::size_t t_total = seq.dim(0);
  cache.xs = seq;
  cache.hs = Tensor({t_total, h_});
  cache.length = length;
  cache.reversed = reversed;
  cache.consumed = false;

  std::vector<double> h_prev(h_, 0.0);
  for (std::size_t k = 0; k < length; ++k) {
    const std::size_t pos = reversed ? length - 1 - k : k;
    step(seq.row(pos), h_prev.data(), cache.hs.row(pos));
    const double* h = cache.hs.row(pos);
    h_prev.assign(h, h + h_);
  }
  return cache.hs;
}

Tensor RnnCell::run_backward(RnnSeqCache& cache, const Tensor& grad_hs) const {
  check_unconsumed(cache.consumed, "rnn");
  const std::size_t t_total = cache.xs.dim(0);
  Tensor grad_seq({t_total, d_});
  std::vector<double> dh_carry(h_, 0.0);
  std::vector<double> dpre(h_);

  for (std::size_t k = cache.length; k-- > 0;) {
    const std::size_t pos = cache.reversed ? cache.length - 1 - k : k;
    const double* h = cache.hs.row(pos);
    for (std::size_t j = 0; j < h_; ++j) {
      const double dh = grad_hs.row(pos)[j] + dh_carry[j];
      dpre[j] = dh * (1.0 - h[j] * h[j]);
    }
    const double* h_prev_row = nullptr;
    std::vector<double> zeros;
    if (k > 0) {
      const std::size_t prev_pos = cache.reversed ? cache.length - k : k - 1;
      h_prev_row = cache.hs.row(prev_pos);
    } else {
      zeros.assign(h_, 0.0);
      h_prev_row = zeros.data();
    }
    outer_accum(cache.xs.row(pos), dpre.data(), d_, h_, W_->grad.data().data());
    outer_accum(h_prev_row, dpre.data(), h_, h_, U_->grad.data().data());
    axpy(1.0, dpre.data(), b_->grad.data().data(), h_);
    mat_vec_accum(dpre.data(), W_->value.data().data(), d_, h_, grad_seq.row(pos));
    dh_carry.assign(h_, 0.0);
    mat_vec_accum(dpre.data(), U_->value.data().data(), h_, h_, dh_carry.data());
  }
  return grad_seq;
}

// --------------------------------------------------------------------- LSTM

LstmCell::LstmCell(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
                   std::size_t hidden, Rng& rng)
    : d_(input_dim), h_(hidden) {
  static const char* gate_names[4] = {"i", "f", "o", "g"};
  for (int g = 0; g < 4; ++g) {
    const std::string suffix = gate_names[g];
    W_[g] = &ps.add_glorot(prefix + ".W_" + suffix, input_dim, hidden,
                           {input_dim, hidden}, rng);
    U_[g] = &ps.add_glorot(prefix + ".U_" + suffix, hidden, hidden, {hidden, hidden},
                           rng);
    b_[g] = &ps.add(prefix + ".b_" + suffix, {hidden});
  }
  b_[1]->value.fill(1.0);  // forget gate bias
}

void LstmCell::step(const double* x, const double* h_prev, const double* c_prev,
                    double* h_out, double* c_out, double* i_out, double* f_out,
                    double* o_out, double* g_out) const {
  std::vector<double> scratch(4 * h_);
  double* gates[4] = {i_out, f_out, o_out, g_out};
  for (int g = 0; g < 4; ++g) {
    if (gates[g] == nullptr) gates[g] = scratch.data() + g * h_;
  }
  for (int g = 0; g < 4; ++g) {
    double* pre = gates[g];
    for (std::size_t j = 0; j < h_; ++j) pre[j] = b_[g]->value[j];
    vec_mat_accum(x, W_[g]->value.data().data(), d_, h_, pre);
    vec_mat_accum(h_prev, U_[g]->value.data().data(), h_, h_, pre);
    for (std::size_t j = 0; j < h_; ++j) {
      pre[j] = (g == 3) ? std::tanh(pre[j]) : sigmoid(pre[j]);
    }
  }
  for (std::size_t j = 0; j < h_; ++j) {
    c_out[j] = gates[1][j] * c_prev[j] + gates[0][j] * gates[3][j];
    h_out[j] = gates[2][j] * std::tanh(c_out[j]);
  }
}

Tensor LstmCell::run(const Tensor& seq, std::size_t length, LstmSeqCache& cache,
                     bool reversed) const {
  if (seq.rank() != 2 || seq.dim(1) != d_) {
    throw std::invalid_argument("lstm: sequence shape " + seq.shape_str() +
                                " does not match input dim " + std::to_string(d_));
  }
  check_length(length, seq.dim(0), "lstm");
  const std::size_t t_total = seq.dim(0);
  cache.xs = seq;
  for (Tensor* t : {&cache.i, &cache.f, &cache.o, &cache.g, &cache.c, &cache.tanh_c,
                    &cache.h}) {
    *t = Tensor({t_total, h_});
  }
  cache.length = length;
  cache.reversed = reversed;
  cache.consumed = false;

  std::vector<double> h_prev(h_, 0.0), c_prev(h_, 0.0);
  for (std::size_t k = 0; k < length; ++k) {
    const std::size_t pos = reversed ? length - 1 - k : k;
    step(seq.row(pos), h_prev.data(), c_prev.data(), cache.h.row(pos),
         cache.c.row(pos), cache.i.row(pos), cache.f.row(pos), cache.o.row(pos),
         cache.g.row(pos));
    for (std::size_t j = 0; j < h_; ++j) {
      cache.tanh_c.row(pos)[j] = std::tanh(cache.c.row(pos)[j]);
    }
    h_prev.assign(cache.h.row(pos), cache.h.row(pos) + h_);
    c_prev.assign(cache.c.row(pos), cache.c.row(pos) + h_);
  }
  return cache.h;
}

Tensor LstmCell::run_backward(LstmSeqCache& cache, const Tensor& grad_hs) const {
  check_unconsumed(cache.consumed, "lstm");
  const std::size_t t_total = cache.xs.dim(0);
  Tensor grad_seq({t_total, d_});
  std::vector<double> dh_carry(h_, 0.0), dc_carry(h_, 0.0);
  std::vector<double> dpre[4];
  for (auto& v : dpre) v.resize(h_);
  std::vector<double> zeros(h_, 0.0);

  for (std::size_t k = cache.length; k-- > 0;) {
    const std::size_t pos = cache.reversed ? cache.length - 1 - k : k;
    const std::size_t prev_pos = cache.reversed ? cache.length - k : k - 1;
    const double* c_prev = k > 0 ? cache.c.row(prev_pos) : zeros.data();
    const double* h_prev = k > 0 ? cache.h.row(prev_pos) : zeros.data();

    const double *iv = cache.i.row(pos), *fv = cache.f.row(pos),
                 *ov = cache.o.row(pos), *gv = cache.g.row(pos),
                 *tc = cache.tanh_c.row(pos);
    for (std::size_t j = 0; j < h_; ++j) {
      const double dh = grad_hs.row(pos)[j] + dh_carry[j];
      const double dc = dc_carry[j] + dh * ov[j] * (1.0 - tc[j] * tc[j]);
      dpre[0][j] = dc * gv[j] * iv[j] * (1.0 - iv[j]);          // input gate
      dpre[1][j] = dc * c_prev[j] * fv[j] * (1.0 - fv[j]);      // forget gate
      dpre[2][j] = dh * tc[j] * ov[j] * (1.0 - ov[j]);          // output gate
      dpre[3][j] = dc * iv[j] * (1.0 - gv[j] * gv[j]);          // candidate
      dc_carry[j] = dc * fv[j];
    }
    dh_carry.assign(h_, 0.0);
    for (int g = 0; g < 4; ++g) {
      outer_accum(cache.xs.row(pos), dpre[g].data(), d_, h_,
                  W_[g]->grad.data().data());
      outer_accum(h_prev, dpre[g].data(), h_, h_, U_[g]->grad.data().data());
      axpy(1.0, dpre[g].data(), b_[g]->grad.data().data(), h_);
      mat_vec_accum(dpre[g].data(), W_[g]->value.data().data(), d_, h_,
                    grad_seq.row(pos));
      mat_vec_accum(dpre[g].data(), U_[g]->value.data().data(), h_, h_,
                    dh_carry.data());
    }
  }
  return grad_seq;
}

std::pair<Tensor, Tensor> lstm_cell_step(const LstmCell& cell, const Tensor& x_t,
                                         const Tensor& h_prev, const Tensor& c_prev) {
  if (x_t.size() != cell.input_dim() || h_prev.size() != cell.hidden() ||
      c_prev.size() != cell.hidden()) {
    throw std::invalid_argument("lstm_cell_step: shapes " + x_t.shape_str() + ", " +
                                h_prev.shape_str() + ", " + c_prev.shape_str() +
                                " do not match cell dims");
  }
  Tensor h({cell.hidden()}), c({cell.hidden()});
  cell.step(x_t.data().data(), h_prev.data().data(), c_prev.data().data(),
            h.data().data(), c.data().data());
  return {h, c};
}

// ------------------------------------------------------------ bidirectional

BiLstm::BiLstm(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
               std::size_t hidden, Rng& rng)
    : fwd_(ps, prefix + ".fwd", input_dim, hidden, rng),
      bwd_(ps, prefix + ".bwd", input_dim, hidden, rng) {}

Tensor BiLstm::run(const Tensor& seq, std::size_t length, Cache& cache) const {
  const Tensor hf = fwd_.run(seq, length, cache.fwd, false);
  const Tensor hb = bwd_.run(seq, length, cache.bwd, true);
  cache.consumed = false;
  const std::size_t t_total = seq.dim(0), h = fwd_.hidden();
  Tensor out({t_total, 2 * h});
  for (std::size_t t = 0; t < length; ++t) {
    double* dst = out.row(t);
    const double* f = hf.row(t);
    const double* b = hb.row(t);
    for (std::size_t j = 0; j < h; ++j) dst[j] = f[j];
    for (std::size_t j = 0; j < h; ++j) dst[h + j] = b[j];
  }
  return out;
}

Tensor BiLstm::run_backward(Cache& cache, const Tensor& grad_out) const {
  check_unconsumed(cache.consumed, "bilstm");
  const std::size_t t_total = grad_out.dim(0), h = fwd_.hidden();
  Tensor grad_f({t_total, h}), grad_b({t_total, h});
  for (std::size_t t = 0; t < t_total; ++t) {
    const double* src = grad_out.row(t);
    for (std::size_t j = 0; j < h; ++j) grad_f.row(t)[j] = src[j];
    for (std::size_t j = 0; j < h; ++j) grad_b.row(t)[j] = src[h + j];
  }
  Tensor grad_seq = fwd_.run_backward(cache.fwd, grad_f);
  const Tensor grad_seq_b = bwd_.run_backward(cache.bwd, grad_b);
  for (std::size_t i = 0; i < grad_seq.size(); ++i) grad_seq[i] += grad_seq_b[i];
  return grad_seq;
}

Tensor BiLstm::final_states(const Cache& cache) const {
  const std::size_t h = fwd_.hidden();
  Tensor out({2 * h});
  const double* f = cache.fwd.h.row(cache.fwd.length - 1);
  const double* b = cache.bwd.h.row(0);
  for (std::size_t j = 0; j < h; ++j) out[j] = f[j];
  for (std::size_t j = 0; j < h; ++j) out[h + j] = b[j];
  return out;
}

// ------------------------------------------------------------------ attention

AttentionPool::AttentionPool(ParamSet& ps, const std::string& prefix,
                             std::size_t input_dim, std::size_t attn_dim, Rng& rng)
    : in_(input_dim), a_(attn_dim) {
  W_w_ = &ps.add_glorot(prefix + ".W_w", input_dim, attn_dim, {input_dim, attn_dim},
                        rng);
  b_w_ = &ps.add(prefix + ".b_w", {attn_dim});
  // The context vector is a learned weight, not a bias; same init scheme.
  u_w_ = &ps.add_glorot(prefix + ".u_w", attn_dim, 1, {attn_dim}, rng);
}

std::pair<Tensor, Tensor> AttentionPool::forward(const Tensor& H, std::size_t length,
                                                 AttentionCache& cache) const {
  if (H.rank() != 2 || H.dim(1) != in_) {
    throw std::invalid_argument("attention: input shape " + H.shape_str() +
                                " does not match input dim " + std::to_string(in_));
  }
  check_length(length, H.dim(0), "attention");
  const std::size_t t_total = H.dim(0);
  cache.H = H;
  cache.U = Tensor({t_total, a_});
  cache.alpha = Tensor({t_total});
  cache.length = length;
  cache.consumed = false;

  std::vector<double> scores(length);
  for (std::size_t t = 0; t < length; ++t) {
    double* u = cache.U.row(t);
    for (std::size_t j = 0; j < a_; ++j) u[j] = b_w_->value[j];
    vec_mat_accum(H.row(t), W_w_->value.data().data(), in_, a_, u);
    for (std::size_t j = 0; j < a_; ++j) u[j] = std::tanh(u[j]);
    scores[t] = dot(u, u_w_->value.data().data(), a_);
  }
  double mx = scores[0];
  for (double v : scores) mx = std::max(mx, v);
  double sum = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    cache.alpha[t] = std::exp(scores[t] - mx);
    sum += cache.alpha[t];
  }
  Tensor s({in_});
  for (std::size_t t = 0; t < length; ++t) {
    cache.alpha[t] /= sum;
    axpy(cache.alpha[t], H.row(t), s.data().data(), in_);
  }
  return {s, cache.alpha};
}

Tensor AttentionPool::backward(AttentionCache& cache, const Tensor& grad_s,
                               const Tensor& grad_alpha) const {
  check_unconsumed(cache.consumed, "attention");
  const std::size_t t_total = cache.H.dim(0), length = cache.length;
  Tensor grad_H({t_total, in_});

  std::vector<double> dalpha(length, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    dalpha[t] = dot(grad_s.data().data(), cache.H.row(t), in_);
    if (grad_alpha.size() > 0) dalpha[t] += grad_alpha[t];
  }
  double weighted = 0.0;
  for (std::size_t t = 0; t < length; ++t) weighted += cache.alpha[t] * dalpha[t];

  std::vector<double> dpre(a_);
  for (std::size_t t = 0; t < length; ++t) {
    const double dscore = cache.alpha[t] * (dalpha[t] - weighted);
    const double* u = cache.U.row(t);
    axpy(dscore, u, u_w_->grad.data().data(), a_);
    for (std::size_t j = 0; j < a_; ++j) {
      dpre[j] = dscore * u_w_->value[j] * (1.0 - u[j] * u[j]);
    }
    outer_accum(cache.H.row(t), dpre.data(), in_, a_, W_w_->grad.data().data());
    axpy(1.0, dpre.data(), b_w_->grad.data().data(), a_);
    double* dh = grad_H.row(t);
    mat_vec_accum(dpre.data(), W_w_->value.data().data(), in_, a_, dh);
    axpy(cache.alpha[t], grad_s.data().data(), dh, in_);
  }
  return grad_H;
}

// --------------------------------------------------------- conv + max pool

Conv1dMaxPool::Conv1dMaxPool(ParamSet& ps, const std::string& prefix,
                             std::size_t width, std::size_t filters,
                             std::size_t input_dim, Rng& rng)
    : w_(width), f_(filters), d_(input_dim) {
  filters_ = &ps.add_glorot(prefix + ".filters", width * input_dim, filters,
                            {filters, width, input_dim}, rng);
  bias_ = &ps.add(prefix + ".bias", {filters});
}

Tensor Conv1dMaxPool::forward(const Tensor& seq, ConvCache& cache) const {
  if (seq.rank() != 2 || seq.dim(1) != d_) {
    throw std::invalid_argument("conv1d: sequence shape " + seq.shape_str() +
                                " does not match input dim " + std::to_string(d_));
  }
  const std::size_t t_total = seq.dim(0);
  if (t_total < w_) {
    throw std::invalid_argument("conv1d: sequence length " + std::to_string(t_total) +
                                " shorter than filter width " + std::to_string(w_));
  }
  cache.seq = seq;
  cache.argmax.assign(f_, 0);
  cache.pre_relu_at_max = Tensor({f_});
  cache.consumed = false;

  Tensor out({f_});
  const std::size_t positions = t_total - w_ + 1;
  for (std::size_t f = 0; f < f_; ++f) {
    const double* filt = filters_->value.row(f);  // [w x d] plane
    double best = -1.0;
    double best_pre = 0.0;
    std::size_t best_pos = 0;
    for (std::size_t p = 0; p < positions; ++p) {
      double pre = bias_->value[f];
      for (std::size_t q = 0; q < w_; ++q) {
        pre += dot(filt + q * d_, seq.row(p + q), d_);
      }
      const double act = pre > 0.0 ? pre : 0.0;
      if (act > best) {
        best = act;
        best_pre = pre;
        best_pos = p;
      }
    }
    out[f] = best;
    cache.argmax[f] = best_pos;
    cache.pre_relu_at_max[f] = best_pre;
  }
  return out;
}

Tensor Conv1dMaxPool::backward(ConvCache& cache, const Tensor& grad_out) const {
  check_unconsumed(cache.consumed, "conv1d");
  Tensor grad_seq(cache.seq.shape());
  for (std::size_t f = 0; f < f_; ++f) {
    if (cache.pre_relu_at_max[f] <= 0.0) continue;  // relu subgradient 0
    const double g = grad_out[f];
    if (g == 0.0) continue;
    const std::size_t p = cache.argmax[f];
    const double* filt = filters_->value.row(f);
    double* dfilt = filters_->grad.row(f);
    bias_->grad[f] += g;
    for (std::size_t q = 0; q < w_; ++q) {
      axpy(g, cache.seq.row(p + q), dfilt + q * d_, d_);
      axpy(g, filt + q * d_, grad_seq.row(p + q), d_);
    }
  }
  return grad_seq;
}

// ------------------------------------------------------------ dense softmax

DenseSoftmax::DenseSoftmax(ParamSet& ps, const std::string& prefix,
                           std::size_t input_dim, std::size_t classes, Rng& rng)
    : n_(input_dim), k_(classes) {
  W_ = &ps.add_glorot(prefix + ".W", input_dim, classes, {input_dim, classes}, rng);
  b_ = &ps.add(prefix + ".b", {classes});
}

Tensor DenseSoftmax::forward(const Tensor& v, DenseCache& cache) const {
  if (v.size() != n_) {
    throw std::invalid_argument("dense: input shape " + v.shape_str() +
                                " does not match input dim " + std::to_string(n_));
  }
  Tensor logits({k_});
  for (std::size_t j = 0; j < k_; ++j) logits[j] = b_->value[j];
  vec_mat_accum(v.data().data(), W_->value.data().data(), n_, k_,
                logits.data().data());
  cache.input = v;
  cache.probs = softmax_rows(logits);
  cache.consumed = false;
  return cache.probs;
}

Tensor DenseSoftmax::backward_logits(DenseCache& cache,
                                     const Tensor& grad_logits) const {
  check_unconsumed(cache.consumed, "dense");
  outer_accum(cache.input.data().data(), grad_logits.data().data(), n_, k_,
              W_->grad.data().data());
  axpy(1.0, grad_logits.data().data(), b_->grad.data().data(), k_);
  Tensor grad_v({n_});
  mat_vec_accum(grad_logits.data().data(), W_->value.data().data(), n_, k_,
                grad_v.data().data());
  return grad_v;
}

// -------------------------------------------------------------------- loss

double cross_entropy(const Tensor& probs, std::size_t label) {
  const double p = std::max(probs[label], 1e-12);
  return -std::log(p);
}

double loss_ce_l2(const Tensor& probs, const Tensor& onehot, const ParamSet& theta,
                  double lambda) {
  if (!probs.same_shape(onehot) || probs.rank() != 2) {
    throw std::invalid_argument("loss: probs " + probs.shape_str() +
                                " vs targets " + onehot.shape_str());
  }
  const std::size_t m = probs.dim(0), k = probs.dim(1);
  double data_term = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double* t = onehot.row(i);
    int hot = -1;
    for (std::size_t j = 0; j < k; ++j) {
      if (t[j] == 1.0 && hot < 0) {
        hot = static_cast<int>(j);
      } else if (t[j] != 0.0) {
        throw std::invalid_argument("loss: target row " + std::to_string(i) +
                                    " is not one-hot");
      }
    }
    if (hot < 0) {
      throw std::invalid_argument("loss: target row " + std::to_string(i) +
                                  " is not one-hot");
    }
    const double p = std::max(probs.at(i, static_cast<std::size_t>(hot)), 1e-12);
    data_term += -std::log(p);
  }
  return data_term / static_cast<double>(m) + lambda * theta.squared_norm();
}

}  // namespace ntc
