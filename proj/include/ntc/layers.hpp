#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ntc/params.hpp"
#include "ntc/rng.hpp"
#include "ntc/tensor.hpp"

// Layer kernels with hand-written backward passes.
//
// Conventions used throughout:
//  - activations are row vectors; affine maps are x * W + b with W shaped
//    [input_dim x output_dim]
//  - sequences are [T x dim] matrices; rows at positions >= length are pad
//    and come out as zeros
//  - every forward fills a cache that its backward consumes exactly once;
//    a second backward on the same cache throws std::logic_error
//  - parameter names: embedding "<p>.table"; rnn "<p>.W/.U/.b"; lstm
//    "<p>.W_i/.U_i/.b_i" and likewise for f, o, g; attention
//    "<p>.W_w/.b_w/.u_w"; conv "<p>.filters/.bias"; dense "<p>.W/.b"
//  - weight matrices are initialized uniform(-r, r), r = sqrt(6/(fan_in +
//    fan_out)); biases zero except the LSTM forget bias, initialized to 1

namespace ntc {

enum class Mode { Train, Eval };

// ---------------------------------------------------------------- embedding

struct EmbeddingCache {
  std::vector<int> ids;
  bool consumed = false;
};

class Embedding {
 public:
  // Table init: glorot over the full table, then the pad row (id 0) is
  // zeroed so pad lookups contribute nothing at the start of training.
  Embedding(ParamSet& ps, const std::string& prefix, std::size_t vocab_size,
            std::size_t dim, Rng& rng);

  // Row i of the result is table[ids[i]]. Out-of-range id throws
  // std::out_of_range.
  Tensor forward(const std::vector<int>& ids, EmbeddingCache& cache) const;
  void backward(EmbeddingCache& cache, const Tensor& grad_out) const;

  Param& table() const { return *table_; }
  std::size_t dim() const { return dim_; }

 private:
  Param* table_;
  std::size_t vocab_size_;
  std::size_t dim_;
};

// ----------------------------------------------------------------- dropout

struct DropoutCache {
  Tensor mask;  // empty in eval mode
  bool identity = false;
  bool consumed = false;
};

// Inverted dropout: train mode keeps each entry with probability 1-rate and
// scales kept entries by 1/(1-rate); eval mode returns x unchanged.
// rate outside [0, 1) throws std::invalid_argument.
Tensor dropout_forward(const Tensor& x, double rate, Mode mode, Rng& rng,
                       DropoutCache& cache);
Tensor dropout_backward(DropoutCache& cache, const Tensor& grad_out);

// --------------------------------------------------------------- simple RNN

struct RnnSeqCache {
  Tensor xs;  // [T x d], copy of the input sequence
  Tensor hs;  // [T x h]
  std::size_t length = 0;
  bool reversed = false;
  bool consumed = false;
};

class RnnCell {
 public:
  RnnCell(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
          std::size_t hidden, Rng& rng);

  // h_t = tanh(x * W + h_prev * U + b); pointers must span input_dim /
  // hidden entries.
  void step(const double* x, const double* h_prev, double* h_out) const;

  // Runs t = 0..length-1 (or reversed); rows >= length stay zero.
  Tensor run(const Tensor& seq, std::size_t length, RnnSeqCache& cache,
             bool reversed = false) const;
  // grad_hs is [T x h]; returns grad_seq [T x d] and accumulates parameter
  // gradients.
  Tensor run_backward(RnnSeqCache& cache, const Tensor& grad_hs) const;

  std::size_t hidden() const { return h_; }
  std::size_t input_dim() const { return d_; }

 private:
  Param *W_, *U_, *b_;
  std::size_t d_, h_;
};

// --------------------------------------------------------------------- LSTM

struct LstmSeqCache {
  Tensor xs;                            // [T x d]
  Tensor i, f, o, g, c, tanh_c, h;      // each [T x h]
  std::size_t length = 0;
  bool reversed = false;
  bool consumed = false;
};

// Four-gate LSTM, no peepholes:
//   i,f,o = sigmoid(x*W_g + h_prev*U_g + b_g), g = tanh(...)
//   c_t = f (*) c_prev + i (*) g,  h_t = o (*) tanh(c_t)
class LstmCell {
 public:
  LstmCell(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
           std::size_t hidden, Rng& rng);

  // Single step; gate buffers are optional scratch for callers that cache.
  void step(const double* x, const double* h_prev, const double* c_prev,
            double* h_out, double* c_out, double* i_out = nullptr,
            double* f_out = nullptr, double* o_out = nullptr,
            double* g_out = nullptr) const;

  Tensor run(const Tensor& seq, std::size_t length, LstmSeqCache& cache,
             bool reversed = false) const;
  Tensor run_backward(LstmSeqCache& cache, const Tensor& grad_hs) const;

  std::size_t hidden() const { return h_; }
  std::size_t input_dim() const { return d_; }

 private:
  Param *W_[4], *U_[4], *b_[4];  // order: i, f, o, g
  std::size_t d_, h_;
};

// Tensor-level convenience for the single-step contract.
std::pair<Tensor, Tensor> lstm_cell_step(const LstmCell& cell, const Tensor& x_t,
                                         const Tensor& h_prev, const Tensor& c_prev);

// ------------------------------------------------------------ bidirectional

class BiLstm {
 public:
  struct Cache {
    LstmSeqCache fwd, bwd;
    bool consumed = false;
  };

  BiLstm(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
         std::size_t hidden, Rng& rng);

  // [T x 2h]: row t is [h_fwd_t ; h_bwd_t]; pad rows are zero. length 0
  // throws std::invalid_argument.
  Tensor run(const Tensor& seq, std::size_t length, Cache& cache) const;
  Tensor run_backward(Cache& cache, const Tensor& grad_out) const;

  // [h_fwd(length-1) ; h_bwd(0)], the two directions' final states.
  Tensor final_states(const Cache& cache) const;

  std::size_t hidden() const { return fwd_.hidden(); }

 private:
  LstmCell fwd_, bwd_;
};

// ------------------------------------------------------------------ attention

struct AttentionCache {
  Tensor H;      // [T x in], copy of the input
  Tensor U;      // [T x a], tanh(H*W_w + b_w) over valid rows
  Tensor alpha;  // [T], zeros at pads
  std::size_t length = 0;
  bool consumed = false;
};

// Attention pooling: u_t = tanh(h_t*W_w + b_w), alpha = softmax over valid
// positions of u_t . u_w, s = sum_t alpha_t h_t.
class AttentionPool {
 public:
  AttentionPool(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
                std::size_t attn_dim, Rng& rng);

  // Returns (s [in], alpha [T]). length 0 (all-pad) throws
  // std::invalid_argument.
  std::pair<Tensor, Tensor> forward(const Tensor& H, std::size_t length,
                                    AttentionCache& cache) const;

  // grad_alpha may be an empty tensor when no gradient flows into the
  // weights directly. Returns grad_H [T x in].
  Tensor backward(AttentionCache& cache, const Tensor& grad_s,
                  const Tensor& grad_alpha = Tensor()) const;

  std::size_t input_dim() const { return in_; }

 private:
  Param *W_w_, *b_w_, *u_w_;
  std::size_t in_, a_;
};

// --------------------------------------------------------- conv + max pool

struct ConvCache {
  Tensor seq;                       // [T x d]
  std::vector<std::size_t> argmax;  // per filter, position of the max
  Tensor pre_relu_at_max;           // [F], pre-relu value at that position
  bool consumed = false;
};

// Valid 1-D convolution with relu and global max pooling:
//   a_{f,p} = relu(sum over window p of filter_f + bias_f), out_f = max_p a_{f,p}
class Conv1dMaxPool {
 public:
  Conv1dMaxPool(ParamSet& ps, const std::string& prefix, std::size_t width,
                std::size_t filters, std::size_t input_dim, Rng& rng);

  // T < width throws std::invalid_argument (sequence too short). Max ties
  // resolve to the earliest position.
  Tensor forward(const Tensor& seq, ConvCache& cache) const;  // [F]
  Tensor backward(ConvCache& cache, const Tensor& grad_out) const;

  std::size_t width() const { return w_; }
  std::size_t filters() const { return f_; }

 private:
  Param *filters_, *bias_;
  std::size_t w_, f_, d_;
};

// ------------------------------------------------------------ dense softmax

struct DenseCache {
  Tensor input;  // [n]
  Tensor probs;  // [K]
  bool consumed = false;
};

class DenseSoftmax {
 public:
  DenseSoftmax(ParamSet& ps, const std::string& prefix, std::size_t input_dim,
               std::size_t classes, Rng& rng);

  Tensor forward(const Tensor& v, DenseCache& cache) const;  // probs [K]

  // Takes the gradient at the logits (for cross-entropy that is
  // (probs - target) * scale, the standard combined form) and returns
  // grad_v [n].
  Tensor backward_logits(DenseCache& cache, const Tensor& grad_logits) const;

  std::size_t classes() const { return k_; }

 private:
  Param *W_, *b_;
  std::size_t n_, k_;
};

// -------------------------------------------------------------------- loss

// J = -(1/m) sum_i t_i . log(y_i) + lambda * ||theta||_F^2 over trainable
// parameters; log is clamped at 1e-12. Rows of onehot must be exact one-hot
// vectors or a std::invalid_argument (label error) is thrown.
double loss_ce_l2(const Tensor& probs, const Tensor& onehot, const ParamSet& theta,
                  double lambda);

// -log(max(probs[label], 1e-12)) for a single example.
double cross_entropy(const Tensor& probs, std::size_t label);

}  // namespace ntc
