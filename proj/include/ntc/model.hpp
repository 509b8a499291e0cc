#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ntc/graph.hpp"
#include "ntc/grad_check.hpp"
#include "ntc/layers.hpp"
#include "ntc/params.hpp"
#include "ntc/text.hpp"

namespace ntc {

enum class Arch { Rnn, Cnn, Lstm, Bilstm, Attn, BilstmAttn };

// Throws std::invalid_argument listing the valid tags on an unknown tag.
Arch arch_from_string(const std::string& tag);
const char* arch_to_string(Arch arch);
std::vector<std::string> arch_tags();

struct ModelConfig {
  Arch arch = Arch::BilstmAttn;
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 200;
  std::size_t hidden = 128;  // per direction
  std::size_t classes = 0;
  std::size_t max_len = 64;
  double dropout = 0.5;
  double lambda = 1e-4;
  std::uint64_t seed = 1;
  bool train_embedding = true;
  // Experimental: one GCN aggregation round over the BiLSTM states with the
  // adjacency derived from attention weights (bilstm-attn only).
  bool graph_round = false;
};

// Wiring per architecture (dropout only appears where listed):
//   bilstm-attn: embed -> dropout -> bilstm -> attention -> dropout -> dense
//   bilstm:      embed -> dropout -> bilstm -> [h_fwd(L);h_bwd(1)] -> dropout -> dense
//   lstm / rnn:  embed -> dropout -> recurrence -> final h -> dropout -> dense
//   cnn:         embed -> dropout -> conv widths {3,4,5} x 64 + max pool -> dense
//   attn:        embed -> attention over raw embeddings -> dense
//
// Parameter enumeration order (the checkpoint manifest order) is the layer
// construction order: embed.table, recurrent/conv/attention blocks in wiring
// order, head.W, head.b.
class Model {
 public:
  explicit Model(const ModelConfig& config);
  Model(const ModelConfig& config, const Tensor& pretrained_table);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  bool has_attention() const {
    return config_.arch == Arch::Attn || config_.arch == Arch::BilstmAttn;
  }

  struct ForwardResult {
    Tensor probs;                 // [B x K]
    std::vector<Tensor> alphas;   // per example; empty unless attention arch
    std::shared_ptr<struct BatchCaches> caches;
  };

  // Eval mode ignores rng and is a pure function of (params, batch).
  ForwardResult forward(const Batch& batch, Mode mode, Rng& rng);

  // Accumulates gradients of loss_ce_l2 (data term plus 2*lambda*theta) into
  // the parameter gradient slots and returns the loss.
  double backward(ForwardResult& result, const Batch& batch);

  struct Prediction {
    int label = 0;
    Tensor probs;
    std::vector<std::string> tokens;  // the encoded (possibly truncated) tokens
    std::vector<double> alpha;        // empty unless attention arch
  };

  // Eval-mode single-text prediction; argmax ties break toward the lowest
  // class id. Text that tokenizes to nothing throws std::invalid_argument.
  Prediction predict(const std::string& text, const Vocabulary& vocab);

 private:
  void build(Rng& rng);

  ModelConfig config_;
  ParamSet params_;
  std::unique_ptr<Embedding> embedding_;
  std::unique_ptr<RnnCell> rnn_;
  std::unique_ptr<LstmCell> lstm_;
  std::unique_ptr<BiLstm> bilstm_;
  std::unique_ptr<AttentionPool> attention_;
  std::vector<std::unique_ptr<Conv1dMaxPool>> convs_;
  Param* graph_w_ = nullptr;
  Param* graph_b_ = nullptr;
  std::unique_ptr<DenseSoftmax> head_;
};

// Central-difference check of the full model gradient on one batch: a fresh
// model is built from config for every probe point, so dropout (re-seeded
// from dropout_seed) and initialization replay exactly.
GradCheckReport model_grad_check(const ModelConfig& config, const Batch& batch,
                                 Mode mode, std::uint64_t dropout_seed, double epsilon,
                                 double tol);

// ----------------------------------------------------------- checkpoint IO
//
// NTC1 format: the line "NTC1", then "key=value" header lines (config
// fields, class_names as a JSON array, vocab_tokens space-joined), then one
// "param=<name> <dims...>" line per parameter in manifest order, then a
// "data" line followed by the raw little-endian 64-bit floats concatenated
// in manifest order.

struct LoadedModel {
  std::unique_ptr<Model> model;
  Vocabulary vocab;
  std::vector<std::string> class_names;
};

void save_checkpoint(const std::string& path, const Model& model,
                     const Vocabulary& vocab,
                     const std::vector<std::string>& class_names);

// Rejects bad magic, unknown/missing header keys, manifest/shape mismatch
// against the config-built model, and truncated data (std::runtime_error).
LoadedModel load_checkpoint(const std::string& path);

}  // namespace ntc
