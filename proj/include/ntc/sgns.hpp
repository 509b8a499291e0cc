#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ntc/rng.hpp"
#include "ntc/tensor.hpp"
#include "ntc/text.hpp"

namespace ntc {

// Skip-gram with negative sampling. Defaults follow the common word2vec
// settings; dim matches the embedding dimension used by the models.
struct SgnsConfig {
  std::size_t dim = 200;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;      // linear decay over all epochs
  double min_learning_rate = 1e-4;   // decay floor
  double subsample = 1e-3;           // frequent-word subsampling threshold
  std::uint64_t seed = 1;
};

// (center, context) pairs with a per-position window size drawn uniformly
// from 1..window. Pad and unk ids never appear on either side. Passing
// rng == nullptr fixes the window at its maximum (diagnostic mode).
std::vector<std::pair<int, int>> generate_pairs(const std::vector<int>& ids,
                                                std::size_t window, Rng* rng);

// Objective for one (center, positive, negatives) step:
//   L = -log(sigmoid(c.v_pos)) - sum_neg log(sigmoid(-c.v_neg))
// Gradients are accumulated into the given slots (any may be nullptr).
// Exposed separately so the per-pair gradient can be finite-difference
// checked.
double sgns_pair_objective(const double* center, const double* positive,
                           const std::vector<const double*>& negatives,
                           std::size_t dim, double* grad_center,
                           double* grad_positive,
                           const std::vector<double*>& grad_negatives);

struct SgnsResult {
  Tensor table;                     // [vocab_size x dim] center vectors
  std::vector<double> epoch_losses; // mean per-pair loss per epoch
};

// Sequential deterministic trainer. Center table init uniform(-0.5/dim,
// 0.5/dim) with the pad row zeroed; output table zeros. Negatives are drawn
// from the unigram^(3/4) distribution over ids >= 2. Empty corpus (no
// trainable token) throws std::runtime_error.
SgnsResult sgns_train(const std::vector<std::vector<int>>& corpus,
                      std::size_t vocab_size, const SgnsConfig& config);

struct Neighbor {
  int id;
  std::string token;
  double cosine;
};

// k nearest rows by cosine, query excluded, ties broken by id; pad/unk are
// never reported. Unknown token throws std::out_of_range.
std::vector<Neighbor> nearest_neighbors(const Tensor& table, const std::string& token,
                                        std::size_t k, const Vocabulary& vocab);

// Text embedding format: first line "<count> <dim>", then one line per
// token: the token followed by dim decimals. Values round-trip exactly.
void save_embeddings(const std::string& path, const Tensor& table,
                     const Vocabulary& vocab);

// Requires a row for every vocabulary token and dim consistency; anything
// else is a std::runtime_error naming the problem.
Tensor load_embeddings(const std::string& path, const Vocabulary& vocab);

}  // namespace ntc
