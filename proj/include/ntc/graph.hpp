#pragma once

#include "ntc/tensor.hpp"

namespace ntc {

// Node features plus a nonnegative weighted adjacency. A[i][j] is the
// contribution weight of neighbor j to node i; zero means no edge.
struct WeightedGraph {
  Tensor adjacency;  // [N x N]
  Tensor features;   // [N x f]
  std::size_t nodes() const { return adjacency.dim(0); }
};

struct GcnCache {
  Tensor adjacency;   // [N x N]
  Tensor features;    // [N x f]
  Tensor weight;      // [f x f']
  Tensor transformed; // [N x f'], rows h_j * W
  Tensor pre_relu;    // [N x f']
  bool apply_relu = true;
  bool consumed = false;
};

struct GcnGradients {
  Tensor features;   // [N x f]
  Tensor weight;     // [f x f']
  Tensor bias;       // [f']
  Tensor adjacency;  // [N x N]; zero wherever A was structurally zero
};

// One aggregation round: h'_i = relu(sum_j A_ij (h_j W) + b). A is used as
// given (no row normalization). apply_relu=false is a debug mode exposing
// the pre-activation for linearity checks. Negative adjacency entries throw
// std::invalid_argument.
Tensor gcn_aggregate(const WeightedGraph& g, const Tensor& weight, const Tensor& bias,
                     GcnCache& cache, bool apply_relu = true);

// Analytic gradients of the aggregation; relu subgradient is 0 at 0.
GcnGradients gcn_backward(GcnCache& cache, const Tensor& grad_out);

}  // namespace ntc
