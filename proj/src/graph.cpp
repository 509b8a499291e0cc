#include "ntc/graph.hpp"

#include <stdexcept>
#include <string>

namespace ntc {

Tensor gcn_aggregate(const WeightedGraph& g, const Tensor& weight, const Tensor& bias,
                     GcnCache& cache, bool apply_relu) {
  const std::size_t n = g.adjacency.dim(0);
  if (g.adjacency.rank() != 2 || g.adjacency.dim(1) != n) {
    throw std::invalid_argument("gcn: adjacency must be square, got " +
                                g.adjacency.shape_str());
  }
  if (g.features.rank() != 2 || g.features.dim(0) != n) {
    throw std::invalid_argument("gcn: features " + g.features.shape_str() +
                                " inconsistent with " + std::to_string(n) + " nodes");
  }
  if (weight.rank() != 2 || weight.dim(0) != g.features.dim(1) ||
      bias.size() != weight.dim(1)) {
    throw std::invalid_argument("gcn: weight " + weight.shape_str() + " / bias " +
                                bias.shape_str() + " inconsistent with features " +
                                g.features.shape_str());
  }
  for (std::size_t i = 0; i < g.adjacency.size(); ++i) {
    if (g.adjacency[i] < 0.0) {
      throw std::invalid_argument("gcn: negative adjacency entry at flat index " +
                                  std::to_string(i));
    }
  }

  const std::size_t fo = weight.dim(1);
  cache.adjacency = g.adjacency;
  cache.features = g.features;
  cache.weight = weight;
  cache.transformed = matmul(g.features, weight);
  cache.pre_relu = Tensor({n, fo});
  cache.apply_relu = apply_relu;
  cache.consumed = false;

  for (std::size_t i = 0; i < n; ++i) {
    double* pre = cache.pre_relu.row(i);
    for (std::size_t j = 0; j < fo; ++j) pre[j] = bias[j];
    for (std::size_t j = 0; j < n; ++j) {
      const double a = g.adjacency.at(i, j);
      if (a == 0.0) continue;
      axpy(a, cache.transformed.row(j), pre, fo);
    }
  }
  if (!apply_relu) return cache.pre_relu;
  return elementwise(Unary::Relu, cache.pre_relu);
}

GcnGradients gcn_backward(GcnCache& cache, const Tensor& grad_out) {
  if (cache.consumed) throw std::logic_error("gcn: cache already consumed");
  cache.consumed = true;
  const std::size_t n = cache.adjacency.dim(0);
  const std::size_t fi = cache.features.dim(1);
  const std::size_t fo = cache.pre_relu.dim(1);
  if (!grad_out.same_shape(cache.pre_relu)) {
    throw std::invalid_argument("gcn: grad_out " + grad_out.shape_str() +
                                " does not match output " + cache.pre_relu.shape_str());
  }

  Tensor dpre = grad_out;
  if (cache.apply_relu) {
    for (std::size_t i = 0; i < dpre.size(); ++i) {
      if (cache.pre_relu[i] <= 0.0) dpre[i] = 0.0;
    }
  }

  GcnGradients grads;
  grads.bias = Tensor({fo});
  grads.adjacency = Tensor({n, n});
  Tensor dtransformed({n, fo});
  for (std::size_t i = 0; i < n; ++i) {
    const double* dp = dpre.row(i);
    axpy(1.0, dp, grads.bias.data().data(), fo);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = cache.adjacency.at(i, j);
      if (a == 0.0) continue;  // structural zero: no edge, no gradient
      grads.adjacency.at(i, j) = dot(dp, cache.transformed.row(j), fo);
      axpy(a, dp, dtransformed.row(j), fo);
    }
  }
  grads.weight = Tensor({fi, fo});
  grads.features = Tensor({n, fi});
  for (std::size_t j = 0; j < n; ++j) {
    outer_accum(cache.features.row(j), dtransformed.row(j), fi, fo,
                grads.weight.data().data());
    mat_vec_accum(dtransformed.row(j), cache.weight.data().data(), fi, fo,
                  grads.features.row(j));
  }
  return grads;
}

}  // namespace ntc
