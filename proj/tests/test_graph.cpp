#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ntc/grad_check.hpp"
#include "ntc/graph.hpp"
#include "ntc/rng.hpp"

using namespace ntc;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

WeightedGraph random_graph(std::size_t n, std::size_t f, Rng& rng) {
  WeightedGraph g;
  g.adjacency = Tensor({n, n});
  for (double& v : g.adjacency.data()) {
    v = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.1, 1.0);
  }
  g.features = random_tensor({n, f}, rng, -1.0, 1.0);
  return g;
}

}  // namespace

TEST_CASE("identity adjacency with identity weight passes features through") {
  WeightedGraph g;
  g.adjacency = Tensor::of_rows({{1, 0}, {0, 1}});
  g.features = Tensor::of_rows({{0.5, 2.0}, {3.0, 0.25}});  // nonnegative
  const Tensor w = Tensor::of_rows({{1, 0}, {0, 1}});
  GcnCache cache;
  const Tensor out = gcn_aggregate(g, w, Tensor({2}), cache);
  CHECK(out == g.features);
}

TEST_CASE("empty neighborhoods give relu(bias) rows") {
  WeightedGraph g;
  g.adjacency = Tensor({3, 3});
  g.features = Tensor({3, 2});
  const Tensor w = Tensor::of_rows({{1, 0, 0}, {0, 1, 0}});
  const Tensor b = Tensor::of({0.5, -0.5, 2.0});
  GcnCache cache;
  const Tensor out = gcn_aggregate(g, w, b, cache);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out.at(i, 0) == 0.5);
    CHECK(out.at(i, 1) == 0.0);  // relu clamps the negative bias
    CHECK(out.at(i, 2) == 2.0);
  }
}

TEST_CASE("two-node worked example") {
  WeightedGraph g;
  g.adjacency = Tensor::of_rows({{0, 1}, {1, 0}});
  g.features = Tensor::of_rows({{1, -2}, {3, 4}});
  const Tensor w = Tensor::of_rows({{1, 0}, {0, 1}});
  GcnCache cache;
  const Tensor out = gcn_aggregate(g, w, Tensor({2}), cache);
  CHECK(out == Tensor::of_rows({{3, 4}, {1, 0}}));
}

TEST_CASE("negative adjacency entries are rejected") {
  WeightedGraph g;
  g.adjacency = Tensor::of_rows({{0, -1}, {1, 0}});
  g.features = Tensor({2, 2});
  GcnCache cache;
  CHECK_THROWS_AS(gcn_aggregate(g, Tensor({2, 2}), Tensor({2}), cache),
                  std::invalid_argument);
}

TEST_CASE("outputs are nonnegative") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const WeightedGraph g = random_graph(4, 3, rng);
    const Tensor w = random_tensor({3, 3}, rng, -1.0, 1.0);
    const Tensor b = random_tensor({3}, rng, -1.0, 1.0);
    GcnCache cache;
    const Tensor out = gcn_aggregate(g, w, b, cache);
    for (double v : out.data()) CHECK(v >= 0.0);
  }
}

TEST_CASE("relu-free debug mode is linear in the adjacency") {
  Rng rng(8);
  const WeightedGraph g = random_graph(4, 3, rng);
  const Tensor w = random_tensor({3, 2}, rng, -1.0, 1.0);
  const Tensor b = Tensor({2});

  GcnCache c1, c2;
  const Tensor once = gcn_aggregate(g, w, b, c1, /*apply_relu=*/false);
  WeightedGraph doubled = g;
  for (double& v : doubled.adjacency.data()) v *= 2.0;
  const Tensor twice = gcn_aggregate(doubled, w, b, c2, /*apply_relu=*/false);
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(twice[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
  }
}

TEST_CASE("gcn backward matches central differences away from relu kinks") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 4, fi = 3, fo = 2;
    const WeightedGraph g = random_graph(n, fi, rng);
    const Tensor w = random_tensor({fi, fo}, rng, -1.0, 1.0);
    // bias away from zero pushes pre-activations off the kink
    Tensor b = random_tensor({fo}, rng, 0.4, 0.9);
    const Tensor grad_out = random_tensor({n, fo}, rng, -1.0, 1.0);

    GcnCache cache;
    gcn_aggregate(g, w, b, cache);
    const GcnGradients grads = gcn_backward(cache, grad_out);

    const auto weighted_output = [&](const WeightedGraph& gg, const Tensor& ww,
                                     const Tensor& bb) {
      GcnCache c;
      const Tensor out = gcn_aggregate(gg, ww, bb, c);
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * grad_out[i];
      return s;
    };

    SUBCASE("weight") {
      Tensor flat({fi * fo}), analytic({fi * fo});
      for (std::size_t i = 0; i < flat.size(); ++i) {
        flat[i] = w[i];
        analytic[i] = grads.weight[i];
      }
      const auto f = [&](const Tensor& theta) {
        Tensor ww({fi, fo});
        for (std::size_t i = 0; i < theta.size(); ++i) ww[i] = theta[i];
        return weighted_output(g, ww, b);
      };
      CHECK(grad_check(f, flat, analytic, 1e-5, 1e-4).passed());
    }
    SUBCASE("bias") {
      const auto f = [&](const Tensor& theta) { return weighted_output(g, w, theta); };
      CHECK(grad_check(f, b, grads.bias, 1e-5, 1e-4).passed());
    }
    SUBCASE("features") {
      Tensor flat({n * fi}), analytic({n * fi});
      for (std::size_t i = 0; i < flat.size(); ++i) {
        flat[i] = g.features[i];
        analytic[i] = grads.features[i];
      }
      const auto f = [&](const Tensor& theta) {
        WeightedGraph gg = g;
        for (std::size_t i = 0; i < theta.size(); ++i) gg.features[i] = theta[i];
        return weighted_output(gg, w, b);
      };
      CHECK(grad_check(f, flat, analytic, 1e-5, 1e-4).passed());
    }
    SUBCASE("adjacency nonzeros") {
      // probe only structural nonzeros; zero entries are masked by contract
      std::vector<std::size_t> live;
      for (std::size_t i = 0; i < g.adjacency.size(); ++i) {
        if (g.adjacency[i] > 0.0) live.push_back(i);
      }
      Tensor flat({live.size()}), analytic({live.size()});
      for (std::size_t k = 0; k < live.size(); ++k) {
        flat[k] = g.adjacency[live[k]];
        analytic[k] = grads.adjacency[live[k]];
      }
      const auto f = [&](const Tensor& theta) {
        WeightedGraph gg = g;
        for (std::size_t k = 0; k < theta.size(); ++k) {
          gg.adjacency[live[k]] = theta[k];
        }
        return weighted_output(gg, w, b);
      };
      CHECK(grad_check(f, flat, analytic, 1e-5, 1e-4).passed());
    }
  }
}

TEST_CASE("structural zeros carry no gradient and zero grad_out zeroes everything") {
  Rng rng(17);
  const WeightedGraph g = random_graph(5, 3, rng);
  const Tensor w = random_tensor({3, 3}, rng, -1.0, 1.0);
  const Tensor b = random_tensor({3}, rng, -1.0, 1.0);

  GcnCache cache;
  gcn_aggregate(g, w, b, cache);
  const GcnGradients grads = gcn_backward(cache, Tensor::full({5, 3}, 1.0));
  for (std::size_t i = 0; i < g.adjacency.size(); ++i) {
    if (g.adjacency[i] == 0.0) CHECK(grads.adjacency[i] == 0.0);
  }

  GcnCache cache2;
  gcn_aggregate(g, w, b, cache2);
  const GcnGradients zero = gcn_backward(cache2, Tensor({5, 3}));
  for (double v : zero.weight.data()) CHECK(v == 0.0);
  for (double v : zero.bias.data()) CHECK(v == 0.0);
  for (double v : zero.features.data()) CHECK(v == 0.0);
  for (double v : zero.adjacency.data()) CHECK(v == 0.0);

  CHECK_THROWS_AS(gcn_backward(cache2, Tensor({5, 3})), std::logic_error);
}

TEST_CASE("node permutation equivariance") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5, f = 3;
    const WeightedGraph g = random_graph(n, f, rng);
    const Tensor w = random_tensor({f, f}, rng, -1.0, 1.0);
    const Tensor b = random_tensor({f}, rng, -1.0, 1.0);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.next_below(i + 1)]);
    }

    WeightedGraph permuted;
    permuted.adjacency = Tensor({n, n});
    permuted.features = Tensor({n, f});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        permuted.adjacency.at(i, j) = g.adjacency.at(perm[i], perm[j]);
      }
      for (std::size_t d = 0; d < f; ++d) {
        permuted.features.at(i, d) = g.features.at(perm[i], d);
      }
    }

    GcnCache c1, c2;
    const Tensor base = gcn_aggregate(g, w, b, c1);
    const Tensor moved = gcn_aggregate(permuted, w, b, c2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < f; ++d) {
        CHECK(moved.at(i, d) == doctest::Approx(base.at(perm[i], d)).epsilon(1e-12));
      }
    }
  }
}
