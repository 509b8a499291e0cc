#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>

#include "ntc/grad_check.hpp"
#include "ntc/rng.hpp"
#include "ntc/tensor.hpp"

using namespace ntc;

namespace {

Tensor random_tensor(std::initializer_list<std::size_t> shape, Rng& rng) {
  Tensor t(shape);
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

}  // namespace

TEST_CASE("matmul identity and zero") {
  const Tensor a = Tensor::of_rows({{1, 2}, {3, 4}});
  const Tensor eye = Tensor::of_rows({{1, 0}, {0, 1}});
  CHECK(matmul(a, eye) == a);

  const Tensor zero({2, 3});
  const Tensor prod = matmul(a, Tensor({2, 3}));
  CHECK(prod == zero);
}

TEST_CASE("matmul 2x2 worked example") {
  const Tensor a = Tensor::of_rows({{1, 2}, {3, 4}});
  const Tensor b = Tensor::of_rows({{5, 6}, {7, 8}});
  const Tensor c = matmul(a, b);
  CHECK(c == Tensor::of_rows({{19, 22}, {43, 50}}));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  const Tensor a({2, 3});
  const Tensor b({2, 3});
  CHECK_THROWS_WITH_AS(matmul(a, b),
                       doctest::Contains("[2x3]"), std::invalid_argument);
}

TEST_CASE("matmul associativity on random tensors") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_tensor({3, 4}, rng);
    const Tensor b = random_tensor({4, 5}, rng);
    const Tensor c = random_tensor({5, 2}, rng);
    const Tensor left = matmul(matmul(a, b), c);
    const Tensor right = matmul(a, matmul(b, c));
    double worst = 0.0;
    for (std::size_t i = 0; i < left.size(); ++i) {
      worst = std::max(worst, std::fabs(left[i] - right[i]));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("elementwise basics") {
  const Tensor zeros({3});
  CHECK(elementwise(Unary::Tanh, zeros) == zeros);

  const Tensor relu_in = Tensor::of({-1, 0, 2});
  const Tensor relu_out = elementwise(Unary::Relu, relu_in);
  CHECK(relu_out == Tensor::of({0, 0, 2}));

  const Tensor sig = elementwise(Unary::Sigmoid, Tensor::of({0.0, std::log(3.0)}));
  CHECK(sig[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sig[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("log rejects nonpositive entries naming the index") {
  const Tensor x = Tensor::of({1.0, -2.0, 3.0});
  CHECK_THROWS_WITH_AS(elementwise(Unary::Log, x), doctest::Contains("index 1"),
                       std::domain_error);
}

TEST_CASE("softmax rows") {
  const Tensor uniform = softmax_rows(Tensor::of({0, 0, 0}));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(uniform[i] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  }

  const Tensor stable = softmax_rows(Tensor::of({1000, 0, 0}));
  CHECK(stable.all_finite());
  CHECK(stable[0] == doctest::Approx(1.0).epsilon(1e-12));

  const Tensor probs = softmax_rows(Tensor::of({1, 2, 3}));
  CHECK(probs[0] == doctest::Approx(0.09003).epsilon(1e-4));
  CHECK(probs[1] == doctest::Approx(0.24473).epsilon(1e-4));
  CHECK(probs[2] == doctest::Approx(0.66524).epsilon(1e-4));

  CHECK_THROWS_AS(softmax_rows(Tensor::of({std::nan(""), 0})), std::domain_error);
}

TEST_CASE("softmax rows sum to one within 1e-12 at large magnitudes") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor x({4, 6});
    for (double& v : x.data()) v = rng.uniform(-1e3, 1e3);
    const Tensor y = softmax_rows(x);
    for (std::size_t i = 0; i < 4; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        sum += y.at(i, j);
        // entries this far apart underflow to exactly 0, which is fine;
        // the contract is stability plus the row sum
        CHECK(y.at(i, j) >= 0.0);
        CHECK(y.at(i, j) < 1.0 + 1e-12);
      }
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("rng reproducibility over 1e4 draws") {
  Rng a(123456), b(123456);
  for (int i = 0; i < 10000; ++i) {
    REQUIRE(a.next_u64() == b.next_u64());
  }
  Rng c(123456), d(999);
  bool all_equal = true;
  for (int i = 0; i < 100; ++i) all_equal &= c.next_u64() == d.next_u64();
  CHECK_FALSE(all_equal);
}

TEST_CASE("grad_check on a quadratic") {
  const Tensor theta = Tensor::of({1, 2});
  const auto f = [](const Tensor& t) { return t[0] * t[0] + t[1] * t[1]; };
  const Tensor analytic = Tensor::of({2, 4});
  const auto report = grad_check(f, theta, analytic, 1e-5, 1e-6);
  CHECK(report.passed());
  CHECK(report.entries[0].numeric == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(report.entries[1].numeric == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(report.max_rel_err < 1e-8);
}

TEST_CASE("grad_check on a constant function") {
  const Tensor theta = Tensor::of({0.3, -0.7, 2.0});
  const auto f = [](const Tensor&) { return 5.0; };
  const auto report = grad_check(f, theta, Tensor({3}), 1e-5, 1e-6);
  CHECK(report.passed());
  for (const auto& e : report.entries) CHECK(std::fabs(e.numeric) < 1e-9);
}

TEST_CASE("grad_check flags a wrong analytic gradient") {
  const Tensor theta = Tensor::of({1.0});
  const auto f = [](const Tensor& t) { return t[0] * t[0]; };
  const auto report = grad_check(f, theta, Tensor::of({3.0}), 1e-5, 1e-6);
  CHECK_FALSE(report.passed());
  CHECK(report.flagged == std::vector<std::size_t>{0});
}

TEST_CASE("grad_check rejects non-finite f") {
  const auto f = [](const Tensor& t) { return std::log(t[0]); };
  CHECK_THROWS_AS(grad_check(f, Tensor::of({-1.0}), Tensor::of({0.0}), 1e-5, 1e-6),
                  std::runtime_error);
}

TEST_CASE("grad_check of an elementwise/matmul composition") {
  // f(theta) = sum(tanh(x * W)) with theta = flattened W
  Rng rng(11);
  const Tensor x = random_tensor({2, 3}, rng);
  const Tensor w0 = random_tensor({3, 4}, rng);
  const auto f = [&x](const Tensor& flat) {
    Tensor w({3, 4});
    for (std::size_t i = 0; i < flat.size(); ++i) w[i] = flat[i];
    const Tensor y = elementwise(Unary::Tanh, matmul(x, w));
    double s = 0.0;
    for (double v : y.data()) s += v;
    return s;
  };
  // analytic: dW = x^T (1 - y^2)
  const Tensor y = elementwise(Unary::Tanh, matmul(x, w0));
  Tensor analytic({12});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double g = 0.0;
      for (std::size_t r = 0; r < 2; ++r) {
        g += x.at(r, i) * (1.0 - y.at(r, j) * y.at(r, j));
      }
      analytic[i * 4 + j] = g;
    }
  }
  Tensor flat({12});
  for (std::size_t i = 0; i < 12; ++i) flat[i] = w0[i];
  const auto report = grad_check(f, flat, analytic, 1e-5, 1e-6);
  CHECK(report.passed());
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("grad_check result is independent of thread count") {
  Rng rng(5);
  const Tensor theta = random_tensor({17}, rng);
  const auto f = [](const Tensor& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += std::sin(t[i]) * (1.0 + double(i));
    return s;
  };
  Tensor analytic({17});
  for (std::size_t i = 0; i < 17; ++i) analytic[i] = std::cos(theta[i]) * (1.0 + double(i));

  const auto serial = grad_check(f, theta, analytic, 1e-5, 1e-6);
  setenv("NTC_THREADS", "4", 1);
  const auto parallel = grad_check(f, theta, analytic, 1e-5, 1e-6);
  unsetenv("NTC_THREADS");

  REQUIRE(serial.entries.size() == parallel.entries.size());
  for (std::size_t i = 0; i < serial.entries.size(); ++i) {
    CHECK(serial.entries[i].numeric == parallel.entries[i].numeric);
    CHECK(serial.entries[i].rel_err == parallel.entries[i].rel_err);
  }
  CHECK(serial.max_rel_err == parallel.max_rel_err);
}

TEST_CASE("tensor shape validation") {
  CHECK_THROWS_AS(Tensor({0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor({1, 2, 3, 4}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor(std::vector<std::size_t>{}), std::invalid_argument);
}
