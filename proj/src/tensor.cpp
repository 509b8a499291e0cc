#include "ntc/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ntc {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& shape) {
  if (shape.empty() || shape.size() > 3) {
    throw std::invalid_argument("Tensor rank must be 1, 2 or 3, got rank " +
                                std::to_string(shape.size()));
  }
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) {
      throw std::invalid_argument("Tensor dimensions must be >= 1");
    }
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_product(shape_), 0.0) {}

Tensor::Tensor(std::initializer_list<std::size_t> shape)
    : Tensor(std::vector<std::size_t>(shape)) {}

Tensor Tensor::zeros(std::initializer_list<std::size_t> shape) { return Tensor(shape); }

Tensor Tensor::full(std::initializer_list<std::size_t> shape, double value) {
  Tensor t(shape);
  t.fill(value);
  return t;
}

Tensor Tensor::of(std::initializer_list<double> values) {
  Tensor t({values.size()});
  std::size_t i = 0;
  for (double v : values) t.data_[i++] = v;
  return t;
}

Tensor Tensor::of_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = rows.begin()->size();
  Tensor t({r, c});
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) {
      throw std::invalid_argument("of_rows: ragged rows");
    }
    for (double v : row) t.data_[i++] = v;
  }
  return t;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

std::size_t Tensor::row_stride() const {
  std::size_t s = 1;
  for (std::size_t i = 1; i < shape_.size(); ++i) s *= shape_[i];
  return s;
}

void Tensor::fill(double value) {
  for (double& v : data_) v = value;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("matmul: incompatible shapes " + a.shape_str() +
                                " x " + b.shape_str());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  // i-k-j order keeps the inner loop contiguous over b and out.
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      axpy(av, b.row(p), orow, n);
    }
  }
  return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor elementwise(Unary fn, const Tensor& x) {
  Tensor out = x;
  auto& d = out.data();
  switch (fn) {
    case Unary::Tanh:
      for (double& v : d) v = std::tanh(v);
      break;
    case Unary::Sigmoid:
      for (double& v : d) v = sigmoid(v);
      break;
    case Unary::Relu:
      for (double& v : d) v = v > 0.0 ? v : 0.0;
      break;
    case Unary::Exp:
      for (double& v : d) v = std::exp(v);
      break;
    case Unary::Log:
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0)) {
          throw std::domain_error("elementwise log: nonpositive entry at flat index " +
                                  std::to_string(i));
        }
        d[i] = std::log(d[i]);
      }
      break;
  }
  return out;
}

Tensor softmax_rows(const Tensor& x) {
  const std::size_t rows = x.rank() == 1 ? 1 : x.dim(0);
  const std::size_t cols = x.rank() == 1 ? x.dim(0) : x.dim(1);
  Tensor out = x;
  for (std::size_t i = 0; i < rows; ++i) {
    double* r = out.data().data() + i * cols;
    double mx = r[0];
    for (std::size_t j = 0; j < cols; ++j) {
      if (std::isnan(r[j])) {
        throw std::domain_error("softmax_rows: NaN entry in row " + std::to_string(i));
      }
      if (r[j] > mx) mx = r[j];
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      r[j] = std::exp(r[j] - mx);
      sum += r[j];
    }
    for (std::size_t j = 0; j < cols; ++j) r[j] /= sum;
  }
  return out;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void vec_mat_accum(const double* x, const double* w, std::size_t rows,
                   std::size_t cols, double* out) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    axpy(xi, w + i * cols, out, cols);
  }
}

void mat_vec_accum(const double* dy, const double* w, std::size_t rows,
                   std::size_t cols, double* dx) {
  for (std::size_t i = 0; i < rows; ++i) {
    dx[i] += dot(dy, w + i * cols, cols);
  }
}

void outer_accum(const double* x, const double* dy, std::size_t rows,
                 std::size_t cols, double* dw) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    axpy(xi, dy, dw + i * cols, cols);
  }
}

}  // namespace ntc
