#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace ntc {

// Dense row-major tensor of 64-bit floats, rank 1..3.
// All training math in this project runs on doubles; gradient-check
// tolerances assume it.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::initializer_list<std::size_t> shape);

  static Tensor zeros(std::initializer_list<std::size_t> shape);
  static Tensor full(std::initializer_list<std::size_t> shape, double value);
  // Rank-1 tensor from values.
  static Tensor of(std::initializer_list<double> values);
  // Rank-2 tensor from rows; all rows must have equal length.
  static Tensor of_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;  // e.g. "[3x4]"

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  // Pointer to row i of a rank-2 tensor (or plane i of rank-3).
  double* row(std::size_t i) { return data_.data() + i * row_stride(); }
  const double* row(std::size_t i) const { return data_.data() + i * row_stride(); }
  std::size_t row_stride() const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double value);
  void zero() { fill(0.0); }
  bool all_finite() const;

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

enum class Unary { Tanh, Sigmoid, Relu, Exp, Log };

// Standard row-major matrix product [m x k] * [k x n] -> [m x n].
Tensor matmul(const Tensor& a, const Tensor& b);

// fn applied entrywise; shape preserved. Log throws std::domain_error
// naming the first nonpositive entry's flat index.
Tensor elementwise(Unary fn, const Tensor& x);

double sigmoid(double x);

// Row-wise softmax with per-row max subtraction. Rank-1 input is treated
// as a single row. NaN input throws std::domain_error.
Tensor softmax_rows(const Tensor& x);

// ---- small dense helpers shared by the layer kernels ----

// y += a * x over n entries.
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
// out[j] += sum_i x[i] * w[i*cols + j]; the row-vector product x * W.
void vec_mat_accum(const double* x, const double* w, std::size_t rows,
                   std::size_t cols, double* out);
// dx[i] += sum_j dy[j] * w[i*cols + j]; gradient of vec_mat_accum w.r.t. x.
void mat_vec_accum(const double* dy, const double* w, std::size_t rows,
                   std::size_t cols, double* dx);
// dw[i*cols + j] += x[i] * dy[j]; outer-product gradient w.r.t. w.
void outer_accum(const double* x, const double* dy, std::size_t rows,
                 std::size_t cols, double* dw);

}  // namespace ntc
