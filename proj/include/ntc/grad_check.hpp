#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ntc/tensor.hpp"

namespace ntc {

struct GradCheckEntry {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;   // one per coordinate of theta
  std::vector<std::size_t> flagged;      // indices with rel_err > tol
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  bool passed() const { return flagged.empty(); }
};

// Central-difference check of an analytic gradient:
//   numeric_i = (f(theta + eps*e_i) - f(theta - eps*e_i)) / (2*eps)
//   rel_err_i = |analytic_i - numeric_i| / max(|analytic_i|, |numeric_i|, 1e-8)
//
// f must be a pure function of theta. Throws std::runtime_error if f
// returns a non-finite value at any probe point. Coordinates are evaluated
// in parallel when NTC_THREADS > 1; the report does not depend on the
// evaluation order.
GradCheckReport grad_check(const std::function<double(const Tensor&)>& f,
                           const Tensor& theta, const Tensor& analytic,
                           double epsilon, double tol);

// Thread count for parallel-eligible sections: value of NTC_THREADS when
// set and >= 1, otherwise 1.
unsigned thread_count();

}  // namespace ntc
