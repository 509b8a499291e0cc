#include "ntc/grad_check.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace ntc {

unsigned thread_count() {
  const char* env = std::getenv("NTC_THREADS");
  if (!env) return 1;
  const long n = std::strtol(env, nullptr, 10);
  return n >= 1 ? static_cast<unsigned>(n) : 1;
}

GradCheckReport grad_check(const std::function<double(const Tensor&)>& f,
                           const Tensor& theta, const Tensor& analytic,
                           double epsilon, double tol) {
  if (!theta.same_shape(analytic)) {
    throw std::invalid_argument("grad_check: theta " + theta.shape_str() +
                                " vs analytic " + analytic.shape_str());
  }
  const std::size_t n = theta.size();
  GradCheckReport report;
  report.entries.resize(n);

  auto eval_range = [&](std::size_t lo, std::size_t hi) {
    Tensor probe = theta;  // one private copy per worker
    for (std::size_t i = lo; i < hi; ++i) {
      const double saved = probe[i];
      probe[i] = saved + epsilon;
      const double fp = f(probe);
      probe[i] = saved - epsilon;
      const double fm = f(probe);
      probe[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw std::runtime_error("grad_check: non-finite f at coordinate " +
                                 std::to_string(i));
      }
      const double numeric = (fp - fm) / (2.0 * epsilon);
      const double a = analytic[i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      report.entries[i] = {i, a, numeric, std::fabs(a - numeric) / denom};
    }
  };

  const unsigned workers = std::min<unsigned>(thread_count(), n > 0 ? n : 1);
  if (workers <= 1) {
    eval_range(0, n);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      threads.emplace_back([&, w, lo, hi] {
        try {
          eval_range(lo, hi);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (const auto& entry : report.entries) {
    if (entry.rel_err > report.max_rel_err) {
      report.max_rel_err = entry.rel_err;
      report.worst_index = entry.index;
    }
    if (entry.rel_err > tol) report.flagged.push_back(entry.index);
  }
  return report;
}

}  // namespace ntc
