#include "ntc/params.hpp"

#include <cmath>
#include <stdexcept>

namespace ntc {

Param& ParamSet::add(const std::string& name, std::vector<std::size_t> shape) {
  if (index_.count(name)) {
    throw std::invalid_argument("ParamSet: duplicate parameter name " + name);
  }
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Tensor(shape);
  p->grad = Tensor(std::move(shape));
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Param& ParamSet::add_glorot(const std::string& name, std::size_t fan_in,
                            std::size_t fan_out, std::vector<std::size_t> shape,
                            Rng& rng) {
  Param& p = add(name, std::move(shape));
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : p.value.data()) v = rng.uniform(-r, r);
  return p;
}

Param& ParamSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("ParamSet: no parameter named " + name);
  }
  return *params_[it->second];
}

const Param& ParamSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("ParamSet: no parameter named " + name);
  }
  return *params_[it->second];
}

void ParamSet::zero_grads() {
  for (auto& p : params_) p->grad.zero();
}

std::size_t ParamSet::trainable_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p->trainable) n += p->value.size();
  }
  return n;
}

Tensor ParamSet::flatten_values() const {
  Tensor flat({std::max<std::size_t>(trainable_size(), 1)});
  std::size_t k = 0;
  for (const auto& p : params_) {
    if (!p->trainable) continue;
    for (double v : p->value.data()) flat[k++] = v;
  }
  return flat;
}

void ParamSet::unflatten_values(const Tensor& flat) {
  if (flat.size() != trainable_size()) {
    throw std::invalid_argument("ParamSet: flat vector size " +
                                std::to_string(flat.size()) + " != trainable size " +
                                std::to_string(trainable_size()));
  }
  std::size_t k = 0;
  for (auto& p : params_) {
    if (!p->trainable) continue;
    for (double& v : p->value.data()) v = flat[k++];
  }
}

Tensor ParamSet::flatten_grads() const {
  Tensor flat({std::max<std::size_t>(trainable_size(), 1)});
  std::size_t k = 0;
  for (const auto& p : params_) {
    if (!p->trainable) continue;
    for (double v : p->grad.data()) flat[k++] = v;
  }
  return flat;
}

double ParamSet::squared_norm() const {
  double s = 0.0;
  for (const auto& p : params_) {
    if (!p->trainable) continue;
    for (double v : p->value.data()) s += v * v;
  }
  return s;
}

}  // namespace ntc
