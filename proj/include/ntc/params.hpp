#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "ntc/rng.hpp"
#include "ntc/tensor.hpp"

namespace ntc {

// One named parameter tensor with its gradient slot. Layers hold Param*
// into a ParamSet; the set owns storage and fixes enumeration order.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

class ParamSet {
 public:
  // Zero-initialized parameter. Name must be unique within the set.
  Param& add(const std::string& name, std::vector<std::size_t> shape);
  // Glorot-style uniform(-r, r) init with r = sqrt(6 / (fan_in + fan_out)).
  Param& add_glorot(const std::string& name, std::size_t fan_in, std::size_t fan_out,
                    std::vector<std::size_t> shape, Rng& rng);

  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  // Insertion order; this order is the checkpoint manifest order.
  const std::vector<std::unique_ptr<Param>>& all() const { return params_; }
  std::size_t count() const { return params_.size(); }

  void zero_grads();

  // Trainable coordinates only, concatenated in enumeration order.
  std::size_t trainable_size() const;
  Tensor flatten_values() const;
  void unflatten_values(const Tensor& flat);
  Tensor flatten_grads() const;

  // ||theta||_F^2 over trainable parameters.
  double squared_norm() const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace ntc
