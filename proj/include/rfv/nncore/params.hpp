#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rfv/nncore/tensor.hpp"

namespace rfv::nn {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
};

enum class InitScheme { kUniformFanIn, kZeros };

// Deterministic per (shape, scheme, seed). kUniformFanIn draws from
// U(-1/sqrt(rows), 1/sqrt(rows)), rows being the fan-in of an x*W weight.
Tensor seeded_init(std::size_t rows, std::size_t cols, InitScheme scheme, std::uint64_t seed);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled, applied as w -= lr * wd * w
};

// Named parameters with gradients and Adam moments. Param addresses are
// stable for the lifetime of the store, so layers keep raw pointers.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Param* add(const std::string& name, Tensor init);
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;

  std::vector<std::string> names() const;
  std::size_t num_scalars() const;
  std::uint64_t step() const { return step_; }

  void zero_grads();
  void scale_grads(double factor);
  // Adam with bias correction (plus optional decoupled weight decay),
  // applied to every parameter.
  void adam_step(const AdamConfig& config);

  // Name-ordered iteration.
  const std::map<std::string, std::unique_ptr<Param>>& params() const { return params_; }

 private:
  std::map<std::string, std::unique_ptr<Param>> params_;
  std::uint64_t step_ = 0;
};

// Checkpoint directory: params.json (names, shapes, offsets) and params.rfvb
// (f64 payload in name order, blob dtype 2).
void save_parameters(const ParameterStore& store, const std::filesystem::path& dir);
// Loads values into an existing store whose names/shapes must match exactly.
void load_parameters(ParameterStore& store, const std::filesystem::path& dir);
bool parameters_bit_equal(const ParameterStore& a, const ParameterStore& b);

}  // namespace rfv::nn
