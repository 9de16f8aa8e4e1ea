#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "rfv/core/rng.hpp"
#include "rfv/nncore/params.hpp"
#include "rfv/nncore/tensor.hpp"

namespace rfv::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

// Per-element relative error |a - n| / max(|a|, |n|, floor). With eps = 1e-4
// the central difference carries O(eps^2) truncation error (~1e-9 here), so
// elements whose true gradient is ~0 are compared against the floor instead.
inline double grad_rel_error(double analytic, double numeric, double floor = 1e-4) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline void merge_result(GradCheckResult& into, const GradCheckResult& r) {
  if (r.max_rel_error > into.max_rel_error) {
    into.max_rel_error = r.max_rel_error;
    into.worst = r.worst;
  }
  into.checked += r.checked;
}

// Central differences of `loss` w.r.t. every element of `x`, compared with
// `analytic`. `stride` > 1 samples every stride-th element.
inline GradCheckResult check_tensor_grad(nn::Tensor& x, const nn::Tensor& analytic,
                                         const std::function<double()>& loss,
                                         const std::string& name, double eps = 1e-4,
                                         std::size_t stride = 1) {
  GradCheckResult res;
  for (std::size_t i = 0; i < x.size(); i += stride) {
    const double saved = x.values()[i];
    x.values()[i] = saved + eps;
    const double up = loss();
    x.values()[i] = saved - eps;
    const double down = loss();
    x.values()[i] = saved;
    const double numeric = (up - down) / (2 * eps);
    const double err = grad_rel_error(analytic.values()[i], numeric);
    ++res.checked;
    if (err > res.max_rel_error) {
      res.max_rel_error = err;
      res.worst = name + "[" + std::to_string(i) + "] analytic=" +
                  std::to_string(analytic.values()[i]) + " numeric=" + std::to_string(numeric);
    }
  }
  return res;
}

// Compares every parameter's accumulated grad with central differences.
inline GradCheckResult check_param_grads(nn::ParameterStore& store,
                                         const std::function<double()>& loss, double eps = 1e-4,
                                         std::size_t stride = 1) {
  GradCheckResult total;
  for (const auto& [name, p] : store.params()) {
    const nn::Tensor analytic = p->grad;
    merge_result(total, check_tensor_grad(p->value, analytic, loss, name, eps, stride));
  }
  return total;
}

inline nn::Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  nn::Tensor t(r, c);
  for (double& v : t.values()) v = rng.normal() * scale;
  return t;
}

// sum(y * w): a scalar probe whose gradient w.r.t. y is w.
inline double probe(const nn::Tensor& y, const nn::Tensor& w) {
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * w.values()[i];
  return s;
}

}  // namespace rfv::testing
