#pragma once

#include <span>
#include <vector>

namespace rfv::midlevel {

// Natural cubic smoothing spline through (t_i, y_i) with roughness penalty
// lambda, solved with the Reinsch banded system. lambda = 0 gives the
// natural interpolating spline.
class SmoothingSpline {
 public:
  SmoothingSpline(std::span<const double> t, std::span<const double> y, double lambda);

  double operator()(double t) const;

  const std::vector<double>& fitted_values() const { return g_; }
  const std::vector<double>& second_derivatives() const { return gamma_; }

 private:
  std::vector<double> t_;
  std::vector<double> g_;
  std::vector<double> gamma_;  // size n, zero at both ends
};

}  // namespace rfv::midlevel
