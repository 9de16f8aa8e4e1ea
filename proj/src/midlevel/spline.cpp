#include "rfv/midlevel/spline.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rfv/core/error.hpp"

namespace rfv::midlevel {
namespace {

// Solves a symmetric positive-definite pentadiagonal system in place by banded
// Cholesky (LDL^T). diag[i] = A(i,i), off1[i] = A(i,i+1), off2[i] = A(i,i+2).
std::vector<double> solve_pentadiagonal(std::vector<double> diag, std::vector<double> off1,
                                        std::vector<double> off2, std::vector<double> rhs) {
  const std::size_t m = diag.size();
  std::vector<double> d(m), l1(m, 0.0), l2(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double di = diag[i];
    if (i >= 1) di -= l1[i - 1] * l1[i - 1] * d[i - 1];
    if (i >= 2) di -= l2[i - 2] * l2[i - 2] * d[i - 2];
    d[i] = di;
    if (i + 1 < m) {
      double v = off1[i];
      if (i >= 1) v -= l1[i - 1] * l2[i - 1] * d[i - 1];
      l1[i] = v / di;
    }
    if (i + 2 < m) l2[i] = off2[i] / di;
  }
  // L z = rhs
  for (std::size_t i = 0; i < m; ++i) {
    if (i >= 1) rhs[i] -= l1[i - 1] * rhs[i - 1];
    if (i >= 2) rhs[i] -= l2[i - 2] * rhs[i - 2];
  }
  for (std::size_t i = 0; i < m; ++i) rhs[i] /= d[i];
  // L^T x = z
  for (std::size_t ii = m; ii-- > 0;) {
    if (ii + 1 < m) rhs[ii] -= l1[ii] * rhs[ii + 1];
    if (ii + 2 < m) rhs[ii] -= l2[ii] * rhs[ii + 2];
  }
  return rhs;
}

}  // namespace

SmoothingSpline::SmoothingSpline(std::span<const double> t, std::span<const double> y,
                                 double lambda)
    : t_(t.begin(), t.end()) {
  const std::size_t n = t.size();
  if (n != y.size()) throw Error(ErrorCode::kShapeMismatch, "t and y lengths differ");
  if (n < 3) throw Error(ErrorCode::kTooFewPoints, "spline needs at least 3 knots");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = t[i + 1] - t[i];
    if (!(h[i] > 0.0)) throw Error(ErrorCode::kNonMonotonicTime, "knots must increase");
  }

  // Interior unknowns gamma_1..gamma_{n-2} (0-based knot indices 1..n-2).
  // Column j of Q (knot j+1) has 1/h_j, -1/h_j - 1/h_{j+1}, 1/h_{j+1} at rows j, j+1, j+2.
  const std::size_t m = n - 2;
  auto q = [&](std::size_t j) {
    return std::array<double, 3>{1.0 / h[j], -1.0 / h[j] - 1.0 / h[j + 1], 1.0 / h[j + 1]};
  };
  std::vector<double> diag(m), off1(m, 0.0), off2(m, 0.0), rhs(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto qj = q(j);
    diag[j] = (h[j] + h[j + 1]) / 3.0 + lambda * (qj[0] * qj[0] + qj[1] * qj[1] + qj[2] * qj[2]);
    if (j + 1 < m) {
      const auto qn = q(j + 1);  // rows j+1..j+3
      off1[j] = h[j + 1] / 6.0 + lambda * (qj[1] * qn[0] + qj[2] * qn[1]);
    }
    if (j + 2 < m) {
      const auto qn = q(j + 2);  // rows j+2..j+4
      off2[j] = lambda * (qj[2] * qn[0]);
    }
    rhs[j] = qj[0] * y[j] + qj[1] * y[j + 1] + qj[2] * y[j + 2];
  }
  const auto interior = solve_pentadiagonal(diag, off1, off2, rhs);
  gamma_.assign(n, 0.0);
  std::copy(interior.begin(), interior.end(), gamma_.begin() + 1);

  g_.assign(y.begin(), y.end());
  if (lambda > 0.0) {
    for (std::size_t j = 0; j < m; ++j) {
      const auto qj = q(j);
      g_[j] -= lambda * qj[0] * interior[j];
      g_[j + 1] -= lambda * qj[1] * interior[j];
      g_[j + 2] -= lambda * qj[2] * interior[j];
    }
  }
}

double SmoothingSpline::operator()(double t) const {
  const std::size_t n = t_.size();
  std::size_t i = 0;
  if (t >= t_.back()) {
    i = n - 2;
  } else if (t > t_.front()) {
    i = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin()) - 1;
  }
  const double h = t_[i + 1] - t_[i];
  const double a = t - t_[i];
  const double b = t_[i + 1] - t;
  // Outside the knot range the natural spline continues linearly.
  if (t < t_.front() || t > t_.back()) {
    const double slope_left = (g_[1] - g_[0]) / (t_[1] - t_[0]) - (t_[1] - t_[0]) * gamma_[1] / 6.0;
    const double hn = t_[n - 1] - t_[n - 2];
    const double slope_right = (g_[n - 1] - g_[n - 2]) / hn + hn * gamma_[n - 2] / 6.0;
    return t < t_.front() ? g_[0] + slope_left * (t - t_.front())
                          : g_[n - 1] + slope_right * (t - t_.back());
  }
  return (a * g_[i + 1] + b * g_[i]) / h -
         a * b / 6.0 * ((1.0 + a / h) * gamma_[i + 1] + (1.0 + b / h) * gamma_[i]);
}

}  // namespace rfv::midlevel
