#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rfv::nn {

// Row-major 2-D array of doubles.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  void fill(double v);
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool operator==(const Tensor&) const = default;

  std::string shape_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

void require_shape(const Tensor& t, std::size_t rows, std::size_t cols, const char* what);

Tensor matmul(const Tensor& a, const Tensor& b);      // a * b
Tensor matmul_tn(const Tensor& a, const Tensor& b);   // a^T * b
Tensor matmul_nt(const Tensor& a, const Tensor& b);   // a * b^T
void add_inplace(Tensor& dst, const Tensor& src);
Tensor add(const Tensor& a, const Tensor& b);
Tensor vstack(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& t, std::size_t begin, std::size_t end);
void add_cols_into(Tensor& dst, const Tensor& src, std::size_t col_offset);

}  // namespace rfv::nn
