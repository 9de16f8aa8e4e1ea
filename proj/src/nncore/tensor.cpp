#include "rfv/nncore/tensor.hpp"

#include <algorithm>

#include "rfv/core/error.hpp"
#include "rfv/kernels/kernels.hpp"

namespace rfv::nn {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kShapeMismatch, "data size does not match " + shape_string());
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_string() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

void require_shape(const Tensor& t, std::size_t rows, std::size_t cols, const char* what) {
  if (t.rows() != rows || t.cols() != cols) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": got " + t.shape_string() +
                                               ", want [" + std::to_string(rows) + "x" +
                                               std::to_string(cols) + "]");
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "matmul " + a.shape_string() + " * " + b.shape_string());
  }
  Tensor c(a.rows(), b.cols());
  kernels::gemm_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols(), false);
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                "matmul_tn " + a.shape_string() + "^T * " + b.shape_string());
  }
  Tensor c(a.cols(), b.cols());
  kernels::gemm_tn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols(), false);
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "matmul_nt " + a.shape_string() + " * " + b.shape_string() + "^T");
  }
  Tensor c(a.rows(), b.rows());
  kernels::gemm_nt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows(), false);
  return c;
}

void add_inplace(Tensor& dst, const Tensor& src) {
  if (!dst.same_shape(src)) {
    throw Error(ErrorCode::kShapeMismatch, "add " + dst.shape_string() + " + " + src.shape_string());
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

Tensor add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  add_inplace(out, b);
  return out;
}

Tensor vstack(std::span<const Tensor> parts) {
  std::size_t rows = 0;
  const std::size_t cols = parts.empty() ? 0 : parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) throw Error(ErrorCode::kShapeMismatch, "vstack column mismatch");
    rows += p.rows();
  }
  Tensor out(rows, cols);
  std::size_t r = 0;
  for (const auto& p : parts) {
    std::copy(p.values().begin(), p.values().end(), out.row(r));
    r += p.rows();
  }
  return out;
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end) {
  if (begin > end || end > t.rows()) throw Error(ErrorCode::kShapeMismatch, "slice_rows range");
  Tensor out(end - begin, t.cols());
  std::copy(t.row(begin), t.row(begin) + (end - begin) * t.cols(), out.data());
  return out;
}

Tensor slice_cols(const Tensor& t, std::size_t begin, std::size_t end) {
  if (begin > end || end > t.cols()) throw Error(ErrorCode::kShapeMismatch, "slice_cols range");
  Tensor out(t.rows(), end - begin);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    std::copy(t.row(r) + begin, t.row(r) + end, out.row(r));
  }
  return out;
}

void add_cols_into(Tensor& dst, const Tensor& src, std::size_t col_offset) {
  if (src.rows() != dst.rows() || col_offset + src.cols() > dst.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "add_cols_into range");
  }
  for (std::size_t r = 0; r < src.rows(); ++r) {
    for (std::size_t c = 0; c < src.cols(); ++c) dst(r, col_offset + c) += src(r, c);
  }
}

}  // namespace rfv::nn
