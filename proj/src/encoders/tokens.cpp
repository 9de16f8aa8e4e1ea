#include "rfv/encoders/tokens.hpp"

#include <cmath>

#include "rfv/core/error.hpp"

namespace rfv::encoders {

std::string_view segment_name(Segment s) {
  switch (s) {
    case Segment::kText: return "TEXT";
    case Segment::kState: return "STATE";
    case Segment::kVideo: return "VIDEO";
    case Segment::kMask: return "MASK";
    case Segment::kTraj: return "TRAJ";
    case Segment::kSep: return "SEP";
    case Segment::kProprio: return "PROPRIO";
    case Segment::kQuery: return "QUERY";
  }
  return "?";
}

TokenSet make_token_set(nn::Tensor vectors) {
  TokenSet set;
  set.sizes.assign(vectors.rows(), 1.0);
  set.vectors = std::move(vectors);
  return set;
}

void TokenSequence::validate() const {
  const std::size_t n = vectors.rows();
  if (sizes.size() != n || positions.size() != n || segments.size() != n || owners.size() != n) {
    throw Error(ErrorCode::kInvariantViolation, "token-sequence-lengths");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (positions[i] <= positions[i - 1]) {
      throw Error(ErrorCode::kInvariantViolation, "token-positions-increasing");
    }
  }
  for (double s : sizes) {
    if (!(s >= 1.0)) throw Error(ErrorCode::kInvariantViolation, "token-size");
  }
}

nn::Tensor position_embedding(int position, std::size_t d) {
  nn::Tensor pe(1, d);
  for (std::size_t i = 0; i < d; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
    const double angle = position * freq;
    pe(0, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
  }
  return pe;
}

void add_position_embeddings(nn::Tensor& vectors, const std::vector<int>& positions) {
  if (positions.size() != vectors.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "positions vs tokens");
  }
  for (std::size_t r = 0; r < vectors.rows(); ++r) {
    const nn::Tensor pe = position_embedding(positions[r], vectors.cols());
    for (std::size_t c = 0; c < vectors.cols(); ++c) vectors(r, c) += pe(0, c);
  }
}

nn::Tensor grid_position_embedding(int cell, int grid, std::size_t d) {
  if (grid <= 0 || cell < 0 || cell >= grid * grid) throw Error(ErrorCode::kInvalidArgument, "grid cell");
  constexpr double kPi = 3.14159265358979323846;
  nn::Tensor pe(1, d);
  const std::size_t half = d / 2;
  const double coord[2] = {(cell % grid + 0.5) / grid, (cell / grid + 0.5) / grid};
  for (std::size_t axis = 0; axis < 2; ++axis) {
    for (std::size_t j = 0; j + 1 < half; j += 2) {
      const double w = kPi * static_cast<double>(1 + j / 2);
      pe(0, axis * half + j) = std::sin(w * coord[axis]);
      pe(0, axis * half + j + 1) = std::cos(w * coord[axis]);
    }
  }
  return pe;
}

}  // namespace rfv::encoders
