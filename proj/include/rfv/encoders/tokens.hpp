#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rfv/nncore/tensor.hpp"

namespace rfv::encoders {

enum class Segment : std::uint8_t { kText, kState, kVideo, kMask, kTraj, kSep, kProprio, kQuery };

std::string_view segment_name(Segment s);

// A set of tokens stored as matrix rows, each with a ToMe size weight
// (number of source tokens merged into it).
struct TokenSet {
  nn::Tensor vectors;          // n x d
  std::vector<double> sizes;   // n, each >= 1

  std::size_t count() const { return vectors.rows(); }
};

TokenSet make_token_set(nn::Tensor vectors);  // all sizes 1

struct TokenSequence {
  nn::Tensor vectors;              // L x d
  std::vector<double> sizes;       // L
  std::vector<int> positions;      // L, strictly increasing
  std::vector<Segment> segments;   // L
  std::vector<int> owners;         // L, source memory index; -1 for SEP/none

  std::size_t length() const { return vectors.rows(); }
  // Throws kInvariantViolation when lengths disagree or positions do not increase.
  void validate() const;
  bool operator==(const TokenSequence&) const = default;
};

// Fixed sinusoidal absolute position embedding, 1 x d.
nn::Tensor position_embedding(int position, std::size_t d);
// Adds position_embedding(positions[i]) to row i.
void add_position_embeddings(nn::Tensor& vectors, const std::vector<int>& positions);

// Fixed 2D embedding of grid cell `cell` (row-major in a grid x grid layout):
// the first half of the width encodes the cell-centre column coordinate in
// [0, 1], the second half the row coordinate, as sin/cos pairs at angular
// frequencies pi, 2 pi, 3 pi, ...
nn::Tensor grid_position_embedding(int cell, int grid, std::size_t d);

}  // namespace rfv::encoders
