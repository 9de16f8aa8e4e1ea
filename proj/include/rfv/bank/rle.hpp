#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rfv::bank {

// Any nonzero pixel is foreground. Throws kInvalidArgument on an empty bitmap.
std::vector<std::uint32_t> encode_rle(std::span<const std::uint8_t> bitmap);

// Returns a 0/1 bitmap of width*height. Throws kAreaMismatch if the runs do
// not cover exactly width*height pixels.
std::vector<std::uint8_t> decode_rle(std::span<const std::uint32_t> runs, int width, int height);

std::uint64_t rle_foreground_count(std::span<const std::uint32_t> runs);

}  // namespace rfv::bank
