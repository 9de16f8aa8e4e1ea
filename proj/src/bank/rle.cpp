#include "rfv/bank/rle.hpp"

#include <numeric>

#include "rfv/core/error.hpp"

namespace rfv::bank {

std::vector<std::uint32_t> encode_rle(std::span<const std::uint8_t> bitmap) {
  if (bitmap.empty()) throw Error(ErrorCode::kInvalidArgument, "empty bitmap");
  std::vector<std::uint32_t> runs;
  bool current = false;  // first run is background
  std::uint32_t length = 0;
  for (const std::uint8_t px : bitmap) {
    const bool fg = px != 0;
    if (fg != current) {
      runs.push_back(length);
      current = fg;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

std::vector<std::uint8_t> decode_rle(std::span<const std::uint32_t> runs, int width, int height) {
  const std::uint64_t area = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  const std::uint64_t total = std::accumulate(runs.begin(), runs.end(), std::uint64_t{0});
  if (width <= 0 || height <= 0 || total != area) {
    throw Error(ErrorCode::kAreaMismatch, "runs cover " + std::to_string(total) +
                                              " pixels, expected " + std::to_string(area));
  }
  std::vector<std::uint8_t> bitmap;
  bitmap.reserve(area);
  std::uint8_t value = 0;
  for (const std::uint32_t run : runs) {
    bitmap.insert(bitmap.end(), run, value);
    value ^= 1;
  }
  return bitmap;
}

std::uint64_t rle_foreground_count(std::span<const std::uint32_t> runs) {
  std::uint64_t count = 0;
  for (std::size_t i = 1; i < runs.size(); i += 2) count += runs[i];
  return count;
}

}  // namespace rfv::bank
