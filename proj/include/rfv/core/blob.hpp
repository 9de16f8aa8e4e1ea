#pragma once

// Binary blob container shared by bank clips, embeddings, features and
// checkpoints.
//
// Layout (all integers little-endian):
//   bytes 0..3   magic "RFVB"
//   bytes 4..7   format version (u32)
//   bytes 8..11  dtype code (u32): 0 = u8, 1 = f32, 2 = f64
//   bytes 12..19 payload byte length (u64)
//   payload      raw elements; floats are IEEE-754 little-endian

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace rfv {

enum class BlobDtype : std::uint32_t { kU8 = 0, kF32 = 1, kF64 = 2 };

inline constexpr std::uint32_t kBlobFormatVersion = 1;
inline constexpr std::size_t kBlobHeaderSize = 20;

struct Blob {
  BlobDtype dtype = BlobDtype::kU8;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_blob(BlobDtype dtype, std::span<const std::uint8_t> payload);
// Throws kCorruptManifest on short/garbled input, kFormatVersionMismatch on
// a version other than kBlobFormatVersion.
Blob decode_blob(std::span<const std::uint8_t> bytes);

void write_blob(const std::filesystem::path& path, BlobDtype dtype,
                std::span<const std::uint8_t> payload);
Blob read_blob(const std::filesystem::path& path);

std::vector<std::uint8_t> floats_to_bytes(std::span<const float> values);
std::vector<float> bytes_to_floats(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> doubles_to_bytes(std::span<const double> values);
std::vector<double> bytes_to_doubles(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace rfv
