#include "rfv/core/blob.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "rfv/core/error.hpp"

namespace rfv {
namespace {

static_assert(std::endian::native == std::endian::little,
              "blob encoding assumes a little-endian host");

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(p[i]) << (8 * i);
  }
  return value;
}

std::size_t dtype_width(BlobDtype dtype) {
  switch (dtype) {
    case BlobDtype::kU8: return 1;
    case BlobDtype::kF32: return 4;
    case BlobDtype::kF64: return 8;
  }
  return 0;
}

}  // namespace

std::vector<std::uint8_t> encode_blob(BlobDtype dtype, std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> out{'R', 'F', 'V', 'B'};
  out.reserve(kBlobHeaderSize + payload.size());
  put_le<std::uint32_t>(out, kBlobFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dtype));
  put_le<std::uint64_t>(out, payload.size());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Blob decode_blob(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBlobHeaderSize) {
    throw Error(ErrorCode::kCorruptManifest, "blob shorter than header");
  }
  if (std::memcmp(bytes.data(), "RFVB", 4) != 0) {
    throw Error(ErrorCode::kCorruptManifest, "bad blob magic");
  }
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kBlobFormatVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch,
                "blob version " + std::to_string(version) + ", expected " +
                    std::to_string(kBlobFormatVersion));
  }
  const auto code = get_le<std::uint32_t>(bytes.data() + 8);
  if (code > 2) {
    throw Error(ErrorCode::kCorruptManifest, "unknown blob dtype " + std::to_string(code));
  }
  const auto length = get_le<std::uint64_t>(bytes.data() + 12);
  if (length != bytes.size() - kBlobHeaderSize) {
    throw Error(ErrorCode::kCorruptManifest,
                "blob payload length " + std::to_string(length) + " but " +
                    std::to_string(bytes.size() - kBlobHeaderSize) + " bytes present");
  }
  Blob blob;
  blob.dtype = static_cast<BlobDtype>(code);
  if (length % dtype_width(blob.dtype) != 0) {
    throw Error(ErrorCode::kCorruptManifest, "payload not a whole number of elements");
  }
  blob.payload.assign(bytes.begin() + kBlobHeaderSize, bytes.end());
  return blob;
}

void write_blob(const std::filesystem::path& path, BlobDtype dtype,
                std::span<const std::uint8_t> payload) {
  write_file_bytes(path, encode_blob(dtype, payload));
}

Blob read_blob(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_blob(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<std::uint8_t> floats_to_bytes(std::span<const float> values) {
  std::vector<std::uint8_t> out(values.size() * sizeof(float));
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

std::vector<float> bytes_to_floats(std::span<const std::uint8_t> bytes) {
  std::vector<float> out(bytes.size() / sizeof(float));
  std::memcpy(out.data(), bytes.data(), out.size() * sizeof(float));
  return out;
}

std::vector<std::uint8_t> doubles_to_bytes(std::span<const double> values) {
  std::vector<std::uint8_t> out(values.size() * sizeof(double));
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

std::vector<double> bytes_to_doubles(std::span<const std::uint8_t> bytes) {
  std::vector<double> out(bytes.size() / sizeof(double));
  std::memcpy(out.data(), bytes.data(), out.size() * sizeof(double));
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

}  // namespace rfv
