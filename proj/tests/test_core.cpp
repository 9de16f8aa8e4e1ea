#include <cstring>

#include "doctest.h"
#include "rfv/core/blob.hpp"
#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"
#include "support/fixtures.hpp"

using namespace rfv;

TEST_CASE("blob header layout is little-endian with magic and length") {
  const std::vector<std::uint8_t> payload{1, 2, 3};
  const auto bytes = encode_blob(BlobDtype::kU8, payload);
  REQUIRE(bytes.size() == kBlobHeaderSize + 3);
  CHECK(std::memcmp(bytes.data(), "RFVB", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 0);
  CHECK(bytes[12] == 3);
  const Blob decoded = decode_blob(bytes);
  CHECK(decoded.dtype == BlobDtype::kU8);
  CHECK(decoded.payload == payload);
}

TEST_CASE("blob decode rejects garbage and wrong versions") {
  auto bytes = encode_blob(BlobDtype::kF32, floats_to_bytes(std::vector<float>{1.5f}));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_blob(bad_magic), Error);
  try {
    decode_blob(bad_magic);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCorruptManifest);
  }
  auto bad_version = bytes;
  bad_version[4] = 7;
  try {
    decode_blob(bad_version);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormatVersionMismatch);
  }
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_blob(truncated), Error);
}

TEST_CASE("float and double payloads round-trip bitwise") {
  Rng rng(5);
  std::vector<double> d(100);
  for (auto& v : d) v = rng.normal() * 1e10;
  CHECK(bytes_to_doubles(doubles_to_bytes(d)) == d);
  std::vector<float> f(100);
  for (auto& v : f) v = static_cast<float>(rng.normal());
  CHECK(bytes_to_floats(floats_to_bytes(f)) == f);

  const auto dir = testing::scratch_dir("blob");
  write_blob(dir / "nested" / "x.rfvb", BlobDtype::kF64, doubles_to_bytes(d));
  const Blob back = read_blob(dir / "nested" / "x.rfvb");
  CHECK(back.dtype == BlobDtype::kF64);
  CHECK(bytes_to_doubles(back.payload) == d);
}

TEST_CASE("rng is deterministic per seed and well distributed") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng(42).next_u64() != c.next_u64());

  Rng r(9);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("error codes have stable names") {
  CHECK(error_code_name(ErrorCode::kEmptyIndex) == std::string("EmptyIndex"));
  CHECK(error_code_name(ErrorCode::kRTooLarge) == std::string("RTooLarge"));
}
