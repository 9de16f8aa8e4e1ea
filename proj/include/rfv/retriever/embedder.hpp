#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rfv::retriever {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

// Stand-in for the query/memory text encoders. "hashed_bow" is the only
// built-in kind; real encoder outputs enter as precomputed embeddings.
struct EmbedderConfig {
  std::string kind = "hashed_bow";
  std::size_t dim = 64;
  bool operator==(const EmbedderConfig&) const = default;
};

std::uint64_t fnv1a64(std::string_view bytes);

// Lowercased ASCII alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

// Bag of hashed tokens (FNV-1a 64 mod dim), L2-normalised. Throws kEmptyText
// when the text has no tokens.
EmbeddingVector embed_text(std::string_view text, const EmbedderConfig& config = {});

// Bi-encoder relevance: exact dot product. Throws kDimMismatch.
double relevance(const EmbeddingVector& query, const EmbeddingVector& memory);

}  // namespace rfv::retriever
