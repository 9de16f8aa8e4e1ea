#include "rfv/retriever/embedder.hpp"

#include <cctype>
#include <cmath>

#include "rfv/core/error.hpp"
#include "rfv/kernels/kernels.hpp"

namespace rfv::retriever {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (const char c : bytes) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (uc < 128 && std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

EmbeddingVector embed_text(std::string_view text, const EmbedderConfig& config) {
  if (config.kind != "hashed_bow") {
    throw Error(ErrorCode::kConfigError, "unknown embedder kind '" + config.kind + "'");
  }
  if (config.dim == 0) throw Error(ErrorCode::kConfigError, "embedder dim must be > 0");
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw Error(ErrorCode::kEmptyText, "text has no tokens");
  EmbeddingVector out;
  out.values.assign(config.dim, 0.0);
  for (const auto& tok : tokens) out.values[fnv1a64(tok) % config.dim] += 1.0;
  double sq = 0.0;
  for (double v : out.values) sq += v * v;
  const double norm = std::sqrt(sq);
  for (double& v : out.values) v /= norm;
  return out;
}

double relevance(const EmbeddingVector& query, const EmbeddingVector& memory) {
  if (query.dim() != memory.dim()) {
    throw Error(ErrorCode::kDimMismatch, std::to_string(query.dim()) + " vs " +
                                             std::to_string(memory.dim()));
  }
  return kernels::dot(query.values.data(), memory.values.data(), query.dim());
}

}  // namespace rfv::retriever
