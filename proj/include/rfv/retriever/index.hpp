#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "rfv/bank/bank.hpp"
#include "rfv/retriever/embedder.hpp"

namespace rfv::retriever {

struct RankedItem {
  std::string entry_id;
  double score = 0.0;
  bool operator==(const RankedItem&) const = default;
};

// Scores non-increasing; equal scores ordered by ascending entry_id.
struct RankedList {
  std::vector<RankedItem> items;
  bool operator==(const RankedList&) const = default;
};

inline constexpr std::size_t kDefaultTopK = 3;

// Immutable MIPS index over bank embeddings. Rows keep bank order; a second
// copy is stored sorted by descending L2 norm in 4-row interleaved blocks for
// the SIMD scorer and Cauchy-Schwarz pruning.
class RetrievalIndex {
 public:
  RetrievalIndex(std::size_t dim, std::vector<std::string> ids, std::vector<std::string> view_ids,
                 std::vector<double> rows);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::string>& view_ids() const { return view_ids_; }
  const double* row(std::size_t i) const { return rows_.data() + i * dim_; }
  double norm(std::size_t i) const { return norms_[i]; }
  // Row indices by descending norm (ties by row index).
  const std::vector<std::size_t>& norm_order() const { return order_; }
  const std::vector<double>& blocks() const { return blocks_; }
  std::size_t num_blocks() const { return (ids_.size() + 3) / 4; }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<std::string> view_ids_;
  std::vector<double> rows_;
  std::vector<double> norms_;
  std::vector<std::size_t> order_;
  std::vector<double> blocks_;
};

// Precomputed embeddings take precedence over embedding the narration.
RetrievalIndex build_index(const bank::Bank& bank, const EmbedderConfig& config = {});

struct SearchOptions {
  bool prune = true;
  // Optional per-row eligibility (bank order); empty means all rows.
  std::vector<bool> eligible;
};

struct SearchStats {
  std::size_t rows_scored = 0;
};

RankedList mips_topk(const RetrievalIndex& index, const EmbeddingVector& query, std::size_t k,
                     const SearchOptions& options = {}, SearchStats* stats = nullptr);

// Independent top-k per camera view; entries without a view_id match every view.
std::map<std::string, RankedList> retrieve_per_view(const RetrievalIndex& index,
                                                    const std::string& instruction,
                                                    const std::vector<std::string>& views,
                                                    std::size_t k,
                                                    const EmbedderConfig& config = {});

bool view_matches(const std::string& entry_view, const std::string& view);

}  // namespace rfv::retriever
