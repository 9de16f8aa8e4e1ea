#include "rfv/retriever/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "rfv/core/error.hpp"
#include "rfv/kernels/kernels.hpp"

namespace rfv::retriever {
namespace {

struct Candidate {
  double score;
  std::size_t row;
};

}  // namespace

RetrievalIndex::RetrievalIndex(std::size_t dim, std::vector<std::string> ids,
                               std::vector<std::string> view_ids, std::vector<double> rows)
    : dim_(dim), ids_(std::move(ids)), view_ids_(std::move(view_ids)), rows_(std::move(rows)) {
  if (view_ids_.empty()) view_ids_.assign(ids_.size(), "");
  if (rows_.size() != ids_.size() * dim_ || view_ids_.size() != ids_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "index rows do not match ids");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids_) {
    if (!seen.insert(id).second) throw Error(ErrorCode::kDuplicateId, id);
  }
  for (double v : rows_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite embedding value");
  }
  const std::size_t n = ids_.size();
  norms_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms_[i] = std::sqrt(kernels::dot(row(i), row(i), dim_));
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return norms_[a] > norms_[b]; });

  blocks_.assign(num_blocks() * dim_ * kernels::kBlockRows, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t b = s / kernels::kBlockRows;
    const std::size_t lane = s % kernels::kBlockRows;
    const double* src = row(order_[s]);
    double* dst = blocks_.data() + b * dim_ * kernels::kBlockRows;
    for (std::size_t j = 0; j < dim_; ++j) dst[j * kernels::kBlockRows + lane] = src[j];
  }
}

RetrievalIndex build_index(const bank::Bank& bank, const EmbedderConfig& config) {
  std::vector<std::string> ids, views;
  std::vector<double> rows;
  rows.reserve(bank.size() * config.dim);
  for (const auto& entry : bank.entries()) {
    if (entry->embedding) {
      if (entry->embedding->size() != config.dim) {
        throw Error(ErrorCode::kDimMismatch,
                    entry->entry_id + ": precomputed embedding has dim " +
                        std::to_string(entry->embedding->size()) + ", index dim " +
                        std::to_string(config.dim));
      }
      rows.insert(rows.end(), entry->embedding->begin(), entry->embedding->end());
    } else {
      const auto e = embed_text(entry->narration.text, config);
      rows.insert(rows.end(), e.values.begin(), e.values.end());
    }
    ids.push_back(entry->entry_id);
    views.push_back(entry->clip ? entry->clip->view_id : "");
  }
  return RetrievalIndex(config.dim, std::move(ids), std::move(views), std::move(rows));
}

RankedList mips_topk(const RetrievalIndex& index, const EmbeddingVector& query, std::size_t k,
                     const SearchOptions& options, SearchStats* stats) {
  if (index.empty()) throw Error(ErrorCode::kEmptyIndex, "index has no rows");
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (query.dim() != index.dim()) {
    throw Error(ErrorCode::kDimMismatch, "query dim " + std::to_string(query.dim()) +
                                             ", index dim " + std::to_string(index.dim()));
  }
  for (double v : query.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite query");
  }
  if (!options.eligible.empty() && options.eligible.size() != index.size()) {
    throw Error(ErrorCode::kShapeMismatch, "eligibility mask size");
  }

  const auto& ids = index.ids();
  // "a ranks before b"
  auto before = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return ids[a.row] < ids[b.row];
  };
  // Max-heap on "worst first" keeps the current k-th best at front().
  std::vector<Candidate> heap;
  heap.reserve(k + 1);

  const double qnorm = std::sqrt(kernels::dot(query.values.data(), query.values.data(), query.dim()));
  // Floating-point dot products may exceed the exact bound by a few ulps per term.
  const double slack = 1.0 + 4.0 * static_cast<double>(index.dim() + 2) *
                                 std::numeric_limits<double>::epsilon();
  const auto& order = index.norm_order();
  const std::size_t n = index.size();
  const std::size_t dim = index.dim();
  double scores[kernels::kBlockRows];
  std::size_t scored = 0;

  for (std::size_t b = 0; b < index.num_blocks(); ++b) {
    const std::size_t first = b * kernels::kBlockRows;
    if (options.prune && heap.size() == k) {
      const double bound = qnorm * index.norm(order[first]) * slack;
      if (bound < heap.front().score) break;
    }
    kernels::score_blocks(index.blocks().data() + b * dim * kernels::kBlockRows, 1,
                          query.values.data(), dim, scores);
    for (std::size_t lane = 0; lane < kernels::kBlockRows && first + lane < n; ++lane) {
      const std::size_t row = order[first + lane];
      if (!options.eligible.empty() && !options.eligible[row]) continue;
      ++scored;
      const Candidate c{scores[lane], row};
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end(), before);
      } else if (before(c, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), before);
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end(), before);
      }
    }
  }
  if (stats) stats->rows_scored = scored;

  std::sort(heap.begin(), heap.end(), before);
  RankedList out;
  out.items.reserve(heap.size());
  for (const auto& c : heap) out.items.push_back({ids[c.row], c.score});
  return out;
}

bool view_matches(const std::string& entry_view, const std::string& view) {
  return entry_view.empty() || entry_view == view;
}

std::map<std::string, RankedList> retrieve_per_view(const RetrievalIndex& index,
                                                    const std::string& instruction,
                                                    const std::vector<std::string>& views,
                                                    std::size_t k, const EmbedderConfig& config) {
  const EmbeddingVector query = embed_text(instruction, config);
  std::map<std::string, RankedList> out;
  for (const auto& view : views) {
    SearchOptions options;
    options.eligible.resize(index.size());
    bool any = false;
    for (std::size_t i = 0; i < index.size(); ++i) {
      options.eligible[i] = view_matches(index.view_ids()[i], view);
      any = any || options.eligible[i];
    }
    if (!any) throw Error(ErrorCode::kEmptyIndex, "no entries for view '" + view + "'");
    out[view] = mips_topk(index, query, k, options);
  }
  return out;
}

}  // namespace rfv::retriever
