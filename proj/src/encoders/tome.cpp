#include "rfv/encoders/tome.hpp"

#include <algorithm>
#include <cmath>

#include "rfv/core/error.hpp"

namespace rfv::encoders {

double cosine_similarity(const double* a, const double* b, std::size_t d) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

std::vector<MergeProposal> best_partners(const TokenSet& a, const TokenSet& b) {
  if (a.count() > 0 && b.count() > 0 && a.vectors.cols() != b.vectors.cols()) {
    throw Error(ErrorCode::kDimMismatch, "token widths differ");
  }
  const std::size_t d = a.vectors.cols();
  std::vector<MergeProposal> out;
  out.reserve(a.count());
  for (std::size_t i = 0; i < a.count(); ++i) {
    MergeProposal best{i, 0, -2.0};
    for (std::size_t j = 0; j < b.count(); ++j) {
      const double s = cosine_similarity(a.vectors.row(i), b.vectors.row(j), d);
      if (s > best.similarity) best = {i, j, s};
    }
    out.push_back(best);
  }
  return out;
}

std::vector<MergeProposal> select_merges(const TokenSet& a, const TokenSet& b, std::size_t r) {
  if (r > std::min(a.count(), b.count())) {
    throw Error(ErrorCode::kRTooLarge, "r=" + std::to_string(r) + " with |A|=" +
                                           std::to_string(a.count()) + ", |B|=" +
                                           std::to_string(b.count()));
  }
  std::vector<MergeProposal> proposals = best_partners(a, b);
  std::stable_sort(proposals.begin(), proposals.end(),
                   [](const MergeProposal& x, const MergeProposal& y) {
                     return x.similarity > y.similarity;
                   });
  proposals.resize(r);
  return proposals;
}

TokenSet tome_merge_step(const TokenSet& a, const TokenSet& b, std::size_t r) {
  const std::vector<MergeProposal> merges = select_merges(a, b, r);
  const std::size_t d = b.count() > 0 ? b.vectors.cols() : a.vectors.cols();

  // Accumulate size-weighted sums at B positions.
  nn::Tensor sums(b.count(), d);
  std::vector<double> sizes(b.sizes);
  for (std::size_t j = 0; j < b.count(); ++j) {
    for (std::size_t c = 0; c < d; ++c) sums(j, c) = b.vectors(j, c) * b.sizes[j];
  }
  std::vector<bool> merged(a.count(), false);
  for (const MergeProposal& m : merges) {
    merged[m.a_index] = true;
    sizes[m.b_index] += a.sizes[m.a_index];
    for (std::size_t c = 0; c < d; ++c) {
      sums(m.b_index, c) += a.vectors(m.a_index, c) * a.sizes[m.a_index];
    }
  }

  TokenSet out;
  out.vectors = nn::Tensor(a.count() + b.count() - r, d);
  out.sizes.reserve(out.vectors.rows());
  std::size_t row = 0;
  for (std::size_t j = 0; j < b.count(); ++j, ++row) {
    if (sizes[j] == b.sizes[j]) {
      std::copy(b.vectors.row(j), b.vectors.row(j) + d, out.vectors.row(row));
    } else {
      for (std::size_t c = 0; c < d; ++c) out.vectors(row, c) = sums(j, c) / sizes[j];
    }
    out.sizes.push_back(sizes[j]);
  }
  for (std::size_t i = 0; i < a.count(); ++i) {
    if (merged[i]) continue;
    std::copy(a.vectors.row(i), a.vectors.row(i) + d, out.vectors.row(row++));
    out.sizes.push_back(a.sizes[i]);
  }
  return out;
}

std::size_t reduce_target(std::size_t n, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "keep_fraction must lie in (0, 1]");
  }
  const double exact = keep_fraction * static_cast<double>(n);
  auto target = static_cast<std::size_t>(std::ceil(exact - 1e-9 * exact));
  return std::clamp<std::size_t>(target, n > 0 ? 1 : 0, n);
}

namespace {

TokenSet split_range(const TokenSet& s, std::size_t begin, std::size_t end) {
  TokenSet out;
  out.vectors = nn::slice_rows(s.vectors, begin, end);
  out.sizes.assign(s.sizes.begin() + static_cast<std::ptrdiff_t>(begin),
                   s.sizes.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

}  // namespace

TokenSequence reduce_tokens(const std::vector<TokenSet>& frames, double keep_fraction) {
  std::vector<TokenSet> groups;
  std::size_t total = 0;
  for (const TokenSet& f : frames) {
    if (f.count() == 0) continue;
    total += f.count();
    groups.push_back(f);
  }
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "no video tokens");
  const std::size_t target = reduce_target(total, keep_fraction);

  while (total > target) {
    if (groups.size() == 1) {
      const TokenSet whole = std::move(groups.front());
      const std::size_t half = whole.count() / 2;
      groups = {split_range(whole, 0, half), split_range(whole, half, whole.count())};
    }
    const std::size_t r = std::min({groups[0].count(), groups[1].count(), total - target});
    TokenSet merged = tome_merge_step(groups[0], groups[1], r);
    total -= r;
    groups.erase(groups.begin());
    groups.front() = std::move(merged);
  }

  TokenSequence seq;
  std::vector<nn::Tensor> parts;
  for (TokenSet& g : groups) {
    parts.push_back(std::move(g.vectors));
    seq.sizes.insert(seq.sizes.end(), g.sizes.begin(), g.sizes.end());
  }
  seq.vectors = nn::vstack(parts);
  const std::size_t n = seq.vectors.rows();
  seq.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) seq.positions[i] = static_cast<int>(i);
  seq.segments.assign(n, Segment::kVideo);
  seq.owners.assign(n, -1);
  return seq;
}

}  // namespace rfv::encoders
