#pragma once

#include <cstddef>
#include <vector>

#include "rfv/encoders/tokens.hpp"

namespace rfv::encoders {

// One proposal of bipartite soft matching: token a_index of the earlier set
// proposes its most cosine-similar partner b_index of the later set.
struct MergeProposal {
  std::size_t a_index = 0;
  std::size_t b_index = 0;
  double similarity = 0.0;
};

// Cosine similarity; 0 when either vector has zero norm.
double cosine_similarity(const double* a, const double* b, std::size_t d);

// Every A token's best B partner (ties to the lower B index), in A order.
std::vector<MergeProposal> best_partners(const TokenSet& a, const TokenSet& b);

// The r kept proposals: highest similarity first, ties to the lower A index.
std::vector<MergeProposal> select_merges(const TokenSet& a, const TokenSet& b, std::size_t r);

// Merges r tokens of `a` into their partners in `b` (size-weighted mean,
// sizes summed). Output: B tokens in order (merged in place), then the
// unmatched A tokens in order. Throws kRTooLarge when r > min(|A|, |B|).
TokenSet tome_merge_step(const TokenSet& a, const TokenSet& b, std::size_t r);

// Compresses per-frame token sets down to exactly ceil(keep_fraction * N)
// tokens. Frames are folded left to right, each step merging as many tokens
// as allowed; if one group remains above target it is split into its two
// halves, which are merged as an adjacent pair. Result is tagged VIDEO with
// positions 0..n-1 and owner -1.
TokenSequence reduce_tokens(const std::vector<TokenSet>& frames, double keep_fraction);

std::size_t reduce_target(std::size_t n, double keep_fraction);

}  // namespace rfv::encoders
