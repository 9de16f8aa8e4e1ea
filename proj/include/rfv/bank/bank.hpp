#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rfv/bank/types.hpp"

namespace rfv::bank {

struct ValidationOptions {
  // Trajectory points may sit this fraction of the frame size outside it.
  double trajectory_margin_fraction = 0.05;
};

// Throws Error(kInvariantViolation, <invariant-name>) on the first failing
// invariant. Names: frame-dims, frame-data, clip-min-frames, clip-fps,
// clip-uniform-dims, narration-text, entry-id, mask-dims, mask-area,
// mask-keyframe, mask-foreground, traj-min-points, traj-monotonic,
// traj-bounds, embedding-dim, embedding-finite, features-count,
// features-dim, features-finite.
void validate_entry(const BankEntry& entry, std::optional<std::size_t> embedding_dim,
                    const ValidationOptions& options = {});

// Append-only collection of entries. Entries are shared immutably, so views
// produced by filter_indoor() are cheap and never alias mutable state.
class Bank {
 public:
  Bank() = default;
  explicit Bank(std::optional<std::size_t> embedding_dim, ValidationOptions options = {})
      : embedding_dim_(embedding_dim), options_(options) {}

  const std::string& add_entry(BankEntry entry);

  const BankEntry& get_entry(const std::string& entry_id) const;
  bool contains(const std::string& entry_id) const { return by_id_.count(entry_id) > 0; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::vector<std::shared_ptr<const BankEntry>>& entries() const { return entries_; }
  std::optional<std::size_t> embedding_dim() const { return embedding_dim_; }
  const ValidationOptions& options() const { return options_; }

  Bank filter_indoor() const;

 private:
  void add_shared(std::shared_ptr<const BankEntry> entry);

  std::vector<std::shared_ptr<const BankEntry>> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::optional<std::size_t> embedding_dim_;
  ValidationOptions options_;
};

inline constexpr const char* kManifestName = "bank.jsonl";

// Writes <dir>/bank.jsonl plus <dir>/blobs/*.rfvb.
void save_bank(const Bank& bank, const std::filesystem::path& dir);
// Accepts the bank directory or the manifest path itself.
Bank load_bank(const std::filesystem::path& path, ValidationOptions options = {});

bool banks_equal(const Bank& a, const Bank& b);

}  // namespace rfv::bank
