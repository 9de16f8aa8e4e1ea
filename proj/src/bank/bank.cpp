#include "rfv/bank/bank.hpp"

#include <cmath>
#include <cstring>

#include "rfv/bank/rle.hpp"
#include "rfv/core/error.hpp"

namespace rfv::bank {
namespace {

[[noreturn]] void violation(const char* name) { throw Error(ErrorCode::kInvariantViolation, name); }

bool floats_bitwise_equal(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

bool all_finite(const std::vector<float>& v) {
  for (float x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

bool entries_equal(const BankEntry& a, const BankEntry& b) {
  if (a.entry_id != b.entry_id || !(a.narration == b.narration) || !(a.mask == b.mask) ||
      !(a.trajectory == b.trajectory)) {
    return false;
  }
  if ((a.clip == nullptr) != (b.clip == nullptr)) return false;
  if (a.clip && !(*a.clip == *b.clip)) return false;
  if (a.embedding.has_value() != b.embedding.has_value()) return false;
  if (a.embedding && !floats_bitwise_equal(*a.embedding, *b.embedding)) return false;
  if (a.frame_features.has_value() != b.frame_features.has_value()) return false;
  if (a.frame_features) {
    if (a.frame_features->size() != b.frame_features->size()) return false;
    for (std::size_t i = 0; i < a.frame_features->size(); ++i) {
      if (!floats_bitwise_equal((*a.frame_features)[i], (*b.frame_features)[i])) return false;
    }
  }
  return true;
}

void validate_entry(const BankEntry& entry, std::optional<std::size_t> embedding_dim,
                    const ValidationOptions& options) {
  if (entry.entry_id.empty()) violation("entry-id");
  if (entry.narration.text.empty()) violation("narration-text");
  if (!entry.clip) violation("clip-min-frames");
  const VideoClip& clip = *entry.clip;
  if (clip.frames.size() < 2) violation("clip-min-frames");
  if (!(clip.fps > 0.0) || !std::isfinite(clip.fps)) violation("clip-fps");
  for (const Frame& f : clip.frames) {
    if (f.width < 1 || f.height < 1 || f.channels < 1) violation("frame-dims");
    if (f.data.size() != static_cast<std::size_t>(f.width) * f.height * f.channels) {
      violation("frame-data");
    }
    if (f.width != clip.frames.front().width || f.height != clip.frames.front().height ||
        f.channels != clip.frames.front().channels) {
      violation("clip-uniform-dims");
    }
  }

  const AffordanceMask& mask = entry.mask;
  if (mask.width != clip.width() || mask.height != clip.height()) violation("mask-dims");
  std::uint64_t total = 0;
  for (auto r : mask.runs) total += r;
  if (total != static_cast<std::uint64_t>(mask.width) * static_cast<std::uint64_t>(mask.height)) {
    violation("mask-area");
  }
  if (mask.keyframe_index < 0 || static_cast<std::size_t>(mask.keyframe_index) >= clip.frames.size()) {
    violation("mask-keyframe");
  }
  if (rle_foreground_count(mask.runs) == 0) violation("mask-foreground");

  const auto& pts = entry.trajectory.points;
  if (pts.size() < 2) violation("traj-min-points");
  const double mx = options.trajectory_margin_fraction * clip.width();
  const double my = options.trajectory_margin_fraction * clip.height();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0 && pts[i].frame_index <= pts[i - 1].frame_index) violation("traj-monotonic");
    const auto& p = pts[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < -mx || p.x > clip.width() + mx ||
        p.y < -my || p.y > clip.height() + my) {
      violation("traj-bounds");
    }
  }

  if (entry.embedding) {
    if (embedding_dim && entry.embedding->size() != *embedding_dim) violation("embedding-dim");
    if (entry.embedding->empty()) violation("embedding-dim");
    if (!all_finite(*entry.embedding)) violation("embedding-finite");
  }
  if (entry.frame_features) {
    if (entry.frame_features->size() != clip.frames.size()) violation("features-count");
    const std::size_t dim = entry.frame_features->front().size();
    for (const auto& f : *entry.frame_features) {
      if (f.size() != dim || dim == 0) violation("features-dim");
      if (!all_finite(f)) violation("features-finite");
    }
  }
}

const std::string& Bank::add_entry(BankEntry entry) {
  if (by_id_.count(entry.entry_id) > 0) {
    throw Error(ErrorCode::kDuplicateId, entry.entry_id);
  }
  validate_entry(entry, embedding_dim_, options_);
  add_shared(std::make_shared<const BankEntry>(std::move(entry)));
  return entries_.back()->entry_id;
}

void Bank::add_shared(std::shared_ptr<const BankEntry> entry) {
  if (entry->embedding && !embedding_dim_) embedding_dim_ = entry->embedding->size();
  by_id_.emplace(entry->entry_id, entries_.size());
  entries_.push_back(std::move(entry));
}

const BankEntry& Bank::get_entry(const std::string& entry_id) const {
  auto it = by_id_.find(entry_id);
  if (it == by_id_.end()) throw Error(ErrorCode::kNotFound, entry_id);
  return *entries_[it->second];
}

Bank Bank::filter_indoor() const {
  Bank view(embedding_dim_, options_);
  for (const auto& e : entries_) {
    if (e->narration.indoor) view.add_shared(e);
  }
  return view;
}

bool banks_equal(const Bank& a, const Bank& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!entries_equal(*a.entries()[i], *b.entries()[i])) return false;
  }
  return true;
}

}  // namespace rfv::bank
