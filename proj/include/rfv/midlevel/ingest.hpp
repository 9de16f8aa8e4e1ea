#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rfv/bank/bank.hpp"
#include "rfv/midlevel/midlevel.hpp"

namespace rfv::midlevel {

// One line of a detector-output ingest file (JSON lines):
//   {"entry_id": str, "narration": str, "indoor": bool, "view_id": str,
//    "fps": num, "width": int, "height": int, "num_frames": int,
//    "clip_blob": path (u8, frames x H x W x 3),
//    "objects_blob": path (u8, frames x H x W; an all-zero frame = no bitmap),
//    "hands": [[x0, y0, x1, y1] | null, ...],
//    "embedding_blob": path (f32, optional)}
// Paths are relative to the ingest file.
struct IngestRecord {
  std::string entry_id;
  bank::Narration narration;
  std::shared_ptr<const bank::VideoClip> clip;
  DetectionTrack track;
  std::optional<std::vector<float>> embedding;
};

struct AnnotationOptions {
  double contact_threshold = kDefaultContactThreshold;
  double smoothing_lambda = kDefaultSmoothingLambda;
};

struct AnnotatedEntry {
  bank::BankEntry entry;
  bool mask_fell_back = false;
};

std::vector<IngestRecord> read_ingest_file(const std::filesystem::path& path);

// keyframe -> affordance mask -> raw trajectory -> smoothed trajectory.
// Trajectories with fewer than 4 points are kept raw (smoothed = false).
AnnotatedEntry annotate(const IngestRecord& record, const AnnotationOptions& options = {});

}  // namespace rfv::midlevel
