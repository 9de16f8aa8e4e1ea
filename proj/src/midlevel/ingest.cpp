#include "rfv/midlevel/ingest.hpp"

#include <fstream>

#include <json.hpp>

#include "rfv/core/blob.hpp"
#include "rfv/core/error.hpp"

namespace rfv::midlevel {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

IngestRecord parse_record(const json& j, const fs::path& dir) {
  IngestRecord rec;
  rec.entry_id = j.at("entry_id").get<std::string>();
  rec.narration.text = j.at("narration").get<std::string>();
  rec.narration.indoor = j.value("indoor", true);
  const int width = j.at("width").get<int>();
  const int height = j.at("height").get<int>();
  const auto num_frames = j.at("num_frames").get<std::size_t>();
  if (width < 1 || height < 1 || num_frames < 1) {
    throw Error(ErrorCode::kCorruptManifest, "bad clip dimensions");
  }

  const Blob pixels = read_blob(dir / j.at("clip_blob").get<std::string>());
  const std::size_t frame_bytes = static_cast<std::size_t>(width) * height * 3;
  if (pixels.dtype != BlobDtype::kU8 || pixels.payload.size() != frame_bytes * num_frames) {
    throw Error(ErrorCode::kCorruptManifest, "clip blob size mismatch");
  }
  auto clip = std::make_shared<bank::VideoClip>();
  clip->clip_id = j.value("clip_id", rec.entry_id);
  clip->fps = j.value("fps", 30.0);
  clip->view_id = j.value("view_id", "");
  for (std::size_t f = 0; f < num_frames; ++f) {
    bank::Frame frame(width, height, 3);
    std::copy_n(pixels.payload.begin() + static_cast<std::ptrdiff_t>(f * frame_bytes), frame_bytes,
                frame.data.begin());
    clip->frames.push_back(std::move(frame));
  }
  rec.clip = std::move(clip);

  const Blob objects = read_blob(dir / j.at("objects_blob").get<std::string>());
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  if (objects.dtype != BlobDtype::kU8 || objects.payload.size() != plane * num_frames) {
    throw Error(ErrorCode::kCorruptManifest, "objects blob size mismatch");
  }
  rec.track.width = width;
  rec.track.height = height;
  const json& hands = j.at("hands");
  if (!hands.is_array() || hands.size() != num_frames) {
    throw Error(ErrorCode::kCorruptManifest, "hands must list one entry per frame");
  }
  for (std::size_t f = 0; f < num_frames; ++f) {
    if (hands[f].is_null()) {
      rec.track.hands.emplace_back();
    } else {
      const auto b = hands[f].get<std::vector<double>>();
      if (b.size() != 4) throw Error(ErrorCode::kCorruptManifest, "hand box needs 4 numbers");
      BoundingBox box{b[0], b[1], b[2], b[3]};
      if (!box.valid()) throw Error(ErrorCode::kCorruptManifest, "degenerate hand box");
      rec.track.hands.emplace_back(box);
    }
    Bitmap bm(objects.payload.begin() + static_cast<std::ptrdiff_t>(f * plane),
              objects.payload.begin() + static_cast<std::ptrdiff_t>((f + 1) * plane));
    const bool any = std::any_of(bm.begin(), bm.end(), [](std::uint8_t v) { return v != 0; });
    if (any) {
      rec.track.objects.emplace_back(std::move(bm));
    } else {
      rec.track.objects.emplace_back();
    }
  }
  if (j.contains("embedding_blob")) {
    const Blob b = read_blob(dir / j["embedding_blob"].get<std::string>());
    if (b.dtype != BlobDtype::kF32) throw Error(ErrorCode::kCorruptManifest, "embedding dtype");
    rec.embedding = bytes_to_floats(b.payload);
  }
  return rec;
}

}  // namespace

std::vector<IngestRecord> read_ingest_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<IngestRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(parse_record(json::parse(line), path.parent_path()));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kCorruptManifest, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      const auto code = e.code() == ErrorCode::kIoError ? ErrorCode::kCorruptManifest : e.code();
      throw Error(code, "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return records;
}

AnnotatedEntry annotate(const IngestRecord& record, const AnnotationOptions& options) {
  const int keyframe = detect_contact_keyframe(record.track, options.contact_threshold);
  const auto sel = build_affordance_mask(*record.track.objects[static_cast<std::size_t>(keyframe)],
                                         record.track.width, record.track.height,
                                         *record.track.hands[static_cast<std::size_t>(keyframe)],
                                         keyframe);
  auto traj = raw_trajectory(record.track, keyframe);
  if (traj.points.size() >= 4) traj = smooth_trajectory(traj, options.smoothing_lambda);

  AnnotatedEntry out;
  out.mask_fell_back = sel.fell_back;
  out.entry.entry_id = record.entry_id;
  out.entry.narration = record.narration;
  out.entry.clip = record.clip;
  out.entry.mask = sel.mask;
  out.entry.trajectory = std::move(traj);
  out.entry.embedding = record.embedding;
  return out;
}

}  // namespace rfv::midlevel
