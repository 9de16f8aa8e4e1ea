#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rfv/bank/bank.hpp"
#include "rfv/core/blob.hpp"
#include "rfv/core/error.hpp"

namespace rfv::bank {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string blob_name(std::size_t index, const char* kind) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "blobs/%06zu.%s.rfvb", index, kind);
  return buf;
}

json entry_to_json(const BankEntry& e, std::size_t index, const fs::path& dir) {
  const VideoClip& clip = *e.clip;
  std::vector<std::uint8_t> pixels;
  for (const Frame& f : clip.frames) pixels.insert(pixels.end(), f.data.begin(), f.data.end());
  const std::string clip_blob = blob_name(index, "clip");
  write_blob(dir / clip_blob, BlobDtype::kU8, pixels);

  json points = json::array();
  for (const auto& p : e.trajectory.points) points.push_back({p.frame_index, p.x, p.y});

  json j = {
      {"entry_id", e.entry_id},
      {"narration", {{"text", e.narration.text}, {"indoor", e.narration.indoor}}},
      {"clip",
       {{"blob", clip_blob},
        {"clip_id", clip.clip_id},
        {"fps", clip.fps},
        {"view_id", clip.view_id},
        {"width", clip.width()},
        {"height", clip.height()},
        {"channels", clip.frames.front().channels},
        {"num_frames", clip.frames.size()}}},
      {"mask",
       {{"keyframe", e.mask.keyframe_index},
        {"width", e.mask.width},
        {"height", e.mask.height},
        {"runs", e.mask.runs}}},
      {"trajectory", {{"points", points}, {"smoothed", e.trajectory.smoothed}}},
  };
  if (e.embedding) {
    const std::string name = blob_name(index, "embedding");
    write_blob(dir / name, BlobDtype::kF32, floats_to_bytes(*e.embedding));
    j["embedding_blob"] = name;
  }
  if (e.frame_features) {
    std::vector<float> flat;
    for (const auto& f : *e.frame_features) flat.insert(flat.end(), f.begin(), f.end());
    const std::string name = blob_name(index, "features");
    write_blob(dir / name, BlobDtype::kF32, floats_to_bytes(flat));
    j["features_blob"] = name;
  }
  return j;
}

Blob load_checked(const fs::path& path, BlobDtype want) {
  Blob blob = read_blob(path);
  if (blob.dtype != want) {
    throw Error(ErrorCode::kCorruptManifest, path.string() + ": unexpected dtype");
  }
  return blob;
}

BankEntry entry_from_json(const json& j, const fs::path& dir) {
  BankEntry e;
  e.entry_id = j.at("entry_id").get<std::string>();
  e.narration.text = j.at("narration").at("text").get<std::string>();
  e.narration.indoor = j.at("narration").at("indoor").get<bool>();

  const json& jc = j.at("clip");
  auto clip = std::make_shared<VideoClip>();
  clip->clip_id = jc.value("clip_id", e.entry_id);
  clip->fps = jc.at("fps").get<double>();
  clip->view_id = jc.value("view_id", "");
  const int width = jc.at("width").get<int>();
  const int height = jc.at("height").get<int>();
  const int channels = jc.value("channels", 3);
  const std::size_t num_frames = jc.at("num_frames").get<std::size_t>();
  if (width < 1 || height < 1 || channels < 1) {
    throw Error(ErrorCode::kCorruptManifest, "bad clip dimensions");
  }
  const Blob pixels = load_checked(dir / jc.at("blob").get<std::string>(), BlobDtype::kU8);
  const std::size_t frame_bytes = static_cast<std::size_t>(width) * height * channels;
  if (pixels.payload.size() != frame_bytes * num_frames) {
    throw Error(ErrorCode::kCorruptManifest, "clip blob size does not match num_frames");
  }
  for (std::size_t f = 0; f < num_frames; ++f) {
    Frame frame(width, height, channels);
    std::copy_n(pixels.payload.begin() + static_cast<std::ptrdiff_t>(f * frame_bytes), frame_bytes,
                frame.data.begin());
    clip->frames.push_back(std::move(frame));
  }
  e.clip = std::move(clip);

  const json& jm = j.at("mask");
  e.mask.keyframe_index = jm.at("keyframe").get<int>();
  e.mask.width = jm.at("width").get<int>();
  e.mask.height = jm.at("height").get<int>();
  e.mask.runs = jm.at("runs").get<std::vector<std::uint32_t>>();

  const json& jt = j.at("trajectory");
  for (const json& p : jt.at("points")) {
    if (!p.is_array() || p.size() != 3) throw Error(ErrorCode::kCorruptManifest, "bad point");
    e.trajectory.points.push_back({p[0].get<int>(), p[1].get<double>(), p[2].get<double>()});
  }
  e.trajectory.smoothed = jt.at("smoothed").get<bool>();

  if (j.contains("embedding_blob")) {
    const Blob b = load_checked(dir / j["embedding_blob"].get<std::string>(), BlobDtype::kF32);
    e.embedding = bytes_to_floats(b.payload);
  }
  if (j.contains("features_blob")) {
    const Blob b = load_checked(dir / j["features_blob"].get<std::string>(), BlobDtype::kF32);
    const auto flat = bytes_to_floats(b.payload);
    if (num_frames == 0 || flat.size() % num_frames != 0) {
      throw Error(ErrorCode::kCorruptManifest, "features blob not divisible by num_frames");
    }
    const std::size_t dim = flat.size() / num_frames;
    std::vector<std::vector<float>> feats(num_frames);
    for (std::size_t f = 0; f < num_frames; ++f) {
      feats[f].assign(flat.begin() + static_cast<std::ptrdiff_t>(f * dim),
                      flat.begin() + static_cast<std::ptrdiff_t>((f + 1) * dim));
    }
    e.frame_features = std::move(feats);
  }
  return e;
}

}  // namespace

void save_bank(const Bank& bank, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "blobs", ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  std::ostringstream manifest;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    manifest << entry_to_json(*bank.entries()[i], i, dir).dump() << '\n';
  }
  const std::string text = manifest.str();
  write_file_bytes(dir / kManifestName,
                   {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

Bank load_bank(const fs::path& path, ValidationOptions options) {
  const fs::path manifest = fs::is_directory(path) ? path / kManifestName : path;
  const fs::path dir = manifest.parent_path();
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + manifest.string());

  Bank bank(std::nullopt, options);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    BankEntry entry;
    try {
      entry = entry_from_json(json::parse(line), dir);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kCorruptManifest,
                  "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kFormatVersionMismatch) throw;
      const auto code =
          e.code() == ErrorCode::kIoError ? ErrorCode::kCorruptManifest : e.code();
      throw Error(code, "line " + std::to_string(line_no) + ": " + e.detail());
    }
    bank.add_entry(std::move(entry));
  }
  return bank;
}

}  // namespace rfv::bank
