#include "rfv/service/retrieval_service.hpp"

#include <httplib.h>

#include "rfv/core/error.hpp"
#include "rfv/bank/rle.hpp"

namespace rfv::service {

using nlohmann::json;

json ranked_list_json(const retriever::RankedList& list) {
  json out = json::array();
  for (const auto& item : list.items) out.push_back({{"id", item.entry_id}, {"score", item.score}});
  return out;
}

json entry_metadata_json(const bank::BankEntry& e) {
  json j = {
      {"id", e.entry_id},
      {"narration", e.narration.text},
      {"indoor", e.narration.indoor},
      {"clip", {{"clip_id", e.clip->clip_id},
                {"frames", e.clip->frames.size()},
                {"width", e.clip->width()},
                {"height", e.clip->height()},
                {"fps", e.clip->fps},
                {"view_id", e.clip->view_id}}},
      {"mask", {{"keyframe_index", e.mask.keyframe_index},
                {"width", e.mask.width},
                {"height", e.mask.height},
                {"foreground", bank::rle_foreground_count(e.mask.runs)}}},
      {"trajectory", {{"points", e.trajectory.points.size()}, {"smoothed", e.trajectory.smoothed}}},
      {"has_embedding", e.embedding.has_value()},
      {"has_frame_features", e.frame_features.has_value()},
  };
  return j;
}

namespace {

Response json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

Response error_response(int status, const std::string& message) {
  return json_response(status, json{{"error", message}});
}

}  // namespace

RetrievalService::RetrievalService(std::shared_ptr<const bank::Bank> bank, retriever::EmbedderConfig embedder)
    : bank_(std::move(bank)), embedder_(std::move(embedder)), index_(retriever::build_index(*bank_, embedder_)) {}

retriever::RankedList RetrievalService::retrieve(const std::string& query, std::size_t k,
                                                 const std::optional<std::string>& view) const {
  if (index_.empty()) throw Error(ErrorCode::kEmptyIndex, "bank has no entries");
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (view) return retriever::retrieve_per_view(index_, query, {*view}, k, embedder_).at(*view);
  return retriever::mips_topk(index_, retriever::embed_text(query, embedder_), k);
}

Response RetrievalService::handle_retrieve(const std::string& body) const {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return error_response(400, "malformed JSON");
  }
  if (!req.is_object()) return error_response(400, "request must be a JSON object");
  for (const auto& [key, value] : req.items()) {
    if (key != "query" && key != "k" && key != "view") return error_response(400, "unknown field '" + key + "'");
  }
  if (!req.contains("query") || !req["query"].is_string()) return error_response(400, "'query' must be a string");
  std::size_t k = retriever::kDefaultTopK;
  if (req.contains("k")) {
    const json& jk = req["k"];
    if (!jk.is_number_integer() || jk.get<long long>() < 1) return error_response(400, "'k' must be an integer >= 1");
    k = jk.get<std::size_t>();
  }
  std::optional<std::string> view;
  if (req.contains("view") && !req["view"].is_null()) {
    if (!req["view"].is_string()) return error_response(400, "'view' must be a string");
    view = req["view"].get<std::string>();
  }
  try {
    return json_response(200, json{{"results", ranked_list_json(retrieve(req["query"].get<std::string>(), k, view))}});
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
}

Response RetrievalService::handle_entry(const std::string& id) const {
  if (!bank_->contains(id)) return error_response(404, "unknown entry '" + id + "'");
  return json_response(200, entry_metadata_json(bank_->get_entry(id)));
}

Response RetrievalService::handle_health() const { return {200, "text/plain", "ok"}; }

void RetrievalService::bind(httplib::Server& server) const {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Post("/v1/retrieve", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_retrieve(req.body));
  });
  server.Get(R"(/v1/entries/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_entry(req.matches[1]));
  });
  server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_health());
  });
}

}  // namespace rfv::service
