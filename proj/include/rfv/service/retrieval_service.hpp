#pragma once

#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "rfv/bank/bank.hpp"
#include "rfv/retriever/index.hpp"

namespace httplib {
class Server;
}

namespace rfv::service {

// [{"id": ..., "score": ...}, ...] in rank order. Shared by the CLI and the
// HTTP service so both print identical bytes for identical results.
nlohmann::json ranked_list_json(const retriever::RankedList& list);

// Metadata of one entry without clip, mask or feature payloads.
nlohmann::json entry_metadata_json(const bank::BankEntry& entry);

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Immutable retrieval front-end over one bank. All methods are const and
// safe to call concurrently.
class RetrievalService {
 public:
  RetrievalService(std::shared_ptr<const bank::Bank> bank, retriever::EmbedderConfig embedder = {});

  // Top-k for the query over the whole bank, or within one camera view.
  // Throws kEmptyIndex on an empty bank, kEmptyText on a query without
  // tokens and kInvalidArgument when k is 0.
  retriever::RankedList retrieve(const std::string& query, std::size_t k,
                                 const std::optional<std::string>& view = std::nullopt) const;

  // POST /v1/retrieve with {"query": str, "k": int, "view": str?}.
  Response handle_retrieve(const std::string& body) const;
  // GET /v1/entries/{id}
  Response handle_entry(const std::string& id) const;
  // GET /v1/health
  Response handle_health() const;

  // Registers the three routes on `server`.
  void bind(httplib::Server& server) const;

  const bank::Bank& bank() const { return *bank_; }

 private:
  std::shared_ptr<const bank::Bank> bank_;
  retriever::EmbedderConfig embedder_;
  retriever::RetrievalIndex index_;
};

}  // namespace rfv::service
