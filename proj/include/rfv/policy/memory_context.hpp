#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rfv/bank/bank.hpp"
#include "rfv/policy/policy.hpp"
#include "rfv/retriever/index.hpp"

namespace rfv::policy {

// Retrieval front-end for the policy: owns the MIPS index over a bank and
// caches prepared memory inputs per instruction. Safe for concurrent use.
class MemoryContext {
 public:
  MemoryContext(std::shared_ptr<const bank::Bank> bank, const PolicyConfig& config,
                retriever::EmbedderConfig embedder = {});

  // Top-k per configured view for the instruction, merged across views (an
  // entry retrieved for several views keeps its best score), in canonical
  // order. Fewer than k per view when the bank is small.
  std::shared_ptr<const std::vector<MemoryInput>> retrieve(const std::string& instruction,
                                                           std::size_t k) const;

  const retriever::RetrievalIndex& index() const { return index_; }
  const bank::Bank& bank() const { return *bank_; }

 private:
  std::shared_ptr<const bank::Bank> bank_;
  PolicyConfig config_;
  retriever::EmbedderConfig embedder_;
  retriever::RetrievalIndex index_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const MemoryInput>> prepared_;
  mutable std::map<std::pair<std::string, std::size_t>, std::shared_ptr<const std::vector<MemoryInput>>>
      by_query_;
};

std::vector<const MemoryInput*> memory_pointers(const std::vector<MemoryInput>& memories);

}  // namespace rfv::policy
