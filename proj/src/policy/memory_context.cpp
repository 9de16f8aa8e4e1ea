#include "rfv/policy/memory_context.hpp"

#include <algorithm>

namespace rfv::policy {

MemoryContext::MemoryContext(std::shared_ptr<const bank::Bank> bank, const PolicyConfig& config,
                             retriever::EmbedderConfig embedder)
    : bank_(std::move(bank)),
      config_(config),
      embedder_(std::move(embedder)),
      index_(retriever::build_index(*bank_, embedder_)) {}

std::shared_ptr<const std::vector<MemoryInput>> MemoryContext::retrieve(const std::string& instruction,
                                                                        std::size_t k) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto key = std::make_pair(instruction, k);
  if (auto it = by_query_.find(key); it != by_query_.end()) return it->second;

  const auto per_view = retriever::retrieve_per_view(index_, instruction, config_.views, k, embedder_);
  std::map<std::string, double> best;
  for (const auto& [view, list] : per_view) {
    for (const auto& item : list.items) {
      auto [it, inserted] = best.emplace(item.entry_id, item.score);
      if (!inserted) it->second = std::max(it->second, item.score);
    }
  }
  auto out = std::make_shared<std::vector<MemoryInput>>();
  for (const auto& [id, score] : best) {
    auto& slot = prepared_[id];
    if (!slot) slot = std::make_shared<MemoryInput>(prepare_memory(bank_->get_entry(id), 0.0, config_));
    MemoryInput m = *slot;
    m.score = score;
    out->push_back(std::move(m));
  }
  std::sort(out->begin(), out->end(), [](const MemoryInput& a, const MemoryInput& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry_id < b.entry_id;
  });
  by_query_[key] = out;
  return out;
}

std::vector<const MemoryInput*> memory_pointers(const std::vector<MemoryInput>& memories) {
  std::vector<const MemoryInput*> out;
  out.reserve(memories.size());
  for (const auto& m : memories) out.push_back(&m);
  return out;
}

}  // namespace rfv::policy
