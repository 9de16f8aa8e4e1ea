#include "rfv/policy/training.hpp"

#include <cmath>
#include <numeric>

#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::policy {

TrainResult train(Policy& policy, const std::vector<TrainingSample>& samples,
                  const TrainOptions& options) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyDataset, "no training samples");
  if (options.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(options.final_lr_fraction >= 0.0 && options.final_lr_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "final_lr_fraction must be in [0, 1]");
  }

  const PolicyConfig& cfg = policy.config();
  nn::AdamConfig adam;
  adam.lr = cfg.learning_rate;
  adam.weight_decay = cfg.weight_decay;
  Rng rng(mix_seed(cfg.seed, 0x5eed));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  TrainResult result;
  result.loss_trace.reserve(options.steps);
  for (std::size_t step = 0; step < options.steps; ++step) {
    policy.params().zero_grads();
    const std::size_t batch = std::min(options.batch_size, samples.size());
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        rng.shuffle(order.begin(), order.end());
        cursor = 0;
      }
      const TrainingSample& s = samples[order[cursor++]];
      std::vector<const MemoryInput*> mems;
      if (s.memories) mems = memory_pointers(*s.memories);
      std::unique_ptr<ForwardCache> cache;
      const ActionChunk pred = policy.forward(s.obs, mems, &cache);
      loss += bc_loss(pred, s.target);
      policy.backward(*cache, bc_loss_grad(pred, s.target));
    }
    loss /= static_cast<double>(batch);
    policy.params().scale_grads(1.0 / static_cast<double>(batch));
    const double progress = options.steps > 1 ? static_cast<double>(step) / static_cast<double>(options.steps - 1) : 0.0;
    const double floor = options.final_lr_fraction;
    adam.lr = cfg.learning_rate * (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress)));
    policy.params().adam_step(adam);
    result.loss_trace.push_back(loss);
    if (options.on_step) options.on_step(step, loss);
  }
  return result;
}

std::vector<double> ActionEnsembler::weights(std::size_t count, double m) {
  std::vector<double> w(count);
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    w[i] = std::exp(-m * static_cast<double>(i));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

void ActionEnsembler::add(std::size_t step, ActionChunk chunk) {
  chunks_.emplace_back(step, std::move(chunk));
  // Drop chunks that can no longer cover any future step.
  while (!chunks_.empty() && chunks_.front().first + chunks_.front().second.horizon() <= step) {
    chunks_.pop_front();
  }
}

std::vector<double> ActionEnsembler::action(std::size_t step) const {
  if (mode_ == EnsembleMode::kFirstAction) {
    for (auto it = chunks_.rbegin(); it != chunks_.rend(); ++it) {
      if (it->first <= step && step < it->first + it->second.horizon()) {
        const nn::Tensor& a = it->second.actions;
        const std::size_t row = step - it->first;
        return std::vector<double>(a.row(row), a.row(row) + a.cols());
      }
    }
    throw Error(ErrorCode::kInvalidArgument, "no chunk covers step " + std::to_string(step));
  }
  std::vector<const std::pair<std::size_t, ActionChunk>*> covering;
  for (const auto& c : chunks_) {
    if (c.first <= step && step < c.first + c.second.horizon()) covering.push_back(&c);
  }
  if (covering.empty()) throw Error(ErrorCode::kInvalidArgument, "no chunk covers step " + std::to_string(step));
  const std::vector<double> w = weights(covering.size(), m_);
  std::vector<double> out(covering.front()->second.dof(), 0.0);
  for (std::size_t i = 0; i < covering.size(); ++i) {
    const nn::Tensor& a = covering[i]->second.actions;
    const double* row = a.row(step - covering[i]->first);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += w[i] * row[c];
  }
  return out;
}

std::vector<double> act(const Policy& policy, const MemoryContext* memory,
                        const RobotObservation& obs, ActionEnsembler& ensembler, std::size_t step) {
  const PolicyConfig& cfg = policy.config();
  std::shared_ptr<const std::vector<MemoryInput>> mems;
  if (cfg.use_retrieval && memory != nullptr) mems = memory->retrieve(obs.instruction, cfg.k_retrieved);
  std::vector<const MemoryInput*> ptrs;
  if (mems) ptrs = memory_pointers(*mems);
  ensembler.add(step, policy.forward(prepare_observation(obs, cfg), ptrs));
  return ensembler.action(step);
}

}  // namespace rfv::policy
