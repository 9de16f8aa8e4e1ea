#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <vector>

#include "rfv/policy/memory_context.hpp"
#include "rfv/policy/policy.hpp"

namespace rfv::policy {

struct TrainingSample {
  ObservationInput obs;
  std::shared_ptr<const std::vector<MemoryInput>> memories;  // may be null
  ActionChunk target;
};

struct TrainOptions {
  std::size_t steps = 200;
  std::size_t batch_size = 8;
  // Cosine decay of the learning rate from config.learning_rate down to
  // learning_rate * final_lr_fraction at the last step; 1 keeps it constant.
  double final_lr_fraction = 1.0;
  // Called after every optimiser step with (step, loss); may be empty.
  std::function<void(std::size_t, double)> on_step;
};

struct TrainResult {
  std::vector<double> loss_trace;  // mean batch loss per step, before the update
};

// Minibatch behaviour cloning with Adam. The data order comes from a
// shuffle seeded by config.seed and reshuffled every epoch, so two runs with
// the same inputs produce identical traces and parameters.
// Throws kEmptyDataset when `samples` is empty.
TrainResult train(Policy& policy, const std::vector<TrainingSample>& samples,
                  const TrainOptions& options);

// Combines overlapping chunks into one action per step. Temporal mode weights
// the predictions for the current step by w_i = exp(-m * i), i = 0 being the
// oldest chunk; first-action mode executes the newest chunk's first action.
class ActionEnsembler {
 public:
  ActionEnsembler(EnsembleMode mode, double m) : mode_(mode), m_(m) {}

  void add(std::size_t step, ActionChunk chunk);
  // Throws kInvalidArgument if no stored chunk covers `step`.
  std::vector<double> action(std::size_t step) const;
  void reset() { chunks_.clear(); }

  // Normalised weights for `count` overlapping predictions, oldest first.
  static std::vector<double> weights(std::size_t count, double m);

 private:
  EnsembleMode mode_;
  double m_;
  std::deque<std::pair<std::size_t, ActionChunk>> chunks_;
};

// One closed-loop control step: retrieve (if enabled), predict a chunk,
// add it to the ensembler and return the action to execute at `step`.
std::vector<double> act(const Policy& policy, const MemoryContext* memory,
                        const RobotObservation& obs, ActionEnsembler& ensembler, std::size_t step);

}  // namespace rfv::policy
