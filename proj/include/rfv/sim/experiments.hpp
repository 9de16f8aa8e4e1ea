#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rfv/bank/bank.hpp"
#include "rfv/policy/memory_context.hpp"
#include "rfv/policy/policy.hpp"
#include "rfv/policy/training.hpp"
#include "rfv/retriever/embedder.hpp"
#include "rfv/sim/dataset.hpp"
#include "rfv/sim/evaluation.hpp"
#include "rfv/sim/human_bank.hpp"

namespace rfv::sim {

struct ExperimentConfig {
  policy::PolicyConfig policy;
  retriever::EmbedderConfig embedder;
  HumanBankOptions bank_options;
  int bank_per_task = 96;
  std::uint64_t bank_seed = 7;
  // Robot demos and in-distribution evaluation.
  std::vector<TaskSpec> suite;
  // Human clips; may cover conditions the robot demos never show.
  std::vector<TaskSpec> bank_suite;
  int demos_per_task = 10;
  ExpertOptions expert;
  AugmentOptions augment;
  policy::TrainOptions train;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  EvalOptions eval;
};

// The benchmark setup used by the acceptance harness and the CLI defaults.
ExperimentConfig default_experiment();

struct Variant {
  std::string name;
  bool retrieval = true;
  bool zero_trajectory = false;
  bool zero_mask = false;
  std::size_t k = 3;
};

Variant full_variant(std::size_t k = 3);
Variant no_retrieval_variant();
Variant no_trajectory_variant();
Variant no_mask_variant();

// Trains lazily and caches one policy per (variant, seed); demos are shared
// by every variant trained with the same seed. Not thread-safe.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);
  // Uses `bank` instead of synthesizing one from config.bank_suite.
  Experiment(ExperimentConfig config, std::shared_ptr<const bank::Bank> bank);

  const ExperimentConfig& config() const { return config_; }
  std::shared_ptr<const bank::Bank> bank() const { return bank_; }
  const policy::MemoryContext& memory() const { return *memory_; }

  policy::PolicyConfig policy_config(const Variant& variant, std::uint64_t seed) const;
  const std::vector<Demo>& demos(std::uint64_t seed);
  // Throws kInvariantViolation if a training sample does not carry exactly
  // k memories per view.
  const policy::Policy& policy(const Variant& variant, std::uint64_t seed);
  const policy::TrainResult& train_result(const Variant& variant, std::uint64_t seed);

  // Per-seed success of the variant on `suite` (the config suite if empty).
  EvalTable evaluate(const Variant& variant, const std::vector<TaskSpec>& suite = {});

 private:
  struct Trained {
    std::unique_ptr<policy::Policy> policy;
    policy::TrainResult result;
  };
  Trained& trained(const Variant& variant, std::uint64_t seed);

  ExperimentConfig config_;
  std::shared_ptr<const bank::Bank> bank_;
  std::unique_ptr<policy::MemoryContext> memory_;
  std::map<std::uint64_t, std::vector<Demo>> demos_;
  std::map<std::pair<std::string, std::uint64_t>, Trained> trained_;
};

// Success rates in percent, rows x columns.
struct ResultTable {
  std::string title;
  std::string corner;  // header of the row-label column
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;

  double at(const std::string& row, const std::string& column) const;
  std::string to_csv() const;
  std::string to_text() const;
};

// One row per variant; a column per task plus "mean".
ResultTable compare_variants(Experiment& experiment, const std::vector<Variant>& variants);

// Rows are tasks plus "mean", one column "k=<k>" per entry of `ks`.
ResultTable ablation_k(Experiment& experiment, const std::vector<std::size_t>& ks = {1, 3, 5, 7});

// Rows "RfV", "- hand motion trajectory", "- object affordance".
ResultTable ablation_midlevel(Experiment& experiment);

struct Probe {
  std::string name;
  std::vector<TaskSpec> suite;
};

// Held-out color, held-out spawn slot, and three extra distractors, each
// derived from the given training suite.
std::vector<Probe> generalization_probes(const std::vector<TaskSpec>& suite);

// Rows are probes; columns "no retrieval", "RfV", "margin".
ResultTable generalization(Experiment& experiment);

}  // namespace rfv::sim
