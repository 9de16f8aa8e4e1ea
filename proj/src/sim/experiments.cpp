#include "rfv/sim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::sim {

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.policy.d_model = 32;
  c.policy.d_hidden = 64;
  c.policy.heads = 4;
  c.policy.layers = 2;
  c.policy.text_dim = 32;
  c.policy.learning_rate = 3e-3;
  c.policy.fusion_mode = policy::FusionMode::kStandard;
  c.bank_options.max_frames = 6;
  c.suite = default_suite();
  for (const TaskSpec& spec : c.suite) c.bank_suite.push_back(with_held_out(spec));
  c.expert.action_noise = 0.02;
  c.policy.weight_decay = 0.3;
  c.train.steps = 1500;
  c.train.batch_size = 16;
  c.train.final_lr_fraction = 0.05;
  return c;
}

Variant full_variant(std::size_t k) {
  Variant v;
  v.name = k == 3 ? "RfV" : "RfV k=" + std::to_string(k);
  v.k = k;
  return v;
}

Variant no_retrieval_variant() {
  Variant v;
  v.name = "no retrieval";
  v.retrieval = false;
  return v;
}

Variant no_trajectory_variant() {
  Variant v;
  v.name = "- hand motion trajectory";
  v.zero_trajectory = true;
  return v;
}

Variant no_mask_variant() {
  Variant v;
  v.name = "- object affordance";
  v.zero_mask = true;
  return v;
}

namespace {

std::shared_ptr<const bank::Bank> synthesize(const ExperimentConfig& c) {
  const auto& specs = c.bank_suite.empty() ? c.suite : c.bank_suite;
  return std::make_shared<const bank::Bank>(synthesize_human_bank(specs, c.bank_per_task, c.bank_seed, c.bank_options));
}

}  // namespace

Experiment::Experiment(ExperimentConfig config) : Experiment(config, synthesize(config)) {}

Experiment::Experiment(ExperimentConfig config, std::shared_ptr<const bank::Bank> bank)
    : config_(std::move(config)), bank_(std::move(bank)) {
  if (config_.suite.empty()) throw Error(ErrorCode::kConfigError, "experiment suite is empty");
  if (config_.seeds.empty()) throw Error(ErrorCode::kConfigError, "experiment needs at least one seed");
  if (!bank_) throw Error(ErrorCode::kInvalidArgument, "experiment bank is null");
  config_.policy.validate();
  memory_ = std::make_unique<policy::MemoryContext>(bank_, config_.policy, config_.embedder);
}

policy::PolicyConfig Experiment::policy_config(const Variant& variant, std::uint64_t seed) const {
  policy::PolicyConfig c = config_.policy;
  c.seed = seed;
  c.use_retrieval = variant.retrieval;
  c.zero_trajectory = variant.zero_trajectory;
  c.zero_mask = variant.zero_mask;
  c.k_retrieved = variant.k;
  c.validate();
  return c;
}

const std::vector<Demo>& Experiment::demos(std::uint64_t seed) {
  auto it = demos_.find(seed);
  if (it == demos_.end()) {
    it = demos_.emplace(seed, collect_demos(config_.suite, config_.demos_per_task, seed, config_.expert)).first;
  }
  return it->second;
}

Experiment::Trained& Experiment::trained(const Variant& variant, std::uint64_t seed) {
  const auto key = std::make_pair(variant.name, seed);
  auto it = trained_.find(key);
  if (it != trained_.end()) return it->second;

  const policy::PolicyConfig cfg = policy_config(variant, seed);
  AugmentOptions augment = config_.augment;
  augment.seed = mix_seed(augment.seed, seed);
  const auto samples = training_samples(demos(seed), cfg, cfg.use_retrieval ? memory_.get() : nullptr, augment);
  if (cfg.use_retrieval) {
    for (const auto& s : samples) {
      if (!s.memories || s.memories->size() != cfg.k_retrieved * cfg.views.size()) {
        throw Error(ErrorCode::kInvariantViolation,
                    "expected " + std::to_string(cfg.k_retrieved) + " memories per view");
      }
    }
  }
  Trained t;
  t.policy = std::make_unique<policy::Policy>(cfg);
  t.result = policy::train(*t.policy, samples, config_.train);
  return trained_.emplace(key, std::move(t)).first->second;
}

const policy::Policy& Experiment::policy(const Variant& variant, std::uint64_t seed) {
  return *trained(variant, seed).policy;
}

const policy::TrainResult& Experiment::train_result(const Variant& variant, std::uint64_t seed) {
  return trained(variant, seed).result;
}

EvalTable Experiment::evaluate(const Variant& variant, const std::vector<TaskSpec>& suite) {
  std::map<std::uint64_t, const policy::Policy*> policies;
  for (std::uint64_t seed : config_.seeds) policies[seed] = &policy(variant, seed);
  const policy::MemoryContext* memory = variant.retrieval ? memory_.get() : nullptr;
  return sim::evaluate(
      [&](std::uint64_t seed) { return policy_controller(*policies.at(seed), memory); },
      suite.empty() ? config_.suite : suite, config_.seeds, config_.eval);
}

double ResultTable::at(const std::string& row, const std::string& column) const {
  const auto r = std::find(rows.begin(), rows.end(), row);
  const auto c = std::find(columns.begin(), columns.end(), column);
  if (r == rows.end() || c == columns.end()) throw Error(ErrorCode::kNotFound, row + " / " + column);
  return values[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - columns.begin())];
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<double> task_row(const EvalTable& t) {
  std::vector<double> row;
  for (std::size_t i = 0; i < t.tasks.size(); ++i) row.push_back(100.0 * t.task_mean(i));
  row.push_back(100.0 * t.aggregate());
  return row;
}

std::vector<std::string> task_columns(const std::vector<TaskSpec>& suite) {
  std::vector<std::string> cols;
  for (const auto& s : suite) cols.push_back(s.name);
  cols.push_back("mean");
  return cols;
}

}  // namespace

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  os << csv_field(corner);
  for (const auto& c : columns) os << ',' << csv_field(c);
  os << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    os << csv_field(rows[r]);
    for (double v : values[r]) os << ',' << fixed(v);
    os << '\n';
  }
  return os.str();
}

std::string ResultTable::to_text() const {
  std::vector<std::size_t> width(columns.size() + 1, corner.size());
  for (const auto& r : rows) width[0] = std::max(width[0], r.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    width[c + 1] = columns[c].size();
    for (const auto& row : values) width[c + 1] = std::max(width[c + 1], fixed(row[c]).size());
  }
  std::ostringstream os;
  if (!title.empty()) os << title << '\n';
  auto cell = [&](const std::string& s, std::size_t w, bool left) {
    const std::string pad(w - s.size(), ' ');
    os << (left ? s + pad : pad + s);
  };
  cell(corner, width[0], true);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    os << "  ";
    cell(columns[c], width[c + 1], false);
  }
  os << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    cell(rows[r], width[0], true);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      os << "  ";
      cell(fixed(values[r][c]), width[c + 1], false);
    }
    os << '\n';
  }
  return os.str();
}

ResultTable compare_variants(Experiment& experiment, const std::vector<Variant>& variants) {
  ResultTable t;
  t.title = "success rate (%)";
  t.corner = "variant";
  t.columns = task_columns(experiment.config().suite);
  for (const Variant& v : variants) {
    t.rows.push_back(v.name);
    t.values.push_back(task_row(experiment.evaluate(v)));
  }
  return t;
}

ResultTable ablation_k(Experiment& experiment, const std::vector<std::size_t>& ks) {
  ResultTable t;
  t.title = "success rate (%) by number of retrieved videos";
  t.corner = "task";
  t.rows = task_columns(experiment.config().suite);
  t.values.assign(t.rows.size(), {});
  for (std::size_t k : ks) {
    t.columns.push_back("k=" + std::to_string(k));
    const auto col = task_row(experiment.evaluate(full_variant(k)));
    for (std::size_t r = 0; r < col.size(); ++r) t.values[r].push_back(col[r]);
  }
  return t;
}

ResultTable ablation_midlevel(Experiment& experiment) {
  ResultTable t = compare_variants(experiment, {full_variant(), no_trajectory_variant(), no_mask_variant()});
  t.title = "success rate (%) without one mid-level channel";
  return t;
}

std::vector<Probe> generalization_probes(const std::vector<TaskSpec>& suite) {
  std::vector<Probe> probes(3);
  probes[0].name = "held-out color";
  probes[1].name = "held-out region";
  probes[2].name = "+3 distractors";
  for (const TaskSpec& s : suite) {
    TaskSpec color = s, region = s, clutter = s;
    color.colors = {kHeldOutColor};
    region.spawn_slots = {kHeldOutSlot};
    clutter.distractors += 3;
    probes[0].suite.push_back(color);
    probes[1].suite.push_back(region);
    probes[2].suite.push_back(clutter);
  }
  return probes;
}

ResultTable generalization(Experiment& experiment) {
  ResultTable t;
  t.title = "success rate (%) under held-out conditions";
  t.corner = "probe";
  t.columns = {"no retrieval", "RfV", "margin"};
  for (const Probe& p : generalization_probes(experiment.config().suite)) {
    const double base = 100.0 * experiment.evaluate(no_retrieval_variant(), p.suite).aggregate();
    const double full = 100.0 * experiment.evaluate(full_variant(), p.suite).aggregate();
    t.rows.push_back(p.name);
    t.values.push_back({base, full, full - base});
  }
  return t;
}

}  // namespace rfv::sim
