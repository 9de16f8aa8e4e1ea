#include "rfv/sim/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::sim {

namespace {

class ExpertAdapter final : public Controller {
 public:
  void reset(const TaskInstance& task) override { expert_ = std::make_unique<ExpertController>(task); }
  std::vector<double> act(const WorldState& state, const policy::RobotObservation&, int) override {
    return expert_->act(state);
  }

 private:
  std::unique_ptr<ExpertController> expert_;
};

class ConstantAdapter final : public Controller {
 public:
  explicit ConstantAdapter(std::vector<double> a) : action_(std::move(a)) {}
  void reset(const TaskInstance&) override {}
  std::vector<double> act(const WorldState&, const policy::RobotObservation&, int) override { return action_; }

 private:
  std::vector<double> action_;
};

class ReplayAdapter final : public Controller {
 public:
  explicit ReplayAdapter(std::vector<std::vector<double>> a) : actions_(std::move(a)) {}
  void reset(const TaskInstance&) override {}
  std::vector<double> act(const WorldState&, const policy::RobotObservation&, int step) override {
    if (actions_.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to replay");
    return actions_[std::min(static_cast<std::size_t>(step), actions_.size() - 1)];
  }

 private:
  std::vector<std::vector<double>> actions_;
};

class PolicyAdapter final : public Controller {
 public:
  PolicyAdapter(const policy::Policy& p, const policy::MemoryContext* m)
      : policy_(p), memory_(m), ensembler_(p.config().ensemble, p.config().ensemble_m) {}
  void reset(const TaskInstance&) override { ensembler_.reset(); }
  std::vector<double> act(const WorldState&, const policy::RobotObservation& obs, int step) override {
    return policy::act(policy_, memory_, obs, ensembler_, static_cast<std::size_t>(step));
  }

 private:
  const policy::Policy& policy_;
  const policy::MemoryContext* memory_;
  policy::ActionEnsembler ensembler_;
};

}  // namespace

ControllerFactory expert_controller() {
  return [] { return std::make_unique<ExpertAdapter>(); };
}

ControllerFactory constant_controller(std::vector<double> action) {
  return [action] { return std::make_unique<ConstantAdapter>(action); };
}

ControllerFactory replay_controller(std::vector<std::vector<double>> actions) {
  return [actions] { return std::make_unique<ReplayAdapter>(actions); };
}

ControllerFactory policy_controller(const policy::Policy& policy, const policy::MemoryContext* memory) {
  return [&policy, memory] { return std::make_unique<PolicyAdapter>(policy, memory); };
}

RolloutResult rollout(Controller& controller, const TaskInstance& task, int max_steps) {
  RolloutResult r;
  WorldState state = task.initial;
  r.states.push_back(state);
  controller.reset(task);
  for (int step = 0; step < max_steps; ++step) {
    policy::RobotObservation obs{{robot_view(state)}, proprio(state), task.instruction};
    std::vector<double> action = controller.act(state, obs, step);
    state = step_dynamics(state, action, {});
    r.actions.push_back(std::move(action));
    r.states.push_back(state);
    r.steps = step + 1;
    if (is_success(task, state)) {
      r.success = true;
      break;
    }
  }
  return r;
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t task_index, int episode) {
  return mix_seed(mix_seed(seed, 0xe7a1 + task_index), static_cast<std::uint64_t>(episode));
}

double EvalTable::task_mean(std::size_t task) const {
  double s = 0.0;
  for (double v : success.at(task)) s += v;
  return seeds.empty() ? 0.0 : s / static_cast<double>(seeds.size());
}

double EvalTable::seed_mean(std::size_t seed) const {
  double s = 0.0;
  for (const auto& row : success) s += row.at(seed);
  return tasks.empty() ? 0.0 : s / static_cast<double>(tasks.size());
}

double EvalTable::aggregate() const {
  double s = 0.0;
  for (std::size_t t = 0; t < tasks.size(); ++t) s += task_mean(t);
  return tasks.empty() ? 0.0 : s / static_cast<double>(tasks.size());
}

std::string EvalTable::to_csv() const {
  std::ostringstream out;
  out << "task";
  for (auto s : seeds) out << ",seed_" << s;
  out << ",mean\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    out << tasks[t];
    for (double v : success[t]) out << ',' << num(v);
    out << ',' << num(task_mean(t)) << '\n';
  }
  out << "aggregate";
  for (std::size_t s = 0; s < seeds.size(); ++s) out << ',' << num(seed_mean(s));
  out << ',' << num(aggregate()) << '\n';
  return out.str();
}

std::string EvalTable::to_text() const {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"task"};
  for (auto s : seeds) header.push_back("seed " + std::to_string(s));
  header.push_back("mean");
  rows.push_back(header);
  char buf[32];
  auto pct = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return std::string(buf);
  };
  for (std::size_t t = 0; t <= tasks.size(); ++t) {
    const bool agg = t == tasks.size();
    std::vector<std::string> row{agg ? "aggregate" : tasks[t]};
    for (std::size_t s = 0; s < seeds.size(); ++s) row.push_back(pct(agg ? seed_mean(s) : success[t][s]));
    row.push_back(pct(agg ? aggregate() : task_mean(t)));
    rows.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == 0) {
        out << r[c] << std::string(width[c] - r[c].size(), ' ');
      } else {
        out << "  " << std::string(width[c] - r[c].size(), ' ') << r[c];
      }
    }
    out << '\n';
  }
  return out.str();
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

EvalTable evaluate(const std::function<ControllerFactory(std::uint64_t)>& factory_for_seed,
                   const std::vector<TaskSpec>& suite, const std::vector<std::uint64_t>& seeds,
                   const EvalOptions& options) {
  if (options.episodes <= 0) throw Error(ErrorCode::kInvalidArgument, "episodes must be positive");
  EvalTable table;
  for (const auto& s : suite) table.tasks.push_back(s.name);
  table.seeds = seeds;
  table.success.assign(suite.size(), std::vector<double>(seeds.size(), 0.0));

  std::vector<ControllerFactory> factories;
  for (auto s : seeds) factories.push_back(factory_for_seed(s));
  const std::size_t per_cell = static_cast<std::size_t>(options.episodes);
  const std::size_t total = suite.size() * seeds.size() * per_cell;
  std::vector<char> outcome(total, 0);
  parallel_for(total, options.threads, [&](std::size_t i) {
    const std::size_t t = i / (seeds.size() * per_cell);
    const std::size_t s = (i / per_cell) % seeds.size();
    const int e = static_cast<int>(i % per_cell);
    const TaskInstance task = generate_task(suite[t], episode_seed(seeds[s], t, e));
    auto controller = factories[s]();
    outcome[i] = rollout(*controller, task, options.max_steps).success ? 1 : 0;
  });
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t t = i / (seeds.size() * per_cell);
    const std::size_t s = (i / per_cell) % seeds.size();
    table.success[t][s] += outcome[i] / static_cast<double>(per_cell);
  }
  return table;
}

}  // namespace rfv::sim
