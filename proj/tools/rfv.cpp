// rfv: command-line front end for bank building, retrieval, training,
// evaluation, ablations and the retrieval service.
#include <CLI11.hpp>
#include <httplib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rfv/bank/bank.hpp"
#include "rfv/core/error.hpp"
#include "rfv/midlevel/ingest.hpp"
#include "rfv/service/retrieval_service.hpp"
#include "rfv/service/run_config.hpp"
#include "rfv/sim/experiments.hpp"

namespace fs = std::filesystem;
using namespace rfv;

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUserError = 2;

struct Options {
  std::string config;
  std::string bank;
  std::string out;
  std::string query;
  std::string view;
  std::string ingest;
  std::string tasks;
  std::string variant = "full";
  std::string which;
  std::string checkpoint;
  std::string host = "127.0.0.1";
  std::size_t k = retriever::kDefaultTopK;
  std::optional<std::uint64_t> seed;
  int per_task = 5;
  int port = 8080;
  bool expert = false;
};

service::RunConfig run_config(const Options& o) {
  service::RunConfig c;
  const auto path = service::resolve_config_path(o.config.empty() ? std::nullopt : std::optional(o.config));
  if (path) c = service::load_run_config(*path);
  if (!o.bank.empty()) c.bank_path = o.bank;
  if (!o.out.empty()) c.out_dir = o.out;
  return c;
}

fs::path require_out(const service::RunConfig& c) {
  if (c.out_dir.empty()) throw Error(ErrorCode::kConfigError, "--out (or paths.out) is required");
  fs::create_directories(c.out_dir);
  return c.out_dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

std::shared_ptr<const bank::Bank> bank_for(const service::RunConfig& c) {
  if (c.bank_path.empty()) return nullptr;
  return std::make_shared<const bank::Bank>(bank::load_bank(c.bank_path));
}

sim::Experiment make_experiment(const service::RunConfig& c) {
  auto bank = bank_for(c);
  return bank ? sim::Experiment(c.experiment, bank) : sim::Experiment(c.experiment);
}

sim::Variant parse_variant(const std::string& name, std::size_t k) {
  if (name == "full") return sim::full_variant(k);
  if (name == "base") return sim::no_retrieval_variant();
  if (name == "notraj") return sim::no_trajectory_variant();
  if (name == "nomask") return sim::no_mask_variant();
  throw Error(ErrorCode::kConfigError, "unknown variant '" + name + "' (full, base, notraj, nomask)");
}

std::vector<sim::TaskSpec> parse_tasks(const std::string& list) {
  std::vector<sim::TaskSpec> specs;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (!name.empty()) specs.push_back(sim::default_spec(sim::parse_task_type(name)));
  }
  if (specs.empty()) throw Error(ErrorCode::kConfigError, "no tasks given");
  return specs;
}

int cmd_bank_synth(const Options& o) {
  auto c = run_config(o);
  const fs::path out = require_out(c);
  std::vector<sim::TaskSpec> specs;
  if (o.tasks.empty()) {
    specs = c.experiment.bank_suite;
  } else {
    for (const auto& s : parse_tasks(o.tasks)) specs.push_back(sim::with_held_out(s));
  }
  const std::uint64_t seed = o.seed.value_or(c.experiment.bank_seed);
  const bank::Bank b = sim::synthesize_human_bank(specs, o.per_task, seed, c.experiment.bank_options);
  bank::save_bank(b, out);
  std::cout << b.size() << " entries\n" << (out / bank::kManifestName).string() << '\n';
  return kOk;
}

int cmd_bank_build(const Options& o) {
  auto c = run_config(o);
  const fs::path out = require_out(c);
  if (o.ingest.empty()) throw Error(ErrorCode::kConfigError, "--ingest is required");
  bank::Bank b;
  std::size_t fell_back = 0;
  for (const auto& record : midlevel::read_ingest_file(o.ingest)) {
    auto annotated = midlevel::annotate(record, c.experiment.bank_options.annotation);
    fell_back += annotated.mask_fell_back;
    b.add_entry(std::move(annotated.entry));
  }
  bank::save_bank(b, out);
  std::cout << b.size() << " entries";
  if (fell_back > 0) std::cout << " (" << fell_back << " masks from the previous frame)";
  std::cout << '\n' << (out / bank::kManifestName).string() << '\n';
  return kOk;
}

int cmd_retrieve(const Options& o) {
  auto c = run_config(o);
  if (c.bank_path.empty()) throw Error(ErrorCode::kConfigError, "--bank is required");
  const service::RetrievalService svc(bank_for(c), c.experiment.embedder);
  const auto view = o.view.empty() ? std::nullopt : std::optional(o.view);
  std::cout << service::ranked_list_json(svc.retrieve(o.query, o.k, view)).dump() << '\n';
  return kOk;
}

int cmd_train(const Options& o) {
  auto c = run_config(o);
  const fs::path out = require_out(c);
  const std::uint64_t seed = o.seed.value_or(c.experiment.seeds.front());
  c.experiment.seeds = {seed};
  auto exp = make_experiment(c);
  const sim::Variant v = parse_variant(o.variant, c.experiment.policy.k_retrieved);
  const auto& result = exp.train_result(v, seed);
  exp.policy(v, seed).save(out / "checkpoint");
  std::ostringstream trace;
  trace << "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, result.loss_trace[i]);
    trace << buf;
  }
  write_file(out / "loss.csv", trace.str());
  write_file(out / "config.json", service::to_json(c).dump(2) + "\n");
  std::cout << "trained " << v.name << " seed " << seed << ": loss " << result.loss_trace.front() << " -> "
            << result.loss_trace.back() << '\n'
            << (out / "checkpoint").string() << '\n';
  return kOk;
}

int cmd_eval(const Options& o) {
  auto c = run_config(o);
  const fs::path out = require_out(c);
  if (o.seed) c.experiment.seeds = {*o.seed};
  sim::EvalTable table;
  if (o.expert) {
    table = sim::evaluate([](std::uint64_t) { return sim::expert_controller(); }, c.experiment.suite,
                          c.experiment.seeds, c.experiment.eval);
  } else {
    if (o.checkpoint.empty()) throw Error(ErrorCode::kConfigError, "--checkpoint or --expert is required");
    const policy::Policy p = policy::Policy::load(o.checkpoint);
    std::unique_ptr<policy::MemoryContext> memory;
    if (p.config().use_retrieval) {
      auto b = bank_for(c);
      if (!b) {
        const auto& e = c.experiment;
        b = std::make_shared<const bank::Bank>(
            sim::synthesize_human_bank(e.bank_suite, e.bank_per_task, e.bank_seed, e.bank_options));
      }
      memory = std::make_unique<policy::MemoryContext>(b, p.config(), c.experiment.embedder);
    }
    table = sim::evaluate([&](std::uint64_t) { return sim::policy_controller(p, memory.get()); },
                          c.experiment.suite, c.experiment.seeds, c.experiment.eval);
  }
  write_file(out / "eval.csv", table.to_csv());
  write_file(out / "eval.txt", table.to_text());
  std::cout << table.to_text();
  return kOk;
}

int cmd_ablate(const Options& o) {
  auto c = run_config(o);
  const fs::path out = require_out(c);
  auto exp = make_experiment(c);
  sim::ResultTable table;
  if (o.which == "k") {
    table = sim::ablation_k(exp);
  } else if (o.which == "midlevel") {
    table = sim::ablation_midlevel(exp);
  } else if (o.which == "retrieval") {
    table = sim::compare_variants(exp, {sim::full_variant(), sim::no_retrieval_variant()});
  } else if (o.which == "probes") {
    table = sim::generalization(exp);
  } else {
    throw Error(ErrorCode::kConfigError, "--which must be k, midlevel, retrieval or probes");
  }
  write_file(out / ("ablation_" + o.which + ".csv"), table.to_csv());
  write_file(out / ("ablation_" + o.which + ".txt"), table.to_text());
  std::cout << table.to_text();
  return kOk;
}

int cmd_serve(const Options& o) {
  auto c = run_config(o);
  if (c.bank_path.empty()) throw Error(ErrorCode::kConfigError, "--bank is required");
  const service::RetrievalService svc(bank_for(c), c.experiment.embedder);
  httplib::Server server;
  svc.bind(server);
  std::cerr << "serving " << svc.bank().size() << " entries on " << o.host << ':' << o.port << '\n';
  if (!server.listen(o.host, o.port)) throw Error(ErrorCode::kIoError, "cannot listen on port " + std::to_string(o.port));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-augmented visuomotor policy toolkit"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd) { cmd->add_option("--config", o.config, "RunConfig JSON (default: $RFV_CONFIG)"); };
  auto with_out = [&](CLI::App* cmd) { cmd->add_option("--out", o.out, "output directory"); };

  auto* bank_cmd = app.add_subcommand("bank", "build or synthesize a video bank");
  bank_cmd->require_subcommand(1);
  auto* synth = bank_cmd->add_subcommand("synth", "synthesize a bank of rendered human clips");
  common(synth);
  with_out(synth);
  synth->add_option("--tasks", o.tasks, "comma-separated task names (default: config suite)");
  synth->add_option("--per-task", o.per_task, "entries per task")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", o.seed, "bank seed");
  auto* build = bank_cmd->add_subcommand("build", "annotate detector outputs into a bank");
  common(build);
  with_out(build);
  build->add_option("--ingest", o.ingest, "ingest file (JSON lines)")->required();

  auto* retrieve = app.add_subcommand("retrieve", "print the top-k entries for a query as JSON");
  common(retrieve);
  retrieve->add_option("--query", o.query, "instruction text")->required();
  retrieve->add_option("--k", o.k, "number of results");
  retrieve->add_option("--bank", o.bank, "bank directory or manifest");
  retrieve->add_option("--view", o.view, "camera view id");

  auto* train = app.add_subcommand("train", "train one policy on scripted demos");
  common(train);
  with_out(train);
  train->add_option("--bank", o.bank, "bank directory (default: synthesize)");
  train->add_option("--seed", o.seed, "training seed");
  train->add_option("--variant", o.variant, "full, base, notraj or nomask");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or the scripted expert");
  common(eval);
  with_out(eval);
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint directory");
  eval->add_flag("--expert", o.expert, "evaluate the scripted expert");
  eval->add_option("--bank", o.bank, "bank directory (default: synthesize)");
  eval->add_option("--seed", o.seed, "evaluate a single seed");

  auto* ablate = app.add_subcommand("ablate", "run an ablation table");
  common(ablate);
  with_out(ablate);
  ablate->add_option("--which", o.which, "k, midlevel, retrieval or probes")->required();
  ablate->add_option("--bank", o.bank, "bank directory (default: synthesize)");

  auto* serve = app.add_subcommand("serve", "serve retrieval over HTTP");
  common(serve);
  serve->add_option("--bank", o.bank, "bank directory or manifest");
  serve->add_option("--port", o.port, "TCP port");
  serve->add_option("--host", o.host, "bind address");

  auto* schema = app.add_subcommand("schema", "print the RunConfig JSON schema");
  auto* config = app.add_subcommand("config", "print the effective RunConfig");
  common(config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUserError;
  }

  try {
    if (*bank_cmd) return *synth ? cmd_bank_synth(o) : cmd_bank_build(o);
    if (*retrieve) return cmd_retrieve(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*ablate) return cmd_ablate(o);
    if (*serve) return cmd_serve(o);
    if (*schema) {
      std::cout << service::run_config_schema().dump(2) << '\n';
      return kOk;
    }
    if (*config) {
      std::cout << service::to_json(run_config(o)).dump(2) << '\n';
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
