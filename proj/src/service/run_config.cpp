#include "rfv/service/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rfv/core/error.hpp"

namespace rfv::service {

using nlohmann::json;

namespace {

constexpr const char* kSchema = R"json({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "rfv run config",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "embedder": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "kind": {"enum": ["hashed_bow"]},
        "dim": {"type": "integer", "minimum": 1}
      }
    },
    "annotation": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "contact_threshold": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "smoothing_lambda": {"type": "number", "minimum": 0}
      }
    },
    "policy": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "d_model": {"type": "integer", "minimum": 1},
        "d_hidden": {"type": "integer", "minimum": 1},
        "heads": {"type": "integer", "minimum": 1},
        "layers": {"type": "integer", "minimum": 0},
        "horizon": {"type": "integer", "minimum": 1},
        "dof": {"type": "integer", "minimum": 1},
        "k_retrieved": {"type": "integer", "minimum": 1},
        "keep_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
        "weight_decay": {"type": "number", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "fusion_mode": {"enum": ["paper", "standard"]},
        "use_retrieval": {"type": "boolean"},
        "zero_trajectory": {"type": "boolean"},
        "zero_mask": {"type": "boolean"},
        "views": {"type": "array", "minItems": 1, "items": {"type": "string"}},
        "grid": {"type": "integer", "minimum": 1},
        "featurizer_seed": {"type": "integer", "minimum": 0},
        "text_dim": {"type": "integer", "minimum": 1},
        "mask_grid": {"type": "integer", "minimum": 1},
        "trajectory_points": {"type": "integer", "minimum": 2},
        "ensemble": {"enum": ["temporal", "first"]},
        "ensemble_m": {"type": "number", "minimum": 0}
      }
    },
    "bank": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "per_task": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "max_frames": {"type": "integer", "minimum": 2},
        "goal_noise": {"type": "number", "minimum": 0}
      }
    },
    "sim": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "tasks": {"type": "array", "minItems": 1, "items": {"enum": ["Reach", "PickPlace", "PlaceInBox", "Push"]}},
        "distractors": {"type": "integer", "minimum": 0, "maximum": 8},
        "demos_per_task": {"type": "integer", "minimum": 1},
        "action_noise": {"type": "number", "minimum": 0},
        "episodes": {"type": "integer", "minimum": 1},
        "max_steps": {"type": "integer", "minimum": 1},
        "threads": {"type": "integer", "minimum": 0}
      }
    },
    "augment": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "copies": {"type": "integer", "minimum": 0},
        "span": {"type": "number", "minimum": 0, "maximum": 0.5}
      }
    },
    "train": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "steps": {"type": "integer", "minimum": 1},
        "batch_size": {"type": "integer", "minimum": 1},
        "final_lr_fraction": {"type": "number", "minimum": 0, "maximum": 1}
      }
    },
    "seeds": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
    "paths": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "bank": {"type": "string"},
        "out": {"type": "string"}
      }
    }
  }
})json";

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  throw Error(ErrorCode::kConfigError, "schema uses unknown type '" + type + "'");
}

void check(const json& doc, const json& schema, const std::string& where) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kConfigError, (where.empty() ? "/" : where) + ": " + what);
  };
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = has_type(doc, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || has_type(doc, alt.get<std::string>());
    }
    if (!ok) fail("expected " + t.dump());
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& option : schema["enum"]) found = found || option == doc;
    if (!found) fail("value " + doc.dump() + " not in " + schema["enum"].dump());
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (schema.contains("minimum") && v < schema["minimum"].get<double>()) fail("below minimum");
    if (schema.contains("maximum") && v > schema["maximum"].get<double>()) fail("above maximum");
    if (schema.contains("exclusiveMinimum") && v <= schema["exclusiveMinimum"].get<double>()) {
      fail("must exceed " + schema["exclusiveMinimum"].dump());
    }
  }
  if (doc.is_object()) {
    const json empty = json::object();
    const json& props = schema.contains("properties") ? schema["properties"] : empty;
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!doc.contains(key.get<std::string>())) fail("missing required key '" + key.get<std::string>() + "'");
      }
    }
    const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    for (const auto& [key, value] : doc.items()) {
      if (props.contains(key)) {
        check(value, props[key], where + "/" + key);
      } else if (closed) {
        fail("unknown key '" + key + "'");
      }
    }
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>()) fail("too few items");
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i) check(doc[i], schema["items"], where + "/" + std::to_string(i));
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& field) {
  if (obj.contains(key)) field = obj.at(key).get<T>();
}

}  // namespace

const json& run_config_schema() {
  static const json schema = json::parse(kSchema);
  return schema;
}

void validate_schema(const json& doc, const json& schema) { check(doc, schema, ""); }

json to_json(const RunConfig& c) {
  const sim::ExperimentConfig& e = c.experiment;
  json tasks = json::array();
  for (const auto& spec : e.suite) tasks.push_back(std::string(sim::task_type_name(spec.type)));
  return {
      {"embedder", {{"kind", e.embedder.kind}, {"dim", e.embedder.dim}}},
      {"annotation",
       {{"contact_threshold", e.bank_options.annotation.contact_threshold},
        {"smoothing_lambda", e.bank_options.annotation.smoothing_lambda}}},
      {"policy", policy::to_json(e.policy)},
      {"bank",
       {{"per_task", e.bank_per_task},
        {"seed", e.bank_seed},
        {"max_frames", e.bank_options.max_frames},
        {"goal_noise", e.bank_options.goal_noise}}},
      {"sim",
       {{"tasks", tasks},
        {"distractors", e.suite.empty() ? 0 : e.suite.front().distractors},
        {"demos_per_task", e.demos_per_task},
        {"action_noise", e.expert.action_noise},
        {"episodes", e.eval.episodes},
        {"max_steps", e.eval.max_steps},
        {"threads", e.eval.threads}}},
      {"augment", {{"copies", e.augment.copies}, {"span", e.augment.span}}},
      {"train",
       {{"steps", e.train.steps}, {"batch_size", e.train.batch_size}, {"final_lr_fraction", e.train.final_lr_fraction}}},
      {"seeds", e.seeds},
      {"paths", {{"bank", c.bank_path}, {"out", c.out_dir}}},
  };
}

RunConfig run_config_from_json(const json& doc) {
  validate_schema(doc, run_config_schema());
  RunConfig c;
  sim::ExperimentConfig& e = c.experiment;
  try {
    if (doc.contains("embedder")) {
      read(doc["embedder"], "kind", e.embedder.kind);
      read(doc["embedder"], "dim", e.embedder.dim);
    }
    if (doc.contains("annotation")) {
      read(doc["annotation"], "contact_threshold", e.bank_options.annotation.contact_threshold);
      read(doc["annotation"], "smoothing_lambda", e.bank_options.annotation.smoothing_lambda);
    }
    if (doc.contains("policy")) {
      json merged = policy::to_json(e.policy);
      merged.update(doc["policy"]);
      e.policy = policy::policy_config_from_json(merged);
    }
    if (doc.contains("bank")) {
      const json& b = doc["bank"];
      read(b, "per_task", e.bank_per_task);
      read(b, "seed", e.bank_seed);
      read(b, "max_frames", e.bank_options.max_frames);
      read(b, "goal_noise", e.bank_options.goal_noise);
    }
    if (doc.contains("sim")) {
      const json& s = doc["sim"];
      if (s.contains("tasks")) {
        e.suite.clear();
        for (const auto& name : s["tasks"]) e.suite.push_back(sim::default_spec(sim::parse_task_type(name.get<std::string>())));
      }
      int distractors = 0;
      read(s, "distractors", distractors);
      for (auto& spec : e.suite) spec.distractors = distractors;
      e.bank_suite.clear();
      for (const auto& spec : e.suite) e.bank_suite.push_back(sim::with_held_out(spec));
      read(s, "demos_per_task", e.demos_per_task);
      read(s, "action_noise", e.expert.action_noise);
      read(s, "episodes", e.eval.episodes);
      read(s, "max_steps", e.eval.max_steps);
      read(s, "threads", e.eval.threads);
    }
    if (doc.contains("augment")) {
      read(doc["augment"], "copies", e.augment.copies);
      read(doc["augment"], "span", e.augment.span);
    }
    if (doc.contains("train")) {
      read(doc["train"], "steps", e.train.steps);
      read(doc["train"], "batch_size", e.train.batch_size);
      read(doc["train"], "final_lr_fraction", e.train.final_lr_fraction);
    }
    read(doc, "seeds", e.seeds);
    if (doc.contains("paths")) {
      read(doc["paths"], "bank", c.bank_path);
      read(doc["paths"], "out", c.out_dir);
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kConfigError, ex.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kConfigError, path.string() + ": " + ex.what());
  }
  return run_config_from_json(doc);
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& explicit_path) {
  if (explicit_path && !explicit_path->empty()) return std::filesystem::path(*explicit_path);
  const char* env = std::getenv("RFV_CONFIG");
  if (env != nullptr && *env != '\0') return std::filesystem::path(env);
  return std::nullopt;
}

}  // namespace rfv::service
