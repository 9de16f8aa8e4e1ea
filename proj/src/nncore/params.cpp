#include "rfv/nncore/params.hpp"

#include <cmath>
#include <cstring>

#include <json.hpp>

#include "rfv/core/blob.hpp"
#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::nn {

Tensor seeded_init(std::size_t rows, std::size_t cols, InitScheme scheme, std::uint64_t seed) {
  Tensor t(rows, cols);
  if (scheme == InitScheme::kZeros) return t;
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

Param* ParameterStore::add(const std::string& name, Tensor init) {
  if (params_.count(name)) throw Error(ErrorCode::kDuplicateId, "parameter " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->grad = Tensor(init.rows(), init.cols());
  p->adam_m = Tensor(init.rows(), init.cols());
  p->adam_v = Tensor(init.rows(), init.cols());
  p->value = std::move(init);
  Param* raw = p.get();
  params_.emplace(name, std::move(p));
  return raw;
}

Param* ParameterStore::find(const std::string& name) {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : it->second.get();
}

const Param* ParameterStore::find(const std::string& name) const {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : it->second.get();
}

Param& ParameterStore::at(const std::string& name) {
  Param* p = find(name);
  if (!p) throw Error(ErrorCode::kNotFound, "parameter " + name);
  return *p;
}

const Param& ParameterStore::at(const std::string& name) const {
  const Param* p = find(name);
  if (!p) throw Error(ErrorCode::kNotFound, "parameter " + name);
  return *p;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParameterStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grads() {
  for (auto& [_, p] : params_) p->grad.fill(0.0);
}

void ParameterStore::scale_grads(double factor) {
  for (auto& [_, p] : params_) {
    for (double& g : p->grad.values()) g *= factor;
  }
}

void ParameterStore::adam_step(const AdamConfig& config) {
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (auto& [name, p] : params_) {
    if (!p->grad.same_shape(p->value) || !p->adam_m.same_shape(p->value) ||
        !p->adam_v.same_shape(p->value)) {
      throw Error(ErrorCode::kShapeMismatch, "gradient/moment shape for " + name);
    }
    double* w = p->value.data();
    const double* g = p->grad.data();
    double* m = p->adam_m.data();
    double* v = p->adam_v.data();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= config.lr * (mhat / (std::sqrt(vhat) + config.eps) + config.weight_decay * w[i]);
    }
  }
}

void save_parameters(const ParameterStore& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json index = nlohmann::json::array();
  std::vector<double> flat;
  for (const auto& [name, p] : store.params()) {
    index.push_back({{"name", name},
                     {"rows", p->value.rows()},
                     {"cols", p->value.cols()},
                     {"offset", flat.size()}});
    flat.insert(flat.end(), p->value.values().begin(), p->value.values().end());
  }
  nlohmann::json doc = {{"params", index}, {"adam_step", store.step()}};
  const std::string text = doc.dump(1) + "\n";
  write_file_bytes(dir / "params.json", {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  write_blob(dir / "params.rfvb", BlobDtype::kF64, doubles_to_bytes(flat));
}

void load_parameters(ParameterStore& store, const std::filesystem::path& dir) {
  const auto text = read_file_bytes(dir / "params.json");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptManifest, std::string("params.json: ") + e.what());
  }
  const Blob blob = read_blob(dir / "params.rfvb");
  if (blob.dtype != BlobDtype::kF64) throw Error(ErrorCode::kCorruptManifest, "params dtype");
  const auto flat = bytes_to_doubles(blob.payload);
  std::size_t seen = 0;
  for (const auto& item : doc.at("params")) {
    const auto name = item.at("name").get<std::string>();
    Param& p = store.at(name);
    const auto rows = item.at("rows").get<std::size_t>();
    const auto cols = item.at("cols").get<std::size_t>();
    const auto offset = item.at("offset").get<std::size_t>();
    require_shape(p.value, rows, cols, name.c_str());
    if (offset + rows * cols > flat.size()) {
      throw Error(ErrorCode::kCorruptManifest, "parameter " + name + " exceeds payload");
    }
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), rows * cols, p.value.data());
    ++seen;
  }
  if (seen != store.params().size()) {
    throw Error(ErrorCode::kCorruptManifest, "checkpoint is missing parameters");
  }
}

bool parameters_bit_equal(const ParameterStore& a, const ParameterStore& b) {
  if (a.params().size() != b.params().size()) return false;
  auto ia = a.params().begin();
  auto ib = b.params().begin();
  for (; ia != a.params().end(); ++ia, ++ib) {
    if (ia->first != ib->first || !ia->second->value.same_shape(ib->second->value)) return false;
    if (std::memcmp(ia->second->value.data(), ib->second->value.data(),
                    ia->second->value.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace rfv::nn
