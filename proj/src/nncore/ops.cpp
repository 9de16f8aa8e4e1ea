#include "rfv/nncore/ops.hpp"

#include <algorithm>
#include <cmath>

#include "rfv/core/error.hpp"
#include "rfv/core/rng.hpp"

namespace rfv::nn {

Linear Linear::create(ParameterStore& store, const std::string& name, std::size_t in,
                      std::size_t out, std::uint64_t seed, InitScheme scheme) {
  Linear layer;
  layer.weight = store.add(name + ".weight", seeded_init(in, out, scheme, seed));
  layer.bias = store.add(name + ".bias", Tensor(1, out));
  return layer;
}

Tensor linear_forward(const Linear& layer, const Tensor& x, LinearCache& cache) {
  if (x.cols() != layer.in_dim()) {
    throw Error(ErrorCode::kShapeMismatch, "linear input " + x.shape_string() + " vs weight " +
                                               layer.weight->value.shape_string());
  }
  cache.input = x;
  Tensor y = matmul(x, layer.weight->value);
  const double* b = layer.bias->value.data();
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double* yr = y.row(r);
    for (std::size_t c = 0; c < y.cols(); ++c) yr[c] += b[c];
  }
  return y;
}

Tensor linear_backward(const Linear& layer, const LinearCache& cache, const Tensor& dy) {
  require_shape(dy, cache.input.rows(), layer.out_dim(), "linear dy");
  const Tensor dw = matmul_tn(cache.input, dy);
  add_inplace(layer.weight->grad, dw);
  double* db = layer.bias->grad.data();
  for (std::size_t r = 0; r < dy.rows(); ++r) {
    for (std::size_t c = 0; c < dy.cols(); ++c) db[c] += dy(r, c);
  }
  return matmul_nt(dy, layer.weight->value);
}

LayerNorm LayerNorm::create(ParameterStore& store, const std::string& name, std::size_t dim) {
  LayerNorm ln;
  ln.gamma = store.add(name + ".gamma", Tensor(1, dim, 1.0));
  ln.beta = store.add(name + ".beta", Tensor(1, dim));
  return ln;
}

Tensor layernorm_forward(const LayerNorm& layer, const Tensor& x, LayerNormCache& cache) {
  const std::size_t d = layer.gamma->value.cols();
  if (x.cols() != d) throw Error(ErrorCode::kShapeMismatch, "layernorm width " + x.shape_string());
  cache.normalized = Tensor(x.rows(), d);
  cache.inv_std.assign(x.rows(), 0.0);
  Tensor y(x.rows(), d);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* xr = x.row(r);
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += xr[c];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + layer.eps);
    cache.inv_std[r] = inv;
    for (std::size_t c = 0; c < d; ++c) {
      const double xhat = (xr[c] - mean) * inv;
      cache.normalized(r, c) = xhat;
      y(r, c) = xhat * layer.gamma->value(0, c) + layer.beta->value(0, c);
    }
  }
  return y;
}

Tensor layernorm_backward(const LayerNorm& layer, const LayerNormCache& cache, const Tensor& dy) {
  const std::size_t d = layer.gamma->value.cols();
  require_shape(dy, cache.normalized.rows(), d, "layernorm dy");
  Tensor dx(dy.rows(), d);
  std::vector<double> dxhat(d);
  for (std::size_t r = 0; r < dy.rows(); ++r) {
    double sum_dxhat = 0.0;
    double sum_dxhat_xhat = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double xhat = cache.normalized(r, c);
      layer.gamma->grad(0, c) += dy(r, c) * xhat;
      layer.beta->grad(0, c) += dy(r, c);
      dxhat[c] = dy(r, c) * layer.gamma->value(0, c);
      sum_dxhat += dxhat[c];
      sum_dxhat_xhat += dxhat[c] * xhat;
    }
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t c = 0; c < d; ++c) {
      dx(r, c) = cache.inv_std[r] *
                 (dxhat[c] - inv_d * sum_dxhat - cache.normalized(r, c) * inv_d * sum_dxhat_xhat);
    }
  }
  return dx;
}

Tensor softmax_forward(const Tensor& x) {
  Tensor y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* xr = x.row(r);
    const double mx = *std::max_element(xr, xr + x.cols());
    double sum = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      y(r, c) = std::exp(xr[c] - mx);
      sum += y(r, c);
    }
    for (std::size_t c = 0; c < x.cols(); ++c) y(r, c) /= sum;
  }
  return y;
}

Tensor softmax_backward(const Tensor& y, const Tensor& dy) {
  require_shape(dy, y.rows(), y.cols(), "softmax dy");
  Tensor dx(y.rows(), y.cols());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < y.cols(); ++c) dot += y(r, c) * dy(r, c);
    for (std::size_t c = 0; c < y.cols(); ++c) dx(r, c) = y(r, c) * (dy(r, c) - dot);
  }
  return dx;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Tensor gelu_forward(const Tensor& x) {
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    y.data()[i] = 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  }
  return y;
}

Tensor gelu_backward(const Tensor& x, const Tensor& dy) {
  require_shape(dy, x.rows(), x.cols(), "gelu dy");
  Tensor dx(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    const double u = kGeluC * (v + kGeluA * v * v * v);
    const double t = std::tanh(u);
    const double du = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    dx.data()[i] = dy.data()[i] * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du);
  }
  return dx;
}

Mlp Mlp::create(ParameterStore& store, const std::string& name, std::size_t in,
                std::size_t hidden, std::size_t out, std::uint64_t seed) {
  Mlp mlp;
  mlp.fc1 = Linear::create(store, name + ".fc1", in, hidden, mix_seed(seed, 1));
  mlp.fc2 = Linear::create(store, name + ".fc2", hidden, out, mix_seed(seed, 2));
  return mlp;
}

Tensor mlp_forward(const Mlp& mlp, const Tensor& x, MlpCache& cache) {
  cache.pre_activation = linear_forward(mlp.fc1, x, cache.fc1);
  return linear_forward(mlp.fc2, gelu_forward(cache.pre_activation), cache.fc2);
}

Tensor mlp_backward(const Mlp& mlp, const MlpCache& cache, const Tensor& dy) {
  const Tensor dh = linear_backward(mlp.fc2, cache.fc2, dy);
  return linear_backward(mlp.fc1, cache.fc1, gelu_backward(cache.pre_activation, dh));
}

MultiHeadAttention MultiHeadAttention::create(ParameterStore& store, const std::string& name,
                                              std::size_t d_model, std::size_t heads,
                                              std::uint64_t seed) {
  if (heads == 0 || d_model % heads != 0) {
    throw Error(ErrorCode::kShapeMismatch, "heads must divide d_model");
  }
  MultiHeadAttention attn;
  attn.heads = heads;
  attn.q = Linear::create(store, name + ".q", d_model, d_model, mix_seed(seed, 1));
  attn.k = Linear::create(store, name + ".k", d_model, d_model, mix_seed(seed, 2));
  attn.v = Linear::create(store, name + ".v", d_model, d_model, mix_seed(seed, 3));
  attn.o = Linear::create(store, name + ".o", d_model, d_model, mix_seed(seed, 4));
  return attn;
}

Tensor mha_forward(const MultiHeadAttention& attn, const Tensor& query_src, const Tensor& key_src,
                   const Tensor& value_src, MhaCache& cache) {
  if (key_src.rows() != value_src.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "key and value sources differ in length");
  }
  if (query_src.rows() == 0 || key_src.rows() == 0) {
    throw Error(ErrorCode::kShapeMismatch, "attention over an empty sequence");
  }
  const std::size_t d = attn.d_model();
  const std::size_t dh = d / attn.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  cache.queries = linear_forward(attn.q, query_src, cache.q);
  cache.keys = linear_forward(attn.k, key_src, cache.k);
  cache.values = linear_forward(attn.v, value_src, cache.v);
  cache.probs.assign(attn.heads, Tensor());

  Tensor concat(query_src.rows(), d);
  for (std::size_t h = 0; h < attn.heads; ++h) {
    const Tensor qh = slice_cols(cache.queries, h * dh, (h + 1) * dh);
    const Tensor kh = slice_cols(cache.keys, h * dh, (h + 1) * dh);
    const Tensor vh = slice_cols(cache.values, h * dh, (h + 1) * dh);
    Tensor scores = matmul_nt(qh, kh);
    for (double& s : scores.values()) s *= scale;
    cache.probs[h] = softmax_forward(scores);
    add_cols_into(concat, matmul(cache.probs[h], vh), h * dh);
  }
  return linear_forward(attn.o, concat, cache.o);
}

MhaGrads mha_backward(const MultiHeadAttention& attn, const MhaCache& cache, const Tensor& dy) {
  const std::size_t d = attn.d_model();
  const std::size_t dh = d / attn.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Tensor dconcat = linear_backward(attn.o, cache.o, dy);

  Tensor dq(cache.queries.rows(), d), dk(cache.keys.rows(), d), dv(cache.values.rows(), d);
  for (std::size_t h = 0; h < attn.heads; ++h) {
    const Tensor qh = slice_cols(cache.queries, h * dh, (h + 1) * dh);
    const Tensor kh = slice_cols(cache.keys, h * dh, (h + 1) * dh);
    const Tensor vh = slice_cols(cache.values, h * dh, (h + 1) * dh);
    const Tensor doh = slice_cols(dconcat, h * dh, (h + 1) * dh);
    const Tensor& p = cache.probs[h];
    const Tensor dp = matmul_nt(doh, vh);
    add_cols_into(dv, matmul_tn(p, doh), h * dh);
    Tensor ds = softmax_backward(p, dp);
    for (double& s : ds.values()) s *= scale;
    add_cols_into(dq, matmul(ds, kh), h * dh);
    add_cols_into(dk, matmul_tn(ds, qh), h * dh);
  }
  MhaGrads grads;
  grads.d_query_source = linear_backward(attn.q, cache.q, dq);
  grads.d_key_source = linear_backward(attn.k, cache.k, dk);
  grads.d_value_source = linear_backward(attn.v, cache.v, dv);
  return grads;
}

TransformerBlock TransformerBlock::create(ParameterStore& store, const std::string& name,
                                          std::size_t d_model, std::size_t heads,
                                          std::size_t d_hidden, std::uint64_t seed) {
  TransformerBlock block;
  block.ln1 = LayerNorm::create(store, name + ".ln1", d_model);
  block.attn = MultiHeadAttention::create(store, name + ".attn", d_model, heads, mix_seed(seed, 1));
  block.ln2 = LayerNorm::create(store, name + ".ln2", d_model);
  block.mlp = Mlp::create(store, name + ".mlp", d_model, d_hidden, d_model, mix_seed(seed, 2));
  return block;
}

Tensor block_forward(const TransformerBlock& block, const Tensor& x, TransformerBlockCache& cache) {
  const Tensor n1 = layernorm_forward(block.ln1, x, cache.ln1);
  Tensor h = add(x, mha_forward(block.attn, n1, n1, n1, cache.attn));
  const Tensor n2 = layernorm_forward(block.ln2, h, cache.ln2);
  add_inplace(h, mlp_forward(block.mlp, n2, cache.mlp));
  return h;
}

Tensor block_backward(const TransformerBlock& block, const TransformerBlockCache& cache,
                      const Tensor& dy) {
  Tensor dh = dy;
  add_inplace(dh, layernorm_backward(block.ln2, cache.ln2, mlp_backward(block.mlp, cache.mlp, dy)));
  const MhaGrads g = mha_backward(block.attn, cache.attn, dh);
  Tensor dn1 = g.d_query_source;
  add_inplace(dn1, g.d_key_source);
  add_inplace(dn1, g.d_value_source);
  add_inplace(dh, layernorm_backward(block.ln1, cache.ln1, dn1));
  return dh;
}

}  // namespace rfv::nn
