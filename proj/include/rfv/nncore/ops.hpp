#pragma once

// Paired forward/backward building blocks. Forward calls fill a cache that the
// matching backward consumes; backward accumulates (+=) into Param::grad and
// returns gradients w.r.t. the inputs. A layer may run several times per
// step as long as each call keeps its own cache.

#include <cstdint>
#include <string>
#include <vector>

#include "rfv/nncore/params.hpp"
#include "rfv/nncore/tensor.hpp"

namespace rfv::nn {

struct Linear {
  Param* weight = nullptr;  // in x out
  Param* bias = nullptr;    // 1 x out

  static Linear create(ParameterStore& store, const std::string& name, std::size_t in,
                       std::size_t out, std::uint64_t seed,
                       InitScheme scheme = InitScheme::kUniformFanIn);
  std::size_t in_dim() const { return weight->value.rows(); }
  std::size_t out_dim() const { return weight->value.cols(); }
};

struct LinearCache {
  Tensor input;
};

Tensor linear_forward(const Linear& layer, const Tensor& x, LinearCache& cache);
Tensor linear_backward(const Linear& layer, const LinearCache& cache, const Tensor& dy);

struct LayerNorm {
  Param* gamma = nullptr;  // 1 x d
  Param* beta = nullptr;   // 1 x d
  double eps = 1e-5;

  static LayerNorm create(ParameterStore& store, const std::string& name, std::size_t dim);
};

struct LayerNormCache {
  Tensor normalized;
  std::vector<double> inv_std;
};

Tensor layernorm_forward(const LayerNorm& layer, const Tensor& x, LayerNormCache& cache);
Tensor layernorm_backward(const LayerNorm& layer, const LayerNormCache& cache, const Tensor& dy);

// Row-wise softmax (max-shifted).
Tensor softmax_forward(const Tensor& x);
Tensor softmax_backward(const Tensor& y, const Tensor& dy);

// tanh-approximated GELU.
Tensor gelu_forward(const Tensor& x);
Tensor gelu_backward(const Tensor& x, const Tensor& dy);

struct Mlp {
  Linear fc1;
  Linear fc2;

  static Mlp create(ParameterStore& store, const std::string& name, std::size_t in,
                    std::size_t hidden, std::size_t out, std::uint64_t seed);
};

struct MlpCache {
  LinearCache fc1;
  Tensor pre_activation;
  LinearCache fc2;
};

Tensor mlp_forward(const Mlp& mlp, const Tensor& x, MlpCache& cache);
Tensor mlp_backward(const Mlp& mlp, const MlpCache& cache, const Tensor& dy);

// Scaled dot-product multi-head attention with separate query, key and value
// sources: out = Wo * concat_h softmax(Q_h K_h^T / sqrt(d_head)) V_h.
struct MultiHeadAttention {
  Linear q;
  Linear k;
  Linear v;
  Linear o;
  std::size_t heads = 1;

  static MultiHeadAttention create(ParameterStore& store, const std::string& name,
                                   std::size_t d_model, std::size_t heads, std::uint64_t seed);
  std::size_t d_model() const { return q.out_dim(); }
};

struct MhaCache {
  LinearCache q, k, v, o;
  Tensor queries, keys, values;
  std::vector<Tensor> probs;  // per head, Lq x Lk
};

struct MhaGrads {
  Tensor d_query_source;
  Tensor d_key_source;
  Tensor d_value_source;
};

Tensor mha_forward(const MultiHeadAttention& attn, const Tensor& query_src, const Tensor& key_src,
                   const Tensor& value_src, MhaCache& cache);
MhaGrads mha_backward(const MultiHeadAttention& attn, const MhaCache& cache, const Tensor& dy);

// Pre-norm transformer encoder block:
//   h = x + MHA(LN1(x)); y = h + MLP(LN2(h))
struct TransformerBlock {
  LayerNorm ln1;
  MultiHeadAttention attn;
  LayerNorm ln2;
  Mlp mlp;

  static TransformerBlock create(ParameterStore& store, const std::string& name,
                                 std::size_t d_model, std::size_t heads, std::size_t d_hidden,
                                 std::uint64_t seed);
};

struct TransformerBlockCache {
  LayerNormCache ln1;
  MhaCache attn;
  LayerNormCache ln2;
  MlpCache mlp;
};

Tensor block_forward(const TransformerBlock& block, const Tensor& x, TransformerBlockCache& cache);
Tensor block_backward(const TransformerBlock& block, const TransformerBlockCache& cache,
                      const Tensor& dy);

}  // namespace rfv::nn
