// Copyright 2026 The GME Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GME_MODEL_TRANSFORMER_HPP_
#define GME_MODEL_TRANSFORMER_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gme/common/rng.hpp"

namespace gme::model {

// One token stream plus its segment types. loss_mask flags the positions the
// training objective reads (response tokens).
struct EncodedExample {
  std::vector<int> token_ids;
  std::vector<int> type_ids;
  std::vector<std::uint8_t> loss_mask;

  std::size_t length() const { return token_ids.size(); }
};

struct CoreConfig {
  int vocab_size = 0;
  int n_ctx = 128;
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 128;
  int n_token_types = 5;
  bool causal = true;
  bool tied_lm = true;  // logits share the token-embedding matrix

  void validate() const;
  bool operator==(const CoreConfig&) const = default;
};

// Named slice of the flat parameter buffer.
struct TensorRef {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t count() const { return rows * cols; }
};

// All parameters live in one flat buffer so the optimizer, gradient clip,
// and checkpoint IO stay trivial.
class ParamStore {
 public:
  TensorRef add(const std::string& name, std::size_t rows, std::size_t cols);
  double* data(const TensorRef& ref) { return values_.data() + ref.offset; }
  const double* data(const TensorRef& ref) const { return values_.data() + ref.offset; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  struct Entry {
    std::string name;
    TensorRef ref;
  };
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<double> values_;
  std::vector<Entry> entries_;
};

// Per-call activation buffers; reuse one per thread.
struct Workspace {
  std::vector<double> xs;        // [L+1, T, D] block inputs; xs[L] = last block output
  std::vector<double> x_mid;     // [L, T, D] post-attention residual state
  std::vector<double> ln1_out, qkv, probs, attn_ctx, attn_proj;
  std::vector<double> ln2_out, fc_pre, fc_act, fc_out;
  std::vector<double> ln1_mean, ln1_rstd, ln2_mean, ln2_rstd;
  std::vector<double> lnf_mean, lnf_rstd;
  std::vector<double> hidden;    // [T, D] final layernorm output
  std::vector<double> logits;    // heads scratch
  std::vector<double> d_hidden;  // head-written gradient at hidden; scratch afterwards
  std::vector<double> d_x, d_tmp, d_qkv, d_ctx, d_scores, d_fc;
  std::size_t t_cached = 0;
};

struct BlockParams {
  TensorRef ln1_g, ln1_b, w_qkv, b_qkv, w_o, b_o;
  TensorRef ln2_g, ln2_b, w_fc, b_fc, w_proj, b_proj;
};

// Pre-layernorm transformer over token + position + type embeddings.
// Forward fills the workspace caches; backward consumes them and accumulates
// parameter gradients (and optionally the gradient w.r.t. the embedding sums,
// which is what gradient-based attribution reads).
class TransformerStack {
 public:
  TransformerStack(const CoreConfig& config, ParamStore& store);

  void init_params(ParamStore& store, Rng& rng) const;

  // Embedding offsets (same shape as x0) support finite-difference probes.
  void forward(const EncodedExample& example, const double* params, Workspace& ws,
               const double* embed_offset = nullptr) const;

  // d_hidden: gradient w.r.t. the final hidden states [T, D]. Accumulates into
  // param_grad; embed_grad (optional, [T, D]) receives d(loss)/d(embedding sum).
  void backward(const EncodedExample& example, const double* params, Workspace& ws,
                double* param_grad, double* embed_grad = nullptr) const;

  const CoreConfig& config() const { return config_; }
  const TensorRef& tok_emb() const { return tok_emb_; }

 private:
  CoreConfig config_;
  TensorRef tok_emb_, pos_emb_, type_emb_, lnf_g_, lnf_b_;
  std::vector<BlockParams> blocks_;
};

}  // namespace gme::model

#endif  // GME_MODEL_TRANSFORMER_HPP_
