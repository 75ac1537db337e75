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

#include "gme/model/transformer.hpp"

#include <cmath>
#include <cstring>

#include "gme/common/error.hpp"
#include "gme/model/vocab.hpp"

namespace gme::model {

namespace {

constexpr double kLnEps = 1e-5;

void linear_forward(const double* x, const double* w, const double* b, double* y,
                    std::size_t t_len, std::size_t in_dim, std::size_t out_dim) {
  for (std::size_t t = 0; t < t_len; ++t) {
    double* yt = y + t * out_dim;
    if (b) {
      std::memcpy(yt, b, out_dim * sizeof(double));
    } else {
      std::memset(yt, 0, out_dim * sizeof(double));
    }
    const double* xt = x + t * in_dim;
    for (std::size_t k = 0; k < in_dim; ++k) {
      double a = xt[k];
      const double* wk = w + k * out_dim;
      for (std::size_t j = 0; j < out_dim; ++j) yt[j] += a * wk[j];
    }
  }
}

void linear_backward(const double* x, const double* w, const double* dy, double* dx,
                     double* dw, double* db, std::size_t t_len, std::size_t in_dim,
                     std::size_t out_dim) {
  for (std::size_t t = 0; t < t_len; ++t) {
    const double* dyt = dy + t * out_dim;
    if (dx) {
      double* dxt = dx + t * in_dim;
      for (std::size_t k = 0; k < in_dim; ++k) {
        const double* wk = w + k * out_dim;
        double s = 0.0;
        for (std::size_t j = 0; j < out_dim; ++j) s += dyt[j] * wk[j];
        dxt[k] = s;
      }
    }
    if (dw) {
      const double* xt = x + t * in_dim;
      for (std::size_t k = 0; k < in_dim; ++k) {
        double a = xt[k];
        if (a == 0.0) continue;
        double* dwk = dw + k * out_dim;
        for (std::size_t j = 0; j < out_dim; ++j) dwk[j] += a * dyt[j];
      }
    }
    if (db) {
      for (std::size_t j = 0; j < out_dim; ++j) db[j] += dyt[j];
    }
  }
}

void layernorm_forward(const double* x, const double* g, const double* b, double* y,
                       double* mean, double* rstd, std::size_t t_len, std::size_t dim) {
  for (std::size_t t = 0; t < t_len; ++t) {
    const double* xt = x + t * dim;
    double m = 0.0;
    for (std::size_t k = 0; k < dim; ++k) m += xt[k];
    m /= static_cast<double>(dim);
    double var = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      double d = xt[k] - m;
      var += d * d;
    }
    var /= static_cast<double>(dim);
    double rs = 1.0 / std::sqrt(var + kLnEps);
    mean[t] = m;
    rstd[t] = rs;
    double* yt = y + t * dim;
    for (std::size_t k = 0; k < dim; ++k) yt[k] = (xt[k] - m) * rs * g[k] + b[k];
  }
}

void layernorm_backward(const double* x, const double* g, const double* mean,
                        const double* rstd, const double* dy, double* dx, double* dg,
                        double* db, std::size_t t_len, std::size_t dim) {
  for (std::size_t t = 0; t < t_len; ++t) {
    const double* xt = x + t * dim;
    const double* dyt = dy + t * dim;
    double* dxt = dx + t * dim;
    double m = mean[t];
    double rs = rstd[t];
    double sum_dxhat = 0.0;
    double sum_dxhat_xhat = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      double xhat = (xt[k] - m) * rs;
      double dxhat = dyt[k] * g[k];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat;
      if (dg) dg[k] += dyt[k] * xhat;
      if (db) db[k] += dyt[k];
    }
    double inv_dim = 1.0 / static_cast<double>(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      double xhat = (xt[k] - m) * rs;
      double dxhat = dyt[k] * g[k];
      dxt[k] = rs * (dxhat - inv_dim * sum_dxhat - xhat * inv_dim * sum_dxhat_xhat);
    }
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

double gelu(double x) {
  double u = kGeluC * (x + 0.044715 * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad(double x) {
  double u = kGeluC * (x + 0.044715 * x * x * x);
  double t = std::tanh(u);
  double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

}  // namespace

void CoreConfig::validate() const {
  if (vocab_size <= 0) throw ConfigError("vocab_size must be positive");
  if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_ff <= 0 || n_ctx <= 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (d_model % n_heads != 0) throw ConfigError("d_model must be divisible by n_heads");
  if (n_token_types <= 0 || n_token_types > kNumTokenTypes) {
    throw ConfigError("n_token_types out of range");
  }
}

TensorRef ParamStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
  TensorRef ref{values_.size(), rows, cols};
  values_.resize(values_.size() + rows * cols, 0.0);
  entries_.push_back({name, ref});
  return ref;
}

TransformerStack::TransformerStack(const CoreConfig& config, ParamStore& store)
    : config_(config) {
  config_.validate();
  std::size_t d = static_cast<std::size_t>(config_.d_model);
  std::size_t f = static_cast<std::size_t>(config_.d_ff);
  tok_emb_ = store.add("tok_emb", static_cast<std::size_t>(config_.vocab_size), d);
  pos_emb_ = store.add("pos_emb", static_cast<std::size_t>(config_.n_ctx), d);
  type_emb_ = store.add("type_emb", static_cast<std::size_t>(config_.n_token_types), d);
  for (int l = 0; l < config_.n_layers; ++l) {
    std::string p = "blk" + std::to_string(l) + ".";
    BlockParams blk;
    blk.ln1_g = store.add(p + "ln1.g", 1, d);
    blk.ln1_b = store.add(p + "ln1.b", 1, d);
    blk.w_qkv = store.add(p + "attn.w_qkv", d, 3 * d);
    blk.b_qkv = store.add(p + "attn.b_qkv", 1, 3 * d);
    blk.w_o = store.add(p + "attn.w_o", d, d);
    blk.b_o = store.add(p + "attn.b_o", 1, d);
    blk.ln2_g = store.add(p + "ln2.g", 1, d);
    blk.ln2_b = store.add(p + "ln2.b", 1, d);
    blk.w_fc = store.add(p + "mlp.w_fc", d, f);
    blk.b_fc = store.add(p + "mlp.b_fc", 1, f);
    blk.w_proj = store.add(p + "mlp.w_proj", f, d);
    blk.b_proj = store.add(p + "mlp.b_proj", 1, d);
    blocks_.push_back(blk);
  }
  lnf_g_ = store.add("lnf.g", 1, d);
  lnf_b_ = store.add("lnf.b", 1, d);
}

void TransformerStack::init_params(ParamStore& store, Rng& rng) const {
  auto gauss_fill = [&](const TensorRef& ref) {
    double* p = store.data(ref);
    for (std::size_t i = 0; i < ref.count(); ++i) p[i] = 0.02 * rng.gauss();
  };
  auto const_fill = [&](const TensorRef& ref, double v) {
    double* p = store.data(ref);
    for (std::size_t i = 0; i < ref.count(); ++i) p[i] = v;
  };
  gauss_fill(tok_emb_);
  gauss_fill(pos_emb_);
  gauss_fill(type_emb_);
  for (const auto& blk : blocks_) {
    const_fill(blk.ln1_g, 1.0);
    const_fill(blk.ln1_b, 0.0);
    gauss_fill(blk.w_qkv);
    const_fill(blk.b_qkv, 0.0);
    gauss_fill(blk.w_o);
    const_fill(blk.b_o, 0.0);
    const_fill(blk.ln2_g, 1.0);
    const_fill(blk.ln2_b, 0.0);
    gauss_fill(blk.w_fc);
    const_fill(blk.b_fc, 0.0);
    gauss_fill(blk.w_proj);
    const_fill(blk.b_proj, 0.0);
  }
  const_fill(lnf_g_, 1.0);
  const_fill(lnf_b_, 0.0);
}

void TransformerStack::forward(const EncodedExample& example, const double* params,
                               Workspace& ws, const double* embed_offset) const {
  const std::size_t t_len = example.length();
  if (t_len == 0) throw PreconditionError("empty example");
  if (t_len > static_cast<std::size_t>(config_.n_ctx)) {
    throw LengthError("sequence length " + std::to_string(t_len) + " exceeds context " +
                      std::to_string(config_.n_ctx));
  }
  const std::size_t d = static_cast<std::size_t>(config_.d_model);
  const std::size_t f = static_cast<std::size_t>(config_.d_ff);
  const std::size_t heads = static_cast<std::size_t>(config_.n_heads);
  const std::size_t dh = d / heads;
  const std::size_t layers = static_cast<std::size_t>(config_.n_layers);

  ws.t_cached = t_len;
  ws.xs.resize((layers + 1) * t_len * d);
  ws.x_mid.resize(layers * t_len * d);
  ws.ln1_out.resize(layers * t_len * d);
  ws.qkv.resize(layers * t_len * 3 * d);
  ws.probs.resize(layers * heads * t_len * t_len);
  ws.attn_ctx.resize(layers * t_len * d);
  ws.attn_proj.resize(t_len * d);
  ws.ln2_out.resize(layers * t_len * d);
  ws.fc_pre.resize(layers * t_len * f);
  ws.fc_act.resize(layers * t_len * f);
  ws.fc_out.resize(t_len * d);
  ws.ln1_mean.resize(layers * t_len);
  ws.ln1_rstd.resize(layers * t_len);
  ws.ln2_mean.resize(layers * t_len);
  ws.ln2_rstd.resize(layers * t_len);
  ws.lnf_mean.resize(t_len);
  ws.lnf_rstd.resize(t_len);
  ws.hidden.resize(t_len * d);

  // Embedding sums.
  double* x0 = ws.xs.data();
  for (std::size_t t = 0; t < t_len; ++t) {
    int tok = example.token_ids[t];
    int type = example.type_ids[t];
    if (tok < 0 || tok >= config_.vocab_size) throw ConfigError("token id out of range");
    if (type < 0 || type >= config_.n_token_types) throw ConfigError("type id out of range");
    const double* te = params + tok_emb_.offset + static_cast<std::size_t>(tok) * d;
    const double* pe = params + pos_emb_.offset + t * d;
    const double* ye = params + type_emb_.offset + static_cast<std::size_t>(type) * d;
    double* xt = x0 + t * d;
    for (std::size_t k = 0; k < d; ++k) xt[k] = te[k] + pe[k] + ye[k];
    if (embed_offset) {
      const double* ot = embed_offset + t * d;
      for (std::size_t k = 0; k < d; ++k) xt[k] += ot[k];
    }
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& blk = blocks_[l];
    const double* x_in = ws.xs.data() + l * t_len * d;
    double* x_out = ws.xs.data() + (l + 1) * t_len * d;
    double* ln1 = ws.ln1_out.data() + l * t_len * d;
    double* qkv = ws.qkv.data() + l * t_len * 3 * d;
    double* probs = ws.probs.data() + l * heads * t_len * t_len;
    double* ctx = ws.attn_ctx.data() + l * t_len * d;

    layernorm_forward(x_in, params + blk.ln1_g.offset, params + blk.ln1_b.offset, ln1,
                      ws.ln1_mean.data() + l * t_len, ws.ln1_rstd.data() + l * t_len,
                      t_len, d);
    linear_forward(ln1, params + blk.w_qkv.offset, params + blk.b_qkv.offset, qkv, t_len,
                   d, 3 * d);

    std::memset(ctx, 0, t_len * d * sizeof(double));
    for (std::size_t h = 0; h < heads; ++h) {
      double* ph = probs + h * t_len * t_len;
      for (std::size_t i = 0; i < t_len; ++i) {
        const double* qi = qkv + i * 3 * d + h * dh;
        std::size_t limit = config_.causal ? i + 1 : t_len;
        double* row = ph + i * t_len;
        double maxv = -1e300;
        for (std::size_t j = 0; j < limit; ++j) {
          const double* kj = qkv + j * 3 * d + d + h * dh;
          double s = 0.0;
          for (std::size_t k = 0; k < dh; ++k) s += qi[k] * kj[k];
          s *= scale;
          row[j] = s;
          if (s > maxv) maxv = s;
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < limit; ++j) {
          row[j] = std::exp(row[j] - maxv);
          denom += row[j];
        }
        double inv = 1.0 / denom;
        for (std::size_t j = 0; j < limit; ++j) row[j] *= inv;
        for (std::size_t j = limit; j < t_len; ++j) row[j] = 0.0;

        double* ci = ctx + i * d + h * dh;
        for (std::size_t j = 0; j < limit; ++j) {
          const double p = row[j];
          if (p == 0.0) continue;
          const double* vj = qkv + j * 3 * d + 2 * d + h * dh;
          for (std::size_t k = 0; k < dh; ++k) ci[k] += p * vj[k];
        }
      }
    }

    linear_forward(ctx, params + blk.w_o.offset, params + blk.b_o.offset,
                   ws.attn_proj.data(), t_len, d, d);
    double* x_mid = ws.x_mid.data() + l * t_len * d;
    for (std::size_t i = 0; i < t_len * d; ++i) x_mid[i] = x_in[i] + ws.attn_proj[i];

    double* ln2 = ws.ln2_out.data() + l * t_len * d;
    double* fc_pre = ws.fc_pre.data() + l * t_len * f;
    double* fc_act = ws.fc_act.data() + l * t_len * f;
    layernorm_forward(x_mid, params + blk.ln2_g.offset, params + blk.ln2_b.offset, ln2,
                      ws.ln2_mean.data() + l * t_len, ws.ln2_rstd.data() + l * t_len,
                      t_len, d);
    linear_forward(ln2, params + blk.w_fc.offset, params + blk.b_fc.offset, fc_pre, t_len,
                   d, f);
    for (std::size_t i = 0; i < t_len * f; ++i) fc_act[i] = gelu(fc_pre[i]);
    linear_forward(fc_act, params + blk.w_proj.offset, params + blk.b_proj.offset,
                   ws.fc_out.data(), t_len, f, d);
    for (std::size_t i = 0; i < t_len * d; ++i) x_out[i] = x_mid[i] + ws.fc_out[i];
  }

  layernorm_forward(ws.xs.data() + layers * t_len * d, params + lnf_g_.offset,
                    params + lnf_b_.offset, ws.hidden.data(), ws.lnf_mean.data(),
                    ws.lnf_rstd.data(), t_len, d);
}

void TransformerStack::backward(const EncodedExample& example, const double* params,
                                Workspace& ws, double* param_grad,
                                double* embed_grad) const {
  const std::size_t t_len = ws.t_cached;
  const std::size_t d = static_cast<std::size_t>(config_.d_model);
  const std::size_t f = static_cast<std::size_t>(config_.d_ff);
  const std::size_t heads = static_cast<std::size_t>(config_.n_heads);
  const std::size_t dh = d / heads;
  const std::size_t layers = static_cast<std::size_t>(config_.n_layers);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  ws.d_x.resize(t_len * d);
  ws.d_tmp.resize(t_len * d);
  ws.d_qkv.resize(t_len * 3 * d);
  ws.d_ctx.resize(t_len * d);
  ws.d_fc.resize(t_len * f);

  // Final layernorm.
  layernorm_backward(ws.xs.data() + layers * t_len * d, params + lnf_g_.offset,
                     ws.lnf_mean.data(), ws.lnf_rstd.data(), ws.d_hidden.data(),
                     ws.d_x.data(), param_grad + lnf_g_.offset, param_grad + lnf_b_.offset,
                     t_len, d);

  for (std::size_t l = layers; l-- > 0;) {
    const auto& blk = blocks_[l];
    const double* x_in = ws.xs.data() + l * t_len * d;
    const double* x_mid = ws.x_mid.data() + l * t_len * d;
    const double* ln1 = ws.ln1_out.data() + l * t_len * d;
    const double* qkv = ws.qkv.data() + l * t_len * 3 * d;
    const double* probs = ws.probs.data() + l * heads * t_len * t_len;
    const double* ctx = ws.attn_ctx.data() + l * t_len * d;
    const double* ln2 = ws.ln2_out.data() + l * t_len * d;
    const double* fc_pre = ws.fc_pre.data() + l * t_len * f;
    const double* fc_act = ws.fc_act.data() + l * t_len * f;

    // MLP branch: d_x currently holds the gradient at the block output.
    linear_backward(fc_act, params + blk.w_proj.offset, ws.d_x.data(), ws.d_fc.data(),
                    param_grad + blk.w_proj.offset, param_grad + blk.b_proj.offset, t_len,
                    f, d);
    for (std::size_t i = 0; i < t_len * f; ++i) ws.d_fc[i] *= gelu_grad(fc_pre[i]);
    linear_backward(ln2, params + blk.w_fc.offset, ws.d_fc.data(), ws.d_tmp.data(),
                    param_grad + blk.w_fc.offset, param_grad + blk.b_fc.offset, t_len, d,
                    f);
    // d_tmp: gradient at ln2 input adds to the residual gradient in d_x.
    {
      std::vector<double>& dres = ws.d_hidden;  // consumed by the final LN; scratch now
      dres.resize(t_len * d);
      layernorm_backward(x_mid, params + blk.ln2_g.offset, ws.ln2_mean.data() + l * t_len,
                         ws.ln2_rstd.data() + l * t_len, ws.d_tmp.data(), dres.data(),
                         param_grad + blk.ln2_g.offset, param_grad + blk.ln2_b.offset,
                         t_len, d);
      for (std::size_t i = 0; i < t_len * d; ++i) ws.d_x[i] += dres[i];
    }

    // Attention branch.
    linear_backward(ctx, params + blk.w_o.offset, ws.d_x.data(), ws.d_ctx.data(),
                    param_grad + blk.w_o.offset, param_grad + blk.b_o.offset, t_len, d, d);
    std::memset(ws.d_qkv.data(), 0, t_len * 3 * d * sizeof(double));
    ws.d_scores.resize(t_len);
    for (std::size_t h = 0; h < heads; ++h) {
      const double* ph = probs + h * t_len * t_len;
      for (std::size_t i = 0; i < t_len; ++i) {
        std::size_t limit = config_.causal ? i + 1 : t_len;
        const double* prow = ph + i * t_len;
        const double* dci = ws.d_ctx.data() + i * d + h * dh;
        const double* qi = qkv + i * 3 * d + h * dh;
        double* dqi = ws.d_qkv.data() + i * 3 * d + h * dh;

        // dv and dp in one pass, then softmax backward.
        double dot_dp_p = 0.0;
        std::vector<double>& dp_row = ws.d_scores;
        for (std::size_t j = 0; j < limit; ++j) {
          const double* vj = qkv + j * 3 * d + 2 * d + h * dh;
          double dp = 0.0;
          for (std::size_t k = 0; k < dh; ++k) dp += dci[k] * vj[k];
          dp_row[j] = dp;
          dot_dp_p += dp * prow[j];
          double* dvj = ws.d_qkv.data() + j * 3 * d + 2 * d + h * dh;
          const double p = prow[j];
          for (std::size_t k = 0; k < dh; ++k) dvj[k] += p * dci[k];
        }
        for (std::size_t j = 0; j < limit; ++j) {
          double ds = prow[j] * (dp_row[j] - dot_dp_p) * scale;
          if (ds == 0.0) continue;
          const double* kj = qkv + j * 3 * d + d + h * dh;
          double* dkj = ws.d_qkv.data() + j * 3 * d + d + h * dh;
          for (std::size_t k = 0; k < dh; ++k) {
            dqi[k] += ds * kj[k];
            dkj[k] += ds * qi[k];
          }
        }
      }
    }
    linear_backward(ln1, params + blk.w_qkv.offset, ws.d_qkv.data(), ws.d_tmp.data(),
                    param_grad + blk.w_qkv.offset, param_grad + blk.b_qkv.offset, t_len, d,
                    3 * d);
    {
      std::vector<double>& dres = ws.d_hidden;
      dres.resize(t_len * d);
      layernorm_backward(x_in, params + blk.ln1_g.offset, ws.ln1_mean.data() + l * t_len,
                         ws.ln1_rstd.data() + l * t_len, ws.d_tmp.data(), dres.data(),
                         param_grad + blk.ln1_g.offset, param_grad + blk.ln1_b.offset,
                         t_len, d);
      for (std::size_t i = 0; i < t_len * d; ++i) ws.d_x[i] += dres[i];
    }
  }

  // Embedding gradients.
  for (std::size_t t = 0; t < t_len; ++t) {
    const double* dxt = ws.d_x.data() + t * d;
    double* dte = param_grad + tok_emb_.offset +
                  static_cast<std::size_t>(example.token_ids[t]) * d;
    double* dpe = param_grad + pos_emb_.offset + t * d;
    double* dye = param_grad + type_emb_.offset +
                  static_cast<std::size_t>(example.type_ids[t]) * d;
    for (std::size_t k = 0; k < d; ++k) {
      dte[k] += dxt[k];
      dpe[k] += dxt[k];
      dye[k] += dxt[k];
    }
    if (embed_grad) {
      std::memcpy(embed_grad + t * d, dxt, d * sizeof(double));
    }
  }
}

}  // namespace gme::model
