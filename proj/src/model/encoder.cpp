#include "titlepress/model/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace titlepress::model {

std::string lstm_param(int layer, bool forward, const char* part) {
  return "lstm" + std::to_string(layer) + "." + (forward ? "fw" : "bw") + "." + part;
}

std::string attn_head_param(int head) { return "attn.head" + std::to_string(head) + ".ws"; }

namespace {
nn::Mat xavier_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (rows + cols)));
  nn::Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

/// One LSTM direction over the sequence; returns N x h.
nn::Node* lstm_direction(nn::Graph& g, nn::ParamStore& store, int layer, bool forward,
                         int hidden, nn::Node* x, const std::vector<bool>& mask) {
  const int n = static_cast<int>(x->value.rows());
  nn::Node* wx = g.param(store.get(lstm_param(layer, forward, "wx")));
  nn::Node* wh = g.param(store.get(lstm_param(layer, forward, "wh")));
  nn::Node* b = g.param(store.get(lstm_param(layer, forward, "b")));
  nn::Node* h = g.constant(nn::Mat::Zero(1, hidden));
  nn::Node* c = g.constant(nn::Mat::Zero(1, hidden));
  std::vector<nn::Node*> outs(n);
  for (int step = 0; step < n; ++step) {
    const int t = forward ? step : n - 1 - step;
    nn::Node* xt = g.rows(x, t, 1);
    nn::Node* gates = g.add_rowvec(g.add(g.matmul(xt, wx), g.matmul(h, wh)), b);
    nn::Node* in_gate = g.sigmoid(g.cols(gates, 0, hidden));
    nn::Node* forget_gate = g.sigmoid(g.cols(gates, hidden, hidden));
    nn::Node* out_gate = g.sigmoid(g.cols(gates, 2 * hidden, hidden));
    nn::Node* cand = g.tanh_(g.cols(gates, 3 * hidden, hidden));
    nn::Node* c_new = g.add(g.cmul(forget_gate, c), g.cmul(in_gate, cand));
    nn::Node* h_new = g.cmul(out_gate, g.tanh_(c_new));
    const double m = mask[t] ? 1.0 : 0.0;
    c = g.scale(c_new, m);
    h = g.scale(h_new, m);
    outs[t] = h;
  }
  return g.concat_rows(outs);
}
}  // namespace

void create_encoder_params(nn::ParamStore& store, const ModelConfig& config,
                           std::mt19937_64& rng) {
  const int h = config.hidden;
  for (int l = 0; l < config.lstm_layers; ++l) {
    const int in_dim = l == 0 ? config.embed_dim() : 2 * h;
    for (bool fwd : {true, false}) {
      store.create(lstm_param(l, fwd, "wx"), xavier_normal(in_dim, 4 * h, rng));
      store.create(lstm_param(l, fwd, "wh"), xavier_normal(h, 4 * h, rng));
      store.create(lstm_param(l, fwd, "b"), nn::Mat::Zero(1, 4 * h));
    }
  }
  switch (config.attention) {
    case AttentionKind::kNone:
      break;
    case AttentionKind::kGlobal:
    case AttentionKind::kNarrow:
      // identity-dominant init: scores start as dot-product similarity, so
      // attention rows differ per position from the first step instead of
      // collapsing to the uniform mean
      store.create(kAttnW, nn::Mat::Identity(2 * h, 2 * h) +
                               0.1 * xavier_normal(2 * h, 2 * h, rng));
      break;
    case AttentionKind::kMultiHead: {
      if ((2 * h) % config.attn_heads != 0)
        throw std::runtime_error("encoder: 2h must be divisible by attn_heads");
      const int dh = 2 * h / config.attn_heads;
      for (int k = 0; k < config.attn_heads; ++k)
        store.create(attn_head_param(k),
                     nn::Mat::Identity(dh, dh) + 0.1 * xavier_normal(dh, dh, rng));
      break;
    }
  }
}

nn::Node* bilstm_stack(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                       nn::Node* x, const std::vector<bool>& mask) {
  for (int l = 0; l < config.lstm_layers; ++l) {
    if (l > 0) x = g.dropout(x, config.dropout);
    nn::Node* fwd = lstm_direction(g, store, l, true, config.hidden, x, mask);
    nn::Node* bwd = lstm_direction(g, store, l, false, config.hidden, x, mask);
    x = g.concat_cols(fwd, bwd);
  }
  return x;
}

namespace {
std::vector<std::vector<bool>> attention_allow(const ModelConfig& config,
                                               const std::vector<bool>& mask) {
  const int n = static_cast<int>(mask.size());
  bool any = false;
  for (bool m : mask) any = any || m;
  if (!any) throw std::runtime_error("self_attention: all positions masked");
  std::vector<std::vector<bool>> allow(n, std::vector<bool>(n, false));
  const int half = config.attn_window / 2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!mask[j]) continue;
      if (config.attention == AttentionKind::kNarrow && std::abs(i - j) > half) continue;
      allow[i][j] = true;
    }
  return allow;
}

nn::Node* attend(nn::Graph& g, nn::Node* xb, nn::Node* ws,
                 const std::vector<std::vector<bool>>& allow) {
  nn::Node* scores = g.matmul_nt(g.matmul(xb, ws), xb);  // e_ij = x_i^T Ws x_j
  nn::Node* alpha = g.masked_softmax_rows(scores, allow);
  return g.matmul(alpha, xb);
}
}  // namespace

nn::Node* self_attention(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                         nn::Node* xb, const std::vector<bool>& mask) {
  if (config.attention == AttentionKind::kNone) return xb;
  auto allow = attention_allow(config, mask);
  if (config.attention == AttentionKind::kMultiHead) {
    const int dh = static_cast<int>(xb->value.cols()) / config.attn_heads;
    nn::Node* out = nullptr;
    for (int k = 0; k < config.attn_heads; ++k) {
      nn::Node* xh = g.cols(xb, k * dh, dh);
      nn::Node* oh = attend(g, xh, g.param(store.get(attn_head_param(k))), allow);
      out = out ? g.concat_cols(out, oh) : oh;
    }
    return out;
  }
  return attend(g, xb, g.param(store.get(kAttnW)), allow);
}

nn::Mat attention_weights(nn::ParamStore& store, const ModelConfig& config,
                          const nn::Mat& xb, const std::vector<bool>& mask) {
  nn::Graph g(false);
  nn::Node* x = g.input(xb);
  nn::Node* scores = g.matmul_nt(g.matmul(x, g.param(store.get(kAttnW))), x);
  nn::Node* alpha = g.masked_softmax_rows(scores, attention_allow(config, mask));
  return alpha->value;
}

nn::Node* encode(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                 nn::Node* x_emb, const std::vector<bool>& mask) {
  nn::Node* x = g.dropout(x_emb, config.dropout);
  nn::Node* xb = bilstm_stack(g, store, config, x, mask);
  xb = g.dropout(xb, config.dropout);
  return self_attention(g, store, config, xb, mask);
}

}  // namespace titlepress::model
