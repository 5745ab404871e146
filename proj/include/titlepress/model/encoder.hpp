#pragma once

#include <random>
#include <string>
#include <vector>

#include "titlepress/config.hpp"
#include "titlepress/nn/graph.hpp"

namespace titlepress::model {

std::string lstm_param(int layer, bool forward, const char* part);  // part in {wx,wh,b}
inline constexpr const char* kAttnW = "attn.ws";
std::string attn_head_param(int head);

void create_encoder_params(nn::ParamStore& store, const ModelConfig& config,
                           std::mt19937_64& rng);

/// Stacked bidirectional LSTM. Input N x embed_dim, output N x 2h.
/// PAD timesteps carry zero hidden/cell states. Inter-layer dropout is
/// applied when the graph is in training mode.
nn::Node* bilstm_stack(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                       nn::Node* x, const std::vector<bool>& mask);

/// Multiplicative self-attention readout over unmasked positions.
/// Also implements the narrow-window and multi-head variants; kNone
/// returns the input unchanged. Throws when every position is masked.
nn::Node* self_attention(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                         nn::Node* xb, const std::vector<bool>& mask);

/// Attention weights for inspection: row-stochastic over unmasked
/// columns (global variant). Eval mode only.
nn::Mat attention_weights(nn::ParamStore& store, const ModelConfig& config,
                          const nn::Mat& xb, const std::vector<bool>& mask);

/// bilstm_stack followed by self_attention, with dropout around them in
/// training mode.
nn::Node* encode(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                 nn::Node* x_emb, const std::vector<bool>& mask);

}  // namespace titlepress::model
