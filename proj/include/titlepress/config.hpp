#pragma once

#include <cstdint>
#include <string>

namespace titlepress {

enum class AttentionKind { kNone, kGlobal, kNarrow, kMultiHead };

std::string to_string(AttentionKind k);
AttentionKind attention_from_string(const std::string& s);

struct ModelConfig {
  int n_max = 35;   // maximum sequence length
  int c_max = 15;   // maximum word length in characters
  int e_word = 100;
  int e_cin = 16;   // character embedding input dimension
  int e_char = 100; // char-CNN output dimension
  int conv_width = 5;
  int highway_layers = 2;
  int hidden = 128;       // per-direction LSTM hidden size
  int lstm_layers = 3;
  bool use_char_cnn = true;
  AttentionKind attention = AttentionKind::kGlobal;
  int attn_window = 7;    // narrow attention window length (odd)
  int attn_heads = 8;     // multi-head variant
  double dropout = 0.2;

  int embed_dim() const { return (use_char_cnn ? e_char : 0) + e_word; }
  int enc_dim() const { return 2 * hidden; }
};

struct LossWeights {
  double alpha = 0.1;  // multiplies the label-1 log term, Eq.-9 layout
  double beta = 0.9;
};

struct TrainingConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double dropout = 0.2;
  int max_epochs = 15;
  double wallclock_budget_sec = 3600.0;
  int patience = 3;
  int batch_size = 64;
  uint64_t seed = 42;
  LossWeights weights;
  bool gradual_unfreeze = false;
};

/// Loads `key = value` lines (# comments, blank lines ignored) and
/// overrides matching fields of the given configs.
void apply_config_file(const std::string& path, ModelConfig& model, TrainingConfig& train);

}  // namespace titlepress
