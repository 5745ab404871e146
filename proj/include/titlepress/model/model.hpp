#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "titlepress/config.hpp"
#include "titlepress/dataset.hpp"
#include "titlepress/model/embedder.hpp"
#include "titlepress/model/encoder.hpp"
#include "titlepress/model/head.hpp"
#include "titlepress/nn/graph.hpp"

namespace titlepress::model {

/// The sequence labeler: hybrid embedder, BiLSTM stack with
/// self-attention, and a pointwise 2-class head.
class Model {
 public:
  Model(ModelConfig config, int word_vocab, int char_vocab, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  int word_vocab() const { return word_vocab_; }
  int char_vocab() const { return char_vocab_; }

  /// Builds the forward graph and returns the N x 2 logits node.
  nn::Node* forward(nn::Graph& g, const EncodedExample& ex);

  /// Forward + weighted BCE against ex.labels. The example must carry
  /// labels.
  nn::Node* loss(nn::Graph& g, const EncodedExample& ex, const LossWeights& w);

  /// Eval-mode probability pairs for one example (N x 2).
  nn::Mat predict_probs(const EncodedExample& ex);
  /// Eval-mode decoded 0/1 labels (threshold 0.5, PAD forced 0).
  std::vector<int> predict(const EncodedExample& ex);

  /// Top-down layer groups for gradual unfreezing: head, attention,
  /// lstm(top)...lstm(bottom), embedding (char-CNN + highway). The word
  /// table is excluded; it stays frozen for good.
  std::vector<std::vector<std::string>> layer_groups() const;

  /// Freezes everything but the first `count` groups (top-down). Pass a
  /// count >= group count to unfreeze all trainable parameters.
  void unfreeze_top_groups(int count);
  void unfreeze_all();

  /// Snapshot / restore of parameter values (not Adam state).
  std::map<std::string, nn::Mat> snapshot() const;
  void restore(const std::map<std::string, nn::Mat>& snap);

  int64_t trainable_parameter_count() const;

 private:
  ModelConfig config_;
  int word_vocab_;
  int char_vocab_;
  nn::ParamStore params_;
};

}  // namespace titlepress::model
