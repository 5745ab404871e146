#include "titlepress/model/model.hpp"

#include <stdexcept>

namespace titlepress::model {

Model::Model(ModelConfig config, int word_vocab, int char_vocab, uint64_t seed)
    : config_(config), word_vocab_(word_vocab), char_vocab_(char_vocab) {
  std::mt19937_64 rng(seed);
  create_embedder_params(params_, config_, word_vocab_, char_vocab_, rng);
  create_encoder_params(params_, config_, rng);
  create_head_params(params_, config_, rng);
}

nn::Node* Model::forward(nn::Graph& g, const EncodedExample& ex) {
  if (static_cast<int>(ex.word_ids.size()) != config_.n_max)
    throw std::runtime_error("forward: example encoded for a different sequence length");
  nn::Node* x_emb = embed_sequence(g, params_, config_, ex);
  nn::Node* x_enc = encode(g, params_, config_, x_emb, ex.mask);
  return classify_logits(g, params_, x_enc);
}

nn::Node* Model::loss(nn::Graph& g, const EncodedExample& ex, const LossWeights& w) {
  if (!ex.has_labels) throw std::runtime_error("loss: example has no labels");
  nn::Node* logits = forward(g, ex);
  return g.weighted_bce_logits(logits, ex.labels, ex.mask, w.alpha, w.beta);
}

nn::Mat Model::predict_probs(const EncodedExample& ex) {
  nn::Graph g(false);
  nn::Node* logits = forward(g, ex);
  return g.softmax_rows(logits)->value;
}

std::vector<int> Model::predict(const EncodedExample& ex) {
  return predict_labels(predict_probs(ex), ex.mask);
}

std::vector<std::vector<std::string>> Model::layer_groups() const {
  std::vector<std::vector<std::string>> groups;
  groups.push_back({kHeadW, kHeadB});
  if (config_.attention == AttentionKind::kGlobal ||
      config_.attention == AttentionKind::kNarrow) {
    groups.push_back({kAttnW});
  } else if (config_.attention == AttentionKind::kMultiHead) {
    std::vector<std::string> heads;
    for (int k = 0; k < config_.attn_heads; ++k) heads.push_back(attn_head_param(k));
    groups.push_back(heads);
  }
  for (int l = config_.lstm_layers - 1; l >= 0; --l) {
    std::vector<std::string> layer;
    for (bool fwd : {true, false})
      for (const char* part : {"wx", "wh", "b"}) layer.push_back(lstm_param(l, fwd, part));
    groups.push_back(layer);
  }
  std::vector<std::string> embed;
  if (config_.use_char_cnn) {
    embed.push_back(kCharTable);
    embed.push_back(kConvW);
    embed.push_back(kConvB);
  }
  for (int l = 0; l < config_.highway_layers; ++l)
    for (const char* part : {"tw", "tb", "gw", "gb"}) embed.push_back(highway_param(l, part));
  groups.push_back(embed);
  return groups;
}

void Model::unfreeze_top_groups(int count) {
  auto groups = layer_groups();
  for (auto* p : params_.all()) p->frozen = true;
  for (int gi = 0; gi < std::min<int>(count, static_cast<int>(groups.size())); ++gi)
    for (const auto& name : groups[gi]) params_.get(name).frozen = false;
  params_.get(kWordTable).frozen = true;
}

void Model::unfreeze_all() { unfreeze_top_groups(static_cast<int>(layer_groups().size())); }

std::map<std::string, nn::Mat> Model::snapshot() const {
  std::map<std::string, nn::Mat> snap;
  for (const auto* p : params_.all()) snap[p->name] = p->value;
  return snap;
}

void Model::restore(const std::map<std::string, nn::Mat>& snap) {
  for (auto* p : params_.all()) {
    auto it = snap.find(p->name);
    if (it == snap.end()) throw std::runtime_error("restore: missing tensor " + p->name);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
      throw std::runtime_error("restore: shape mismatch for " + p->name);
    p->value = it->second;
  }
}

int64_t Model::trainable_parameter_count() const {
  int64_t n = 0;
  for (const auto* p : params_.all())
    if (!p->frozen) n += p->value.size();
  return n;
}

}  // namespace titlepress::model
