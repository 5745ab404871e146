#include "titlepress/model/head.hpp"

#include <cmath>
#include <stdexcept>

namespace titlepress::model {

namespace {
nn::Mat xavier_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (rows + cols)));
  nn::Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}
}  // namespace

void create_head_params(nn::ParamStore& store, const ModelConfig& config,
                        std::mt19937_64& rng) {
  store.create(kHeadW, xavier_normal(config.enc_dim(), 2, rng));
  store.create(kHeadB, nn::Mat::Zero(1, 2));
}

nn::Node* classify_logits(nn::Graph& g, nn::ParamStore& store, nn::Node* x_enc) {
  return g.add_rowvec(g.matmul(x_enc, g.param(store.get(kHeadW))),
                      g.param(store.get(kHeadB)));
}

nn::Node* classify(nn::Graph& g, nn::ParamStore& store, nn::Node* x_enc) {
  return g.softmax_rows(classify_logits(g, store, x_enc));
}

double weighted_bce(const std::vector<double>& p1, const std::vector<int>& labels,
                    const std::vector<bool>& mask, const LossWeights& w, double clamp) {
  if (p1.size() != labels.size() || p1.size() != mask.size())
    throw std::runtime_error("weighted_bce: length mismatch");
  int n_valid = 0;
  double loss = 0.0;
  for (size_t i = 0; i < p1.size(); ++i) {
    if (!mask[i]) continue;
    ++n_valid;
    const double p = std::min(std::max(p1[i], clamp), 1.0 - clamp);
    loss -= w.alpha * labels[i] * std::log(p) +
            w.beta * (1 - labels[i]) * std::log(1.0 - p);
  }
  if (n_valid == 0) throw std::runtime_error("weighted_bce: all positions masked");
  return loss / n_valid;
}

std::vector<int> predict_labels(const nn::Mat& probs, const std::vector<bool>& mask) {
  if (probs.cols() != 2) throw std::runtime_error("predict_labels: need probability pairs");
  std::vector<int> out(probs.rows(), 0);
  for (int i = 0; i < probs.rows(); ++i)
    if (mask[i] && probs(i, 1) >= 0.5) out[i] = 1;
  return out;
}

std::string extract_short_title(const std::vector<std::string>& tokens,
                                const std::vector<int>& labels) {
  if (tokens.size() > labels.size())
    throw std::runtime_error("extract_short_title: label vector too short");
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!labels[i]) continue;
    if (!out.empty()) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace titlepress::model
