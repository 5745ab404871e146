#pragma once

#include <random>
#include <string>
#include <vector>

#include "titlepress/config.hpp"
#include "titlepress/nn/graph.hpp"

namespace titlepress::model {

inline constexpr const char* kHeadW = "head.wc";
inline constexpr const char* kHeadB = "head.bc";

void create_head_params(nn::ParamStore& store, const ModelConfig& config,
                        std::mt19937_64& rng);

/// Per-position 2-class logits: x_enc * Wc + bc, N x 2.
nn::Node* classify_logits(nn::Graph& g, nn::ParamStore& store, nn::Node* x_enc);

/// Per-position probability pairs (softmax of the logits).
nn::Node* classify(nn::Graph& g, nn::ParamStore& store, nn::Node* x_enc);

/// Weighted binary cross entropy over class-1 probabilities, averaged
/// over unmasked positions. The alpha weight multiplies the label-1 log
/// term and beta the label-0 term. Probabilities are clamped to
/// [clamp, 1-clamp]. Throws when no position is unmasked.
double weighted_bce(const std::vector<double>& p1, const std::vector<int>& labels,
                    const std::vector<bool>& mask, const LossWeights& w,
                    double clamp = 1e-7);

/// Thresholded decode: 1 iff p(class 1) >= 0.5 (ties keep the token);
/// masked positions are forced to 0.
std::vector<int> predict_labels(const nn::Mat& probs, const std::vector<bool>& mask);

/// Kept tokens in order, space-joined.
std::string extract_short_title(const std::vector<std::string>& tokens,
                                const std::vector<int>& labels);

}  // namespace titlepress::model
