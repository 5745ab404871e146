#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "titlepress/config.hpp"
#include "titlepress/dataset.hpp"
#include "titlepress/pretrain/skipgram.hpp"

namespace titlepress::pretrain {

struct CorruptionPlan {
  std::vector<std::string> tokens;
  std::vector<std::vector<int>> rounds;           // disjoint position sets covering 0..L-1
  std::vector<std::map<int, std::string>> replacements;  // per round
};

/// Sum over the window (radius n, truncated at the boundaries, k = 0
/// included) of -log P_s(w | w_{i+k}), probabilities clamped >= 1e-9.
double replacement_score(int candidate_id, int position,
                         const std::vector<std::string>& tokens,
                         const ContextModel& model);

/// Argmin of replacement_score over V' = V minus every window token
/// (including the original). Ties break to the lowest token id; with
/// top_k > 0 candidates are restricted to the top_k most frequent
/// tokens of V'. Throws when V' is empty.
std::string select_replacement(int position, const std::vector<std::string>& tokens,
                               const ContextModel& model, int top_k = 0);

/// Randomly partitions positions 0..L-1 into min(ceil(1/f), L)
/// near-equal disjoint rounds (sizes differ by at most one).
CorruptionPlan plan_corruption(const std::vector<std::string>& tokens, double f,
                               uint64_t seed);

/// Full plan including replacement choices for every round.
CorruptionPlan plan_corruption_with_replacements(const std::vector<std::string>& tokens,
                                                 double f, uint64_t seed,
                                                 const ContextModel& model, int top_k = 0);

/// Per title: one clean copy plus one corrupted copy per round. Titles
/// are truncated to n_max before corruption.
std::vector<TokenLabelRecord> build_pretraining_corpus(
    const std::vector<std::vector<std::string>>& titles, const ContextModel& model,
    double f, uint64_t seed, int n_max, int top_k = 0);

/// alpha = median_len * f / n_max, beta = 1 - alpha. Throws unless
/// alpha lands strictly inside (0, 1).
LossWeights pretrain_class_weights(double median_len, double f, int n_max);

}  // namespace titlepress::pretrain
