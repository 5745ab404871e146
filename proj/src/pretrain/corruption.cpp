#include "titlepress/pretrain/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace titlepress::pretrain {

namespace {
constexpr double kProbFloor = 1e-9;

/// Context token ids in the window [i-n, i+n] that exist in the model
/// vocabulary (k = 0 included).
std::vector<int> window_context_ids(int position, const std::vector<std::string>& tokens,
                                    const ContextModel& model) {
  const int n = model.window();
  std::vector<int> out;
  for (int k = -n; k <= n; ++k) {
    const int j = position + k;
    if (j < 0 || j >= static_cast<int>(tokens.size())) continue;
    const int id = model.token_id(tokens[j]);
    if (id >= 0) out.push_back(id);
  }
  return out;
}
}  // namespace

double replacement_score(int candidate_id, int position,
                         const std::vector<std::string>& tokens,
                         const ContextModel& model) {
  double score = 0.0;
  for (int cid : window_context_ids(position, tokens, model)) {
    const Eigen::VectorXd lp = model.log_probs_given(cid);
    score -= std::max(lp(candidate_id), std::log(kProbFloor));
  }
  return score;
}

std::string select_replacement(int position, const std::vector<std::string>& tokens,
                               const ContextModel& model, int top_k) {
  if (position < 0 || position >= static_cast<int>(tokens.size()))
    throw std::runtime_error("select_replacement: position out of range");
  const int n = model.window();
  std::set<int> excluded;
  for (int k = -n; k <= n; ++k) {
    const int j = position + k;
    if (j < 0 || j >= static_cast<int>(tokens.size())) continue;
    const int id = model.token_id(tokens[j]);
    if (id >= 0) excluded.insert(id);
  }

  // One V-sized pass: total score per candidate is the sum of the
  // per-context -log P vectors.
  const auto context = window_context_ids(position, tokens, model);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(model.vocab_size());
  for (int cid : context) {
    Eigen::VectorXd lp = model.log_probs_given(cid);
    total -= lp.cwiseMax(std::log(kProbFloor));
  }

  int best = -1;
  double best_score = 0.0;
  int considered = 0;
  for (int id : model.tokens_by_frequency()) {
    if (excluded.count(id)) continue;
    if (top_k > 0 && considered >= top_k) break;
    ++considered;
    const double s = total(id);
    if (best < 0 || s < best_score || (s == best_score && id < best)) {
      best = id;
      best_score = s;
    }
  }
  if (best < 0)
    throw std::runtime_error("select_replacement: candidate set V' is empty");
  return model.token(best);
}

CorruptionPlan plan_corruption(const std::vector<std::string>& tokens, double f,
                               uint64_t seed) {
  if (f <= 0.0 || f > 1.0) throw std::runtime_error("plan_corruption: f must be in (0, 1]");
  const int len = static_cast<int>(tokens.size());
  if (len < 1) throw std::runtime_error("plan_corruption: empty title");
  const int rounds = std::min<int>(static_cast<int>(std::ceil(1.0 / f)), len);
  std::vector<int> positions(len);
  std::iota(positions.begin(), positions.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(positions.begin(), positions.end(), rng);

  CorruptionPlan plan;
  plan.tokens = tokens;
  const int base = len / rounds;
  const int rem = len % rounds;
  int at = 0;
  for (int r = 0; r < rounds; ++r) {
    const int size = base + (r < rem ? 1 : 0);
    std::vector<int> round(positions.begin() + at, positions.begin() + at + size);
    std::sort(round.begin(), round.end());
    plan.rounds.push_back(std::move(round));
    at += size;
  }
  plan.replacements.resize(plan.rounds.size());
  return plan;
}

CorruptionPlan plan_corruption_with_replacements(const std::vector<std::string>& tokens,
                                                 double f, uint64_t seed,
                                                 const ContextModel& model, int top_k) {
  CorruptionPlan plan = plan_corruption(tokens, f, seed);
  for (size_t r = 0; r < plan.rounds.size(); ++r)
    for (int pos : plan.rounds[r])
      plan.replacements[r][pos] = select_replacement(pos, tokens, model, top_k);
  return plan;
}

std::vector<TokenLabelRecord> build_pretraining_corpus(
    const std::vector<std::vector<std::string>>& titles, const ContextModel& model,
    double f, uint64_t seed, int n_max, int top_k) {
  std::vector<TokenLabelRecord> out;
  std::mt19937_64 seeder(seed);
  for (const auto& full_title : titles) {
    std::vector<std::string> tokens = full_title;
    if (static_cast<int>(tokens.size()) > n_max) tokens.resize(n_max);
    if (tokens.empty()) continue;
    const uint64_t title_seed = seeder();
    CorruptionPlan plan =
        plan_corruption_with_replacements(tokens, f, title_seed, model, top_k);

    TokenLabelRecord clean;
    clean.tokens = tokens;
    clean.labels.assign(tokens.size(), 0);
    out.push_back(std::move(clean));

    for (size_t r = 0; r < plan.rounds.size(); ++r) {
      TokenLabelRecord rec;
      rec.tokens = tokens;
      rec.labels.assign(tokens.size(), 0);
      for (const auto& [pos, repl] : plan.replacements[r]) {
        rec.tokens[pos] = repl;
        rec.labels[pos] = 1;
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

LossWeights pretrain_class_weights(double median_len, double f, int n_max) {
  if (median_len <= 0 || f <= 0 || n_max <= 0)
    throw std::runtime_error("pretrain_class_weights: arguments must be positive");
  const double alpha = median_len * f / n_max;
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::runtime_error("pretrain_class_weights: alpha = " + std::to_string(alpha) +
                             " falls outside (0, 1)");
  return LossWeights{alpha, 1.0 - alpha};
}

}  // namespace titlepress::pretrain
