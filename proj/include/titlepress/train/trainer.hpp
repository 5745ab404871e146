#pragma once

#include <string>
#include <vector>

#include "titlepress/config.hpp"
#include "titlepress/dataset.hpp"
#include "titlepress/model/model.hpp"
#include "titlepress/train/metrics.hpp"

namespace titlepress::train {

/// Adam with the paper's fixed hyperparameters. Skips frozen tensors and
/// clears gradients after each step.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(nn::ParamStore& params, double grad_scale = 1.0);
  int64_t steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

/// A labeled example paired with the tokens needed to decode predictions.
struct LabeledExample {
  std::vector<std::string> tokens;
  std::string reference;  // gold short title (or joined replaced tokens)
  EncodedExample encoded;
};

std::vector<LabeledExample> to_labeled(const std::vector<RawTitlePair>& pairs,
                                       const Vocabulary& vocab, const ModelConfig& config);
std::vector<LabeledExample> to_labeled(const std::vector<TokenLabelRecord>& records,
                                       const Vocabulary& vocab, const ModelConfig& config);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_f1 = 0.0;
  double val_em = 0.0;
  double lr = 0.0;
  int unfrozen_groups = 0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  double best_val_f1 = 0.0;
  int best_epoch = -1;
  std::string stop_reason;  // max_epochs | wallclock | converged

  void save_history_csv(const std::string& path) const;
};

/// Validation selection metric.
enum class ValMetric { kRougeF1, kTokenAccuracy };

/// Adam training loop with early stopping: stops at the first of
/// max_epochs, the wallclock budget, or `patience` epochs without
/// validation improvement. Restores the best-validation snapshot.
/// With config.gradual_unfreeze, epoch k trains the top k layer groups.
TrainResult train(model::Model& model, const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>& val_set, const TrainingConfig& config,
                  ValMetric metric = ValMetric::kRougeF1);

/// Per-token prediction accuracy over unmasked positions (used for the
/// replaced-token-detection task).
double token_accuracy(model::Model& model, const std::vector<LabeledExample>& examples);

/// Fraction of the majority token label over unmasked positions.
double majority_label_fraction(const std::vector<LabeledExample>& examples);

/// Decodes every example and aggregates ROUGE-1 F1 and exact match.
MetricsReport evaluate(model::Model& model, const std::vector<LabeledExample>& examples);

}  // namespace titlepress::train
