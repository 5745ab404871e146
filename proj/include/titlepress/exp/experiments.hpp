#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "titlepress/config.hpp"
#include "titlepress/train/trainer.hpp"

namespace titlepress::exp {

struct AblationSpec {
  std::string name;
  bool use_char_cnn = true;
  int num_recurrent_layers = 3;
  AttentionKind attention = AttentionKind::kGlobal;
  int attn_window = 7;
  int attn_heads = 8;
  bool pretrained = false;
};

/// The predefined Table-2-style variants.
std::vector<AblationSpec> predefined_ablations();
/// Throws listing the valid names when `name` is unknown.
AblationSpec ablation_by_name(const std::string& name);

/// Shared inputs for a run: splits, vocabulary, pre-training corpus and
/// optional fixed word vectors (zero-sized matrix = random frozen table).
struct ExperimentData {
  Vocabulary vocab;
  std::vector<train::LabeledExample> train;
  std::vector<train::LabeledExample> val;
  std::vector<train::LabeledExample> test;
  std::vector<train::LabeledExample> pretrain_train;  // RTD examples
  std::vector<train::LabeledExample> pretrain_val;
  LossWeights pretrain_weights{0.07, 0.93};
  nn::Mat word_vectors;  // |V| x e_word or empty
  uint64_t seed = 42;
};

struct AblationResult {
  std::string name;
  train::MetricsReport metrics;
  double pretrain_accuracy = -1.0;  // RTD validation accuracy, when pretrained
};

/// Builds the variant, optionally pre-trains on the RTD corpus, trains /
/// fine-tunes on the labeled split and evaluates on the shared test set.
AblationResult run_ablation(const AblationSpec& spec, const ExperimentData& data,
                            const ModelConfig& base_model, const TrainingConfig& base_train);

struct SweepPoint {
  double fraction = 0.0;
  std::string variant;  // "pretrained" | "scratch"
  double f1 = 0.0;
  double em = 0.0;
};

/// Nested seeded subsamples of the training split; fine-tunes the
/// pre-trained model and a from-scratch model per fraction and evaluates
/// both on the full test set.
std::vector<SweepPoint> low_resource_sweep(const std::vector<double>& fractions,
                                           const ExperimentData& data,
                                           const ModelConfig& base_model,
                                           const TrainingConfig& base_train);

/// Nested subsample: the prefix of a seeded shuffle, identical ordering
/// for every fraction. Throws when the subset would be empty.
std::vector<train::LabeledExample> subsample(const std::vector<train::LabeledExample>& all,
                                             double fraction, uint64_t seed);

/// Writes metrics JSON, an ablation CSV (Model,F1,EM), a sweep CSV and an
/// F1-vs-fraction SVG plot into outdir. Requires at least one result.
void emit_report(const std::vector<AblationResult>& ablations,
                 const std::vector<SweepPoint>& sweep, const std::string& outdir);

}  // namespace titlepress::exp
