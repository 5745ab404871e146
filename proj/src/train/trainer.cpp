#include "titlepress/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "titlepress/text.hpp"

namespace titlepress::train {

void AdamOptimizer::step(nn::ParamStore& params, double grad_scale) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto* p : params.all()) {
    if (p->frozen) {
      p->zero_grad();
      continue;
    }
    nn::Mat g = p->grad * grad_scale;
    p->adam_m = beta1_ * p->adam_m + (1.0 - beta1_) * g;
    p->adam_v = beta2_ * p->adam_v + (1.0 - beta2_) * g.cwiseProduct(g);
    nn::Mat m_hat = p->adam_m / bc1;
    nn::Mat v_hat = p->adam_v / bc2;
    p->value.array() -= lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
    p->zero_grad();
  }
}

std::vector<LabeledExample> to_labeled(const std::vector<RawTitlePair>& pairs,
                                       const Vocabulary& vocab, const ModelConfig& config) {
  std::vector<LabeledExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    LabeledExample ex;
    ex.tokens = tokenize(normalize_text(p.long_title));
    if (static_cast<int>(ex.tokens.size()) > config.n_max) ex.tokens.resize(config.n_max);
    ex.reference = p.short_title ? normalize_text(*p.short_title) : "";
    ex.encoded = encode_example(p, vocab, config);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<LabeledExample> to_labeled(const std::vector<TokenLabelRecord>& records,
                                       const Vocabulary& vocab, const ModelConfig& config) {
  std::vector<LabeledExample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    LabeledExample ex;
    ex.tokens = r.tokens;
    if (static_cast<int>(ex.tokens.size()) > config.n_max) ex.tokens.resize(config.n_max);
    std::vector<std::string> kept;
    for (size_t i = 0; i < ex.tokens.size(); ++i)
      if (i < r.labels.size() && r.labels[i]) kept.push_back(ex.tokens[i]);
    ex.reference = join_tokens(kept);
    ex.encoded = encode_tokens(r.tokens, r.labels, vocab, config);
    out.push_back(std::move(ex));
  }
  return out;
}

MetricsReport evaluate(model::Model& model, const std::vector<LabeledExample>& examples) {
  if (examples.empty()) throw std::runtime_error("evaluate: empty dataset");
  MetricsReport report;
  double f1_sum = 0.0;
  int em_count = 0;
  for (const auto& ex : examples) {
    std::vector<int> labels = model.predict(ex.encoded);
    ExampleResult r;
    r.predicted = model::extract_short_title(ex.tokens, labels);
    r.reference = ex.reference;
    r.f1 = rouge1_f1(r.predicted, r.reference);
    r.em = exact_match(r.predicted, r.reference);
    f1_sum += r.f1;
    em_count += r.em ? 1 : 0;
    report.per_example.push_back(std::move(r));
  }
  report.n = static_cast<int>(examples.size());
  report.rouge1_f1 = f1_sum / report.n;
  report.em = 100.0 * em_count / report.n;
  return report;
}

double token_accuracy(model::Model& model, const std::vector<LabeledExample>& examples) {
  int64_t correct = 0, total = 0;
  for (const auto& ex : examples) {
    std::vector<int> pred = model.predict(ex.encoded);
    for (size_t i = 0; i < pred.size(); ++i) {
      if (!ex.encoded.mask[i]) continue;
      ++total;
      if (pred[i] == ex.encoded.labels[i]) ++correct;
    }
  }
  if (total == 0) throw std::runtime_error("token_accuracy: no unmasked positions");
  return static_cast<double>(correct) / total;
}

double majority_label_fraction(const std::vector<LabeledExample>& examples) {
  int64_t ones = 0, total = 0;
  for (const auto& ex : examples)
    for (size_t i = 0; i < ex.encoded.labels.size(); ++i) {
      if (!ex.encoded.mask[i]) continue;
      ++total;
      ones += ex.encoded.labels[i];
    }
  if (total == 0) return 0.0;
  const double p1 = static_cast<double>(ones) / total;
  return std::max(p1, 1.0 - p1);
}

void TrainResult::save_history_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,train_loss,val_f1,val_em,lr,unfrozen_layers\n";
  for (const auto& r : history)
    out << r.epoch << ',' << r.train_loss << ',' << r.val_f1 << ',' << r.val_em << ','
        << r.lr << ',' << r.unfrozen_groups << "\n";
}

TrainResult train(model::Model& model, const std::vector<LabeledExample>& train_set,
                  const std::vector<LabeledExample>& val_set, const TrainingConfig& config,
                  ValMetric metric) {
  if (train_set.empty()) throw std::runtime_error("train: empty training set");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  AdamOptimizer opt(config.lr, config.beta1, config.beta2, config.adam_eps);
  std::mt19937_64 rng(config.seed);
  const int total_groups = static_cast<int>(model.layer_groups().size());

  TrainResult result;
  auto best = model.snapshot();
  int epochs_since_improvement = 0;
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    int unfrozen = total_groups;
    if (config.gradual_unfreeze) {
      unfrozen = std::min(epoch, total_groups);
      model.unfreeze_top_groups(unfrozen);
    }
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    size_t batch_start = 0;
    while (batch_start < order.size()) {
      const size_t batch_end = std::min(batch_start + config.batch_size, order.size());
      const int bs = static_cast<int>(batch_end - batch_start);
      for (size_t i = batch_start; i < batch_end; ++i) {
        const auto& ex = train_set[order[i]];
        nn::Graph g(true, rng());
        nn::Node* loss = model.loss(g, ex.encoded, config.weights);
        loss_sum += loss->value(0, 0);
        g.backward(loss);
      }
      opt.step(model.params(), 1.0 / bs);
      batch_start = batch_end;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / train_set.size();
    rec.lr = config.lr;
    rec.unfrozen_groups = unfrozen;
    double val_score = 0.0;
    if (!val_set.empty()) {
      if (metric == ValMetric::kRougeF1) {
        MetricsReport rep = evaluate(model, val_set);
        rec.val_f1 = rep.rouge1_f1;
        rec.val_em = rep.em;
        val_score = rep.rouge1_f1;
      } else {
        val_score = token_accuracy(model, val_set);
        rec.val_f1 = val_score;
      }
    }
    result.history.push_back(rec);

    if (val_set.empty() || val_score > result.best_val_f1 || result.best_epoch < 0) {
      result.best_val_f1 = val_score;
      result.best_epoch = epoch;
      best = model.snapshot();
      epochs_since_improvement = 0;
    } else {
      ++epochs_since_improvement;
    }

    if (epochs_since_improvement >= config.patience) {
      result.stop_reason = "converged";
      break;
    }
    if (elapsed() > config.wallclock_budget_sec) {
      result.stop_reason = "wallclock";
      break;
    }
  }
  if (result.stop_reason.empty()) result.stop_reason = "max_epochs";
  model.restore(best);
  if (config.gradual_unfreeze) model.unfreeze_all();
  return result;
}

}  // namespace titlepress::train
