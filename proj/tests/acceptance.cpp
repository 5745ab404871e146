// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Everything runs on synthetic data at desk scale.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "grad_check.hpp"
#include "titlepress/model/model.hpp"
#include "titlepress/pretrain/corruption.hpp"
#include "titlepress/pretrain/skipgram.hpp"
#include "titlepress/exp/checkpoint.hpp"
#include "titlepress/text.hpp"
#include "titlepress/train/trainer.hpp"

using namespace titlepress;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool ok, double seconds) {
  printf("%s criterion %d: %s (%.1fs)\n", ok ? "PASS" : "FAIL", idx, name, seconds);
  fflush(stdout);
  if (!ok) ++g_failures;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

nn::Mat random_mat(int r, int c, uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  nn::Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

ModelConfig toy_config() {
  ModelConfig cfg;
  cfg.n_max = 3;
  cfg.c_max = 4;
  cfg.e_word = 6;
  cfg.e_cin = 3;
  cfg.e_char = 4;
  cfg.conv_width = 2;
  cfg.highway_layers = 2;
  cfg.hidden = 4;
  cfg.lstm_layers = 3;
  cfg.dropout = 0.0;
  return cfg;
}

// Moves zero-initialized bias rows away from the relu kink at exactly 0,
// where one-sided numeric slopes legitimately disagree with subgradients.
void nudge_biases(nn::ParamStore& store, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.05, 0.2);
  for (nn::Param* p : store.all())
    if (!p->frozen && p->value.rows() == 1 && p->value.cwiseAbs().maxCoeff() == 0.0)
      for (int j = 0; j < p->value.cols(); ++j) p->value(0, j) = d(rng) * (j % 2 ? -1 : 1);
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness on the toy config
bool gradient_correctness() {
  auto cfg = toy_config();
  auto vocab = Vocabulary::build({{"fruit", "cake", "oz", "red"}});
  model::Model m(cfg, vocab.word_count(), vocab.char_count(), 42);
  model::set_word_table(m.params(), random_mat(vocab.word_count(), cfg.e_word, 1), true);
  nudge_biases(m.params(), 2);
  auto ex = encode_example({"red fruit cake", std::string("fruit cake")}, vocab, cfg);
  LossWeights w{0.1, 0.9};
  auto loss_value = [&]() {
    nn::Graph g;
    return m.loss(g, ex, w)->value(0, 0);
  };
  auto backward = [&]() {
    nn::Graph g;
    g.backward(m.loss(g, ex, w));
  };
  auto failures = tptest::check_gradients(m.params(), loss_value, backward, 1e-5, 1e-4);
  // discard numeric-noise mismatches: gradients of magnitude ~1e-8 where the
  // absolute disagreement is below finite-difference resolution
  std::erase_if(failures, [](const tptest::GradCheckFailure& f) {
    return std::abs(f.analytic - f.numeric) < 1e-9;
  });
  for (const auto& f : failures)
    printf("  gradient mismatch %s (%d,%d): analytic %.6g numeric %.6g\n", f.param.c_str(),
           f.row, f.col, f.analytic, f.numeric);
  return failures.empty();
}

// ---------------------------------------------------------------------------
// 2. Frozen word table bit-identical after 100 steps
bool frozen_embedding() {
  ModelConfig cfg = toy_config();
  cfg.n_max = 5;
  auto vocab = Vocabulary::build({{"red", "fruit", "cake", "big", "oz", "lb", "mix"}});
  model::Model m(cfg, vocab.word_count(), vocab.char_count(), 7);
  model::set_word_table(m.params(), random_mat(vocab.word_count(), cfg.e_word, 3), true);
  const nn::Mat before = m.params().get(model::kWordTable).value;
  std::vector<RawTitlePair> pairs = {{"red fruit cake big oz", std::string("fruit cake")},
                                     {"big mix lb", std::string("mix")}};
  auto examples = train::to_labeled(pairs, vocab, cfg);
  train::AdamOptimizer opt(0.01, 0.9, 0.999, 1e-8);
  for (int step = 0; step < 100; ++step) {
    for (const auto& e : examples) {
      nn::Graph g(true, step);
      g.backward(m.loss(g, e.encoded, {0.5, 0.5}));
    }
    opt.step(m.params(), 0.5);
  }
  const nn::Mat& after = m.params().get(model::kWordTable).value;
  if (before.rows() != after.rows() || before.cols() != after.cols()) return false;
  for (int i = 0; i < before.rows(); ++i)
    for (int j = 0; j < before.cols(); ++j)
      if (std::memcmp(&before(i, j), &after(i, j), sizeof(double)) != 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// 3. Attention normalization over 1,000 random masked inputs
bool attention_normalization() {
  ModelConfig cfg = toy_config();
  cfg.n_max = 6;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    nn::ParamStore store;
    std::mt19937_64 prng(rng());
    model::create_encoder_params(store, cfg, prng);
    std::vector<bool> mask(cfg.n_max);
    int n_valid = 0;
    for (int i = 0; i < cfg.n_max; ++i) {
      mask[i] = rng() % 3 != 0;
      n_valid += mask[i];
    }
    if (n_valid == 0) mask[rng() % cfg.n_max] = true;
    nn::Mat xb = random_mat(cfg.n_max, 2 * cfg.hidden, rng());
    nn::Mat alpha = model::attention_weights(store, cfg, xb, mask);
    for (int i = 0; i < cfg.n_max; ++i) {
      if (std::abs(alpha.row(i).sum() - 1.0) > 1e-6) return false;
      for (int j = 0; j < cfg.n_max; ++j) {
        if (alpha(i, j) < 0.0) return false;
        if (!mask[j] && alpha(i, j) != 0.0) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 4. Corruption-plan oracle on 500 random titles
bool corruption_plan_oracle() {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const int len = 1 + static_cast<int>(rng() % 35);
    std::vector<std::string> tokens(len, "t");
    auto plan = pretrain::plan_corruption(tokens, 0.25, rng());
    // disjoint cover of all positions
    std::vector<int> all;
    std::set<int> seen;
    for (const auto& round : plan.rounds)
      for (int p : round) {
        if (seen.count(p)) return false;
        seen.insert(p);
        all.push_back(p);
      }
    if (static_cast<int>(all.size()) != len) return false;
    for (int p : all)
      if (p < 0 || p >= len) return false;
    // expansion: clean copy + one per round
    const size_t expansion = plan.rounds.size() + 1;
    if (len >= 4 && expansion != 5) return false;
    if (len < 4 && expansion != static_cast<size_t>(len) + 1) return false;
  }
  return true;
}

// Hand-built conditional table for the replacement oracle.
class TableModel : public pretrain::ContextModel {
 public:
  TableModel(int vocab, uint64_t seed) {
    for (int i = 0; i < vocab; ++i) tokens_.push_back("w" + std::to_string(i));
    for (int i = 0; i < vocab; ++i) index_[tokens_[i]] = i;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    lp_.resize(vocab, vocab);
    for (int c = 0; c < vocab; ++c) {
      Eigen::VectorXd col(vocab);
      for (int w = 0; w < vocab; ++w) col(w) = u(rng);
      col /= col.sum();
      for (int w = 0; w < vocab; ++w) lp_(w, c) = std::log(col(w));
    }
  }
  int vocab_size() const override { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const override { return tokens_[id]; }
  int token_id(const std::string& t) const override {
    auto it = index_.find(t);
    return it == index_.end() ? -1 : it->second;
  }
  Eigen::VectorXd log_probs_given(int c) const override { return lp_.col(c); }
  std::vector<int> tokens_by_frequency() const override {
    std::vector<int> ids(tokens_.size());
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
  }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
  Eigen::MatrixXd lp_;
};

// ---------------------------------------------------------------------------
// 5. Replacement argmin agrees with brute force; never a window token
bool replacement_argmin_oracle() {
  TableModel model(50, 17);
  std::mt19937_64 rng(19);
  for (int t = 0; t < 100; ++t) {
    const int len = 1 + static_cast<int>(rng() % 12);
    std::vector<std::string> tokens;
    for (int i = 0; i < len; ++i) tokens.push_back(model.token(rng() % 50));
    for (int pos = 0; pos < len; ++pos) {
      const std::string chosen = pretrain::select_replacement(pos, tokens, model);
      std::set<std::string> window;
      for (int k = -model.window(); k <= model.window(); ++k)
        if (pos + k >= 0 && pos + k < len) window.insert(tokens[pos + k]);
      if (window.count(chosen)) return false;
      int best = -1;
      double best_score = 0;
      for (int w = 0; w < 50; ++w) {
        if (window.count(model.token(w))) continue;
        const double s = pretrain::replacement_score(w, pos, tokens, model);
        if (best < 0 || s < best_score) {
          best = w;
          best_score = s;
        }
      }
      if (chosen != model.token(best)) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// 6. Class-weight formula
bool class_weight_formula() {
  auto w = pretrain::pretrain_class_weights(10, 0.25, 35);
  return std::abs(w.alpha - 0.0714285714) < 1e-4 && std::abs(w.beta - 0.9285714286) < 1e-4;
}

// ---------------------------------------------------------------------------
// 7. Metric oracles: 10,000 random rouge cases + normalization
bool metric_oracles() {
  std::vector<std::string> words = {"a", "b", "c", "d", "e", "f"};
  std::mt19937_64 rng(23);
  auto random_sent = [&]() {
    std::string s;
    const int n = static_cast<int>(rng() % 7);
    for (int i = 0; i < n; ++i) {
      if (!s.empty()) s += ' ';
      s += words[rng() % words.size()];
    }
    return s;
  };
  auto brute = [](const std::string& ps, const std::string& rs) {
    auto p = tokenize(ps);
    auto r = tokenize(rs);
    if (p.empty() && r.empty()) return 1.0;
    if (p.empty() || r.empty()) return 0.0;
    std::map<std::string, int> want;
    for (const auto& t : r) ++want[t];
    int overlap = 0;
    for (const auto& t : p) {
      auto it = want.find(t);
      if (it != want.end() && it->second > 0) {
        --it->second;
        ++overlap;
      }
    }
    if (overlap == 0) return 0.0;
    const double prec = double(overlap) / p.size();
    const double rec = double(overlap) / r.size();
    return 2 * prec * rec / (prec + rec);
  };
  for (int t = 0; t < 10000; ++t) {
    const std::string p = random_sent(), r = random_sent();
    if (train::rouge1_f1(p, r) != brute(p, r)) return false;
  }
  return train::exact_match("  Fruit   Cake ", "fruit cake") &&
         !train::exact_match("fruit cakes", "fruit cake");
}

struct SyntheticData {
  std::vector<RawTitlePair> pairs;
  std::vector<std::vector<std::string>> tokens;
};
SyntheticData make_grammar(int n, uint64_t seed, int kinds);

// ---------------------------------------------------------------------------
// 8. Overfit sanity: 16 examples to training F1 > 0.99 in 200 steps
bool overfit_sanity() {
  ModelConfig cfg;
  cfg.n_max = 6;
  cfg.c_max = 6;
  cfg.e_word = 12;
  cfg.e_cin = 4;
  cfg.e_char = 8;
  cfg.conv_width = 3;
  cfg.highway_layers = 2;
  cfg.hidden = 24;
  cfg.lstm_layers = 3;
  cfg.dropout = 0.0;
  auto grammar = make_grammar(16, 29, 8);
  std::vector<std::vector<std::string>> toks;
  for (const auto& p : grammar.pairs) toks.push_back(tokenize(p.long_title));
  auto vocab = Vocabulary::build(toks);
  auto examples = train::to_labeled(grammar.pairs, vocab, cfg);
  model::Model m(cfg, vocab.word_count(), vocab.char_count(), 1);
  model::set_word_table(m.params(), random_mat(vocab.word_count(), cfg.e_word, 33, 0.3),
                        true);
  train::AdamOptimizer opt(0.03, 0.9, 0.999, 1e-8);
  for (int step = 0; step < 200; ++step) {
    for (const auto& e : examples) {
      nn::Graph g(true, step * 31 + 1);
      g.backward(m.loss(g, e.encoded, {0.5, 0.5}));
    }
    opt.step(m.params(), 1.0 / examples.size());
  }
  const double f1 = train::evaluate(m, examples).rouge1_f1;
  printf("  overfit training F1 = %.4f\n", f1);
  return f1 > 0.99;
}

// ---------------------------------------------------------------------------
// 9. End-to-end directional check on a synthetic grammar
//
// Tokens come in fixed adjacent pairs (a_i always directly before b_i), so
// replaced-token detection reduces to spotting a broken pair. Short titles
// keep the one "keepable" pair of each long title.
SyntheticData make_grammar(int n, uint64_t seed, int kinds) {
  std::vector<std::pair<std::string, std::string>> keep, filler;
  for (int i = 0; i < kinds; ++i) {
    keep.push_back({"ka" + std::to_string(i), "kb" + std::to_string(i)});
    filler.push_back({"fa" + std::to_string(i), "fb" + std::to_string(i)});
  }
  SyntheticData out;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < n; ++t) {
    const auto& kp = keep[rng() % kinds];
    int f1 = static_cast<int>(rng() % kinds);
    int f2 = static_cast<int>(rng() % kinds);
    while (f2 == f1) f2 = static_cast<int>(rng() % kinds);
    std::vector<std::pair<std::string, std::string>> ps = {kp, filler[f1], filler[f2]};
    std::shuffle(ps.begin(), ps.end(), rng);
    std::vector<std::string> toks;
    for (const auto& p : ps) {
      toks.push_back(p.first);
      toks.push_back(p.second);
    }
    RawTitlePair pair;
    pair.long_title = join_tokens(toks);
    pair.short_title = kp.first + " " + kp.second;
    out.pairs.push_back(pair);
    out.tokens.push_back(toks);
  }
  return out;
}

bool end_to_end_directional() {
  ModelConfig cfg;
  cfg.n_max = 6;
  cfg.c_max = 6;
  cfg.e_word = 16;
  cfg.e_cin = 4;
  cfg.e_char = 8;
  cfg.conv_width = 3;
  cfg.highway_layers = 1;
  cfg.hidden = 16;
  cfg.lstm_layers = 2;
  cfg.dropout = 0.1;

  auto data = make_grammar(5000, 41, 24);
  auto splits = split_dataset(data.pairs, 43);
  std::vector<std::vector<std::string>> train_tokens;
  for (const auto& p : splits.train) train_tokens.push_back(tokenize(p.long_title));
  auto vocab = Vocabulary::build(train_tokens);

  // shared frozen word table from the skip-gram input vectors
  pretrain::SkipGramConfig sgc;
  sgc.dim = cfg.e_word;
  sgc.epochs = 10;
  sgc.seed = 47;
  auto sg = pretrain::SkipGramModel::train(train_tokens, sgc);
  nn::Mat vectors = nn::Mat::Zero(vocab.word_count(), cfg.e_word);
  for (int id = 2; id < vocab.word_count(); ++id) {
    const int sid = sg.token_id(vocab.word(id));
    if (sid >= 0) vectors.row(id) = sg.input_vectors().row(sid);
  }

  // replaced-token-detection corpus and pre-training
  const double f = 0.25;
  auto rtd = pretrain::build_pretraining_corpus(train_tokens, sg, f, 53, cfg.n_max);
  auto rtd_labeled = train::to_labeled(rtd, vocab, cfg);
  std::mt19937_64 shuffle_rng(59);
  std::shuffle(rtd_labeled.begin(), rtd_labeled.end(), shuffle_rng);
  const size_t n_val = rtd_labeled.size() / 20;
  std::vector<train::LabeledExample> rtd_val(rtd_labeled.begin(),
                                             rtd_labeled.begin() + n_val);
  std::vector<train::LabeledExample> rtd_train(rtd_labeled.begin() + n_val,
                                               rtd_labeled.end());

  model::Model pre(cfg, vocab.word_count(), vocab.char_count(), 61);
  model::set_word_table(pre.params(), vectors, true);
  TrainingConfig ptc;
  ptc.lr = 0.002;
  ptc.max_epochs = 4;
  ptc.patience = 4;
  ptc.batch_size = 32;
  ptc.seed = 67;
  ptc.wallclock_budget_sec = 900;
  ptc.weights = pretrain::pretrain_class_weights(6, f, cfg.n_max);
  auto pre_result =
      train::train(pre, rtd_train, rtd_val, ptc, train::ValMetric::kTokenAccuracy);
  printf("  pre-training stopped after %zu epochs (%s)\n", pre_result.history.size(),
         pre_result.stop_reason.c_str());
  const double majority = train::majority_label_fraction(rtd_val);
  const double rtd_acc = train::token_accuracy(pre, rtd_val);
  printf("  RTD val accuracy %.4f vs majority %.4f\n", rtd_acc, majority);
  if (rtd_acc < majority + 0.10) return false;

  // fine-tune on 5% of the labeled training split, same budget both arms
  auto labeled_train = train::to_labeled(splits.train, vocab, cfg);
  auto labeled_val = train::to_labeled(splits.val, vocab, cfg);
  auto labeled_test = train::to_labeled(splits.test, vocab, cfg);
  std::mt19937_64 sub_rng(71);
  std::shuffle(labeled_train.begin(), labeled_train.end(), sub_rng);
  labeled_train.resize(std::max<size_t>(1, labeled_train.size() / 20));
  printf("  fine-tuning on %zu labeled examples\n", labeled_train.size());

  TrainingConfig ftc;
  ftc.lr = 0.002;
  ftc.max_epochs = 8;
  ftc.patience = 8;
  ftc.batch_size = 16;
  ftc.seed = 73;
  ftc.wallclock_budget_sec = 300;
  ftc.weights = {0.5, 0.5};

  TrainingConfig pre_ftc = ftc;
  pre_ftc.gradual_unfreeze = true;
  train::train(pre, labeled_train, labeled_val, pre_ftc);
  const double pre_f1 = train::evaluate(pre, labeled_test).rouge1_f1;

  model::Model scratch(cfg, vocab.word_count(), vocab.char_count(), 79);
  model::set_word_table(scratch.params(), vectors, true);
  train::train(scratch, labeled_train, labeled_val, ftc);
  const double scratch_f1 = train::evaluate(scratch, labeled_test).rouge1_f1;

  printf("  test F1: pre-trained %.4f vs from-scratch %.4f\n", pre_f1, scratch_f1);
  return pre_f1 > scratch_f1;
}

// ---------------------------------------------------------------------------
// 10. Checkpoint round trip bit-exact
bool checkpoint_round_trip() {
  ModelConfig cfg = toy_config();
  cfg.n_max = 5;
  auto vocab = Vocabulary::build({{"red", "fruit", "cake", "big", "oz"}});
  model::Model m(cfg, vocab.word_count(), vocab.char_count(), 83);
  model::set_word_table(m.params(), random_mat(vocab.word_count(), cfg.e_word, 89), true);
  std::vector<EncodedExample> batch;
  for (const char* t : {"red fruit cake", "big cake oz", "fruit"})
    batch.push_back(encode_example({t, std::nullopt}, vocab, cfg));

  const auto path =
      (std::filesystem::temp_directory_path() / "tp_acceptance_ckpt.bin").string();
  exp::save_checkpoint(path, m, vocab.hash(), 5);
  auto loaded = exp::load_checkpoint(path, vocab.hash());
  std::filesystem::remove(path);
  for (const auto& ex : batch) {
    nn::Mat a = m.predict_probs(ex);
    nn::Mat b = loaded.model.predict_probs(ex);
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j)
        if (std::memcmp(&a(i, j), &b(i, j), sizeof(double)) != 0) return false;
  }
  return true;
}

template <typename F>
void run(int idx, const char* name, F f) {
  Timer t;
  bool ok = false;
  try {
    ok = f();
  } catch (const std::exception& e) {
    printf("  exception: %s\n", e.what());
  }
  report(idx, name, ok, t.seconds());
}

}  // namespace

int main() {
  run(1, "gradient correctness (Eq. 9 loss, toy config)", gradient_correctness);
  run(2, "frozen word table bit-identical after 100 steps", frozen_embedding);
  run(3, "attention normalization on 1000 random masked inputs", attention_normalization);
  run(4, "corruption-plan oracle on 500 random titles", corruption_plan_oracle);
  run(5, "replacement argmin matches brute force", replacement_argmin_oracle);
  run(6, "class-weight formula", class_weight_formula);
  run(7, "metric oracles (10000 rouge cases)", metric_oracles);
  run(8, "overfit sanity (16 examples, 200 steps)", overfit_sanity);
  run(9, "end-to-end directional check (synthetic grammar)", end_to_end_directional);
  run(10, "checkpoint round trip bit-exact", checkpoint_round_trip);
  printf("%d/10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
