#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include "titlepress/pretrain/corruption.hpp"
#include "titlepress/pretrain/skipgram.hpp"

using namespace titlepress;
using namespace titlepress::pretrain;

namespace {
/// Hand-built conditional table for oracle tests.
class TableContextModel : public ContextModel {
 public:
  TableContextModel(std::vector<std::string> tokens, Eigen::MatrixXd log_probs, int window)
      : tokens_(std::move(tokens)), log_probs_(std::move(log_probs)), window_(window) {
    for (size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = static_cast<int>(i);
  }

  static TableContextModel random(int vocab, int window, uint64_t seed) {
    std::vector<std::string> tokens;
    for (int i = 0; i < vocab; ++i) tokens.push_back("w" + std::to_string(i));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Eigen::MatrixXd lp(vocab, vocab);  // lp(w, c) = log P(w | c)
    for (int c = 0; c < vocab; ++c) {
      Eigen::VectorXd col(vocab);
      for (int w = 0; w < vocab; ++w) col(w) = u(rng);
      col /= col.sum();
      for (int w = 0; w < vocab; ++w) lp(w, c) = std::log(col(w));
    }
    return TableContextModel(std::move(tokens), std::move(lp), window);
  }

  int vocab_size() const override { return static_cast<int>(tokens_.size()); }
  int window() const override { return window_; }
  const std::string& token(int id) const override { return tokens_[id]; }
  int token_id(const std::string& tok) const override {
    auto it = index_.find(tok);
    return it == index_.end() ? -1 : it->second;
  }
  Eigen::VectorXd log_probs_given(int context_id) const override {
    return log_probs_.col(context_id);
  }
  std::vector<int> tokens_by_frequency() const override {
    std::vector<int> ids(tokens_.size());
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  Eigen::MatrixXd log_probs_;
  int window_;
};

std::vector<std::vector<std::string>> synthetic_oz_corpus() {
  // "oz" always follows the numeral "6"; filler words vary
  std::vector<std::vector<std::string>> corpus;
  std::mt19937_64 rng(17);
  std::vector<std::string> fillers = {"red", "blue", "fresh", "tasty", "value",
                                      "great", "farm", "organic"};
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> title;
    title.push_back(fillers[rng() % fillers.size()]);
    title.push_back(fillers[rng() % fillers.size()]);
    title.push_back("6");
    title.push_back("oz");
    corpus.push_back(title);
  }
  return corpus;
}
}  // namespace

TEST_CASE("skip-gram training is deterministic under a fixed seed") {
  auto corpus = synthetic_oz_corpus();
  SkipGramConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 2;
  auto m1 = SkipGramModel::train(corpus, cfg);
  auto m2 = SkipGramModel::train(corpus, cfg);
  CHECK(m1.input_vectors() == m2.input_vectors());
  CHECK(m1.dim() == 16);
}

TEST_CASE("skip-gram learns that numbers precede oz") {
  auto corpus = synthetic_oz_corpus();
  SkipGramConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 8;
  auto m = SkipGramModel::train(corpus, cfg);
  const int oz = m.token_id("oz");
  const int six = m.token_id("6");
  const int rare = m.token_id("farm");
  REQUIRE(oz >= 0);
  REQUIRE(six >= 0);
  Eigen::VectorXd lp = m.log_probs_given(oz);
  CHECK(lp(six) > lp(rare));
  // "6" should rank near the top among all tokens given "oz"
  int better = 0;
  for (int w = 0; w < m.vocab_size(); ++w)
    if (lp(w) > lp(six)) ++better;
  CHECK(better <= 1);
}

TEST_CASE("skip-gram rejects an empty corpus") {
  CHECK_THROWS((void)SkipGramModel::train({}, SkipGramConfig{}));
}

TEST_CASE("skip-gram save/load round trip") {
  auto corpus = synthetic_oz_corpus();
  SkipGramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 1;
  auto m = SkipGramModel::train(corpus, cfg);
  auto path = std::filesystem::temp_directory_path() / "tp_sg_test.json";
  m.save(path.string());
  auto back = SkipGramModel::load(path.string());
  CHECK(back.input_vectors() == m.input_vectors());
  CHECK(back.window() == m.window());
  CHECK(back.log_probs_given(0) == m.log_probs_given(0));
  std::filesystem::remove(path);
}

TEST_CASE("replacement_score sums -log P over the truncated window") {
  auto model = TableContextModel::random(8, 2, 3);
  std::vector<std::string> tokens = {"w0", "w1", "w2", "w3", "w4"};
  // position 0: window covers offsets 0..2 only
  const double s = replacement_score(5, 0, tokens, model);
  double expect = 0.0;
  for (int j : {0, 1, 2}) expect -= model.log_probs_given(j)(5);
  CHECK(s == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::isfinite(replacement_score(7, 2, tokens, model)));
}

TEST_CASE("replacement score drops when all conditional probabilities rise") {
  // monotonicity of the -log sum in the table entries
  std::vector<std::string> toks = {"w0", "w1", "w2"};
  std::vector<std::string> names = {"w0", "w1", "w2"};
  Eigen::MatrixXd lp(3, 3);
  lp.setConstant(std::log(0.2));
  TableContextModel a(names, lp, 1);
  Eigen::MatrixXd lp2 = lp;
  lp2.row(2).setConstant(std::log(0.6));
  TableContextModel b(names, lp2, 1);
  CHECK(replacement_score(2, 1, toks, b) < replacement_score(2, 1, toks, a));
}

TEST_CASE("select_replacement never picks a window word and matches brute force") {
  const int vocab = 50;
  auto model = TableContextModel::random(vocab, 2, 5);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const int len = 1 + static_cast<int>(rng() % 12);
    std::vector<std::string> tokens;
    for (int i = 0; i < len; ++i) tokens.push_back(model.token(rng() % vocab));
    for (int pos = 0; pos < len; ++pos) {
      const std::string chosen = select_replacement(pos, tokens, model);
      // exhaustive brute-force argmin over V'
      std::set<std::string> window;
      for (int k = -2; k <= 2; ++k)
        if (pos + k >= 0 && pos + k < len) window.insert(tokens[pos + k]);
      CHECK(window.count(chosen) == 0);
      int best = -1;
      double best_score = 0;
      for (int w = 0; w < vocab; ++w) {
        if (window.count(model.token(w))) continue;
        const double s = replacement_score(w, pos, tokens, model);
        if (best < 0 || s < best_score) {
          best = w;
          best_score = s;
        }
      }
      CHECK(chosen == model.token(best));
    }
  }
}

TEST_CASE("select_replacement breaks ties toward the lowest token id") {
  std::vector<std::string> names = {"w0", "w1", "w2", "w3"};
  Eigen::MatrixXd lp(4, 4);
  lp.setConstant(std::log(0.25));  // every candidate ties
  TableContextModel model(names, lp, 1);
  std::vector<std::string> tokens = {"w3"};
  CHECK(select_replacement(0, tokens, model) == "w0");
}

TEST_CASE("select_replacement errors when V' is empty") {
  std::vector<std::string> names = {"w0", "w1"};
  Eigen::MatrixXd lp(2, 2);
  lp.setConstant(std::log(0.5));
  TableContextModel model(names, lp, 1);
  std::vector<std::string> tokens = {"w0", "w1"};
  CHECK_THROWS((void)select_replacement(0, tokens, model));
}

TEST_CASE("plan_corruption partition arithmetic") {
  std::vector<std::string> ten(10, "t");
  auto plan = plan_corruption(ten, 0.25, 9);
  REQUIRE(plan.rounds.size() == 4);
  std::multiset<size_t> sizes;
  for (const auto& r : plan.rounds) sizes.insert(r.size());
  CHECK(sizes == std::multiset<size_t>{2, 2, 3, 3});
}

TEST_CASE("cover-all dominates for short titles") {
  std::vector<std::string> two(2, "t");
  auto plan = plan_corruption(two, 0.25, 1);
  REQUIRE(plan.rounds.size() == 2);
  CHECK(plan.rounds[0].size() == 1);
  CHECK(plan.rounds[1].size() == 1);
}

TEST_CASE("rounds are disjoint and cover all positions") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int len = 1 + static_cast<int>(rng() % 35);
    std::vector<std::string> tokens(len, "t");
    auto plan = plan_corruption(tokens, 0.25, trial);
    std::vector<int> all;
    for (const auto& r : plan.rounds) all.insert(all.end(), r.begin(), r.end());
    std::sort(all.begin(), all.end());
    std::vector<int> expect(len);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(all == expect);
  }
}

TEST_CASE("plan_corruption is deterministic and validates f") {
  std::vector<std::string> tokens(12, "t");
  auto a = plan_corruption(tokens, 0.25, 42);
  auto b = plan_corruption(tokens, 0.25, 42);
  CHECK(a.rounds == b.rounds);
  CHECK_THROWS((void)plan_corruption(tokens, 0.0, 1));
  CHECK_THROWS((void)plan_corruption(tokens, 1.5, 1));
}

TEST_CASE("pretraining corpus expansion, labels and clean copies") {
  auto model = TableContextModel::random(30, 2, 8);
  std::vector<std::vector<std::string>> titles;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 40; ++i) {
    const int len = 4 + static_cast<int>(rng() % 8);
    std::vector<std::string> t;
    for (int j = 0; j < len; ++j) t.push_back(model.token(rng() % 30));
    titles.push_back(t);
  }
  auto corpus = build_pretraining_corpus(titles, model, 0.25, 11, 35);
  CHECK(corpus.size() == titles.size() * 5);  // ceil(1/f)+1 per title, L >= 4

  size_t at = 0;
  for (const auto& title : titles) {
    // first record is the clean copy
    CHECK(corpus[at].tokens == title);
    CHECK(std::count(corpus[at].labels.begin(), corpus[at].labels.end(), 1) == 0);
    ++at;
    std::vector<int> coverage;
    for (int r = 0; r < 4; ++r, ++at) {
      const auto& rec = corpus[at];
      REQUIRE(rec.tokens.size() == title.size());
      for (size_t i = 0; i < title.size(); ++i) {
        if (rec.labels[i]) {
          coverage.push_back(static_cast<int>(i));
          CHECK(rec.tokens[i] != title[i]);  // replacement differs from original
        } else {
          CHECK(rec.tokens[i] == title[i]);
        }
      }
    }
    // the 1-labels across copies are a permutation of all positions
    std::sort(coverage.begin(), coverage.end());
    std::vector<int> expect(title.size());
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(coverage == expect);
  }
}

TEST_CASE("pretrain_class_weights") {
  auto w = pretrain_class_weights(10, 0.25, 35);
  CHECK(w.alpha == doctest::Approx(10 * 0.25 / 35.0).epsilon(1e-12));
  CHECK(w.beta == doctest::Approx(1.0 - 10 * 0.25 / 35.0).epsilon(1e-12));
  auto w2 = pretrain_class_weights(7, 0.25, 35);
  CHECK(w2.alpha == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_THROWS((void)pretrain_class_weights(35, 1.0, 35));
}
