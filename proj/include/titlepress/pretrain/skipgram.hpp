#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace titlepress::pretrain {

/// Scoring interface for replacement selection: log P_s(w | c) for every
/// w in one shot. Tests plug in hand-built tables; production uses the
/// trained skip-gram model.
class ContextModel {
 public:
  virtual ~ContextModel() = default;
  virtual int vocab_size() const = 0;
  /// Window radius n used for scoring (l_w = 2n+1).
  virtual int window() const { return 2; }
  virtual const std::string& token(int id) const = 0;
  /// -1 when the token is unknown.
  virtual int token_id(const std::string& tok) const = 0;
  /// Log-probabilities of every vocabulary token given the context token.
  virtual Eigen::VectorXd log_probs_given(int context_id) const = 0;
  /// Token ids ordered by descending corpus frequency (for candidate
  /// truncation at scale).
  virtual std::vector<int> tokens_by_frequency() const = 0;
};

struct SkipGramConfig {
  int window = 2;  // radius n; window length is 2n+1
  int dim = 64;
  int epochs = 5;
  int negatives = 5;
  double lr = 0.025;
  uint64_t seed = 1;
};

/// Word2vec-style skip-gram with negative sampling, trained by plain SGD
/// with linear learning-rate decay. P_s at inference is the full softmax
/// of output-embedding scores against the input embedding of the context.
class SkipGramModel : public ContextModel {
 public:
  static SkipGramModel train(const std::vector<std::vector<std::string>>& corpus,
                             const SkipGramConfig& config);

  int vocab_size() const override { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const override { return tokens_[id]; }
  int token_id(const std::string& tok) const override;
  Eigen::VectorXd log_probs_given(int context_id) const override;
  std::vector<int> tokens_by_frequency() const override;

  int dim() const { return static_cast<int>(input_.cols()); }
  int window() const override { return window_; }
  const Eigen::MatrixXd& input_vectors() const { return input_; }

  /// Writes input vectors in "word v1 ... vD" text format.
  void save_vectors(const std::string& path) const;

  void save(const std::string& path) const;
  static SkipGramModel load(const std::string& path);

 private:
  SkipGramModel() = default;

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::vector<int64_t> counts_;
  Eigen::MatrixXd input_;   // |V| x d
  Eigen::MatrixXd output_;  // |V| x d
  int window_ = 2;
};

}  // namespace titlepress::pretrain
