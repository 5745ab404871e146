#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace titlepress::nn {

using Mat = Eigen::MatrixXd;

/// A named trainable (or frozen) parameter tensor with Adam state.
struct Param {
  std::string name;
  Mat value;
  Mat grad;      // accumulated across a batch, cleared by the optimizer
  Mat adam_m;
  Mat adam_v;
  bool frozen = false;

  explicit Param(std::string n, Mat v)
      : name(std::move(n)),
        value(std::move(v)),
        grad(Mat::Zero(value.rows(), value.cols())),
        adam_m(Mat::Zero(value.rows(), value.cols())),
        adam_v(Mat::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

/// Registry of model parameters, ordered by insertion for deterministic
/// optimizer traversal and checkpointing.
class ParamStore {
 public:
  Param& create(const std::string& name, Mat init);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Param*> all();
  std::vector<const Param*> all() const;

  void zero_grads();

 private:
  std::deque<Param> params_;
  std::map<std::string, Param*> index_;
};

struct Node {
  Mat value;
  Mat grad;
  std::function<void(Node&)> backward;  // pushes grad into parents
  bool needs_grad = true;
};

/// Dynamic reverse-mode tape. One graph per forward pass; nodes are
/// owned by the graph and freed when it goes out of scope.
class Graph {
 public:
  explicit Graph(bool training = false, uint64_t dropout_seed = 0)
      : training_(training), rng_(dropout_seed) {}

  bool training() const { return training_; }

  Node* input(Mat v);
  Node* constant(Mat v);  // like input; never receives grad
  Node* param(Param& p);

  Node* matmul(Node* a, Node* b);
  /// a * b^T
  Node* matmul_nt(Node* a, Node* b);
  Node* add(Node* a, Node* b);
  /// Adds row vector b (1 x cols) to every row of a.
  Node* add_rowvec(Node* a, Node* b);
  Node* sub(Node* a, Node* b);
  Node* cmul(Node* a, Node* b);
  Node* scale(Node* a, double s);
  Node* sigmoid(Node* a);
  Node* tanh_(Node* a);
  Node* relu(Node* a);

  Node* concat_cols(Node* a, Node* b);
  Node* concat_rows(const std::vector<Node*>& parts);
  Node* rows(Node* a, int start, int count);
  Node* cols(Node* a, int start, int count);

  /// Gathers rows of a parameter table by id. Backward scatter-adds
  /// into the table grad unless the param is frozen.
  Node* gather_rows(Param& table, const std::vector<int>& ids);

  /// Sliding windows over rows: input R x E -> (R-width+1) x (width*E).
  Node* im2col(Node* a, int width);
  /// Column-wise max over rows -> 1 x cols, argmax routing on backward.
  Node* max_over_rows(Node* a);

  Node* sum_all(Node* a);  // 1x1

  /// Row-wise softmax restricted to allowed entries; disallowed entries
  /// get exactly zero. Rows with no allowed entry become all-zero.
  Node* masked_softmax_rows(Node* scores, const std::vector<std::vector<bool>>& allow);

  /// Plain row-wise softmax (used by the 2-class head in eval paths).
  Node* softmax_rows(Node* a);

  /// Inverted dropout; identity when the graph is not in training mode
  /// or rate == 0.
  Node* dropout(Node* a, double rate);

  /// Weighted binary cross entropy from 2-class logits (Eq.-9-style):
  ///   L = -(1/n_valid) * sum_i m_i * [alpha*y_i*log p1_i + beta*(1-y_i)*log p0_i... ]
  /// where p = softmax(logits_i) and the class-1 probability is clamped
  /// to [clamp, 1-clamp]. labels/mask sized to logits rows.
  Node* weighted_bce_logits(Node* logits, const std::vector<int>& labels,
                            const std::vector<bool>& mask, double alpha, double beta,
                            double clamp = 1e-7);

  void backward(Node* loss);

 private:
  Node* make(Mat value);

  std::deque<Node> nodes_;  // stable addresses, creation order = topo order
  bool training_;
  std::mt19937_64 rng_;
};

}  // namespace titlepress::nn
