#include "titlepress/nn/graph.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace titlepress::nn {

Param& ParamStore::create(const std::string& name, Mat init) {
  if (index_.count(name)) throw std::runtime_error("duplicate parameter: " + name);
  params_.emplace_back(name, std::move(init));
  index_[name] = &params_.back();
  return params_.back();
}

Param& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::runtime_error("unknown parameter: " + name);
  return *it->second;
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::runtime_error("unknown parameter: " + name);
  return *it->second;
}

bool ParamStore::contains(const std::string& name) const { return index_.count(name) > 0; }

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Param*> ParamStore::all() const {
  std::vector<const Param*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p.zero_grad();
}

Node* Graph::make(Mat value) {
  nodes_.emplace_back();
  Node& n = nodes_.back();
  n.value = std::move(value);
  n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return &n;
}

Node* Graph::input(Mat v) { return make(std::move(v)); }

Node* Graph::constant(Mat v) {
  Node* n = make(std::move(v));
  n->needs_grad = false;
  return n;
}

Node* Graph::param(Param& p) {
  Node* n = make(p.value);
  Param* pp = &p;
  n->backward = [pp](Node& self) {
    if (!pp->frozen) pp->grad += self.grad;
  };
  return n;
}

Node* Graph::matmul(Node* a, Node* b) {
  Node* n = make(a->value * b->value);
  n->backward = [a, b](Node& self) {
    a->grad.noalias() += self.grad * b->value.transpose();
    b->grad.noalias() += a->value.transpose() * self.grad;
  };
  return n;
}

Node* Graph::matmul_nt(Node* a, Node* b) {
  Node* n = make(a->value * b->value.transpose());
  n->backward = [a, b](Node& self) {
    a->grad.noalias() += self.grad * b->value;
    b->grad.noalias() += self.grad.transpose() * a->value;
  };
  return n;
}

Node* Graph::add(Node* a, Node* b) {
  Node* n = make(a->value + b->value);
  n->backward = [a, b](Node& self) {
    a->grad += self.grad;
    b->grad += self.grad;
  };
  return n;
}

Node* Graph::add_rowvec(Node* a, Node* b) {
  if (b->value.rows() != 1 || b->value.cols() != a->value.cols())
    throw std::runtime_error("add_rowvec: shape mismatch");
  Mat v = a->value;
  v.rowwise() += b->value.row(0);
  Node* n = make(std::move(v));
  n->backward = [a, b](Node& self) {
    a->grad += self.grad;
    b->grad.row(0) += self.grad.colwise().sum();
  };
  return n;
}

Node* Graph::sub(Node* a, Node* b) {
  Node* n = make(a->value - b->value);
  n->backward = [a, b](Node& self) {
    a->grad += self.grad;
    b->grad -= self.grad;
  };
  return n;
}

Node* Graph::cmul(Node* a, Node* b) {
  Node* n = make(a->value.cwiseProduct(b->value));
  n->backward = [a, b](Node& self) {
    a->grad += self.grad.cwiseProduct(b->value);
    b->grad += self.grad.cwiseProduct(a->value);
  };
  return n;
}

Node* Graph::scale(Node* a, double s) {
  Node* n = make(a->value * s);
  n->backward = [a, s](Node& self) { a->grad += self.grad * s; };
  return n;
}

Node* Graph::sigmoid(Node* a) {
  Mat v = a->value.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  Node* n = make(std::move(v));
  n->backward = [a, n](Node& self) {
    a->grad += self.grad.cwiseProduct(
        n->value.cwiseProduct(Mat::Ones(n->value.rows(), n->value.cols()) - n->value));
  };
  return n;
}

Node* Graph::tanh_(Node* a) {
  Mat v = a->value.array().tanh();
  Node* n = make(std::move(v));
  n->backward = [a, n](Node& self) {
    a->grad.array() += self.grad.array() * (1.0 - n->value.array().square());
  };
  return n;
}

Node* Graph::relu(Node* a) {
  Mat v = a->value.cwiseMax(0.0);
  Node* n = make(std::move(v));
  n->backward = [a](Node& self) {
    a->grad.array() += self.grad.array() * (a->value.array() > 0.0).cast<double>();
  };
  return n;
}

Node* Graph::concat_cols(Node* a, Node* b) {
  if (a->value.rows() != b->value.rows()) throw std::runtime_error("concat_cols: row mismatch");
  Mat v(a->value.rows(), a->value.cols() + b->value.cols());
  v << a->value, b->value;
  Node* n = make(std::move(v));
  const int ca = static_cast<int>(a->value.cols());
  n->backward = [a, b, ca](Node& self) {
    a->grad += self.grad.leftCols(ca);
    b->grad += self.grad.rightCols(self.grad.cols() - ca);
  };
  return n;
}

Node* Graph::concat_rows(const std::vector<Node*>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_rows: empty");
  Eigen::Index total = 0;
  for (auto* p : parts) total += p->value.rows();
  Mat v(total, parts[0]->value.cols());
  Eigen::Index r = 0;
  for (auto* p : parts) {
    v.middleRows(r, p->value.rows()) = p->value;
    r += p->value.rows();
  }
  Node* n = make(std::move(v));
  std::vector<Node*> ps = parts;
  n->backward = [ps](Node& self) {
    Eigen::Index r = 0;
    for (auto* p : ps) {
      p->grad += self.grad.middleRows(r, p->value.rows());
      r += p->value.rows();
    }
  };
  return n;
}

Node* Graph::rows(Node* a, int start, int count) {
  Node* n = make(a->value.middleRows(start, count));
  n->backward = [a, start, count](Node& self) {
    a->grad.middleRows(start, count) += self.grad;
  };
  return n;
}

Node* Graph::cols(Node* a, int start, int count) {
  Node* n = make(a->value.middleCols(start, count));
  n->backward = [a, start, count](Node& self) {
    a->grad.middleCols(start, count) += self.grad;
  };
  return n;
}

Node* Graph::gather_rows(Param& table, const std::vector<int>& ids) {
  Mat v(static_cast<Eigen::Index>(ids.size()), table.value.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.value.rows())
      throw std::runtime_error("gather_rows: id out of range in " + table.name);
    v.row(static_cast<Eigen::Index>(i)) = table.value.row(ids[i]);
  }
  Node* n = make(std::move(v));
  Param* t = &table;
  std::vector<int> idx = ids;
  n->backward = [t, idx](Node& self) {
    if (t->frozen) return;
    for (size_t i = 0; i < idx.size(); ++i)
      t->grad.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
  };
  return n;
}

Node* Graph::im2col(Node* a, int width) {
  const int r = static_cast<int>(a->value.rows());
  const int e = static_cast<int>(a->value.cols());
  const int windows = r - width + 1;
  if (windows < 1) throw std::runtime_error("im2col: input shorter than filter width");
  Mat v(windows, width * e);
  for (int w = 0; w < windows; ++w)
    for (int k = 0; k < width; ++k) v.block(w, k * e, 1, e) = a->value.row(w + k);
  Node* n = make(std::move(v));
  n->backward = [a, width, e, windows](Node& self) {
    for (int w = 0; w < windows; ++w)
      for (int k = 0; k < width; ++k) a->grad.row(w + k) += self.grad.block(w, k * e, 1, e);
  };
  return n;
}

Node* Graph::max_over_rows(Node* a) {
  const int c = static_cast<int>(a->value.cols());
  Mat v(1, c);
  std::vector<int> argmax(c);
  for (int j = 0; j < c; ++j) {
    Eigen::Index r;
    v(0, j) = a->value.col(j).maxCoeff(&r);
    argmax[j] = static_cast<int>(r);
  }
  Node* n = make(std::move(v));
  n->backward = [a, argmax](Node& self) {
    for (int j = 0; j < static_cast<int>(argmax.size()); ++j)
      a->grad(argmax[j], j) += self.grad(0, j);
  };
  return n;
}

Node* Graph::sum_all(Node* a) {
  Mat v(1, 1);
  v(0, 0) = a->value.sum();
  Node* n = make(std::move(v));
  n->backward = [a](Node& self) { a->grad.array() += self.grad(0, 0); };
  return n;
}

Node* Graph::masked_softmax_rows(Node* scores,
                                 const std::vector<std::vector<bool>>& allow) {
  const int r = static_cast<int>(scores->value.rows());
  const int c = static_cast<int>(scores->value.cols());
  if (static_cast<int>(allow.size()) != r)
    throw std::runtime_error("masked_softmax_rows: allow rows mismatch");
  Mat v = Mat::Zero(r, c);
  for (int i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < c; ++j)
      if (allow[i][j]) mx = std::max(mx, scores->value(i, j));
    if (!std::isfinite(mx)) continue;  // no allowed entry: all-zero row
    double z = 0.0;
    for (int j = 0; j < c; ++j)
      if (allow[i][j]) z += std::exp(scores->value(i, j) - mx);
    for (int j = 0; j < c; ++j)
      if (allow[i][j]) v(i, j) = std::exp(scores->value(i, j) - mx) / z;
  }
  Node* n = make(std::move(v));
  std::vector<std::vector<bool>> al = allow;
  n->backward = [scores, n, al](Node& self) {
    // d softmax: g_j = p_j * (gbar_j - sum_k p_k gbar_k), per row
    for (int i = 0; i < static_cast<int>(self.grad.rows()); ++i) {
      double dot = n->value.row(i).dot(self.grad.row(i));
      for (int j = 0; j < static_cast<int>(self.grad.cols()); ++j)
        if (al[i][j]) scores->grad(i, j) += n->value(i, j) * (self.grad(i, j) - dot);
    }
  };
  return n;
}

Node* Graph::softmax_rows(Node* a) {
  std::vector<std::vector<bool>> allow(
      a->value.rows(), std::vector<bool>(a->value.cols(), true));
  return masked_softmax_rows(a, allow);
}

Node* Graph::dropout(Node* a, double rate) {
  if (!training_ || rate <= 0.0) return a;
  std::bernoulli_distribution keep(1.0 - rate);
  Mat m(a->value.rows(), a->value.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = keep(rng_) ? 1.0 / (1.0 - rate) : 0.0;
  Node* n = make(a->value.cwiseProduct(m));
  n->backward = [a, m](Node& self) { a->grad += self.grad.cwiseProduct(m); };
  return n;
}

Node* Graph::weighted_bce_logits(Node* logits, const std::vector<int>& labels,
                                 const std::vector<bool>& mask, double alpha,
                                 double beta, double clamp) {
  const int r = static_cast<int>(logits->value.rows());
  if (logits->value.cols() != 2) throw std::runtime_error("weighted_bce_logits: need 2 logits");
  if (static_cast<int>(labels.size()) != r || static_cast<int>(mask.size()) != r)
    throw std::runtime_error("weighted_bce_logits: label/mask length mismatch");
  int n_valid = 0;
  for (bool m : mask) n_valid += m ? 1 : 0;
  if (n_valid == 0) throw std::runtime_error("weighted_bce_logits: all positions masked");

  // p1 = sigmoid(l1 - l0); clamped to [clamp, 1-clamp] before the logs.
  std::vector<double> p1(r), p1c(r);
  double loss = 0.0;
  for (int i = 0; i < r; ++i) {
    if (!mask[i]) continue;
    const double d = logits->value(i, 1) - logits->value(i, 0);
    p1[i] = 1.0 / (1.0 + std::exp(-d));
    p1c[i] = std::min(std::max(p1[i], clamp), 1.0 - clamp);
    loss -= alpha * labels[i] * std::log(p1c[i]) +
            beta * (1 - labels[i]) * std::log(1.0 - p1c[i]);
  }
  loss /= n_valid;
  Mat v(1, 1);
  v(0, 0) = loss;
  Node* n = make(std::move(v));
  std::vector<int> lab = labels;
  std::vector<bool> msk = mask;
  n->backward = [logits, lab, msk, alpha, beta, n_valid, p1](Node& self) {
    const double g = self.grad(0, 0) / n_valid;
    for (int i = 0; i < static_cast<int>(lab.size()); ++i) {
      if (!msk[i]) continue;
      // exact sigmoid-BCE gradient; stays finite when p1 saturates, so
      // confidently wrong positions keep a restoring force
      const double dd =
          g * (-alpha * lab[i] * (1.0 - p1[i]) + beta * (1 - lab[i]) * p1[i]);
      logits->grad(i, 1) += dd;
      logits->grad(i, 0) -= dd;
    }
  };
  return n;
}

void Graph::backward(Node* loss) {
  if (loss->value.rows() != 1 || loss->value.cols() != 1)
    throw std::runtime_error("backward: loss must be scalar");
  loss->grad(0, 0) = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->backward) it->backward(*it);
    if (&*it == loss) continue;
  }
}

}  // namespace titlepress::nn
