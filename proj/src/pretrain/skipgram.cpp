#include "titlepress/pretrain/skipgram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace titlepress::pretrain {

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}

SkipGramModel SkipGramModel::train(const std::vector<std::vector<std::string>>& corpus,
                                   const SkipGramConfig& config) {
  if (config.window < 1) throw std::runtime_error("skipgram: window radius must be >= 1");
  SkipGramModel m;
  m.window_ = config.window;
  std::unordered_map<std::string, int64_t> freq;
  int64_t total_tokens = 0;
  for (const auto& title : corpus)
    for (const auto& tok : title) {
      ++freq[tok];
      ++total_tokens;
    }
  if (total_tokens == 0) throw std::runtime_error("skipgram: empty corpus");

  std::vector<std::pair<std::string, int64_t>> entries(freq.begin(), freq.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, f] : entries) {
    m.index_[tok] = static_cast<int>(m.tokens_.size());
    m.tokens_.push_back(tok);
    m.counts_.push_back(f);
  }
  const int v = m.vocab_size();

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uinit(-0.5 / config.dim, 0.5 / config.dim);
  m.input_ = Eigen::MatrixXd::NullaryExpr(v, config.dim, [&]() { return uinit(rng); });
  m.output_ = Eigen::MatrixXd::Zero(v, config.dim);

  // Unigram^0.75 negative-sampling distribution.
  std::vector<double> weights(v);
  for (int i = 0; i < v; ++i) weights[i] = std::pow(static_cast<double>(m.counts_[i]), 0.75);
  std::discrete_distribution<int> neg_dist(weights.begin(), weights.end());

  std::vector<int> encoded;
  std::vector<size_t> title_offsets;  // start index of each title in `encoded`
  for (const auto& title : corpus) {
    title_offsets.push_back(encoded.size());
    for (const auto& tok : title) encoded.push_back(m.index_.at(tok));
  }
  title_offsets.push_back(encoded.size());

  const int64_t pairs_per_epoch = total_tokens * 2 * config.window;  // upper bound
  int64_t seen = 0;
  Eigen::VectorXd grad_center(config.dim);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t t = 0; t + 1 < title_offsets.size(); ++t) {
      const size_t begin = title_offsets[t];
      const size_t end = title_offsets[t + 1];
      for (size_t i = begin; i < end; ++i) {
        const int center = encoded[i];
        for (int k = -config.window; k <= config.window; ++k) {
          if (k == 0) continue;
          const long long j = static_cast<long long>(i) + k;
          if (j < static_cast<long long>(begin) || j >= static_cast<long long>(end)) continue;
          const double progress =
              static_cast<double>(seen) /
              static_cast<double>(config.epochs * pairs_per_epoch + 1);
          const double lr = std::max(config.lr * (1.0 - progress), config.lr * 1e-4);
          ++seen;
          const int context = encoded[static_cast<size_t>(j)];
          // Predict the context word from the center word.
          grad_center.setZero();
          for (int s = 0; s < config.negatives + 1; ++s) {
            const int target = s == 0 ? context : neg_dist(rng);
            const double label = s == 0 ? 1.0 : 0.0;
            const double score = m.input_.row(center).dot(m.output_.row(target));
            const double g = (sigmoid(score) - label) * lr;
            grad_center += g * m.output_.row(target).transpose();
            m.output_.row(target) -= g * m.input_.row(center);
          }
          m.input_.row(center) -= grad_center.transpose();
        }
      }
    }
  }
  return m;
}

int SkipGramModel::token_id(const std::string& tok) const {
  auto it = index_.find(tok);
  return it == index_.end() ? -1 : it->second;
}

Eigen::VectorXd SkipGramModel::log_probs_given(int context_id) const {
  if (context_id < 0 || context_id >= vocab_size())
    throw std::runtime_error("skipgram: context id out of range");
  Eigen::VectorXd scores = output_ * input_.row(context_id).transpose();
  const double mx = scores.maxCoeff();
  const double lse = mx + std::log((scores.array() - mx).exp().sum());
  return scores.array() - lse;
}

std::vector<int> SkipGramModel::tokens_by_frequency() const {
  std::vector<int> ids(vocab_size());
  std::iota(ids.begin(), ids.end(), 0);  // already stored in frequency order
  return ids;
}

void SkipGramModel::save_vectors(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (int i = 0; i < vocab_size(); ++i) {
    out << tokens_[i];
    for (int j = 0; j < input_.cols(); ++j) out << ' ' << input_(i, j);
    out << "\n";
  }
}

void SkipGramModel::save(const std::string& path) const {
  nlohmann::json j;
  j["window"] = window_;
  j["dim"] = input_.cols();
  j["tokens"] = tokens_;
  j["counts"] = counts_;
  auto dump = [](const Eigen::MatrixXd& m) {
    std::vector<double> flat(m.size());
    Eigen::Map<Eigen::MatrixXd>(flat.data(), m.rows(), m.cols()) = m;
    return flat;
  };
  j["input"] = dump(input_);
  j["output"] = dump(output_);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << "\n";
}

SkipGramModel SkipGramModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  SkipGramModel m;
  m.window_ = j.at("window").get<int>();
  m.tokens_ = j.at("tokens").get<std::vector<std::string>>();
  m.counts_ = j.at("counts").get<std::vector<int64_t>>();
  for (size_t i = 0; i < m.tokens_.size(); ++i) m.index_[m.tokens_[i]] = static_cast<int>(i);
  const int v = static_cast<int>(m.tokens_.size());
  const int d = j.at("dim").get<int>();
  auto restore = [&](const char* key) {
    std::vector<double> flat = j.at(key).get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != v * d)
      throw std::runtime_error("skipgram load: tensor size mismatch");
    return Eigen::MatrixXd(Eigen::Map<Eigen::MatrixXd>(flat.data(), v, d));
  };
  m.input_ = restore("input");
  m.output_ = restore("output");
  return m;
}

}  // namespace titlepress::pretrain
