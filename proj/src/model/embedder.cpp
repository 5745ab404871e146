#include "titlepress/model/embedder.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace titlepress::model {

std::string highway_param(int layer, const char* part) {
  return "embed.highway" + std::to_string(layer) + "." + part;
}

namespace {
nn::Mat xavier_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (rows + cols)));
  nn::Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

nn::Mat uniform_init(int rows, int cols, std::mt19937_64& rng, double bound = 0.05) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  nn::Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}
}  // namespace

void create_embedder_params(nn::ParamStore& store, const ModelConfig& config,
                            int word_vocab, int char_vocab, std::mt19937_64& rng) {
  auto& wt = store.create(kWordTable, nn::Mat::Zero(word_vocab, config.e_word));
  wt.frozen = true;
  if (config.use_char_cnn) {
    nn::Mat ct = uniform_init(char_vocab, config.e_cin, rng);
    ct.row(Vocabulary::kPadId).setZero();
    store.create(kCharTable, std::move(ct));
    store.create(kConvW, xavier_normal(config.conv_width * config.e_cin, config.e_char, rng));
    store.create(kConvB, nn::Mat::Zero(1, config.e_char));
  }
  const int d = config.embed_dim();
  for (int l = 0; l < config.highway_layers; ++l) {
    store.create(highway_param(l, "tw"), uniform_init(d, d, rng));
    store.create(highway_param(l, "tb"), nn::Mat::Zero(1, d));
    store.create(highway_param(l, "gw"), uniform_init(d, d, rng));
    store.create(highway_param(l, "gb"), nn::Mat::Zero(1, d));
  }
}

void set_word_table(nn::ParamStore& store, const nn::Mat& vectors, bool unk_to_mean) {
  auto& wt = store.get(kWordTable);
  if (vectors.rows() != wt.value.rows() || vectors.cols() != wt.value.cols())
    throw std::runtime_error("set_word_table: shape mismatch");
  wt.value = vectors;
  wt.value.row(Vocabulary::kPadId).setZero();
  if (unk_to_mean && vectors.rows() > 2)
    wt.value.row(Vocabulary::kUnkId) =
        vectors.bottomRows(vectors.rows() - 2).colwise().mean();
  wt.frozen = true;
}

nn::Node* word_embed(nn::Graph& g, nn::ParamStore& store, const std::vector<int>& word_ids) {
  return g.gather_rows(store.get(kWordTable), word_ids);
}

nn::Node* char_cnn_embed(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                         const std::vector<std::vector<int>>& char_ids) {
  auto& table = store.get(kCharTable);
  nn::Node* conv_w = g.param(store.get(kConvW));
  nn::Node* conv_b = g.param(store.get(kConvB));
  std::vector<nn::Node*> per_word;
  per_word.reserve(char_ids.size());
  for (const auto& ids : char_ids) {
    if (static_cast<int>(ids.size()) < config.conv_width)
      throw std::runtime_error("char_cnn_embed: word length below filter width");
    nn::Node* ce = g.gather_rows(table, ids);
    nn::Node* windows = g.im2col(ce, config.conv_width);
    nn::Node* feat = g.relu(g.add_rowvec(g.matmul(windows, conv_w), conv_b));
    per_word.push_back(g.max_over_rows(feat));
  }
  return g.concat_rows(per_word);
}

nn::Node* highway_combine(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                          nn::Node* x) {
  const int d = config.embed_dim();
  if (x->value.cols() != d) throw std::runtime_error("highway_combine: dimension mismatch");
  for (int l = 0; l < config.highway_layers; ++l) {
    nn::Node* tw = g.param(store.get(highway_param(l, "tw")));
    nn::Node* tb = g.param(store.get(highway_param(l, "tb")));
    nn::Node* gw = g.param(store.get(highway_param(l, "gw")));
    nn::Node* gb = g.param(store.get(highway_param(l, "gb")));
    nn::Node* t = g.relu(g.add_rowvec(g.matmul(x, tw), tb));
    nn::Node* gate = g.sigmoid(g.add_rowvec(g.matmul(x, gw), gb));
    nn::Node* ones = g.constant(nn::Mat::Ones(x->value.rows(), d));
    // y = g*t + (1-g)*x
    x = g.add(g.cmul(gate, t), g.cmul(g.sub(ones, gate), x));
  }
  return x;
}

nn::Node* embed_sequence(nn::Graph& g, nn::ParamStore& store, const ModelConfig& config,
                         const EncodedExample& ex) {
  nn::Node* wemb = word_embed(g, store, ex.word_ids);
  nn::Node* x;
  if (config.use_char_cnn) {
    nn::Node* cemb = char_cnn_embed(g, store, config, ex.char_ids);
    x = g.concat_cols(cemb, wemb);  // [x_cemb; x_wemb]
  } else {
    x = wemb;
  }
  return highway_combine(g, store, config, x);
}

nn::Mat load_word_vectors(const std::string& path, const Vocabulary& vocab, int e_word) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word vectors file " + path);
  nn::Mat table = nn::Mat::Zero(vocab.word_count(), e_word);
  std::vector<bool> present(vocab.word_count(), false);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    int id = vocab.word_id(word);
    if (id == Vocabulary::kUnkId && word != Vocabulary::kUnkToken) continue;
    Eigen::RowVectorXd v(e_word);
    for (int j = 0; j < e_word; ++j) {
      if (!(ls >> v(j)))
        throw std::runtime_error("word vectors: short row for '" + word + "'");
    }
    table.row(id) = v;
    present[id] = true;
  }
  // Mean of present vectors stands in for UNK and for vocab words the
  // file does not cover.
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(e_word);
  int n_present = 0;
  for (int i = 2; i < vocab.word_count(); ++i)
    if (present[i]) {
      mean += table.row(i);
      ++n_present;
    }
  if (n_present > 0) {
    mean /= n_present;
    table.row(Vocabulary::kUnkId) = mean;
    for (int i = 2; i < vocab.word_count(); ++i)
      if (!present[i]) table.row(i) = mean;
  }
  table.row(Vocabulary::kPadId).setZero();
  return table;
}

}  // namespace titlepress::model
