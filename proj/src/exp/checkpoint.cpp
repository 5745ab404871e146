#include "titlepress/exp/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

namespace titlepress::exp {

namespace {
constexpr char kMagic[8] = {'T', 'P', 'C', 'K', 'P', 'T', '0', '1'};

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"n_max", c.n_max},       {"c_max", c.c_max},
          {"e_word", c.e_word},     {"e_cin", c.e_cin},
          {"e_char", c.e_char},     {"conv_width", c.conv_width},
          {"highway_layers", c.highway_layers},
          {"hidden", c.hidden},     {"lstm_layers", c.lstm_layers},
          {"use_char_cnn", c.use_char_cnn},
          {"attention", to_string(c.attention)},
          {"attn_window", c.attn_window},
          {"attn_heads", c.attn_heads},
          {"dropout", c.dropout}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.n_max = j.at("n_max");
  c.c_max = j.at("c_max");
  c.e_word = j.at("e_word");
  c.e_cin = j.at("e_cin");
  c.e_char = j.at("e_char");
  c.conv_width = j.at("conv_width");
  c.highway_layers = j.at("highway_layers");
  c.hidden = j.at("hidden");
  c.lstm_layers = j.at("lstm_layers");
  c.use_char_cnn = j.at("use_char_cnn");
  c.attention = attention_from_string(j.at("attention"));
  c.attn_window = j.at("attn_window");
  c.attn_heads = j.at("attn_heads");
  c.dropout = j.at("dropout");
  return c;
}
}  // namespace

void save_checkpoint(const std::string& path, const model::Model& model,
                     uint64_t vocab_hash, int64_t step) {
  nlohmann::json header;
  header["config"] = config_to_json(model.config());
  header["word_vocab"] = model.word_vocab();
  header["char_vocab"] = model.char_vocab();
  header["vocab_hash"] = vocab_hash;
  header["step"] = step;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto* p : model.params().all())
    tensors.push_back({{"name", p->name},
                       {"rows", p->value.rows()},
                       {"cols", p->value.cols()},
                       {"frozen", p->frozen}});
  header["tensors"] = tensors;
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  const uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto* p : model.params().all()) {
    for (Eigen::Index r = 0; r < p->value.rows(); ++r)
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        const double v = p->value(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
  }
  if (!out) throw std::runtime_error("short write to checkpoint " + path);
}

namespace {
nlohmann::json read_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path + ": not a checkpoint file");
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  if (!in || hlen == 0 || hlen > (1ull << 30))
    throw std::runtime_error(path + ": corrupt checkpoint header");
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw std::runtime_error(path + ": truncated checkpoint header");
  nlohmann::json header = nlohmann::json::parse(hs, nullptr, false);
  if (header.is_discarded()) throw std::runtime_error(path + ": corrupt checkpoint header");
  return header;
}

void read_tensors(std::ifstream& in, const std::string& path, const nlohmann::json& header,
                  model::Model& model) {
  std::string mismatches;
  for (const auto& t : header.at("tensors")) {
    const std::string name = t.at("name");
    const Eigen::Index rows = t.at("rows");
    const Eigen::Index cols = t.at("cols");
    if (!model.params().contains(name)) {
      mismatches += " " + name + " (missing in model)";
      continue;
    }
    auto& p = model.params().get(name);
    if (p.value.rows() != rows || p.value.cols() != cols)
      mismatches += " " + name + " (checkpoint " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " vs model " + std::to_string(p.value.rows()) +
                    "x" + std::to_string(p.value.cols()) + ")";
  }
  if (!mismatches.empty())
    throw std::runtime_error(path + ": incompatible checkpoint, mismatched tensors:" +
                             mismatches);
  for (const auto& t : header.at("tensors")) {
    auto& p = model.params().get(t.at("name").get<std::string>());
    for (Eigen::Index r = 0; r < p.value.rows(); ++r)
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!in) throw std::runtime_error(path + ": truncated tensor data");
        p.value(r, c) = v;
      }
    p.frozen = t.value("frozen", p.frozen);
  }
}
}  // namespace

LoadedCheckpoint load_checkpoint(const std::string& path, uint64_t expected_vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  nlohmann::json header = read_header(in, path);
  ModelConfig config = config_from_json(header.at("config"));
  LoadedCheckpoint lc{model::Model(config, header.at("word_vocab"), header.at("char_vocab"),
                                   /*seed=*/0),
                      header.at("vocab_hash"), header.at("step")};
  read_tensors(in, path, header, lc.model);
  if (expected_vocab_hash != 0 && lc.vocab_hash != expected_vocab_hash)
    std::cerr << "warning: checkpoint " << path
              << " was saved with a different vocabulary (hash mismatch)\n";
  return lc;
}

void load_checkpoint_into(const std::string& path, model::Model& model,
                          uint64_t expected_vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  nlohmann::json header = read_header(in, path);
  read_tensors(in, path, header, model);
  if (expected_vocab_hash != 0 &&
      header.at("vocab_hash").get<uint64_t>() != expected_vocab_hash)
    std::cerr << "warning: checkpoint " << path
              << " was saved with a different vocabulary (hash mismatch)\n";
}

}  // namespace titlepress::exp
