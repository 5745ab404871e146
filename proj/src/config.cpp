#include "titlepress/config.hpp"

#include <fstream>
#include <stdexcept>

namespace titlepress {

std::string to_string(AttentionKind k) {
  switch (k) {
    case AttentionKind::kNone: return "none";
    case AttentionKind::kGlobal: return "global";
    case AttentionKind::kNarrow: return "narrow";
    case AttentionKind::kMultiHead: return "multihead";
  }
  return "global";
}

AttentionKind attention_from_string(const std::string& s) {
  if (s == "none") return AttentionKind::kNone;
  if (s == "global") return AttentionKind::kGlobal;
  if (s == "narrow") return AttentionKind::kNarrow;
  if (s == "multihead") return AttentionKind::kMultiHead;
  throw std::runtime_error("unknown attention kind: " + s);
}

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

void apply_config_file(const std::string& path, ModelConfig& model, TrainingConfig& train) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    try {
      if (key == "n_max") model.n_max = std::stoi(val);
      else if (key == "c_max") model.c_max = std::stoi(val);
      else if (key == "e_word") model.e_word = std::stoi(val);
      else if (key == "e_cin") model.e_cin = std::stoi(val);
      else if (key == "e_char") model.e_char = std::stoi(val);
      else if (key == "conv_width") model.conv_width = std::stoi(val);
      else if (key == "highway_layers") model.highway_layers = std::stoi(val);
      else if (key == "hidden") model.hidden = std::stoi(val);
      else if (key == "lstm_layers") model.lstm_layers = std::stoi(val);
      else if (key == "use_char_cnn") model.use_char_cnn = (val == "true" || val == "1");
      else if (key == "attention") model.attention = attention_from_string(val);
      else if (key == "attn_window") model.attn_window = std::stoi(val);
      else if (key == "attn_heads") model.attn_heads = std::stoi(val);
      else if (key == "model_dropout") model.dropout = std::stod(val);
      else if (key == "lr") train.lr = std::stod(val);
      else if (key == "beta1") train.beta1 = std::stod(val);
      else if (key == "beta2") train.beta2 = std::stod(val);
      else if (key == "dropout") { train.dropout = std::stod(val); model.dropout = train.dropout; }
      else if (key == "max_epochs") train.max_epochs = std::stoi(val);
      else if (key == "wallclock_budget_sec") train.wallclock_budget_sec = std::stod(val);
      else if (key == "patience") train.patience = std::stoi(val);
      else if (key == "batch_size") train.batch_size = std::stoi(val);
      else if (key == "seed") train.seed = std::stoull(val);
      else if (key == "alpha") { train.weights.alpha = std::stod(val); train.weights.beta = 1.0 - train.weights.alpha; }
      else throw std::runtime_error("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad value for " + key);
    }
  }
}

}  // namespace titlepress
