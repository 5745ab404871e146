#include "titlepress/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "titlepress/text.hpp"

namespace titlepress {

int EncodedExample::valid_count() const {
  return static_cast<int>(std::count(mask.begin(), mask.end(), true));
}

EncodedExample encode_tokens(const std::vector<std::string>& tokens,
                             const std::vector<int>& labels, const Vocabulary& vocab,
                             const ModelConfig& config) {
  if (tokens.empty()) throw std::runtime_error("encode: empty token sequence");
  const int n = config.n_max;
  const int c = config.c_max;
  EncodedExample ex;
  ex.word_ids.assign(n, Vocabulary::kPadId);
  ex.char_ids.assign(n, std::vector<int>(c, Vocabulary::kPadId));
  ex.mask.assign(n, false);
  ex.labels.assign(n, 0);
  ex.has_labels = !labels.empty();
  const int len = std::min<int>(static_cast<int>(tokens.size()), n);
  for (int i = 0; i < len; ++i) {
    ex.word_ids[i] = vocab.word_id(tokens[i]);
    ex.mask[i] = true;
    const std::string& w = tokens[i];
    for (int j = 0; j < std::min<int>(static_cast<int>(w.size()), c); ++j)
      ex.char_ids[i][j] = vocab.char_id(w[j]);
    if (ex.has_labels) ex.labels[i] = labels[i] ? 1 : 0;
  }
  return ex;
}

EncodedExample encode_example(const RawTitlePair& pair, const Vocabulary& vocab,
                              const ModelConfig& config) {
  auto tokens = tokenize(normalize_text(pair.long_title));
  if (tokens.empty()) throw std::runtime_error("encode: long title has no tokens");
  std::vector<int> labels;
  if (pair.short_title) {
    labels.assign(tokens.size(), 0);
    auto short_tokens = tokenize(normalize_text(*pair.short_title));
    size_t pos = 0;  // greedy left-to-right alignment
    for (const auto& st : short_tokens) {
      bool found = false;
      for (size_t i = pos; i < tokens.size(); ++i) {
        if (tokens[i] == st) {
          labels[i] = 1;
          pos = i + 1;
          found = true;
          break;
        }
      }
      if (!found)
        throw std::runtime_error("label alignment: short-title token '" + st +
                                 "' not found in long title");
    }
  }
  return encode_tokens(tokens, labels, vocab, config);
}

std::vector<std::string> decode_word_ids(const EncodedExample& ex, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (size_t i = 0; i < ex.word_ids.size(); ++i)
    if (ex.mask[i]) out.push_back(vocab.word(ex.word_ids[i]));
  return out;
}

DatasetSplits split_dataset(const std::vector<RawTitlePair>& pairs, uint64_t seed) {
  const size_t n = pairs.size();
  if (n < 10) throw std::runtime_error("split_dataset: need at least 10 pairs, got " +
                                       std::to_string(n));
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const size_t n_test = static_cast<size_t>(std::llround(0.20 * static_cast<double>(n)));
  const size_t n_val = static_cast<size_t>(std::llround(0.08 * static_cast<double>(n)));
  DatasetSplits s;
  for (size_t i = 0; i < n; ++i) {
    const RawTitlePair& p = pairs[order[i]];
    if (i < n_test) s.test.push_back(p);
    else if (i < n_test + n_val) s.val.push_back(p);
    else s.train.push_back(p);
  }
  return s;
}

std::vector<RawTitlePair> read_pairs_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<RawTitlePair> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("long"))
      throw std::runtime_error(path + ": malformed record at line " + std::to_string(lineno));
    RawTitlePair p;
    p.long_title = j.at("long").get<std::string>();
    if (j.contains("short") && !j.at("short").is_null())
      p.short_title = j.at("short").get<std::string>();
    out.push_back(std::move(p));
  }
  return out;
}

void write_pairs_jsonl(const std::string& path, const std::vector<RawTitlePair>& pairs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& p : pairs) {
    nlohmann::json j;
    j["long"] = p.long_title;
    if (p.short_title) j["short"] = *p.short_title;
    else j["short"] = nullptr;
    out << j.dump() << "\n";
  }
}

std::vector<TokenLabelRecord> read_token_label_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<TokenLabelRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("tokens") || !j.contains("labels"))
      throw std::runtime_error(path + ": malformed record at line " + std::to_string(lineno));
    TokenLabelRecord r;
    r.tokens = j.at("tokens").get<std::vector<std::string>>();
    r.labels = j.at("labels").get<std::vector<int>>();
    if (r.tokens.size() != r.labels.size())
      throw std::runtime_error(path + ": tokens/labels length mismatch at line " +
                               std::to_string(lineno));
    out.push_back(std::move(r));
  }
  return out;
}

void write_token_label_jsonl(const std::string& path,
                             const std::vector<TokenLabelRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& r : records) {
    nlohmann::json j;
    j["tokens"] = r.tokens;
    j["labels"] = r.labels;
    out << j.dump() << "\n";
  }
}

}  // namespace titlepress
