#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "titlepress/config.hpp"
#include "titlepress/vocab.hpp"

namespace titlepress {

struct RawTitlePair {
  std::string long_title;
  std::optional<std::string> short_title;
};

struct EncodedExample {
  std::vector<int> word_ids;               // length N, PAD-filled
  std::vector<std::vector<int>> char_ids;  // N x C, PAD-filled
  std::vector<bool> mask;                  // true = real token
  std::vector<int> labels;                 // length N, all zero when unlabeled
  bool has_labels = false;

  int valid_count() const;
};

/// Encodes a normalized pair against the vocabulary. Labels come from a
/// greedy left-to-right alignment of the short title into the long one;
/// a short-title token with no unused match raises an error naming it.
EncodedExample encode_example(const RawTitlePair& pair, const Vocabulary& vocab,
                              const ModelConfig& config);

/// Encodes an already-tokenized sequence with explicit labels (used by
/// the replaced-token-detection corpus).
EncodedExample encode_tokens(const std::vector<std::string>& tokens,
                             const std::vector<int>& labels, const Vocabulary& vocab,
                             const ModelConfig& config);

/// Drops PAD positions and maps the remaining ids back to tokens.
std::vector<std::string> decode_word_ids(const EncodedExample& ex, const Vocabulary& vocab);

struct DatasetSplits {
  std::vector<RawTitlePair> train;
  std::vector<RawTitlePair> val;
  std::vector<RawTitlePair> test;
};

/// Deterministic 72/8/20 split. Requires at least 10 pairs.
DatasetSplits split_dataset(const std::vector<RawTitlePair>& pairs, uint64_t seed);

/// JSONL: one object per line, {"long": str, "short": str|null}.
std::vector<RawTitlePair> read_pairs_jsonl(const std::string& path);
void write_pairs_jsonl(const std::string& path, const std::vector<RawTitlePair>& pairs);

/// JSONL: {"tokens": [...], "labels": [0/1,...]}.
struct TokenLabelRecord {
  std::vector<std::string> tokens;
  std::vector<int> labels;
};
std::vector<TokenLabelRecord> read_token_label_jsonl(const std::string& path);
void write_token_label_jsonl(const std::string& path,
                             const std::vector<TokenLabelRecord>& records);

}  // namespace titlepress
