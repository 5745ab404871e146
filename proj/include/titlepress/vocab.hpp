#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace titlepress {

/// Word and character vocabularies with reserved PAD/UNK entries.
/// Ids are stable: PAD=0, UNK=1, then corpus tokens ordered by
/// frequency (descending) and lexicographically on ties.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;
  static constexpr const char* kPadToken = "<PAD>";
  static constexpr const char* kUnkToken = "<UNK>";

  /// Empty vocabulary carrying only PAD/UNK; fill via build() or load().
  Vocabulary();

  /// Builds from a stream of tokenized titles. Throws on an empty corpus.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus);

  int word_id(const std::string& w) const;
  int char_id(char c) const;
  const std::string& word(int id) const;

  int word_count() const { return static_cast<int>(id_to_word_.size()); }
  int char_count() const { return static_cast<int>(id_to_char_.size()); }

  /// FNV-1a over the serialized token lists; used to detect checkpoint /
  /// vocabulary mismatches.
  uint64_t hash() const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::unordered_map<std::string, int> word_to_id_;
  std::unordered_map<char, int> char_to_id_;
  std::vector<std::string> id_to_word_;  // [0]=PAD, [1]=UNK
  std::vector<std::string> id_to_char_;  // single-char strings; [0]=PAD, [1]=UNK
};

}  // namespace titlepress
