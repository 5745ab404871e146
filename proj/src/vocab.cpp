#include "titlepress/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace titlepress {

Vocabulary::Vocabulary() {
  id_to_word_ = {kPadToken, kUnkToken};
  id_to_char_ = {kPadToken, kUnkToken};
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus) {
  std::map<std::string, int64_t> word_freq;
  std::map<char, int64_t> char_freq;
  bool any = false;
  for (const auto& title : corpus) {
    for (const auto& tok : title) {
      any = true;
      ++word_freq[tok];
      for (char c : tok) ++char_freq[c];
    }
  }
  if (!any) throw std::runtime_error("build_vocab: empty corpus");

  Vocabulary v;
  std::vector<std::pair<std::string, int64_t>> words(word_freq.begin(), word_freq.end());
  std::stable_sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [w, f] : words) {
    v.word_to_id_[w] = static_cast<int>(v.id_to_word_.size());
    v.id_to_word_.push_back(w);
  }
  std::vector<std::pair<char, int64_t>> chars(char_freq.begin(), char_freq.end());
  std::stable_sort(chars.begin(), chars.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [c, f] : chars) {
    v.char_to_id_[c] = static_cast<int>(v.id_to_char_.size());
    v.id_to_char_.push_back(std::string(1, c));
  }
  return v;
}

int Vocabulary::word_id(const std::string& w) const {
  auto it = word_to_id_.find(w);
  return it == word_to_id_.end() ? kUnkId : it->second;
}

int Vocabulary::char_id(char c) const {
  auto it = char_to_id_.find(c);
  return it == char_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= static_cast<int>(id_to_word_.size()))
    throw std::runtime_error("word id out of range");
  return id_to_word_[id];
}

uint64_t Vocabulary::hash() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& w : id_to_word_) mix(w);
  for (const auto& c : id_to_char_) mix(c);
  return h;
}

void Vocabulary::save(const std::string& path) const {
  nlohmann::json j;
  j["words"] = std::vector<std::string>(id_to_word_.begin() + 2, id_to_word_.end());
  j["chars"] = std::vector<std::string>(id_to_char_.begin() + 2, id_to_char_.end());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary to " + path);
  out << j.dump(2) << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vocabulary from " + path);
  nlohmann::json j;
  in >> j;
  Vocabulary v;
  for (const auto& w : j.at("words")) {
    std::string s = w.get<std::string>();
    v.word_to_id_[s] = static_cast<int>(v.id_to_word_.size());
    v.id_to_word_.push_back(s);
  }
  for (const auto& c : j.at("chars")) {
    std::string s = c.get<std::string>();
    if (s.size() != 1) throw std::runtime_error("vocabulary char entry is not a single char");
    v.char_to_id_[s[0]] = static_cast<int>(v.id_to_char_.size());
    v.id_to_char_.push_back(s);
  }
  return v;
}

}  // namespace titlepress
