#include "titlepress/text.hpp"

#include <cctype>
#include <sstream>

namespace titlepress {

std::string normalize_text(const std::string& raw) {
  std::string expanded;
  expanded.reserve(raw.size() + 8);
  for (char ch : raw) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (c == '&') {
      expanded += " and ";
    } else if (c == ',') {
      expanded += " , ";
    } else {
      expanded += static_cast<char>(std::isspace(c) ? ' ' : std::tolower(c));
    }
  }
  std::string out;
  out.reserve(expanded.size());
  bool pending_space = false;
  for (char c : expanded) {
    if (c == ' ') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& normalized) {
  std::vector<std::string> tokens;
  std::istringstream in(normalized);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace titlepress
