#pragma once

#include <string>
#include <vector>

namespace titlepress {

/// Lowercases, maps "&" to "and", pads commas with spaces, squeezes
/// whitespace runs and trims the ends. Idempotent.
std::string normalize_text(const std::string& raw);

/// Whitespace split of already-normalized text. Never yields empty tokens.
std::vector<std::string> tokenize(const std::string& normalized);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace titlepress
