#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nr::data {

inline bool is_punct_token_char(char c) {
  return c == '.' || c == '?' || c == ',' || c == '!' || c == ';' || c == ':';
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// Splits on whitespace and peels leading/trailing punctuation into
/// separate tokens. Case is preserved.
inline std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    std::size_t b = 0, e = word.size();
    std::vector<std::string> trailing;
    while (b < e && is_punct_token_char(word[b])) out.emplace_back(1, word[b++]);
    while (e > b && is_punct_token_char(word[e - 1])) trailing.emplace_back(1, word[--e]);
    if (e > b) out.push_back(word.substr(b, e - b));
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
  }
  return out;
}

/// Model tokenization: split_tokens, lowercased.
inline std::vector<std::string> tokenize(std::string_view text) {
  auto tokens = split_tokens(text);
  for (auto& t : tokens) t = to_lower(t);
  return tokens;
}

/// Canonical sentence rendering: tokens joined by single spaces, punctuation
/// attached to the preceding word, first letter capitalized.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    const bool punct = t.size() == 1 && is_punct_token_char(t[0]);
    if (!out.empty() && !punct) out += ' ';
    out += t;
  }
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace nr::data
