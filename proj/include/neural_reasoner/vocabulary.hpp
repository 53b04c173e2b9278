#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "neural_reasoner/error.hpp"

namespace nr {

using TokenId = std::uint32_t;

/// Token <-> id map. Ids 0..3 are reserved for PAD, UNK, BOS and EOS.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kBos = 2;
  static constexpr TokenId kEos = 3;
  static constexpr std::size_t kReserved = 4;

  Vocabulary() : tokens_{"<pad>", "<unk>", "<bos>", "<eos>"} {
    for (TokenId i = 0; i < kReserved; ++i) ids_.emplace(tokens_[i], i);
  }

  /// Returns the id of `token`, adding it if new.
  TokenId add(std::string_view token) {
    auto [it, inserted] = ids_.try_emplace(std::string(token), static_cast<TokenId>(tokens_.size()));
    if (inserted) tokens_.emplace_back(token);
    return it->second;
  }

  bool contains(std::string_view token) const { return ids_.contains(std::string(token)); }

  /// Id of `token`, or UNK.
  TokenId id(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? kUnk : it->second;
  }

  const std::string& token(TokenId id) const {
    if (id >= tokens_.size()) throw InputError("token id " + std::to_string(id) + " outside vocabulary");
    return tokens_[id];
  }

  std::size_t size() const noexcept { return tokens_.size(); }

  std::vector<TokenId> encode(const std::vector<std::string>& tokens) const {
    std::vector<TokenId> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(id(t));
    return out;
  }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace nr
