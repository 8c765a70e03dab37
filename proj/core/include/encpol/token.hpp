#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>

namespace encpol {

/// Canonical attribute/keyword string. Construction always normalizes:
/// surrounding whitespace is trimmed and internal whitespace removed,
/// case is preserved.
class Token {
 public:
  /// Throws std::invalid_argument if nothing remains after normalization.
  static Token normalize(std::string_view raw);

  const std::string& text() const { return text_; }

  bool operator==(const Token&) const = default;
  auto operator<=>(const Token&) const = default;

 private:
  explicit Token(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

using TokenSet = std::set<Token>;

/// Subject / action / target head of an authorization rule.
struct SatTuple {
  Token subject;
  Token action;
  Token target;

  bool operator==(const SatTuple&) const = default;
};

}  // namespace encpol
