#include "encpol/token.hpp"

#include <cctype>
#include <stdexcept>

namespace encpol {

Token Token::normalize(std::string_view raw) {
  std::string text;
  text.reserve(raw.size());
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  }
  if (text.empty())
    throw std::invalid_argument("token is empty after normalization");
  return Token(std::move(text));
}

}  // namespace encpol
