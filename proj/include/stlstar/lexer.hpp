#pragma once

// Tokenizer shared by the formula grammar and the ODE right-hand-side
// expression grammar.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stlstar/error.hpp"

namespace stlstar::detail {

enum class TokenKind { Number, Ident, Symbol, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;

  bool is(std::string_view sym) const { return kind == TokenKind::Symbol && text == sym; }
  bool is_ident(std::string_view name) const { return kind == TokenKind::Ident && text == name; }
};

inline std::vector<Token> tokenize(std::string_view src) {
  static constexpr std::string_view two_char[] = {"||", "&&", "<=", ">=", "==", "!="};
  static constexpr std::string_view one_char = "!*+-/()[],<>";

  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + src.size(), value);
      if (ec != std::errc{} || ptr == src.data() + i) throw ParseError("malformed number", i);
      const auto len = static_cast<std::size_t>(ptr - (src.data() + i));
      out.push_back({TokenKind::Number, std::string(src.substr(i, len)), value, i});
      i += len;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i + 1;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      out.push_back({TokenKind::Ident, std::string(src.substr(i, j - i)), 0.0, i});
      i = j;
      continue;
    }
    bool matched = false;
    for (auto sym : two_char) {
      if (src.substr(i, 2) == sym) {
        out.push_back({TokenKind::Symbol, std::string(sym), 0.0, i});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (one_char.find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Symbol, std::string(1, c), 0.0, i});
      ++i;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i);
  }
  out.push_back({TokenKind::End, "", 0.0, src.size()});
  return out;
}

/// Cursor over a token vector with the usual peek/expect helpers.
class TokenStream {
public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    const auto idx = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[idx];
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool accept(std::string_view sym) {
    if (peek().is(sym)) {
      next();
      return true;
    }
    return false;
  }
  const Token& expect(std::string_view sym) {
    if (!peek().is(sym))
      throw ParseError("expected '" + std::string(sym) + "'" + found(), peek().pos);
    return next();
  }
  bool at_end() const { return peek().kind == TokenKind::End; }

  std::string found() const {
    const Token& t = peek();
    if (t.kind == TokenKind::End) return ", found end of input";
    return ", found '" + t.text + "'";
  }

private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace stlstar::detail
