#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kbforge/errors.hpp"

namespace kbforge {

enum class TokenKind {
  atom,         // plain lowercase identifier
  quoted_atom,  // '...'; text holds the unescaped name
  variable,     // Uppercase or _ prefixed
  integer,
  lparen,
  rparen,
  comma,
  end,   // clause-terminating period
  neck,  // :-
  slash,
  cut,
  comment,  // % line comment; text holds everything after '%'
  eof,
};

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

/// Tokenizer for the fact-file subset of Prolog. Block comments are skipped;
/// line comments are returned as tokens so explanation comments can be
/// attached to the following fact.
class PrologLexer {
 public:
  explicit PrologLexer(std::string_view text) : text_(text) {}

  std::vector<Token> tokenize() {
    std::vector<Token> tokens;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) {
        tokens.push_back({TokenKind::eof, "", line_, col_});
        return tokens;
      }
      tokens.push_back(next());
    }
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;

  char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& message, std::size_t line, std::size_t col) const {
    throw ParseError(message, line, col);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        advance();
      } else if (c == '/' && peek(1) == '*') {
        const auto line = line_, col = col_;
        advance();
        advance();
        while (pos_ < text_.size() && !(peek() == '*' && peek(1) == '/')) advance();
        if (pos_ >= text_.size()) fail("unterminated block comment", line, col);
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  static bool ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  }

  Token next() {
    const auto line = line_, col = col_;
    const char c = peek();
    auto single = [&](TokenKind kind) {
      advance();
      return Token{kind, std::string(1, c), line, col};
    };

    if (c == '%') {
      advance();
      const auto start = pos_;
      while (pos_ < text_.size() && peek() != '\n') advance();
      std::string body(text_.substr(start, pos_ - start));
      if (!body.empty() && body.back() == '\r') body.pop_back();
      return {TokenKind::comment, std::move(body), line, col};
    }
    if (c >= 'a' && c <= 'z') {
      const auto start = pos_;
      while (pos_ < text_.size() && ident_char(peek())) advance();
      return {TokenKind::atom, std::string(text_.substr(start, pos_ - start)), line, col};
    }
    if ((c >= 'A' && c <= 'Z') || c == '_') {
      const auto start = pos_;
      while (pos_ < text_.size() && ident_char(peek())) advance();
      return {TokenKind::variable, std::string(text_.substr(start, pos_ - start)), line, col};
    }
    if (c >= '0' && c <= '9') {
      const auto start = pos_;
      while (pos_ < text_.size() && peek() >= '0' && peek() <= '9') advance();
      if (ident_char(peek())) fail("malformed number", line, col);
      return {TokenKind::integer, std::string(text_.substr(start, pos_ - start)), line, col};
    }
    if (c == '\'') return quoted(line, col);
    switch (c) {
      case '(': return single(TokenKind::lparen);
      case ')': return single(TokenKind::rparen);
      case ',': return single(TokenKind::comma);
      case '/': return single(TokenKind::slash);
      case '!': return single(TokenKind::cut);
      case '.': return single(TokenKind::end);
      case ':':
        if (peek(1) == '-') {
          advance();
          advance();
          return {TokenKind::neck, ":-", line, col};
        }
        break;
      default: break;
    }
    fail(std::string("unexpected character '") + c + "'", line, col);
  }

  Token quoted(std::size_t line, std::size_t col) {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated quoted atom", line, col);
      const char c = peek();
      if (c == '\n') fail("newline inside quoted atom", line, col);
      if (c == '\'') {
        if (peek(1) == '\'') {
          out += '\'';
          advance();
          advance();
          continue;
        }
        advance();
        break;
      }
      if (c == '\\') {
        const char e = peek(1);
        switch (e) {
          case '\\': out += '\\'; break;
          case '\'': out += '\''; break;
          case '"': out += '"'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: fail("unsupported escape sequence in quoted atom", line_, col_);
        }
        advance();
        advance();
        continue;
      }
      out += c;
      advance();
    }
    return {TokenKind::quoted_atom, std::move(out), line, col};
  }
};

}  // namespace kbforge
