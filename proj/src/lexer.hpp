#pragma once

// Tokenizer shared by every text format (instances, rules, transducer
// programs, networks, partitions, Dedalus files).

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "relnet/error.hpp"

namespace relnet::detail {

enum class Tok {
  Word,  // [A-Za-z0-9_]+
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Dot,
  Colon,
  Semicolon,
  Slash,
  At,
  Plus,
  Eq,
  Neq,
  Implies,  // :-
  Query,    // ?-
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::vector<Token> tokenize(std::string_view text);

const char* describe(Tok kind);

/// Cursor over a token vector with expectation helpers that raise
/// ParseError at the offending token.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const;
  bool at(Tok kind) const { return peek().kind == kind; }
  bool at_word(std::string_view text) const {
    return peek().kind == Tok::Word && peek().text == text;
  }
  const Token& next();
  bool accept(Tok kind);
  bool accept_word(std::string_view text);
  const Token& expect(Tok kind, const char* what = nullptr);
  void expect_word(std::string_view text);
  std::size_t expect_number();

  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] static void fail_at(const Token& token, const std::string& message);

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

bool is_number(std::string_view text);

}  // namespace relnet::detail
