#include "lexer.hpp"

#include <cctype>

namespace relnet::detail {

namespace {

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace

bool is_number(std::string_view text) {
  if (text.empty()) return false;
  for (char c : text) {
    if (std::isdigit(static_cast<unsigned char>(c)) == 0) return false;
  }
  return true;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto push = [&](Tok kind, std::size_t len) {
    out.push_back({kind, std::string(text.substr(i, len)), line, col});
    i += len;
    col += len;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      ++i;
      ++col;
      continue;
    }
    if (c == '%' || c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && word_char(text[j])) ++j;
      push(Tok::Word, j - i);
      continue;
    }
    char n = i + 1 < text.size() ? text[i + 1] : '\0';
    switch (c) {
      case '(': push(Tok::LParen, 1); break;
      case ')': push(Tok::RParen, 1); break;
      case '{': push(Tok::LBrace, 1); break;
      case '}': push(Tok::RBrace, 1); break;
      case ',': push(Tok::Comma, 1); break;
      case '.': push(Tok::Dot, 1); break;
      case ';': push(Tok::Semicolon, 1); break;
      case '/': push(Tok::Slash, 1); break;
      case '@': push(Tok::At, 1); break;
      case '+': push(Tok::Plus, 1); break;
      case '=': push(Tok::Eq, 1); break;
      case ':':
        if (n == '-') {
          push(Tok::Implies, 2);
        } else {
          push(Tok::Colon, 1);
        }
        break;
      case '?':
        if (n == '-') {
          push(Tok::Query, 2);
          break;
        }
        throw ParseError("unexpected character '?'", line, col);
      case '!':
        if (n == '=') {
          push(Tok::Neq, 2);
          break;
        }
        throw ParseError("unexpected character '!'", line, col);
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line,
                         col);
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const char* describe(Tok kind) {
  switch (kind) {
    case Tok::Word: return "identifier";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::Semicolon: return "';'";
    case Tok::Slash: return "'/'";
    case Tok::At: return "'@'";
    case Tok::Plus: return "'+'";
    case Tok::Eq: return "'='";
    case Tok::Neq: return "'!='";
    case Tok::Implies: return "':-'";
    case Tok::Query: return "'?-'";
    case Tok::End: return "end of input";
  }
  return "token";
}

const Token& TokenStream::peek(std::size_t ahead) const {
  std::size_t p = pos_ + ahead;
  return p < tokens_.size() ? tokens_[p] : tokens_.back();
}

const Token& TokenStream::next() {
  const Token& t = peek();
  if (pos_ < tokens_.size() - 1) ++pos_;
  return t;
}

bool TokenStream::accept(Tok kind) {
  if (!at(kind)) return false;
  next();
  return true;
}

bool TokenStream::accept_word(std::string_view text) {
  if (!at_word(text)) return false;
  next();
  return true;
}

const Token& TokenStream::expect(Tok kind, const char* what) {
  if (!at(kind)) {
    std::string msg = "expected ";
    msg += what != nullptr ? what : describe(kind);
    msg += ", found ";
    msg += peek().kind == Tok::Word ? "'" + peek().text + "'"
                                    : std::string(describe(peek().kind));
    fail(msg);
  }
  return next();
}

void TokenStream::expect_word(std::string_view text) {
  if (!at_word(text)) {
    fail("expected '" + std::string(text) + "'");
  }
  next();
}

std::size_t TokenStream::expect_number() {
  const Token& t = expect(Tok::Word, "number");
  if (!is_number(t.text)) fail_at(t, "expected number, found '" + t.text + "'");
  return static_cast<std::size_t>(std::stoull(t.text));
}

void TokenStream::fail(const std::string& message) const {
  fail_at(peek(), message);
}

void TokenStream::fail_at(const Token& token, const std::string& message) {
  throw ParseError(message, token.line, token.column);
}

}  // namespace relnet::detail
