#include "blogc/frontend/lexer.hpp"

#include <cctype>
#include <unordered_map>

namespace blogc::fe {

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::IntLit: return "integer";
    case Tok::RealLit: return "real";
    case Tok::Type: return "'type'";
    case Tok::Distinct: return "'distinct'";
    case Tok::Random: return "'random'";
    case Tok::Fixed: return "'fixed'";
    case Tok::Obs: return "'obs'";
    case Tok::Query: return "'query'";
    case Tok::If: return "'if'";
    case Tok::Then: return "'then'";
    case Tok::Else: return "'else'";
    case Tok::Case: return "'case'";
    case Tok::In: return "'in'";
    case Tok::True: return "'true'";
    case Tok::False: return "'false'";
    case Tok::Hash: return "'#'";
    case Tok::Tilde: return "'~'";
    case Tok::Semi: return "';'";
    case Tok::Comma: return "','";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Arrow: return "'->'";
    case Tok::Assign: return "'='";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Bang: return "'!'";
    case Tok::And: return "'&'";
    case Tok::Or: return "'|'";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view src) {
  static const std::unordered_map<std::string, Tok> keywords{
      {"type", Tok::Type},   {"distinct", Tok::Distinct}, {"random", Tok::Random}, {"fixed", Tok::Fixed},
      {"obs", Tok::Obs},     {"query", Tok::Query},       {"if", Tok::If},         {"then", Tok::Then},
      {"else", Tok::Else},   {"case", Tok::Case},         {"in", Tok::In},         {"true", Tok::True},
      {"false", Tok::False},
  };
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto at = [&](std::size_t k) -> char { return i + k < src.size() ? src[i + k] : '\0'; };

  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && at(1) == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.loc = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t n = 0;
      while (std::isalnum(static_cast<unsigned char>(at(n))) || at(n) == '_') ++n;
      t.text = std::string(src.substr(i, n));
      auto kw = keywords.find(t.text);
      t.kind = kw == keywords.end() ? Tok::Ident : kw->second;
      advance(n);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(at(1))))) {
      std::size_t n = 0;
      bool real = false;
      while (std::isdigit(static_cast<unsigned char>(at(n)))) ++n;
      if (at(n) == '.' && std::isdigit(static_cast<unsigned char>(at(n + 1)))) {
        real = true;
        ++n;
        while (std::isdigit(static_cast<unsigned char>(at(n)))) ++n;
      } else if (at(n) == '.' && !std::isalpha(static_cast<unsigned char>(at(n + 1)))) {
        real = true;
        ++n;
      }
      if (at(n) == 'e' || at(n) == 'E') {
        std::size_t m = n + 1;
        if (at(m) == '+' || at(m) == '-') ++m;
        if (std::isdigit(static_cast<unsigned char>(at(m)))) {
          real = true;
          n = m;
          while (std::isdigit(static_cast<unsigned char>(at(n)))) ++n;
        }
      }
      t.kind = real ? Tok::RealLit : Tok::IntLit;
      t.text = std::string(src.substr(i, n));
      advance(n);
      out.push_back(std::move(t));
      continue;
    }
    auto punct = [&](Tok k, std::size_t n) {
      t.kind = k;
      t.text = std::string(src.substr(i, n));
      advance(n);
      out.push_back(t);
    };
    switch (c) {
      case '#': punct(Tok::Hash, 1); break;
      case '~': punct(Tok::Tilde, 1); break;
      case ';': punct(Tok::Semi, 1); break;
      case ',': punct(Tok::Comma, 1); break;
      case '(': punct(Tok::LParen, 1); break;
      case ')': punct(Tok::RParen, 1); break;
      case '{': punct(Tok::LBrace, 1); break;
      case '}': punct(Tok::RBrace, 1); break;
      case '[': punct(Tok::LBracket, 1); break;
      case ']': punct(Tok::RBracket, 1); break;
      case '+': punct(Tok::Plus, 1); break;
      case '*': punct(Tok::Star, 1); break;
      case '/': punct(Tok::Slash, 1); break;
      case '-': at(1) == '>' ? punct(Tok::Arrow, 2) : punct(Tok::Minus, 1); break;
      case '=': at(1) == '=' ? punct(Tok::EqEq, 2) : punct(Tok::Assign, 1); break;
      case '!': at(1) == '=' ? punct(Tok::NotEq, 2) : punct(Tok::Bang, 1); break;
      case '<': at(1) == '=' ? punct(Tok::Le, 2) : punct(Tok::Lt, 1); break;
      case '>': at(1) == '=' ? punct(Tok::Ge, 2) : punct(Tok::Gt, 1); break;
      case '&': at(1) == '&' ? punct(Tok::And, 2) : punct(Tok::And, 1); break;
      case '|': at(1) == '|' ? punct(Tok::Or, 2) : punct(Tok::Or, 1); break;
      default: {
        std::string shown(1, c);
        if (!std::isprint(static_cast<unsigned char>(c))) shown = "\\x" + std::to_string(static_cast<unsigned char>(c));
        throw SyntaxError({line, col}, "illegal character '" + shown + "'");
      }
    }
  }
  return out;
}

}  // namespace blogc::fe
