#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "blogc/frontend/ast.hpp"

namespace blogc::fe {

enum class Tok {
  End,
  Ident,
  IntLit,
  RealLit,
  // keywords
  Type,
  Distinct,
  Random,
  Fixed,
  Obs,
  Query,
  If,
  Then,
  Else,
  Case,
  In,
  True,
  False,
  // punctuation
  Hash,
  Tilde,
  Semi,
  Comma,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Arrow,
  Assign,
  EqEq,
  NotEq,
  Lt,
  Le,
  Gt,
  Ge,
  Plus,
  Minus,
  Star,
  Slash,
  Bang,
  And,
  Or,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Loc loc;
};

const char* tok_name(Tok t);

/// Split source into tokens; `//` comments are dropped. No End token is
/// appended, so empty input gives an empty stream.
std::vector<Token> tokenize(std::string_view source);

}  // namespace blogc::fe
