#pragma once

#include <string_view>
#include <vector>

#include "blogc/frontend/ast.hpp"
#include "blogc/frontend/lexer.hpp"

namespace blogc::fe {

/// Parse a token stream into an untyped model. Case expressions are
/// rewritten into nested if-then-else chains.
Model parse(const std::vector<Token>& tokens);

Model parse_source(std::string_view source);

}  // namespace blogc::fe
