#pragma once

#include <string>

#include "blogc/frontend/ast.hpp"

namespace blogc::fe {

std::string print_expr(const Expr& e);
std::string print_model(const Model& m);

}  // namespace blogc::fe
