#pragma once

#include <string>
#include <vector>

#include "blogc/frontend/ast.hpp"

namespace blogc::fe {

struct TypeInfo {
  std::string name;
  Loc loc;
  bool distinct = false;             // closed universe with named objects
  std::vector<std::string> objects;  // names of distinct objects
  int number_stmt = -1;              // index into number_stmts for open types
};

/// A model whose names are resolved and whose expressions all carry a type.
struct TypedModel {
  Model model;
  std::vector<TypeInfo> types;

  int find_type(const std::string& name) const;
  int find_random(const std::string& name) const;
  int find_fixed(const std::string& name) const;
  bool open(int type) const { return types[type].number_stmt >= 0; }
  std::string object_name(int type, long long index) const;
  std::string type_name(const Type& t) const;
};

TypedModel validate(Model model);

/// tokenize + parse + validate.
TypedModel load_model(const std::string& source);
TypedModel load_model_file(const std::string& path);

}  // namespace blogc::fe
