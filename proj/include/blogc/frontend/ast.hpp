#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace blogc::fe {

struct Loc {
  int line = 0;
  int col = 0;
};

/// Any frontend error. The message always starts with "line N:".
class FrontendError : public std::runtime_error {
 public:
  FrontendError(Loc loc, const std::string& msg)
      : std::runtime_error("line " + std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + msg), loc_(loc) {}
  Loc loc() const { return loc_; }

 private:
  Loc loc_;
};

struct SyntaxError : FrontendError {
  using FrontendError::FrontendError;
};
struct ValidationError : FrontendError {
  using FrontendError::FrontendError;
};

struct Type {
  enum class Kind : std::uint8_t { Unknown, Bool, Int, Real, Object, Set, Map };
  Kind kind = Kind::Unknown;
  int obj = -1;                    // user type for Object / Set / object-keyed Map
  Kind key = Kind::Unknown;        // key kind of a Map

  static Type boolean() { return {Kind::Bool}; }
  static Type integer() { return {Kind::Int}; }
  static Type real() { return {Kind::Real}; }
  static Type object(int t) { return {Kind::Object, t}; }

  bool numeric() const { return kind == Kind::Int || kind == Kind::Real; }
  bool operator==(const Type& o) const { return kind == o.kind && obj == o.obj && key == o.key; }
  bool operator!=(const Type& o) const { return !(*this == o); }
};

enum class ExprKind : std::uint8_t {
  Bool,
  Int,
  Real,
  Name,     // bare identifier: parameter, object constant or zero-ary function
  Call,     // f(args) of a random or fixed function
  Indexed,  // D[3], an element of a distinct array
  Number,   // #T
  If,
  Unary,
  Binary,
  TypeSet,  // {T t}
  Map,      // {k -> v, ...}; args alternate key, value
  Dist,     // distribution application
};

/// What a name or call resolves to after validation.
enum class RefKind : std::uint8_t { None, Param, Object, Random, Fixed, Number };

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  ExprKind kind = ExprKind::Int;
  Loc loc;
  bool bval = false;
  long long ival = 0;
  double rval = 0.0;
  std::string name;  // identifier, function, distribution, operator or type name
  std::string var;   // bound variable of a TypeSet
  std::vector<ExprPtr> args;
  std::vector<ExprPtr> case_keys;  // non-empty on the head of a desugared case

  // Filled by validation.
  Type type;
  RefKind ref = RefKind::None;
  int ref_index = -1;
  long long obj = -1;  // object index for resolved object constants

  ExprPtr clone() const;
};

ExprPtr make_expr(ExprKind kind, Loc loc);

struct Param {
  std::string name;
  std::string type_name;
  Loc loc;
  Type type;
};

struct FuncDecl {
  bool random = true;
  std::string ret_type_name;
  std::string name;
  std::vector<Param> params;
  ExprPtr body;
  Loc loc;
  Type ret;
};

struct NumberStmt {
  std::string type_name;
  ExprPtr body;
  Loc loc;
  int type = -1;
};

struct TypeDecl {
  std::string name;
  Loc loc;
};

/// `distinct T a, b, D[3];` - an entry with count < 0 is a single name.
struct DistinctDecl {
  std::string type_name;
  std::vector<std::pair<std::string, long long>> names;
  Loc loc;
};

struct ObsStmt {
  ExprPtr lhs;
  ExprPtr rhs;
  Loc loc;
};

struct QueryStmt {
  ExprPtr expr;
  Loc loc;
};

struct Model {
  std::vector<TypeDecl> type_decls;
  std::vector<DistinctDecl> distinct_decls;
  std::vector<NumberStmt> number_stmts;
  std::vector<FuncDecl> random_fns;
  std::vector<FuncDecl> fixed_fns;
  std::vector<ObsStmt> evidence;
  std::vector<QueryStmt> queries;
};

bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Model& a, const Model& b);

/// Distribution vocabulary.
enum class DistKind : std::uint8_t { UniformInt, Categorical, Bernoulli, Gaussian, Poisson, Beta, Gamma, UniformChoice };
bool lookup_dist(const std::string& name, DistKind& out);
const char* dist_name(DistKind k);
int dist_arity(DistKind k);

}  // namespace blogc::fe
