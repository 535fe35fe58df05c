#include "blogc/frontend/ast.hpp"

#include <array>

namespace blogc::fe {

ExprPtr make_expr(ExprKind kind, Loc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->loc = loc;
  return e;
}

ExprPtr Expr::clone() const {
  auto e = std::make_shared<Expr>(*this);
  for (auto& a : e->args) a = a->clone();
  for (auto& k : e->case_keys) k = k->clone();
  return e;
}

namespace {

bool equal_list(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!structurally_equal(*a[i], *b[i])) return false;
  return true;
}

bool equal_decl(const FuncDecl& a, const FuncDecl& b) {
  if (a.random != b.random || a.ret_type_name != b.ret_type_name || a.name != b.name) return false;
  if (a.params.size() != b.params.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i)
    if (a.params[i].name != b.params[i].name || a.params[i].type_name != b.params[i].type_name) return false;
  return structurally_equal(*a.body, *b.body);
}

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Bool:
      return a.bval == b.bval;
    case ExprKind::Int:
      return a.ival == b.ival;
    case ExprKind::Real:
      return a.rval == b.rval;
    case ExprKind::Indexed:
      if (a.ival != b.ival) return false;
      break;
    case ExprKind::TypeSet:
      if (a.var != b.var) return false;
      break;
    default:
      break;
  }
  return a.name == b.name && equal_list(a.args, b.args) && equal_list(a.case_keys, b.case_keys);
}

bool structurally_equal(const Model& a, const Model& b) {
  if (a.type_decls.size() != b.type_decls.size()) return false;
  for (std::size_t i = 0; i < a.type_decls.size(); ++i)
    if (a.type_decls[i].name != b.type_decls[i].name) return false;
  if (a.distinct_decls.size() != b.distinct_decls.size()) return false;
  for (std::size_t i = 0; i < a.distinct_decls.size(); ++i)
    if (a.distinct_decls[i].type_name != b.distinct_decls[i].type_name ||
        a.distinct_decls[i].names != b.distinct_decls[i].names)
      return false;
  if (a.number_stmts.size() != b.number_stmts.size()) return false;
  for (std::size_t i = 0; i < a.number_stmts.size(); ++i)
    if (a.number_stmts[i].type_name != b.number_stmts[i].type_name ||
        !structurally_equal(*a.number_stmts[i].body, *b.number_stmts[i].body))
      return false;
  auto same_fns = [](const std::vector<FuncDecl>& x, const std::vector<FuncDecl>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!equal_decl(x[i], y[i])) return false;
    return true;
  };
  if (!same_fns(a.random_fns, b.random_fns) || !same_fns(a.fixed_fns, b.fixed_fns)) return false;
  if (a.evidence.size() != b.evidence.size()) return false;
  for (std::size_t i = 0; i < a.evidence.size(); ++i)
    if (!structurally_equal(*a.evidence[i].lhs, *b.evidence[i].lhs) ||
        !structurally_equal(*a.evidence[i].rhs, *b.evidence[i].rhs))
      return false;
  if (a.queries.size() != b.queries.size()) return false;
  for (std::size_t i = 0; i < a.queries.size(); ++i)
    if (!structurally_equal(*a.queries[i].expr, *b.queries[i].expr)) return false;
  return true;
}

namespace {
struct DistEntry {
  const char* name;
  DistKind kind;
  int arity;
};
constexpr std::array<DistEntry, 8> kDists{{
    {"UniformInt", DistKind::UniformInt, 2},
    {"Categorical", DistKind::Categorical, 1},
    {"Bernoulli", DistKind::Bernoulli, 1},
    {"Gaussian", DistKind::Gaussian, 2},
    {"Poisson", DistKind::Poisson, 1},
    {"Beta", DistKind::Beta, 2},
    {"Gamma", DistKind::Gamma, 2},
    {"UniformChoice", DistKind::UniformChoice, 1},
}};
}  // namespace

bool lookup_dist(const std::string& name, DistKind& out) {
  for (const auto& d : kDists)
    if (name == d.name) {
      out = d.kind;
      return true;
    }
  return false;
}

const char* dist_name(DistKind k) { return kDists[static_cast<std::size_t>(k)].name; }
int dist_arity(DistKind k) { return kDists[static_cast<std::size_t>(k)].arity; }

}  // namespace blogc::fe
