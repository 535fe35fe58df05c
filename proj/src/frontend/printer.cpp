#include "blogc/frontend/printer.hpp"

#include <cmath>
#include <cstdio>

namespace blogc::fe {

namespace {

std::string real_literal(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void print(const Expr& e, std::string& out);

void print_case(const Expr& head, std::string& out) {
  out += "case ";
  print(*head.args[0]->args[0], out);
  out += " in {";
  const Expr* node = &head;
  for (std::size_t i = 0; i < head.case_keys.size(); ++i) {
    if (i) out += ", ";
    print(*head.case_keys[i], out);
    out += " -> ";
    if (i + 1 < head.case_keys.size()) {
      print(*node->args[1], out);
      if (i + 2 < head.case_keys.size()) node = node->args[2].get();
    } else {
      print(*node->args[2], out);
    }
  }
  out += "}";
}

void print(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Bool:
      out += e.bval ? "true" : "false";
      return;
    case ExprKind::Int:
      out += std::to_string(e.ival);
      return;
    case ExprKind::Real:
      out += real_literal(e.rval);
      return;
    case ExprKind::Name:
      out += e.name;
      return;
    case ExprKind::Indexed:
      out += e.name + "[" + std::to_string(e.ival) + "]";
      return;
    case ExprKind::Number:
      out += "#" + e.name;
      return;
    case ExprKind::Call:
    case ExprKind::Dist:
      out += e.name + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print(*e.args[i], out);
      }
      out += ")";
      return;
    case ExprKind::If:
      out += "(";
      if (!e.case_keys.empty()) {
        print_case(e, out);
      } else {
        out += "if ";
        print(*e.args[0], out);
        out += " then ";
        print(*e.args[1], out);
        out += " else ";
        print(*e.args[2], out);
      }
      out += ")";
      return;
    case ExprKind::Unary:
      out += "(" + e.name;
      print(*e.args[0], out);
      out += ")";
      return;
    case ExprKind::Binary:
      out += "(";
      print(*e.args[0], out);
      out += " " + e.name + " ";
      print(*e.args[1], out);
      out += ")";
      return;
    case ExprKind::TypeSet:
      out += "{" + e.name + " " + e.var + "}";
      return;
    case ExprKind::Map:
      out += "{";
      for (std::size_t i = 0; i + 1 < e.args.size(); i += 2) {
        if (i) out += ", ";
        print(*e.args[i], out);
        out += " -> ";
        print(*e.args[i + 1], out);
      }
      out += "}";
      return;
  }
}

void print_fn(const FuncDecl& f, std::string& out) {
  out += f.random ? "random " : "fixed ";
  out += f.ret_type_name + " " + f.name;
  if (!f.params.empty()) {
    out += "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += ", ";
      out += f.params[i].type_name + " " + f.params[i].name;
    }
    out += ")";
  }
  out += f.random ? " ~ " : " = ";
  print(*f.body, out);
  out += ";\n";
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::string print_model(const Model& m) {
  std::string out;
  for (const auto& t : m.type_decls) out += "type " + t.name + ";\n";
  for (const auto& d : m.distinct_decls) {
    out += "distinct " + d.type_name + " ";
    for (std::size_t i = 0; i < d.names.size(); ++i) {
      if (i) out += ", ";
      out += d.names[i].first;
      if (d.names[i].second >= 0) out += "[" + std::to_string(d.names[i].second) + "]";
    }
    out += ";\n";
  }
  for (const auto& f : m.fixed_fns) print_fn(f, out);
  for (const auto& n : m.number_stmts) out += "#" + n.type_name + " ~ " + print_expr(*n.body) + ";\n";
  for (const auto& f : m.random_fns) print_fn(f, out);
  for (const auto& o : m.evidence) out += "obs " + print_expr(*o.lhs) + " = " + print_expr(*o.rhs) + ";\n";
  for (const auto& q : m.queries) out += "query " + print_expr(*q.expr) + ";\n";
  return out;
}

}  // namespace blogc::fe
