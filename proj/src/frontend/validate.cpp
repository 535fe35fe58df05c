#include "blogc/frontend/validate.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "blogc/frontend/parser.hpp"

namespace blogc::fe {

int TypedModel::find_type(const std::string& name) const {
  for (std::size_t i = 0; i < types.size(); ++i)
    if (types[i].name == name) return static_cast<int>(i);
  return -1;
}

int TypedModel::find_random(const std::string& name) const {
  for (std::size_t i = 0; i < model.random_fns.size(); ++i)
    if (model.random_fns[i].name == name) return static_cast<int>(i);
  return -1;
}

int TypedModel::find_fixed(const std::string& name) const {
  for (std::size_t i = 0; i < model.fixed_fns.size(); ++i)
    if (model.fixed_fns[i].name == name) return static_cast<int>(i);
  return -1;
}

std::string TypedModel::object_name(int type, long long index) const {
  const TypeInfo& t = types[type];
  if (t.distinct) return t.objects[static_cast<std::size_t>(index)];
  return t.name + "[" + std::to_string(index) + "]";
}

std::string TypedModel::type_name(const Type& t) const {
  switch (t.kind) {
    case Type::Kind::Bool: return "Boolean";
    case Type::Kind::Int: return "Integer";
    case Type::Kind::Real: return "Real";
    case Type::Kind::Object: return types[t.obj].name;
    case Type::Kind::Set: return "Set<" + types[t.obj].name + ">";
    case Type::Kind::Map: return "Map";
    case Type::Kind::Unknown: break;
  }
  return "?";
}

namespace {

struct ObjectRef {
  int type;
  long long index;
};

struct ArrayRef {
  int type;
  long long base;
  long long count;
};

class Validator {
 public:
  explicit Validator(Model m) { tm_.model = std::move(m); }

  TypedModel run() {
    declare_types();
    declare_functions();
    Model& m = tm_.model;
    for (std::size_t i = 0; i < m.number_stmts.size(); ++i) {
      NumberStmt& s = m.number_stmts[i];
      params_ = nullptr;
      in_fixed_ = false;
      const Type t = check(*s.body, true);
      if (t.kind != Type::Kind::Int) throw ValidationError(s.loc, "number statement for " + s.type_name + " must be integer-valued");
      check_self_cycle(*s.body, RefKind::Number, s.type, "#" + s.type_name);
    }
    for (std::size_t i = 0; i < m.fixed_fns.size(); ++i) {
      FuncDecl& f = m.fixed_fns[i];
      params_ = &f.params;
      in_fixed_ = true;
      const Type t = check(*f.body, false);
      require_assignable(f.ret, t, f.body->loc, "body of " + f.name);
      check_self_cycle(*f.body, RefKind::Fixed, static_cast<int>(i), f.name);
    }
    for (std::size_t i = 0; i < m.random_fns.size(); ++i) {
      FuncDecl& f = m.random_fns[i];
      params_ = &f.params;
      in_fixed_ = false;
      const Type t = check(*f.body, true);
      require_assignable(f.ret, t, f.body->loc, "body of " + f.name);
      check_self_cycle(*f.body, RefKind::Random, static_cast<int>(i), f.name);
    }
    params_ = nullptr;
    in_fixed_ = false;
    for (ObsStmt& o : m.evidence) check_obs(o);
    for (QueryStmt& q : m.queries) {
      const Type t = check(*q.expr, false);
      if (t.kind == Type::Kind::Set || t.kind == Type::Kind::Map)
        throw ValidationError(q.loc, "query must be a scalar expression");
    }
    return std::move(tm_);
  }

 private:
  void declare_name(const std::string& name, Loc loc) {
    if (!names_.insert(name).second) throw ValidationError(loc, "'" + name + "' is declared more than once");
  }

  Type type_from_name(const std::string& name, Loc loc) const {
    if (name == "Boolean" || name == "Bool") return Type::boolean();
    if (name == "Integer" || name == "Int" || name == "NaturalNum") return Type::integer();
    if (name == "Real") return Type::real();
    const int t = tm_.find_type(name);
    if (t < 0) throw ValidationError(loc, "unknown type '" + name + "'");
    return Type::object(t);
  }

  void declare_types() {
    Model& m = tm_.model;
    for (const TypeDecl& d : m.type_decls) {
      if (d.name == "Boolean" || d.name == "Bool" || d.name == "Integer" || d.name == "Int" || d.name == "Real")
        throw ValidationError(d.loc, "cannot redeclare built-in type " + d.name);
      declare_name(d.name, d.loc);
      TypeInfo info;
      info.name = d.name;
      info.loc = d.loc;
      tm_.types.push_back(info);
    }
    for (const DistinctDecl& d : m.distinct_decls) {
      const int t = tm_.find_type(d.type_name);
      if (t < 0) throw ValidationError(d.loc, "distinct objects of undeclared type '" + d.type_name + "'");
      TypeInfo& info = tm_.types[t];
      info.distinct = true;
      for (const auto& [name, count] : d.names) {
        declare_name(name, d.loc);
        if (count < 0) {
          objects_[name] = {t, static_cast<long long>(info.objects.size())};
          info.objects.push_back(name);
        } else {
          if (count == 0) throw ValidationError(d.loc, "distinct array " + name + " must be non-empty");
          arrays_[name] = {t, static_cast<long long>(info.objects.size()), count};
          for (long long k = 0; k < count; ++k) info.objects.push_back(name + "[" + std::to_string(k) + "]");
        }
      }
    }
    for (std::size_t i = 0; i < m.number_stmts.size(); ++i) {
      NumberStmt& s = m.number_stmts[i];
      const int t = tm_.find_type(s.type_name);
      if (t < 0) throw ValidationError(s.loc, "number statement for undeclared type '" + s.type_name + "'");
      if (tm_.types[t].distinct)
        throw ValidationError(s.loc, "type " + s.type_name + " has distinct objects and cannot have a number statement");
      if (tm_.types[t].number_stmt >= 0)
        throw ValidationError(s.loc, "second number statement for type " + s.type_name);
      tm_.types[t].number_stmt = static_cast<int>(i);
      s.type = t;
    }
  }

  void declare_functions() {
    Model& m = tm_.model;
    auto declare = [&](FuncDecl& f) {
      declare_name(f.name, f.loc);
      f.ret = type_from_name(f.ret_type_name, f.loc);
      if (f.params.size() > 2) throw ValidationError(f.loc, f.name + " has more than two parameters");
      std::set<std::string> seen;
      for (Param& p : f.params) {
        const Type pt = type_from_name(p.type_name, p.loc);
        const bool ok = pt.kind == Type::Kind::Object || (!f.random && pt.kind == Type::Kind::Bool);
        if (!ok) throw ValidationError(p.loc, "parameter " + p.name + " of " + f.name + " must range over a user type");
        p.type = pt;
        if (!seen.insert(p.name).second) throw ValidationError(p.loc, "duplicate parameter " + p.name);
      }
    };
    for (FuncDecl& f : m.fixed_fns) declare(f);
    for (FuncDecl& f : m.random_fns) declare(f);
  }

  static void require_assignable(const Type& want, const Type& got, Loc loc, const std::string& what) {
    if (want == got) return;
    if (want.kind == Type::Kind::Real && got.kind == Type::Kind::Int) return;
    throw ValidationError(loc, "type mismatch in " + what);
  }

  Type unify(const Type& a, const Type& b, Loc loc) const {
    if (a == b) return a;
    if (a.numeric() && b.numeric()) return Type::real();
    throw ValidationError(loc, "branches have incompatible types " + tm_.type_name(a) + " and " + tm_.type_name(b));
  }

  const FuncDecl* resolve_fn(Expr& e) {
    const int r = tm_.find_random(e.name);
    if (r >= 0) {
      if (in_fixed_) throw ValidationError(e.loc, "fixed function body reads random function " + e.name);
      e.ref = RefKind::Random;
      e.ref_index = r;
      return &tm_.model.random_fns[r];
    }
    const int f = tm_.find_fixed(e.name);
    if (f >= 0) {
      e.ref = RefKind::Fixed;
      e.ref_index = f;
      return &tm_.model.fixed_fns[f];
    }
    return nullptr;
  }

  Type check_call(Expr& e, const FuncDecl& f) {
    if (e.args.size() != f.params.size())
      throw ValidationError(e.loc, f.name + " expects " + std::to_string(f.params.size()) + " argument(s), got " +
                                       std::to_string(e.args.size()));
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      const Type at = check(*e.args[i], false);
      if (at != f.params[i].type)
        throw ValidationError(e.args[i]->loc, "argument " + std::to_string(i + 1) + " of " + f.name + " must be " +
                                                  tm_.type_name(f.params[i].type));
    }
    return f.ret;
  }

  Type set_type(Expr& e, Type t) {
    e.type = t;
    return t;
  }

  Type check(Expr& e, bool tail) {
    switch (e.kind) {
      case ExprKind::Bool: return set_type(e, Type::boolean());
      case ExprKind::Int: return set_type(e, Type::integer());
      case ExprKind::Real: return set_type(e, Type::real());
      case ExprKind::Name: {
        if (params_) {
          for (std::size_t i = 0; i < params_->size(); ++i)
            if ((*params_)[i].name == e.name) {
              e.ref = RefKind::Param;
              e.ref_index = static_cast<int>(i);
              return set_type(e, (*params_)[i].type);
            }
        }
        auto obj = objects_.find(e.name);
        if (obj != objects_.end()) {
          e.ref = RefKind::Object;
          e.ref_index = obj->second.type;
          e.obj = obj->second.index;
          return set_type(e, Type::object(obj->second.type));
        }
        if (const FuncDecl* f = resolve_fn(e)) return set_type(e, check_call(e, *f));
        throw ValidationError(e.loc, "undeclared name '" + e.name + "'");
      }
      case ExprKind::Indexed: {
        auto arr = arrays_.find(e.name);
        if (arr == arrays_.end()) throw ValidationError(e.loc, "undeclared distinct array '" + e.name + "'");
        if (e.ival < 0 || e.ival >= arr->second.count)
          throw ValidationError(e.loc, e.name + "[" + std::to_string(e.ival) + "] is out of range");
        e.ref = RefKind::Object;
        e.ref_index = arr->second.type;
        e.obj = arr->second.base + e.ival;
        return set_type(e, Type::object(arr->second.type));
      }
      case ExprKind::Number: {
        const int t = tm_.find_type(e.name);
        if (t < 0) throw ValidationError(e.loc, "unknown type '" + e.name + "'");
        if (!tm_.open(t)) throw ValidationError(e.loc, "#" + e.name + " needs a number statement");
        if (in_fixed_) throw ValidationError(e.loc, "fixed function body reads #" + e.name);
        e.ref = RefKind::Number;
        e.ref_index = t;
        return set_type(e, Type::integer());
      }
      case ExprKind::Call: {
        const FuncDecl* f = resolve_fn(e);
        if (!f) throw ValidationError(e.loc, "undeclared function '" + e.name + "'");
        return set_type(e, check_call(e, *f));
      }
      case ExprKind::If: {
        const Type c = check(*e.args[0], false);
        if (c.kind != Type::Kind::Bool) throw ValidationError(e.args[0]->loc, "condition must be Boolean");
        const Type a = check(*e.args[1], tail);
        const Type b = check(*e.args[2], tail);
        if (!e.case_keys.empty()) check_case(e);
        return set_type(e, unify(a, b, e.loc));
      }
      case ExprKind::Unary: {
        const Type a = check(*e.args[0], false);
        if (e.name == "!") {
          if (a.kind != Type::Kind::Bool) throw ValidationError(e.loc, "'!' needs a Boolean operand");
          return set_type(e, a);
        }
        if (!a.numeric()) throw ValidationError(e.loc, "unary '-' needs a numeric operand");
        return set_type(e, a);
      }
      case ExprKind::Binary: {
        const Type a = check(*e.args[0], false);
        const Type b = check(*e.args[1], false);
        const std::string& op = e.name;
        if (op == "&" || op == "|") {
          if (a.kind != Type::Kind::Bool || b.kind != Type::Kind::Bool)
            throw ValidationError(e.loc, "'" + op + "' needs Boolean operands");
          return set_type(e, Type::boolean());
        }
        if (op == "==" || op == "!=") {
          if (!(a == b || (a.numeric() && b.numeric())) || a.kind == Type::Kind::Set || a.kind == Type::Kind::Map)
            throw ValidationError(e.loc, "cannot compare " + tm_.type_name(a) + " with " + tm_.type_name(b));
          return set_type(e, Type::boolean());
        }
        if (!a.numeric() || !b.numeric()) throw ValidationError(e.loc, "'" + op + "' needs numeric operands");
        if (op == "<" || op == "<=" || op == ">" || op == ">=") return set_type(e, Type::boolean());
        if (op == "/") return set_type(e, Type::real());
        return set_type(e, a.kind == Type::Kind::Int && b.kind == Type::Kind::Int ? Type::integer() : Type::real());
      }
      case ExprKind::TypeSet:
        throw ValidationError(e.loc, "set expressions may only appear as the argument of UniformChoice");
      case ExprKind::Map:
        throw ValidationError(e.loc, "maps may only appear as the argument of Categorical");
      case ExprKind::Dist:
        if (!tail) throw ValidationError(e.loc, "distribution " + e.name + " must be in tail position");
        return set_type(e, check_dist(e));
    }
    throw ValidationError(e.loc, "unhandled expression");
  }

  Type check_dist(Expr& e) {
    DistKind dk;
    lookup_dist(e.name, dk);
    if (static_cast<int>(e.args.size()) != dist_arity(dk))
      throw ValidationError(e.loc, e.name + " expects " + std::to_string(dist_arity(dk)) + " parameter(s)");
    auto numeric_args = [&](bool ints) {
      for (auto& a : e.args) {
        const Type t = check(*a, false);
        if (ints ? t.kind != Type::Kind::Int : !t.numeric())
          throw ValidationError(a->loc, std::string("parameters of ") + e.name + " must be " + (ints ? "integers" : "numeric"));
      }
    };
    switch (dk) {
      case DistKind::UniformInt:
        numeric_args(true);
        return Type::integer();
      case DistKind::Bernoulli:
        numeric_args(false);
        return Type::boolean();
      case DistKind::Gaussian:
      case DistKind::Beta:
      case DistKind::Gamma:
        numeric_args(false);
        return Type::real();
      case DistKind::Poisson:
        numeric_args(false);
        return Type::integer();
      case DistKind::UniformChoice: {
        Expr& s = *e.args[0];
        if (s.kind != ExprKind::TypeSet) throw ValidationError(s.loc, "UniformChoice takes a set {T t}");
        const int t = tm_.find_type(s.name);
        if (t < 0) throw ValidationError(s.loc, "unknown type '" + s.name + "'");
        s.ref_index = t;
        s.type = {Type::Kind::Set, t};
        return Type::object(t);
      }
      case DistKind::Categorical: {
        Expr& m = *e.args[0];
        if (m.kind != ExprKind::Map) throw ValidationError(m.loc, "Categorical takes a map {value -> weight, ...}");
        Type key;
        std::set<std::string> seen;
        for (std::size_t i = 0; i + 1 < m.args.size(); i += 2) {
          Expr& k = *m.args[i];
          const Type kt = check(k, false);
          if (!is_literal(k)) throw ValidationError(k.loc, "Categorical outcomes must be literals");
          if (kt.kind == Type::Kind::Real) throw ValidationError(k.loc, "Categorical outcomes cannot be real");
          if (i == 0) key = kt;
          if (kt != key) throw ValidationError(k.loc, "Categorical outcomes must share one type");
          if (!seen.insert(literal_key(k)).second) throw ValidationError(k.loc, "duplicate Categorical outcome");
          const Type vt = check(*m.args[i + 1], false);
          if (!vt.numeric()) throw ValidationError(m.args[i + 1]->loc, "Categorical weights must be numeric");
        }
        m.type = {Type::Kind::Map, key.obj, key.kind};
        return key;
      }
    }
    throw ValidationError(e.loc, "unknown distribution");
  }

  static bool is_literal(const Expr& e) {
    return e.kind == ExprKind::Bool || e.kind == ExprKind::Int || e.kind == ExprKind::Real || e.kind == ExprKind::Indexed ||
           (e.kind == ExprKind::Name && e.ref == RefKind::Object);
  }

  static std::string literal_key(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Bool: return e.bval ? "true" : "false";
      case ExprKind::Int: return std::to_string(e.ival);
      default: return std::to_string(e.ref_index) + ":" + std::to_string(e.obj);
    }
  }

  void check_case(Expr& head) {
    const Type st = head.args[0]->args[0]->type;
    std::set<std::string> seen;
    for (auto& k : head.case_keys) {
      const Type kt = check(*k, false);
      if (!is_literal(*k)) throw ValidationError(k->loc, "case keys must be literals");
      if (kt != st) throw ValidationError(k->loc, "case key type does not match the scrutinee");
      if (!seen.insert(literal_key(*k)).second) throw ValidationError(k->loc, "duplicate case key");
    }
    std::size_t domain = 0;
    if (st.kind == Type::Kind::Bool)
      domain = 2;
    else if (st.kind == Type::Kind::Object && tm_.types[st.obj].distinct)
      domain = tm_.types[st.obj].objects.size();
    else
      throw ValidationError(head.loc, "case scrutinee must be Boolean or range over distinct objects");
    if (seen.size() != domain) throw ValidationError(head.loc, "case is not exhaustive");
  }

  // A declaration may read itself only inside a conditional branch.
  void check_self_cycle(const Expr& e, RefKind kind, int index, const std::string& name) {
    if ((e.kind == ExprKind::Name || e.kind == ExprKind::Call) && e.ref == kind && e.ref_index == index)
      throw ValidationError(e.loc, "unconditional cycle: " + name + " depends on itself");
    if (e.kind == ExprKind::Number && kind == RefKind::Number && e.ref_index == index)
      throw ValidationError(e.loc, "unconditional cycle: " + name + " depends on itself");
    if (e.kind == ExprKind::If) {
      check_self_cycle(*e.args[0], kind, index, name);
      return;
    }
    for (const auto& a : e.args) check_self_cycle(*a, kind, index, name);
  }

  void check_obs(ObsStmt& o) {
    Expr& lhs = *o.lhs;
    const Type lt = check(lhs, false);
    const bool instance = ((lhs.kind == ExprKind::Name || lhs.kind == ExprKind::Call) && lhs.ref == RefKind::Random) ||
                          lhs.kind == ExprKind::Number;
    if (!instance) throw ValidationError(o.loc, "observation must name a random variable");
    Expr& rhs = *o.rhs;
    const Type rt = check(rhs, false);
    if (!is_literal(rhs)) throw ValidationError(rhs.loc, "observed value must be a literal");
    if (lt.kind == Type::Kind::Real && rt.kind == Type::Kind::Int) {
      rhs.kind = ExprKind::Real;
      rhs.rval = static_cast<double>(rhs.ival);
      rhs.type = Type::real();
      return;
    }
    if (lt != rt) throw ValidationError(rhs.loc, "observed value has the wrong type");
  }

  TypedModel tm_;
  std::set<std::string> names_;
  std::map<std::string, ObjectRef> objects_;
  std::map<std::string, ArrayRef> arrays_;
  const std::vector<Param>* params_ = nullptr;
  bool in_fixed_ = false;
};

}  // namespace

TypedModel validate(Model model) { return Validator(std::move(model)).run(); }

TypedModel load_model(const std::string& source) { return validate(parse_source(source)); }

TypedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

}  // namespace blogc::fe
