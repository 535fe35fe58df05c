#include <cmath>
#include <cstdlib>

#include "blogc/frontend/printer.hpp"
#include "blogc/interp/interp.hpp"
#include "blogc/runtime/distributions.hpp"

namespace blogc::interp {

using fe::Expr;
using fe::ExprKind;
using fe::RefKind;
using fe::Type;

namespace {

bool is_instance(const Expr& e) {
  if (e.kind == ExprKind::Number) return true;
  if (!((e.kind == ExprKind::Name || e.kind == ExprKind::Call) && e.ref == RefKind::Random)) return false;
  for (const auto& a : e.args)
    if (a->ref != RefKind::Object) return false;
  return true;
}

Value literal(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Bool: return Value::integer(e.bval ? 1 : 0);
    case ExprKind::Int: return Value::integer(e.ival);
    case ExprKind::Real: return Value::real(e.rval);
    default: return Value::integer(e.obj);
  }
}

}  // namespace

struct Semantics::Ctx {
  const Fetch& fetch;
  std::vector<Read>* reads;
  const std::set<std::string>* sw;
  std::vector<Value> params;
};

Semantics::Semantics(const fe::TypedModel& tm) : tm_(tm) {
  const auto& m = tm.model;
  for (const auto& f : m.random_fns) {
    Tmpl t;
    t.name = f.name;
    t.body = f.body.get();
    t.params = f.params;
    t.ret = f.ret;
    for (const auto& p : f.params)
      if (p.type.kind == Type::Kind::Object && tm.open(p.type.obj)) t.tracked = true;
    tmpls_.push_back(std::move(t));
  }
  number_tmpl_.assign(tm.types.size(), -1);
  for (const auto& ns : m.number_stmts) {
    Tmpl t;
    t.name = "#" + tm.types[ns.type].name;
    t.body = ns.body.get();
    t.ret = Type::integer();
    t.counts = ns.type;
    number_tmpl_[ns.type] = static_cast<int>(tmpls_.size());
    tmpls_.push_back(std::move(t));
  }
  for (auto& t : tmpls_) collect_switching(*t.body, false, t.sw);

  // Evidence with constant instances is pinned; the rest become sites.
  const Fetch no_fetch = [](const Id&) -> Value { throw InterpError("evidence target depends on random values"); };
  for (std::size_t i = 0; i < m.evidence.size(); ++i) {
    const auto& o = m.evidence[i];
    observed_.push_back(literal(*o.rhs));
    std::set<std::string> sw;
    collect_switching(*o.lhs, false, sw);
    obs_sw_.push_back(sw);
    if (is_instance(*o.lhs)) {
      Ctx c{no_fetch, nullptr, nullptr, {}};
      const Id id = instance_of(*o.lhs, c);
      pinned_[id] = coerce(type_of(id), observed_.back());
      roots_.push_back(id);
    } else {
      Id s;
      s.kind = Id::Obs;
      s.index = static_cast<int>(i);
      roots_.push_back(s);
      sites_.push_back(s);
    }
  }
  for (std::size_t q = 0; q < m.queries.size(); ++q) {
    const Expr& e = *m.queries[q].expr;
    std::set<std::string> sw;
    collect_switching(e, false, sw);
    query_sw_.push_back(sw);
    if (is_instance(e)) {
      Ctx c{no_fetch, nullptr, nullptr, {}};
      query_ids_.push_back(instance_of(e, c));
    } else {
      Id s;
      s.kind = Id::Query;
      s.index = static_cast<int>(q);
      sites_.push_back(s);
      query_ids_.push_back(s);
    }
    roots_.push_back(query_ids_.back());
  }
}

void Semantics::collect_switching(const Expr& e, bool sw, std::set<std::string>& out) const {
  switch (e.kind) {
    case ExprKind::If:
      collect_switching(*e.args[0], true, out);
      collect_switching(*e.args[1], sw, out);
      collect_switching(*e.args[2], sw, out);
      return;
    case ExprKind::Name:
    case ExprKind::Call:
      if (e.ref == RefKind::Random) {
        for (const auto& a : e.args) collect_switching(*a, true, out);
        if (sw) out.insert(key_of(e));
        return;
      }
      for (const auto& a : e.args) collect_switching(*a, sw, out);
      return;
    case ExprKind::Number:
    case ExprKind::TypeSet:
      if (sw) out.insert(key_of(e));
      return;
    default:
      for (const auto& a : e.args) collect_switching(*a, sw, out);
  }
}

const std::string& Semantics::key_of(const Expr& e) const {
  auto it = keys_.find(&e);
  if (it != keys_.end()) return it->second;
  std::string k = e.kind == ExprKind::TypeSet ? "#" + tm_.types[e.ref_index].name : fe::print_expr(e);
  return keys_.emplace(&e, std::move(k)).first->second;
}

const std::set<std::string>& Semantics::switching_keys(const Id& id) const {
  switch (id.kind) {
    case Id::Obs: return obs_sw_[id.index];
    case Id::Query: return query_sw_[id.index];
    default: return tmpls_[id.index].sw;
  }
}

std::string Semantics::query_text(int q) const { return fe::print_expr(*tm_.model.queries[q].expr); }
Type Semantics::query_type(int q) const { return tm_.model.queries[q].expr->type; }

// ---- names and values ----------------------------------------------------------

std::string Semantics::name(const Id& id) const {
  if (id.kind == Id::Obs) return "obs[" + std::to_string(id.index) + "]";
  if (id.kind == Id::Query) return "query[" + std::to_string(id.index) + "]";
  const Tmpl& t = tmpls_[id.index];
  if (t.params.empty()) return t.name;
  std::string s = t.name + "(";
  for (std::size_t i = 0; i < t.params.size(); ++i) {
    if (i) s += ", ";
    s += show(t.params[i].type, Value::integer(id.args[i]));
  }
  return s + ")";
}

long long Semantics::parse_object(int type, const std::string& s) const {
  const fe::TypeInfo& t = tm_.types[type];
  for (std::size_t i = 0; i < t.objects.size(); ++i)
    if (t.objects[i] == s) return static_cast<long long>(i);
  const std::string prefix = t.name + "[";
  if (s.size() > prefix.size() + 1 && s.compare(0, prefix.size(), prefix) == 0 && s.back() == ']') {
    char* end = nullptr;
    const std::string digits = s.substr(prefix.size(), s.size() - prefix.size() - 1);
    const long long v = std::strtoll(digits.c_str(), &end, 10);
    if (end && *end == '\0' && !digits.empty()) return v;
  }
  return -1;
}

bool Semantics::parse_name(const std::string& s, Id& out) const {
  out = Id{};
  auto site = [&](const char* prefix, Id::Kind k) {
    const std::string p = prefix;
    if (s.compare(0, p.size(), p) != 0 || s.back() != ']') return false;
    out.kind = k;
    out.index = std::atoi(s.c_str() + p.size());
    return true;
  };
  if (site("obs[", Id::Obs) || site("query[", Id::Query)) return true;
  const auto open = s.find('(');
  const std::string head = open == std::string::npos ? s : s.substr(0, open);
  for (std::size_t t = 0; t < tmpls_.size(); ++t) {
    if (tmpls_[t].name != head) continue;
    out.index = static_cast<int>(t);
    const auto& params = tmpls_[t].params;
    if (open == std::string::npos) return params.empty();
    if (s.back() != ')') return false;
    std::vector<std::string> parts;
    const std::string inner = s.substr(open + 1, s.size() - open - 2);
    std::size_t start = 0;
    while (true) {
      const auto comma = inner.find(", ", start);
      parts.push_back(inner.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 2;
    }
    if (parts.size() != params.size()) return false;
    out.n = static_cast<std::uint8_t>(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      Value v;
      if (params[i].type.kind == Type::Kind::Bool) {
        if (parts[i] != "true" && parts[i] != "false") return false;
        v = Value::integer(parts[i] == "true");
      } else {
        const long long o = parse_object(params[i].type.obj, parts[i]);
        if (o < 0) return false;
        v = Value::integer(o);
      }
      out.args[i] = static_cast<int>(v.i);
    }
    return true;
  }
  return false;
}

std::string Semantics::show(const Type& t, const Value& v) const {
  switch (t.kind) {
    case Type::Kind::Bool: return v.truthy() ? "true" : "false";
    case Type::Kind::Int: return std::to_string(v.i);
    case Type::Kind::Real: return rt::fmt_real(v.num());
    case Type::Kind::Object: {
      const fe::TypeInfo& ty = tm_.types[t.obj];
      if (v.i >= 0 && v.i < static_cast<long long>(ty.objects.size())) return ty.objects[static_cast<std::size_t>(v.i)];
      return ty.name + "[" + std::to_string(v.i) + "]";
    }
    default: return "?";
  }
}

bool Semantics::parse_value(const Id& id, const std::string& s, Value& out) const {
  const Type t = type_of(id);
  char* end = nullptr;
  switch (t.kind) {
    case Type::Kind::Bool:
      if (s != "true" && s != "false") return false;
      out = Value::integer(s == "true");
      return true;
    case Type::Kind::Int:
      out = Value::integer(std::strtoll(s.c_str(), &end, 10));
      return end && *end == '\0' && !s.empty();
    case Type::Kind::Real:
      out = Value::real(std::strtod(s.c_str(), &end));
      return end && *end == '\0' && !s.empty();
    case Type::Kind::Object: {
      const long long o = parse_object(t.obj, s);
      out = Value::integer(o);
      return o >= 0;
    }
    default: return false;
  }
}

Value Semantics::coerce(const Type& t, const Value& v) const {
  switch (t.kind) {
    case Type::Kind::Bool: return Value::integer(v.truthy() ? 1 : 0);
    case Type::Kind::Real: return Value::real(v.num());
    case Type::Kind::Int:
    case Type::Kind::Object: return v.is_real ? Value::integer(static_cast<long long>(v.r)) : v;
    default: return v;
  }
}

// ---- evaluation ------------------------------------------------------------------

Value Semantics::read(const Id& id, const Expr& node, Ctx& c) const {
  if (c.reads) c.reads->push_back({id, c.sw && c.sw->count(key_of(node)) != 0});
  return c.fetch(id);
}

Id Semantics::instance_of(const Expr& e, Ctx& c) const {
  Id id;
  if (e.kind == ExprKind::Number) {
    id.index = number_tmpl_[e.ref_index];
    if (id.index < 0) throw InterpError("#" + tm_.types[e.ref_index].name + " has no number statement");
    return id;
  }
  id.index = e.ref_index;
  if (e.args.size() > id.args.size()) throw InterpError(e.name + ": too many arguments");
  id.n = static_cast<std::uint8_t>(e.args.size());
  for (std::size_t i = 0; i < e.args.size(); ++i) {
    const Value v = ev(*e.args[i], c);
    id.args[i] = static_cast<int>(v.i);
  }
  return id;
}

long long Semantics::set_size(const Expr& set, Ctx& c) const {
  const int t = set.ref_index;
  if (!tm_.open(t)) return static_cast<long long>(tm_.types[t].objects.size());
  Id id;
  id.index = number_tmpl_[t];
  return read(id, set, c).i;
}

Value Semantics::ev(const Expr& e, Ctx& c) const {
  switch (e.kind) {
    case ExprKind::Bool:
    case ExprKind::Int:
    case ExprKind::Real:
    case ExprKind::Indexed: return literal(e);
    case ExprKind::Name:
    case ExprKind::Call:
      switch (e.ref) {
        case RefKind::Param: return c.params.at(static_cast<std::size_t>(e.ref_index));
        case RefKind::Object: return Value::integer(e.obj);
        case RefKind::Random: {
          const Id id = instance_of(e, c);
          // An argument outside the universe makes the world impossible.
          for (std::size_t i = 0; i < id.n; ++i)
            if (id.args[i] < 0) throw InterpError("argument of " + key_of(e) + " is outside its type");
          return read(id, e, c);
        }
        case RefKind::Fixed: {
          const auto& f = tm_.model.fixed_fns[static_cast<std::size_t>(e.ref_index)];
          Ctx inner{c.fetch, c.reads, c.sw, {}};
          for (std::size_t i = 0; i < e.args.size(); ++i) inner.params.push_back(coerce(f.params[i].type, ev(*e.args[i], c)));
          return coerce(f.ret, ev(*f.body, inner));
        }
        default: break;
      }
      break;
    case ExprKind::Number: {
      Id id;
      id.index = number_tmpl_[e.ref_index];
      return read(id, e, c);
    }
    case ExprKind::If: return ev(*e.args[0], c).truthy() ? ev(*e.args[1], c) : ev(*e.args[2], c);
    case ExprKind::Unary: {
      const Value v = ev(*e.args[0], c);
      if (e.name == "!") return Value::integer(v.truthy() ? 0 : 1);
      return v.is_real ? Value::real(-v.r) : Value::integer(-v.i);
    }
    case ExprKind::Binary: {
      const Value l = ev(*e.args[0], c);
      const Value r = ev(*e.args[1], c);
      const std::string& op = e.name;
      const bool real = l.is_real || r.is_real;
      if (op == "&") return Value::integer(l.truthy() && r.truthy());
      if (op == "|") return Value::integer(l.truthy() || r.truthy());
      if (op == "==") return Value::integer(l == r);
      if (op == "!=") return Value::integer(l != r);
      if (op == "<") return Value::integer(real ? l.num() < r.num() : l.i < r.i);
      if (op == "<=") return Value::integer(real ? l.num() <= r.num() : l.i <= r.i);
      if (op == ">") return Value::integer(real ? l.num() > r.num() : l.i > r.i);
      if (op == ">=") return Value::integer(real ? l.num() >= r.num() : l.i >= r.i);
      if (op == "/") return Value::real(l.num() / r.num());
      if (op == "+") return real ? Value::real(l.num() + r.num()) : Value::integer(l.i + r.i);
      if (op == "-") return real ? Value::real(l.num() - r.num()) : Value::integer(l.i - r.i);
      if (op == "*") return real ? Value::real(l.num() * r.num()) : Value::integer(l.i * r.i);
      break;
    }
    default: break;
  }
  throw InterpError("line " + std::to_string(e.loc.line) + ": cannot evaluate " + fe::print_expr(e));
}

DistInst Semantics::tail(const Expr& e, Ctx& c) const {
  if (e.kind == ExprKind::If) return ev(*e.args[0], c).truthy() ? tail(*e.args[1], c) : tail(*e.args[2], c);
  DistInst d;
  if (e.kind != ExprKind::Dist) {
    d.point = ev(e, c);
    return d;
  }
  fe::DistKind dk;
  fe::lookup_dist(e.name, dk);
  auto num = [&](std::size_t i) { return ev(*e.args[i], c).num(); };
  switch (dk) {
    case fe::DistKind::Bernoulli: d.kind = DistInst::Bernoulli; d.p0 = num(0); break;
    case fe::DistKind::Gaussian: d.kind = DistInst::Gaussian; d.p0 = num(0); d.p1 = num(1); break;
    case fe::DistKind::Poisson: d.kind = DistInst::Poisson; d.p0 = num(0); break;
    case fe::DistKind::Beta: d.kind = DistInst::Beta; d.p0 = num(0); d.p1 = num(1); break;
    case fe::DistKind::Gamma: d.kind = DistInst::Gamma; d.p0 = num(0); d.p1 = num(1); break;
    case fe::DistKind::UniformInt:
      d.kind = DistInst::UniformInt;
      d.lo = ev(*e.args[0], c).i;
      d.hi = ev(*e.args[1], c).i;
      break;
    case fe::DistKind::UniformChoice:
      d.kind = DistInst::UniformChoice;
      d.hi = set_size(*e.args[0], c);
      break;
    case fe::DistKind::Categorical: {
      d.kind = DistInst::Categorical;
      const Expr& map = *e.args[0];
      for (std::size_t i = 0; i + 1 < map.args.size(); i += 2) {
        d.keys.push_back(ev(*map.args[i], c));
        d.weights.push_back(ev(*map.args[i + 1], c).num());
      }
      break;
    }
  }
  return d;
}

DistInst Semantics::distribution(const Id& id, const Fetch& fetch, std::vector<Read>* reads) const {
  if (id.kind != Id::Var) throw InterpError(name(id) + " is a site, not a variable");
  const Tmpl& t = tmpls_[id.index];
  Ctx c{fetch, reads, &t.sw, {}};
  for (std::size_t i = 0; i < t.params.size(); ++i) c.params.push_back(Value::integer(id.args[i]));
  DistInst d = tail(*t.body, c);
  if (d.kind == DistInst::Point) d.point = coerce(t.ret, d.point);
  for (auto& k : d.keys) k = coerce(t.ret, k);
  return d;
}

double Semantics::site_loglik(const Id& site, const Fetch& fetch, std::vector<Read>* reads) const {
  if (site.kind == Id::Query) {
    Ctx c{fetch, reads, &query_sw_[site.index], {}};
    ev(*tm_.model.queries[site.index].expr, c);
    return 0.0;
  }
  Ctx c{fetch, reads, &obs_sw_[site.index], {}};
  const Expr& lhs = *tm_.model.evidence[site.index].lhs;
  return ev(lhs, c) == observed_[site.index] ? 0.0 : rt::kNegInf;
}

Id Semantics::obs_target(const Id& site, const Fetch& fetch, std::vector<Read>* reads) const {
  Ctx c{fetch, reads, &obs_sw_[site.index], {}};
  return instance_of(*tm_.model.evidence[site.index].lhs, c);
}

Value Semantics::query_value(int q, const Fetch& fetch) const {
  Ctx c{fetch, nullptr, nullptr, {}};
  return ev(*tm_.model.queries[q].expr, c);
}

// ---- distributions ---------------------------------------------------------------

double Semantics::loglik(const DistInst& d, const Value& v) const {
  switch (d.kind) {
    case DistInst::Point: return v == d.point ? 0.0 : rt::kNegInf;
    case DistInst::Bernoulli: return rt::loglik_bernoulli(v.truthy(), d.p0);
    case DistInst::Gaussian: return rt::loglik_gaussian(v.num(), d.p0, d.p1);
    case DistInst::Poisson: return rt::loglik_poisson(v.i, d.p0);
    case DistInst::Beta: return rt::loglik_beta(v.num(), d.p0, d.p1);
    case DistInst::Gamma: return rt::loglik_gamma(v.num(), d.p0, d.p1);
    case DistInst::UniformInt: return rt::loglik_uniform_int(v.i, d.lo, d.hi);
    case DistInst::UniformChoice: return rt::loglik_uniform_choice(v.i, d.hi);
    case DistInst::Categorical:
      for (std::size_t i = 0; i < d.keys.size(); ++i)
        if (d.keys[i] == v) return rt::loglik_categorical(i, d.weights);
      rt::check_categorical(d.weights);
      return rt::kNegInf;
  }
  return rt::kNegInf;
}

Value Semantics::sample(const DistInst& d, rt::Rng& rng) const {
  switch (d.kind) {
    case DistInst::Point: return d.point;
    case DistInst::Bernoulli: return Value::integer(rt::sample_bernoulli(rng, d.p0));
    case DistInst::Gaussian: return Value::real(rt::sample_gaussian(rng, d.p0, d.p1));
    case DistInst::Poisson: return Value::integer(rt::sample_poisson(rng, d.p0));
    case DistInst::Beta: return Value::real(rt::sample_beta(rng, d.p0, d.p1));
    case DistInst::Gamma: return Value::real(rt::sample_gamma(rng, d.p0, d.p1));
    case DistInst::UniformInt: return Value::integer(rt::sample_uniform_int(rng, d.lo, d.hi));
    case DistInst::UniformChoice: {
      // An empty set leaves 0, whose likelihood is zero.
      const int r = rt::sample_uniform_choice(rng, d.hi);
      return Value::integer(r < 0 ? 0 : r);
    }
    case DistInst::Categorical: return d.keys[rt::sample_categorical(rng, d.weights)];
  }
  return {};
}

bool Semantics::support(const DistInst& d, std::vector<Value>& out) const {
  out.clear();
  switch (d.kind) {
    case DistInst::Point: out.push_back(d.point); return true;
    case DistInst::Bernoulli:
      out = {Value::integer(0), Value::integer(1)};
      return true;
    case DistInst::UniformInt:
      for (long long v = d.lo; v <= d.hi; ++v) out.push_back(Value::integer(v));
      return true;
    case DistInst::UniformChoice:
      for (long long v = 0; v < d.hi; ++v) out.push_back(Value::integer(v));
      if (d.hi <= 0) out.push_back(Value::integer(0));
      return true;
    case DistInst::Categorical:
      for (const auto& k : d.keys) {
        bool dup = false;
        for (const auto& o : out) dup = dup || o == k;
        if (!dup) out.push_back(k);
      }
      return true;
    default: return false;
  }
}

void Semantics::instances(int t, const Fetch& fetch, std::vector<Id>& out) const {
  out.clear();
  const Tmpl& tm = tmpls_[t];
  std::vector<long long> sizes;
  for (const auto& p : tm.params) {
    if (p.type.kind == Type::Kind::Bool) {
      sizes.push_back(2);
    } else if (tm_.open(p.type.obj)) {
      Id num;
      num.index = number_tmpl_[p.type.obj];
      sizes.push_back(fetch(num).i);
    } else {
      sizes.push_back(static_cast<long long>(tm_.types[p.type.obj].objects.size()));
    }
  }
  Id id;
  id.index = t;
  id.n = static_cast<std::uint8_t>(sizes.size());
  for (long long s : sizes)
    if (s <= 0) return;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == sizes.size()) {
      out.push_back(id);
      return;
    }
    for (long long v = 0; v < sizes[k]; ++v) {
      id.args[k] = static_cast<int>(v);
      rec(k + 1);
    }
  };
  rec(0);
}

}  // namespace blogc::interp
