#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include "blogc/codegen/codegen.hpp"
#include "blogc/frontend/printer.hpp"

namespace blogc::cg {

using an::AnalysisResult;
using an::ArgMap;
using an::Decl;
using fe::DistKind;
using fe::Expr;
using fe::ExprKind;
using fe::RefKind;
using fe::Type;
using fe::TypedModel;

const char* algo_name(Algo a) {
  switch (a) {
    case Algo::LW: return "lw";
    case Algo::PMH: return "pmh";
    case Algo::Gibbs: return "gibbs";
  }
  return "?";
}

bool parse_algo(const std::string& s, Algo& out) {
  if (s == "lw" || s == "LW") {
    out = Algo::LW;
  } else if (s == "pmh" || s == "PMH" || s == "mh") {
    out = Algo::PMH;
  } else if (s == "gibbs" || s == "Gibbs") {
    out = Algo::Gibbs;
  } else {
    return false;
  }
  return true;
}

namespace {

const char* const kLw = "rt::Access::Lw";
const char* const kCur = "rt::Access::Cur";
const char* const kProp = "rt::Access::Prop";

std::string real_lit(double x) {
  if (std::isnan(x)) return "std::numeric_limits<double>::quiet_NaN()";
  if (std::isinf(x)) return x > 0 ? "std::numeric_limits<double>::infinity()" : "(-std::numeric_limits<double>::infinity())";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return x < 0 ? "(" + s + ")" : s;
}

std::string rt_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

// Body draws from a conjugate-likelihood family with a random reference
// in the mean / probability / rate slot.
bool conj_child_dist(const Expr& body, DistKind& dk) {
  if (body.kind != ExprKind::Dist) return false;
  fe::lookup_dist(body.name, dk);
  if (dk != DistKind::Bernoulli && dk != DistKind::Poisson && dk != DistKind::Gaussian) return false;
  const Expr& slot = *body.args[0];
  return slot.ref == RefKind::Random || slot.kind == ExprKind::Number;
}

std::string pad(int n) { return std::string(static_cast<std::size_t>(2 * n), ' '); }

std::string cpp_type(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Bool: return "bool";
    case Type::Kind::Int: return "long long";
    case Type::Kind::Real: return "double";
    case Type::Kind::Object: return "int";
    default: break;
  }
  throw CodegenError("no value representation for a set or map");
}

struct ParamInfo {
  int type = -1;
  bool open = false;
  long long count = 0;  // objects of a distinct type
};

/// Emission facts about one template (random function or number statement).
struct TInfo {
  int decl = -1;
  bool number = false;
  std::string fn;       // identifier stem: color, num_Ball
  std::string cls;      // Var_color, Num_Ball
  std::string display;  // color, #Ball
  Type ret;
  std::string vt;
  std::vector<ParamInfo> params;
  enum class Storage { Cells, Table, Map } storage = Storage::Cells;
  int open_pos = -1;
  int open_type = -1;
  long long stride = 1;  // distinct objects per open index (Table)
  long long cells = 1;   // total cells (Cells)
};

struct Ctx {
  std::vector<std::string> params;
  std::string mode;
};

class Emitter {
 public:
  Emitter(const TypedModel& tm, const AnalysisResult& a, const CodegenOptions& opt) : tm_(tm), a_(a), opt_(opt) {
    for (int t = 0; t < a.num_templates; ++t) ti_.push_back(make_info(t));
    if (opt.algo == Algo::Gibbs) {
      const std::string bad = an::gibbs_ineligible(tm, a);
      if (!bad.empty())
        throw CodegenError("Gibbs cannot sample " + bad + ": it is neither conjugate to its children nor finite");
    }
  }

  std::string program();
  std::string getter(int t);
  std::string acu(int d);
  std::string accept(int t);
  std::string driver();

 private:
  // ---- facts ------------------------------------------------------------------

  TInfo make_info(int t) const {
    const Decl& d = a_.decls[t];
    TInfo ti;
    ti.decl = t;
    if (d.kind == Decl::Kind::Number) {
      ti.number = true;
      ti.fn = "num_" + tm_.types[d.open_type].name;
      ti.cls = "Num_" + tm_.types[d.open_type].name;
      ti.display = d.name;
      ti.ret = Type::integer();
    } else {
      const auto& f = tm_.model.random_fns[d.index];
      ti.fn = f.name;
      ti.cls = "Var_" + f.name;
      ti.display = f.name;
      ti.ret = f.ret;
      int open_count = 0;
      for (std::size_t i = 0; i < f.params.size(); ++i) {
        const Type& pt = f.params[i].type;
        if (pt.kind != Type::Kind::Object)
          throw CodegenError("random function " + f.name + " takes a non-object parameter " + f.params[i].name);
        ParamInfo p;
        p.type = pt.obj;
        p.open = tm_.open(pt.obj);
        p.count = static_cast<long long>(tm_.types[pt.obj].objects.size());
        if (p.open) {
          ++open_count;
          ti.open_pos = static_cast<int>(i);
          ti.open_type = pt.obj;
        } else {
          ti.cells *= p.count;
        }
        ti.params.push_back(p);
      }
      if (open_count == 1) {
        ti.storage = TInfo::Storage::Table;
        ti.stride = ti.cells;
      } else if (open_count > 1) {
        ti.storage = TInfo::Storage::Map;
      }
    }
    ti.vt = cpp_type(ti.ret);
    return ti;
  }

  bool conj_child_shape(int t) const {
    DistKind dk;
    return conj_child_dist(*a_.decls[t].body, dk);
  }

  const TInfo& tinfo_of_ref(const Expr& e) const { return ti_[a_.decl_of_ref(e)]; }

  Ctx tctx(const std::string& mode, std::size_t nparams) const {
    Ctx c;
    c.mode = mode;
    for (std::size_t i = 0; i < nparams; ++i) c.params.push_back("a" + std::to_string(i));
    return c;
  }
  Ctx tctx(const std::string& mode, const TInfo& t) const { return tctx(mode, t.params.size()); }

  std::string type_name(int type) const { return tm_.types[type].name; }

  std::string param_list(const TInfo& t, const char* prefix) const {
    std::string s;
    for (std::size_t i = 0; i < t.params.size(); ++i) {
      if (i) s += ", ";
      s += "int " + std::string(prefix) + std::to_string(i);
    }
    return s;
  }
  std::string arg_names(const TInfo& t, const char* prefix) const {
    std::string s;
    for (std::size_t i = 0; i < t.params.size(); ++i) {
      if (i) s += ", ";
      s += prefix + std::to_string(i);
    }
    return s;
  }

  std::string show(const Type& t, const std::string& v) const {
    switch (t.kind) {
      case Type::Kind::Bool: return "std::string(" + v + " ? \"true\" : \"false\")";
      case Type::Kind::Int: return "std::to_string(" + v + ")";
      case Type::Kind::Real: return "rt::fmt_real(" + v + ")";
      case Type::Kind::Object: return "name_" + type_name(t.obj) + "(" + v + ")";
      default: return "std::string()";
    }
  }

  // ---- expressions ----------------------------------------------------------

  std::string args_of(const Expr& e, const Ctx& c) const {
    std::string s;
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      if (i) s += ", ";
      s += ex(*e.args[i], c);
    }
    return s;
  }

  std::string ex(const Expr& e, const Ctx& c) const {
    switch (e.kind) {
      case ExprKind::Bool: return e.bval ? "true" : "false";
      case ExprKind::Int: return e.ival < 0 ? "(" + std::to_string(e.ival) + "LL)" : std::to_string(e.ival) + "LL";
      case ExprKind::Real: return real_lit(e.rval);
      case ExprKind::Indexed: return std::to_string(e.obj);
      case ExprKind::Name:
      case ExprKind::Call:
        switch (e.ref) {
          case RefKind::Param: return c.params.at(static_cast<std::size_t>(e.ref_index));
          case RefKind::Object: return std::to_string(e.obj);
          case RefKind::Random: return "get_" + tinfo_of_ref(e).fn + "<" + c.mode + ">(" + args_of(e, c) + ")";
          case RefKind::Fixed: return "fx_" + e.name + "(" + args_of(e, c) + ")";
          default: break;
        }
        break;
      case ExprKind::Number: return "get_" + tinfo_of_ref(e).fn + "<" + c.mode + ">()";
      case ExprKind::If:
        return "(" + ex(*e.args[0], c) + " ? " + ex(*e.args[1], c) + " : " + ex(*e.args[2], c) + ")";
      case ExprKind::Unary: return "(" + e.name + ex(*e.args[0], c) + ")";
      case ExprKind::Binary: {
        const std::string l = ex(*e.args[0], c);
        const std::string r = ex(*e.args[1], c);
        // Both operands are always evaluated so the read set of a
        // declaration does not depend on short-circuiting.
        if (e.name == "&" || e.name == "|") return "bool(" + l + " " + e.name + " " + r + ")";
        if (e.name == "/") return "(static_cast<double>(" + l + ") / static_cast<double>(" + r + "))";
        return "(" + l + " " + e.name + " " + r + ")";
      }
      default: break;
    }
    throw CodegenError("line " + std::to_string(e.loc.line) + ": cannot emit " + fe::print_expr(e) + " as a value");
  }

  /// The cell a random reference denotes, without reading it.
  std::string ref_expr(const Expr& e, const Ctx& c) const {
    const TInfo& t = tinfo_of_ref(e);
    return t.fn + "_ref(" + (t.number ? std::string() : args_of(e, c)) + ")";
  }

  std::string double_of(const Expr& e, const Ctx& c) const {
    const std::string s = ex(e, c);
    return e.type.kind == Type::Kind::Real ? s : "static_cast<double>(" + s + ")";
  }

  /// Size of the set {T t} under the given mode.
  std::string set_size(const Expr& set, const Ctx& c) const {
    const int t = set.ref_index;
    if (!tm_.open(t)) return std::to_string(tm_.types[t].objects.size()) + "LL";
    return "get_num_" + type_name(t) + "<" + c.mode + ">()";
  }

  // ---- tail statements (sample / loglik) --------------------------------------

  void categorical_tables(const Expr& map, const Ctx& c, const std::string& vt, int ind, std::string& out) const {
    std::string w;
    std::string k;
    for (std::size_t i = 0; i + 1 < map.args.size(); i += 2) {
      if (i) {
        w += ", ";
        k += ", ";
      }
      k += ex(*map.args[i], c);
      w += double_of(*map.args[i + 1], c);
    }
    out += pad(ind) + "const double w[] = {" + w + "};\n";
    out += pad(ind) + "static constexpr " + vt + " k[] = {" + k + "};\n";
  }

  void tail(const Expr& e, const Ctx& c, const TInfo& t, bool sample, int ind, std::string& out) const {
    if (e.kind == ExprKind::If) {
      out += pad(ind) + "if (" + ex(*e.args[0], c) + ") {\n";
      tail(*e.args[1], c, t, sample, ind + 1, out);
      out += pad(ind) + "} else {\n";
      tail(*e.args[2], c, t, sample, ind + 1, out);
      out += pad(ind) + "}\n";
      return;
    }
    const std::string p = pad(ind);
    if (e.kind != ExprKind::Dist) {
      const std::string v = "static_cast<" + t.vt + ">(" + ex(e, c) + ")";
      if (sample)
        out += p + "return " + v + ";\n";
      else
        out += p + "return v == " + v + " ? 0.0 : rt::kNegInf;\n";
      return;
    }
    DistKind dk;
    fe::lookup_dist(e.name, dk);
    auto arg = [&](std::size_t i) { return ex(*e.args[i], c); };
    auto real_arg = [&](std::size_t i) { return double_of(*e.args[i], c); };
    switch (dk) {
      case DistKind::Bernoulli:
        out += p + (sample ? "return rt::sample_bernoulli(W.rng, " + real_arg(0) + ");\n"
                           : "return rt::loglik_bernoulli(v, " + real_arg(0) + ");\n");
        return;
      case DistKind::Gaussian:
        out += p + (sample ? "return rt::sample_gaussian(W.rng, " + real_arg(0) + ", " + real_arg(1) + ");\n"
                           : "return rt::loglik_gaussian(v, " + real_arg(0) + ", " + real_arg(1) + ");\n");
        return;
      case DistKind::Poisson:
        out += p + (sample ? "return rt::sample_poisson(W.rng, " + real_arg(0) + ");\n"
                           : "return rt::loglik_poisson(v, " + real_arg(0) + ");\n");
        return;
      case DistKind::Gamma:
        out += p + (sample ? "return rt::sample_gamma(W.rng, " + real_arg(0) + ", " + real_arg(1) + ");\n"
                           : "return rt::loglik_gamma(v, " + real_arg(0) + ", " + real_arg(1) + ");\n");
        return;
      case DistKind::Beta:
        out += p + (sample ? "return rt::sample_beta(W.rng, " + real_arg(0) + ", " + real_arg(1) + ");\n"
                           : "return rt::loglik_beta(v, " + real_arg(0) + ", " + real_arg(1) + ");\n");
        return;
      case DistKind::UniformInt:
        out += p + (sample ? "return rt::sample_uniform_int(W.rng, " + arg(0) + ", " + arg(1) + ");\n"
                           : "return rt::loglik_uniform_int(v, " + arg(0) + ", " + arg(1) + ");\n");
        return;
      case DistKind::UniformChoice: {
        const std::string n = set_size(*e.args[0], c);
        if (sample) {
          out += p + "{\n";
          out += p + "  const int r = rt::sample_uniform_choice(W.rng, " + n + ");\n";
          out += p + "  if (r < 0) W.impossible = true;\n";
          out += p + "  return r < 0 ? 0 : r;\n";
          out += p + "}\n";
        } else {
          out += p + "return rt::loglik_uniform_choice(v, " + n + ");\n";
        }
        return;
      }
      case DistKind::Categorical: {
        const Expr& map = *e.args[0];
        const std::size_t n = map.args.size() / 2;
        out += p + "{\n";
        categorical_tables(map, c, t.vt, ind + 1, out);
        if (sample) {
          out += p + "  return k[rt::sample_categorical(W.rng, w)];\n";
        } else {
          out += p + "  for (std::size_t i = 0; i < " + std::to_string(n) + "; ++i)\n";
          out += p + "    if (k[i] == v) return rt::loglik_categorical(i, w);\n";
          out += p + "  rt::check_categorical(w);\n";
          out += p + "  return rt::kNegInf;\n";
        }
        out += p + "}\n";
        return;
      }
    }
  }

  // ---- read-set walks ---------------------------------------------------------

  struct Reg {
    std::string ptr;  // expression yielding the parent cell address
    std::string key;
    int tmpl;
    bool switching;
  };
  using Sink = std::function<void(const Reg&, int, std::string&)>;

  void reg_ref(const Expr& e, const std::string& key, const TInfo& t, const std::string& args, const Ctx& c,
               const an::DeclInfo& info, std::set<std::string>& seen, int ind, std::string& out, const Sink& sink,
               bool& any) const {
    if (!seen.insert(key).second) return;
    (void)e;
    Reg r{"&" + t.fn + "_at<" + c.mode + ">(" + args + ")", key, t.decl, info.in_switching(key)};
    const std::size_t before = out.size();
    sink(r, ind, out);
    if (out.size() != before) any = true;
  }

  void walk(const Expr& e, const Ctx& c, const an::DeclInfo& info, std::set<std::string>& seen, int ind,
            std::string& out, const Sink& sink, bool& any) const {
    switch (e.kind) {
      case ExprKind::If: {
        walk(*e.args[0], c, info, seen, ind, out, sink, any);
        std::string then_s;
        std::string else_s;
        bool then_any = false;
        bool else_any = false;
        std::set<std::string> seen_then = seen;
        std::set<std::string> seen_else = seen;
        walk(*e.args[1], c, info, seen_then, ind + 1, then_s, sink, then_any);
        walk(*e.args[2], c, info, seen_else, ind + 1, else_s, sink, else_any);
        if (!then_any && !else_any) return;
        any = true;
        out += pad(ind) + "if (" + ex(*e.args[0], c) + ") {\n" + then_s;
        out += pad(ind) + "} else {\n" + else_s + pad(ind) + "}\n";
        return;
      }
      case ExprKind::Name:
      case ExprKind::Call:
        if (e.ref == RefKind::Random) {
          for (const auto& x : e.args) walk(*x, c, info, seen, ind, out, sink, any);
          reg_ref(e, fe::print_expr(e), tinfo_of_ref(e), args_of(e, c), c, info, seen, ind, out, sink, any);
          return;
        }
        for (const auto& x : e.args) walk(*x, c, info, seen, ind, out, sink, any);
        return;
      case ExprKind::Number:
        reg_ref(e, "#" + e.name, tinfo_of_ref(e), "", c, info, seen, ind, out, sink, any);
        return;
      case ExprKind::TypeSet:
        if (tm_.open(e.ref_index)) {
          const TInfo& t = ti_[a_.number_decl(tm_.types[e.ref_index].number_stmt)];
          reg_ref(e, "#" + type_name(e.ref_index), t, "", c, info, seen, ind, out, sink, any);
        }
        return;
      default:
        for (const auto& x : e.args) walk(*x, c, info, seen, ind, out, sink, any);
        return;
    }
  }

  std::string walk_body(int d, const Ctx& c, const Sink& sink, int ind, bool& any) const {
    std::string out;
    std::set<std::string> seen;
    walk(*a_.decls[d].body, c, a_.info[d], seen, ind, out, sink, any);
    return out;
  }

  std::size_t tracked_refs(int d) const {
    std::size_t n = 0;
    for (const auto& r : a_.info[d].fv)
      if (a_.tracked[r.tmpl]) ++n;
    return n;
  }

  /// Body of add_to_ch (add = true) or del_from_ch for declaration d.
  std::string ch_body(int d, bool add) const {
    const Ctx c = tctx(kCur, a_.decls[d].params.size());
    bool any = false;
    if (opt_.acu) {
      Sink sink = [&](const Reg& r, int ind, std::string& out) {
        const std::string p = pad(ind);
        const bool count = opt_.rc && a_.tracked[r.tmpl];
        out += p + "{\n";
        out += p + "  rt::Var* p = " + r.ptr + ";\n";
        if (r.switching) out += p + "  W." + (add ? "cont_add" : "cont_del") + "(p, this);  // Cont(" + r.key + ")\n";
        if (count)
          out += p + "  if (W." + (add ? "ch_add" : "ch_del") + "(p, this)) W." + (add ? "inc_cnt" : "dec_cnt") +
                 "(p);  // Ch(" + r.key + ")\n";
        else
          out += p + "  W." + (add ? "ch_add" : "ch_del") + "(p, this);  // Ch(" + r.key + ")\n";
        out += p + "}\n";
      };
      std::string body = walk_body(d, c, sink, 1, any);
      return any ? body : "";
    }
    if (!opt_.rc || tracked_refs(d) == 0) return "";
    Sink sink = [&](const Reg& r, int ind, std::string& out) {
      if (!a_.tracked[r.tmpl]) return;
      out += pad(ind) + "rt::World::push_unique(ps, np, " + r.ptr + ");  // cnt(" + r.key + ")\n";
    };
    std::string body = walk_body(d, c, sink, 1, any);
    if (!any) return "";
    std::string out = "  rt::Var* ps[" + std::to_string(tracked_refs(d)) + "];\n  int np = 0;\n" + body;
    out += std::string("  for (int i = 0; i < np; ++i) W.") + (add ? "inc_cnt" : "dec_cnt") + "(ps[i]);\n";
    return out;
  }

  std::string parents_body(int d, const std::string& mode) const {
    const Ctx c = tctx(mode, a_.decls[d].params.size());
    bool any = false;
    Sink sink = [&](const Reg& r, int ind, std::string& out) {
      out += pad(ind) + "out.push_back({" + r.ptr + ", " + (r.switching ? "true" : "false") + "});  // " + r.key + "\n";
    };
    return walk_body(d, c, sink, 1, any);
  }

  // ---- static children ----------------------------------------------------------

  std::string static_children_body(int t, bool contingent_only) const {
    std::string out;
    const TInfo& pt = ti_[t];
    for (const an::StaticEdge& e : a_.static_children[t]) {
      if (contingent_only && !e.switching) continue;
      std::vector<std::string> conds;
      const Decl& child = a_.decls[e.child];
      std::vector<std::string> bound(child.params.size());
      for (std::size_t i = 0; i < e.mapping.size(); ++i) {
        const ArgMap& m = e.mapping[i];
        const std::string ai = "a" + std::to_string(i);
        if (m.kind == ArgMap::Kind::Constant) {
          conds.push_back(ai + " == " + std::to_string(m.obj));
        } else if (m.kind == ArgMap::Kind::Param) {
          std::string& b = bound[static_cast<std::size_t>(m.param)];
          if (b.empty())
            b = ai;
          else
            conds.push_back(ai + " == " + b);
        }
      }
      (void)pt;
      out += "  // " + child.name + " via " + e.key + "\n";
      int ind = 1;
      std::string closers;
      if (!conds.empty()) {
        std::string cj;
        for (std::size_t i = 0; i < conds.size(); ++i) cj += (i ? " && " : "") + conds[i];
        out += pad(ind) + "if (" + cj + ") {\n";
        closers = pad(ind) + "}\n" + closers;
        ++ind;
      }
      if (child.is_site()) {
        out += pad(ind) + "push_active(out, &" + site_obj(e.child) + ");\n";
      } else {
        const TInfo& ct = ti_[e.child];
        if (ct.storage == TInfo::Storage::Map) {
          out += pad(ind) + "for (auto& kv : " + ct.fn + "_map) {\n";
          std::string cj;
          for (std::size_t j = 0; j < bound.size(); ++j)
            if (!bound[j].empty())
              cj += std::string(cj.empty() ? "" : " && ") + (j == 0 ? "kv.first.first" : "kv.first.second") + " == " + bound[j];
          out += pad(ind + 1) + (cj.empty() ? "" : "if (" + cj + ") ") + "push_active(out, kv.second.get());\n";
          out += pad(ind) + "}\n";
        } else {
          std::string args;
          std::string inner_close;
          int lind = ind;
          for (std::size_t j = 0; j < bound.size(); ++j) {
            std::string v = bound[j];
            if (v.empty()) {
              v = "q" + std::to_string(j);
              const ParamInfo& cp = ct.params[j];
              const std::string lim = cp.open ? "static_cast<int>(cap_" + type_name(cp.type) + ")" : std::to_string(cp.count);
              out += pad(lind) + "for (int " + v + " = 0; " + v + " < " + lim + "; ++" + v + ")\n";
              ++lind;
            }
            args += (j ? ", " : "") + v;
          }
          out += pad(lind) + "push_active(out, &" + ct.fn + "_ref(" + args + "));\n";
        }
      }
      out += closers;
    }
    return out;
  }

  std::string site_obj(int d) const {
    const Decl& s = a_.decls[d];
    return (s.kind == Decl::Kind::ObsSite ? "site_obs" : "site_query") + std::to_string(s.index);
  }
  std::string site_cls(int d) const {
    const Decl& s = a_.decls[d];
    return (s.kind == Decl::Kind::ObsSite ? "Site_obs" : "Site_query") + std::to_string(s.index);
  }

  bool has_static_contingents(int t) const {
    for (const auto& e : a_.static_children[t])
      if (e.switching) return true;
    return false;
  }

  // ---- pieces of the program --------------------------------------------------

  std::string header() const;
  std::string names() const;
  std::string forwards() const;
  std::string fixed_functions() const;
  std::string class_decl(int t) const;
  std::string site_decl(int d) const;
  std::string storage() const;
  std::string members(int t) const;
  std::string site_members(int d) const;
  std::string gibbs_members(int t) const;
  std::string setup() const;
  std::string shrink() const;
  std::string init_world() const;
  std::string lw_run() const;
  std::string mh_run() const;
  std::string query_decls(const std::string& ind) const;
  std::string query_record(const std::string& mode, const std::string& logw, const std::string& ind) const;
  std::string stats_tail() const;
  std::string literal(const Expr& e) const { return ex(e, Ctx{}); }
  std::string pinned_ref(const Expr& lhs) const { return ref_expr(lhs, Ctx{{}, kCur}); }

  const TypedModel& tm_;
  const AnalysisResult& a_;
  const CodegenOptions& opt_;
  std::vector<TInfo> ti_;
};

// ==== header, names, forward declarations ==========================================

std::string Emitter::header() const {
  std::string out;
  out += "// blogc output for model '" + opt_.model_name + "': " + algo_name(opt_.algo);
  out += std::string(" (db ") + (opt_.db ? "on" : "off") + ", rc " + (opt_.rc ? "on" : "off") + ", acu " +
         (opt_.acu ? "on" : "off");
  if (opt_.clear_memory_every > 0) out += ", clear memory every " + std::to_string(opt_.clear_memory_every);
  out += ")\n// Regenerate instead of editing.\n\n";
  out += "#include <bit>\n#include <cmath>\n#include <cstdint>\n#include <cstdio>\n#include <limits>\n";
  out += "#include <map>\n#include <memory>\n#include <string>\n#include <utility>\n#include <vector>\n\n";
  out += "#include <blogc/runtime/runtime.hpp>\n\nnamespace {\n\nnamespace rt = blogc::rt;\n\nrt::World W;\n\n";
  return out;
}

std::string Emitter::names() const {
  std::string out;
  for (std::size_t t = 0; t < tm_.types.size(); ++t) {
    const fe::TypeInfo& ty = tm_.types[t];
    if (ty.name == "Boolean" || ty.name == "Integer" || ty.name == "Real") continue;
    if (!ty.objects.empty()) {
      out += "const char* const kNames_" + ty.name + "[] = {";
      for (std::size_t i = 0; i < ty.objects.size(); ++i) out += (i ? ", \"" : "\"") + ty.objects[i] + "\"";
      out += "};\n";
      out += "std::string name_" + ty.name + "(int i) {\n";
      out += "  if (i >= 0 && i < " + std::to_string(ty.objects.size()) + ") return kNames_" + ty.name + "[i];\n";
      out += "  return \"" + ty.name + "[\" + std::to_string(i) + \"]\";\n}\n";
    } else {
      out += "std::string name_" + ty.name + "(int i) { return \"" + ty.name + "[\" + std::to_string(i) + \"]\"; }\n";
    }
  }
  return out + "\n";
}

std::string Emitter::forwards() const {
  std::string out;
  for (const TInfo& t : ti_) out += "struct " + t.cls + ";\n";
  for (std::size_t d = static_cast<std::size_t>(a_.num_templates); d < a_.decls.size(); ++d)
    out += "struct " + site_cls(static_cast<int>(d)) + ";\n";
  out += "\n";
  for (std::size_t t = 0; t < tm_.types.size(); ++t)
    if (tm_.open(static_cast<int>(t))) {
      out += "std::size_t cap_" + tm_.types[t].name + " = 0;\n";
      out += "void ensure_" + tm_.types[t].name + "(long long n);\n";
    }
  for (const TInfo& t : ti_) {
    out += t.cls + "& " + t.fn + "_ref(" + param_list(t, "a") + ");\n";
    out += "template <rt::Access A> " + t.vt + " get_" + t.fn + "(" + param_list(t, "a") + ");\n";
    out += "template <rt::Access A> " + t.cls + "& " + t.fn + "_at(" + param_list(t, "a") + ");\n";
  }
  out += "\ninline void push_active(std::vector<rt::Var*>& out, rt::Var* v) {\n  if (v->active) out.push_back(v);\n}\n\n";
  return out;
}

std::string Emitter::fixed_functions() const {
  const auto& fns = tm_.model.fixed_fns;
  if (fns.empty()) return "";
  std::string out;
  auto sig = [&](const fe::FuncDecl& f) {
    std::string s = cpp_type(f.ret) + " fx_" + f.name + "(";
    for (std::size_t i = 0; i < f.params.size(); ++i)
      s += (i ? ", " : "") + cpp_type(f.params[i].type) + " p" + std::to_string(i);
    return s + ")";
  };
  for (const auto& f : fns) out += sig(f) + ";\n";
  for (const auto& f : fns) {
    Ctx c;
    c.mode = kCur;
    for (std::size_t i = 0; i < f.params.size(); ++i) c.params.push_back("p" + std::to_string(i));
    out += sig(f) + " { return static_cast<" + cpp_type(f.ret) + ">(" + ex(*f.body, c) + "); }\n";
  }
  return out + "\n";
}

// ==== classes =======================================================================

std::string Emitter::class_decl(int t) const {
  const TInfo& ti = ti_[t];
  const std::string& vt = ti.vt;
  std::string out = "struct " + ti.cls + " final : rt::Var {\n";
  for (std::size_t i = 0; i < ti.params.size(); ++i) out += "  int a" + std::to_string(i) + " = 0;\n";
  out += "  " + vt + " val{};\n  " + vt + " cached_val{};\n\n";
  out += "  void init(" + param_list(ti, "p") + ");\n";
  out += "  template <rt::Access A> " + vt + " get();\n";
  out += "  template <rt::Access A> " + vt + " sample();\n";
  out += "  template <rt::Access A> double loglik(" + vt + " v);\n";
  out += "  void force_lw(" + vt + " v);\n";
  out += "  std::string name() const override;\n";
  out += "  std::string value_string() const override { return " + show(ti.ret, "val") + "; }\n";
  out += "  std::string cached_string() const override { return " + show(ti.ret, "cached_val") + "; }\n";
  switch (ti.ret.kind) {
    case Type::Kind::Bool:
      out += "  std::uint64_t value_bits() const override { return val ? 1 : 0; }\n";
      out += "  std::uint64_t cached_bits() const override { return cached_val ? 1 : 0; }\n";
      out += "  void set_cached_bits(std::uint64_t b) override { cached_val = b != 0; }\n";
      break;
    case Type::Kind::Real:
      out += "  std::uint64_t value_bits() const override { return std::bit_cast<std::uint64_t>(val); }\n";
      out += "  std::uint64_t cached_bits() const override { return std::bit_cast<std::uint64_t>(cached_val); }\n";
      out += "  void set_cached_bits(std::uint64_t b) override { cached_val = std::bit_cast<double>(b); }\n";
      break;
    default:
      out += "  std::uint64_t value_bits() const override { return static_cast<std::uint64_t>(val); }\n";
      out += "  std::uint64_t cached_bits() const override { return static_cast<std::uint64_t>(cached_val); }\n";
      out += "  void set_cached_bits(std::uint64_t b) override { cached_val = static_cast<" + vt + ">(b); }\n";
      break;
  }
  out += "  void propose() override;\n";
  out += "  double loglik_cur() override { return loglik<rt::Access::Cur>(val); }\n";
  out += "  double loglik_prop() override { return loglik<rt::Access::Prop>(val); }\n";
  out += "  void add_to_ch() override;\n  void del_from_ch() override;\n  void accept_value() override;\n";
  out += "  void commit() override { val = cached_val; }\n";
  out += "  void parents_cur(std::vector<rt::ParentRef>& out) override;\n";
  out += "  void parents_prop(std::vector<rt::ParentRef>& out) override;\n";
  out += "  void static_children(std::vector<rt::Var*>& out) override;\n";
  out += "  void static_contingents(std::vector<rt::Var*>& out) override;\n";
  out += "  void instantiate() override;\n";
  if (opt_.algo == Algo::Gibbs) {
    if (a_.gibbs[t] == an::GibbsKind::Conjugate) {
      out += "  bool conjugate() const override { return true; }\n";
      out += "  void propose_conjugate() override;\n";
    }
    if (a_.gibbs[t] == an::GibbsKind::Finite) {
      out += "  std::size_t domain_size() override;\n";
      out += "  void propose_candidate(std::size_t k) override;\n";
    }
    if (a_.gibbs[t] != an::GibbsKind::None)
      out += "  double prior_loglik_cached() override { return loglik<rt::Access::Cur>(cached_val); }\n";
    if (conj_child_shape(t)) out += "  void conj_accumulate(rt::Var* target, rt::ConjugateStats& st) override;\n";
  }
  out += "};\n\n";
  return out;
}

std::string Emitter::site_decl(int d) const {
  const Decl& s = a_.decls[d];
  const std::string cls = site_cls(d);
  std::string out = "struct " + cls + " final : rt::Var {\n";
  out += "  template <rt::Access A> double eval();\n";
  out += "  std::string name() const override { return \"" + s.name + "\"; }\n";
  out += "  std::string value_string() const override { return std::string(); }\n";
  out += "  std::string cached_string() const override { return std::string(); }\n";
  out += "  std::uint64_t value_bits() const override { return 0; }\n";
  out += "  std::uint64_t cached_bits() const override { return 0; }\n";
  out += "  void set_cached_bits(std::uint64_t) override {}\n";
  out += "  void propose() override { throw rt::RuntimeFault(\"" + s.name + " cannot be resampled\"); }\n";
  out += "  double loglik_cur() override { return eval<rt::Access::Cur>(); }\n";
  out += "  double loglik_prop() override { return eval<rt::Access::Prop>(); }\n";
  out += "  void add_to_ch() override;\n  void del_from_ch() override;\n";
  out += "  void accept_value() override {}\n  void commit() override {}\n";
  out += "  void parents_cur(std::vector<rt::ParentRef>& out) override;\n";
  out += "  void parents_prop(std::vector<rt::ParentRef>& out) override;\n";
  out += "  void instantiate() override {}\n";
  out += "};\n\n";
  return out;
}

// ==== storage, refs and getters =====================================================

std::string Emitter::storage() const {
  std::string out;
  for (const TInfo& t : ti_) {
    switch (t.storage) {
      case TInfo::Storage::Cells:
        out += "std::unique_ptr<" + t.cls + "[]> " + t.fn + "_cells;\n";
        break;
      case TInfo::Storage::Table:
        out += "rt::DynamicTable<" + t.cls + "> " + t.fn + "_table;\n";
        break;
      case TInfo::Storage::Map:
        out += "std::map<std::pair<int, int>, std::unique_ptr<" + t.cls + ">> " + t.fn + "_map;\n";
        break;
    }
  }
  for (std::size_t d = static_cast<std::size_t>(a_.num_templates); d < a_.decls.size(); ++d)
    out += site_cls(static_cast<int>(d)) + " " + site_obj(static_cast<int>(d)) + ";\n";
  out += "\n";

  for (const TInfo& t : ti_) {
    out += t.cls + "& " + t.fn + "_ref(" + param_list(t, "a") + ") {\n";
    switch (t.storage) {
      case TInfo::Storage::Cells: {
        std::string idx = "0";
        for (std::size_t i = 0; i < t.params.size(); ++i) {
          const std::string ai = "a" + std::to_string(i);
          idx = i == 0 ? ai : "(" + idx + ") * " + std::to_string(t.params[i].count) + " + " + ai;
        }
        out += "  return " + t.fn + "_cells[static_cast<std::size_t>(" + idx + ")];\n";
        break;
      }
      case TInfo::Storage::Table: {
        const std::string o = "a" + std::to_string(t.open_pos);
        const std::string T = type_name(t.open_type);
        std::string d = "0";
        for (std::size_t i = 0; i < t.params.size(); ++i)
          if (static_cast<int>(i) != t.open_pos) d = "a" + std::to_string(i);
        out += "  if (static_cast<std::size_t>(" + o + ") >= cap_" + T + ") ensure_" + T + "(" + o + " + 1LL);\n";
        out += "  return " + t.fn + "_table[static_cast<std::size_t>(" + o + ") * " + std::to_string(t.stride) +
               " + static_cast<std::size_t>(" + d + ")];\n";
        break;
      }
      case TInfo::Storage::Map:
        out += "  auto& slot = " + t.fn + "_map[{a0, a1}];\n";
        out += "  if (!slot) {\n    slot = std::make_unique<" + t.cls + ">();\n    slot->init(a0, a1);\n  }\n";
        out += "  return *slot;\n";
        break;
    }
    out += "}\n";
    out += "template <rt::Access A> " + t.vt + " get_" + t.fn + "(" + param_list(t, "a") + ") {\n";
    out += "  return " + t.fn + "_ref(" + arg_names(t, "a") + ").get<A>();\n}\n";
    out += "template <rt::Access A> " + t.cls + "& " + t.fn + "_at(" + param_list(t, "a") + ") {\n";
    out += "  " + t.cls + "& v = " + t.fn + "_ref(" + arg_names(t, "a") + ");\n";
    out += "  (void)v.get<A>();\n  return v;\n}\n";
  }
  out += "\n";

  for (std::size_t ty = 0; ty < tm_.types.size(); ++ty) {
    if (!tm_.open(static_cast<int>(ty))) continue;
    const std::string T = tm_.types[ty].name;
    out += "void ensure_" + T + "(long long n) {\n";
    out += "  if (n <= static_cast<long long>(cap_" + T + ")) return;\n";
    out += "  cap_" + T + " = static_cast<std::size_t>(n);\n";
    for (const TInfo& t : ti_) {
      if (t.storage != TInfo::Storage::Table || t.open_type != static_cast<int>(ty)) continue;
      std::string init_args;
      for (std::size_t i = 0; i < t.params.size(); ++i) {
        init_args += i ? ", " : "";
        init_args += static_cast<int>(i) == t.open_pos ? "static_cast<int>(i / " + std::to_string(t.stride) + ")"
                                                       : "static_cast<int>(i % " + std::to_string(t.stride) + ")";
      }
      out += "  " + t.fn + "_table.ensure(cap_" + T + " * " + std::to_string(t.stride) + ", [](std::size_t i) {\n";
      out += "    auto c = std::make_unique<" + t.cls + ">();\n";
      out += "    c->init(" + init_args + ");\n    return c;\n  });\n";
    }
    out += "}\n";
  }
  return out + "\n";
}

// ==== members ======================================================================

std::string Emitter::getter(int t) {
  const TInfo& ti = ti_[t];
  const std::string q = ti.cls + "::";
  const std::string ensure = ti.number ? "ensure_" + type_name(a_.decls[t].open_type) : "";
  std::string out;
  out += "template <rt::Access A> " + ti.vt + " " + q + "get() {\n";
  out += "  if constexpr (A == rt::Access::Lw) {\n";
  out += "    if (lw_mark == W.gen) return val;\n";
  out += "    lw_mark = W.gen;\n";
  out += "    if (kind == rt::VarKind::Pinned) {\n";
  out += "      W.log_weight += loglik<A>(val);\n      return val;\n    }\n";
  out += "    val = sample<A>();\n";
  if (ti.number) out += "    " + ensure + "(val);\n";
  out += "    return val;\n";
  out += "  } else if constexpr (A == rt::Access::Cur) {\n";
  out += "    if (!active) {\n";
  out += "      if (!W.initializing) W.not_instantiated(this);\n";
  out += "      instantiate();\n    }\n    return val;\n";
  out += "  } else {\n";
  out += "    if (cache_mark == W.pgen) return cached_val;\n";
  out += "    if (active) return val;\n";
  out += "    cached_val = sample<A>();\n";
  if (ti.number) out += "    " + ensure + "(cached_val);\n";
  out += "    cache_mark = W.pgen;\n    W.note_proposed(this);\n    return cached_val;\n  }\n}\n";
  return out;
}

std::string Emitter::acu(int d) {
  const bool site = a_.decls[d].is_site();
  const std::string q = (site ? site_cls(d) : ti_[d].cls) + "::";
  std::string out;
  const std::string add = ch_body(d, true);
  const std::string del = ch_body(d, false);
  out += "void " + q + "add_to_ch() {\n" + add + "}\n";
  out += "void " + q + "del_from_ch() {\n" + del + "}\n";
  return out;
}

std::string Emitter::accept(int t) {
  const TInfo& ti = ti_[t];
  std::string out = "void " + ti.cls + "::accept_value() {\n";
  const bool loops = (opt_.acu || opt_.rc) && has_static_contingents(t);
  if (!loops) return out + "  val = cached_val;\n}\n";
  out += "  static std::vector<rt::Var*> cs;\n  cs.clear();\n";
  if (opt_.acu) {
    out += "  cs.assign(cont.begin(), cont.end());\n";
  } else {
    out += "  static_contingents(cs);\n  W.dedup(cs);\n";
  }
  out += "  for (rt::Var* u : cs)\n    if (u->active) u->del_from_ch();\n";
  out += "  val = cached_val;\n";
  out += "  for (rt::Var* u : cs)\n    if (u->active) u->add_to_ch();\n";
  return out + "}\n";
}

std::string Emitter::members(int t) const {
  const TInfo& ti = ti_[t];
  const std::string q = ti.cls + "::";
  const std::string ensure = ti.number ? "ensure_" + type_name(a_.decls[t].open_type) : "";
  std::string out = "// ---- " + ti.display + " ----\n";
  out += "void " + q + "init(" + param_list(ti, "p") + ") {\n";
  for (std::size_t i = 0; i < ti.params.size(); ++i) out += "  a" + std::to_string(i) + " = p" + std::to_string(i) + ";\n";
  out += std::string("  tracked = ") + (a_.tracked[t] ? "true" : "false") + ";\n";
  out += "  W.register_var(this);\n}\n";

  out += "std::string " + q + "name() const {\n";
  if (ti.params.empty()) {
    out += "  return \"" + ti.display + "\";\n";
  } else {
    out += "  return \"" + ti.display + "(\"";
    for (std::size_t i = 0; i < ti.params.size(); ++i)
      out += std::string(i ? " + \", \"" : "") + " + name_" + type_name(ti.params[i].type) + "(a" + std::to_string(i) + ")";
    out += " + \")\";\n";
  }
  out += "}\n";

  out += const_cast<Emitter*>(this)->getter(t);

  const Ctx ca = tctx("A", ti);
  out += "template <rt::Access A> " + ti.vt + " " + q + "sample() {\n";
  tail(*a_.decls[t].body, ca, ti, true, 1, out);
  out += "}\n";
  out += "template <rt::Access A> double " + q + "loglik(" + ti.vt + " v) {\n";
  tail(*a_.decls[t].body, ca, ti, false, 1, out);
  out += "}\n";

  out += "void " + q + "force_lw(" + ti.vt + " v) {\n";
  out += "  if (lw_mark == W.gen || kind == rt::VarKind::Pinned) {\n";
  out += "    if (get<rt::Access::Lw>() != v) W.impossible = true;\n    return;\n  }\n";
  out += "  lw_mark = W.gen;\n  val = v;\n";
  if (ti.number) out += "  " + ensure + "(v);\n";
  out += "  W.log_weight += loglik<rt::Access::Lw>(v);\n}\n";

  out += "void " + q + "instantiate() {\n";
  out += "  if (kind == rt::VarKind::Pinned) {\n";
  out += "    if (!std::isfinite(loglik<rt::Access::Cur>(val))) W.impossible = true;\n";
  out += "  } else {\n    val = sample<rt::Access::Cur>();\n";
  if (ti.number) out += "    " + ensure + "(val);\n";
  out += "  }\n  W.activate(this);\n  add_to_ch();\n}\n";

  out += "void " + q + "propose() {\n  cached_val = sample<rt::Access::Cur>();\n";
  if (ti.number) out += "  " + ensure + "(cached_val);\n";
  out += "  cache_mark = W.pgen;\n  W.note_proposed(this);\n}\n";

  out += const_cast<Emitter*>(this)->acu(t);
  out += const_cast<Emitter*>(this)->accept(t);
  out += "void " + q + "parents_cur(std::vector<rt::ParentRef>& out) {\n" + parents_body(t, kCur) + "}\n";
  out += "void " + q + "parents_prop(std::vector<rt::ParentRef>& out) {\n" + parents_body(t, kProp) + "}\n";
  out += "void " + q + "static_children(std::vector<rt::Var*>& out) {\n" + static_children_body(t, false) + "}\n";
  out += "void " + q + "static_contingents(std::vector<rt::Var*>& out) {\n" + static_children_body(t, true) + "}\n";
  if (opt_.algo == Algo::Gibbs) out += gibbs_members(t);
  return out + "\n";
}

std::string Emitter::gibbs_members(int t) const {
  const TInfo& ti = ti_[t];
  const std::string q = ti.cls + "::";
  const Ctx c = tctx(kCur, ti);
  std::string out;
  const Expr& body = *a_.decls[t].body;
  if (a_.gibbs[t] == an::GibbsKind::Conjugate) {
    auto arg = [&](std::size_t i) { return double_of(*body.args[i], c); };
    out += "void " + q + "propose_conjugate() {\n  rt::ConjugateStats st;\n";
    out += "  for (rt::Var* ch : W.children_of(this))\n    if (ch->active && !ch->is_site()) ch->conj_accumulate(this, st);\n";
    switch (a_.conjugacy[t].kind) {
      case an::Conjugacy::GaussianGaussianMean:
        out += "  const rt::GaussianParams post = rt::gaussian_mean_posterior({" + arg(0) + ", " + arg(1) +
               "}, st.weighted_sum, st.precision_sum);\n";
        out += "  cached_val = rt::sample_gaussian(W.rng, post.mean, post.var);\n";
        out += "  W.posterior = {rt::Posterior::Family::Gaussian, post.mean, post.var};\n";
        break;
      case an::Conjugacy::BetaBernoulli:
        out += "  const rt::BetaParams post = rt::beta_bernoulli_posterior({" + arg(0) + ", " + arg(1) +
               "}, st.successes, st.failures);\n";
        out += "  cached_val = rt::sample_beta(W.rng, post.alpha, post.beta);\n";
        out += "  W.posterior = {rt::Posterior::Family::Beta, post.alpha, post.beta};\n";
        break;
      case an::Conjugacy::GammaPoisson:
        out += "  const rt::GammaParams post = rt::gamma_poisson_posterior({" + arg(0) + ", " + arg(1) +
               "}, st.count_sum, st.n);\n";
        out += "  cached_val = rt::sample_gamma(W.rng, post.shape, post.rate);\n";
        out += "  W.posterior = {rt::Posterior::Family::Gamma, post.shape, post.rate};\n";
        break;
      case an::Conjugacy::None: break;
    }
    out += "  cache_mark = W.pgen;\n  W.note_proposed(this);\n}\n";
  }
  if (a_.gibbs[t] == an::GibbsKind::Finite) {
    std::string size;
    std::string value;
    switch (ti.ret.kind) {
      case Type::Kind::Bool:
        size = "2";
        value = "k != 0";
        break;
      case Type::Kind::Object: {
        const int ty = ti.ret.obj;
        size = tm_.open(ty) ? "static_cast<std::size_t>(std::max(0LL, get_num_" + type_name(ty) + "<rt::Access::Cur>()))"
                            : std::to_string(tm_.types[ty].objects.size());
        value = "static_cast<int>(k)";
        break;
      }
      default:
        size = "static_cast<std::size_t>(" + ex(*body.args[1], c) + " - " + ex(*body.args[0], c) + " + 1)";
        value = ex(*body.args[0], c) + " + static_cast<long long>(k)";
        break;
    }
    out += "std::size_t " + q + "domain_size() {\n  return " + size + ";\n}\n";
    out += "void " + q + "propose_candidate(std::size_t k) {\n  cached_val = " + value + ";\n";
    if (ti.number) out += "  ensure_" + type_name(a_.decls[t].open_type) + "(cached_val);\n";
    out += "  cache_mark = W.pgen;\n  W.note_proposed(this);\n}\n";
  }
  DistKind dk;
  if (conj_child_dist(body, dk)) {
    out += "void " + q + "conj_accumulate(rt::Var* target, rt::ConjugateStats& st) {\n";
    out += "  if (&" + ref_expr(*body.args[0], c) + " != target) return;\n";
    if (dk == DistKind::Bernoulli)
      out += "  st.add_bernoulli(val);\n";
    else if (dk == DistKind::Poisson)
      out += "  st.add_poisson(val);\n";
    else
      out += "  st.add_gaussian(val, " + double_of(*body.args[1], c) + ");\n";
    out += "}\n";
  }
  return out;
}

std::string Emitter::site_members(int d) const {
  const Decl& s = a_.decls[d];
  const std::string q = site_cls(d) + "::";
  const Ctx ca = tctx("A", 0);
  std::string out = "// ---- " + s.name + " ----\n";
  out += "template <rt::Access A> double " + q + "eval() {\n";
  if (s.kind == Decl::Kind::ObsSite) {
    const Expr& rhs = *tm_.model.evidence[static_cast<std::size_t>(s.index)].rhs;
    out += "  return " + ex(*s.body, ca) + " == " + literal(rhs) + " ? 0.0 : rt::kNegInf;\n";
  } else {
    out += "  return 0.0;\n";
  }
  out += "}\n";
  out += const_cast<Emitter*>(this)->acu(d);
  out += "void " + q + "parents_cur(std::vector<rt::ParentRef>& out) {\n" + parents_body(d, kCur) + "}\n";
  out += "void " + q + "parents_prop(std::vector<rt::ParentRef>& out) {\n" + parents_body(d, kProp) + "}\n\n";
  return out;
}

// ==== driver =========================================================================

std::string Emitter::setup() const {
  std::string out = "void setup() {\n";
  for (const TInfo& t : ti_) {
    if (t.storage != TInfo::Storage::Cells) continue;
    out += "  " + t.fn + "_cells = std::make_unique<" + t.cls + "[]>(" + std::to_string(t.cells) + ");\n";
    if (t.params.empty()) {
      out += "  " + t.fn + "_cells[0].init();\n";
      continue;
    }
    out += "  for (std::size_t i = 0; i < " + std::to_string(t.cells) + "; ++i) {\n";
    // Decompose the flat index, last parameter fastest.
    std::string args;
    long long div = 1;
    std::vector<std::string> parts(t.params.size());
    for (std::size_t j = t.params.size(); j-- > 0;) {
      parts[j] = "static_cast<int>(i / " + std::to_string(div) + " % " + std::to_string(t.params[j].count) + ")";
      div *= t.params[j].count;
    }
    for (std::size_t j = 0; j < parts.size(); ++j) args += (j ? ", " : "") + parts[j];
    out += "    " + t.fn + "_cells[i].init(" + args + ");\n  }\n";
  }
  for (std::size_t d = static_cast<std::size_t>(a_.num_templates); d < a_.decls.size(); ++d) {
    const std::string o = site_obj(static_cast<int>(d));
    out += "  " + o + ".kind = rt::VarKind::" + (a_.decls[d].kind == Decl::Kind::ObsSite ? "ObsSite" : "QuerySite") + ";\n";
    out += "  W.register_var(&" + o + ");\n";
  }
  for (std::size_t i = 0; i < tm_.model.evidence.size(); ++i) {
    const int t = a_.pinned_evidence[i];
    if (t < 0) continue;
    const auto& ev = tm_.model.evidence[i];
    out += "  {\n    auto& c = " + pinned_ref(*ev.lhs) + ";\n";
    out += "    c.kind = rt::VarKind::Pinned;\n";
    out += "    c.val = " + literal(*ev.rhs) + ";\n";
    if (ti_[t].number) out += "    ensure_" + type_name(a_.decls[t].open_type) + "(c.val);\n";
    out += "  }\n";
  }
  return out + "}\n\n";
}

std::string Emitter::shrink() const {
  std::string out = "void shrink_memory() {\n";
  bool any = false;
  for (std::size_t ty = 0; ty < tm_.types.size(); ++ty) {
    if (!tm_.open(static_cast<int>(ty))) continue;
    const std::string T = tm_.types[ty].name;
    bool has_table = false;
    for (const TInfo& t : ti_)
      if (t.storage == TInfo::Storage::Table && t.open_type == static_cast<int>(ty)) has_table = true;
    if (!has_table) continue;
    if (!any) {
      out += "  auto idle = [](const rt::Var& c) { return !c.active && c.pins == 0 && c.cache_mark != W.pgen; };\n";
      out += "  auto drop = [](rt::Var& c) { W.unregister_var(&c); };\n";
      any = true;
    }
    out += "  {\n    const std::size_t live = static_cast<std::size_t>(std::max(0LL, num_" + T + "_ref().val));\n";
    out += "    std::size_t cap = live;\n";
    for (const TInfo& t : ti_) {
      if (t.storage != TInfo::Storage::Table || t.open_type != static_cast<int>(ty)) continue;
      const std::string k = std::to_string(t.stride);
      out += "    " + t.fn + "_table.shrink(live * " + k + ", idle, drop);\n";
      out += "    cap = std::max(cap, (" + t.fn + "_table.capacity() + " + k + " - 1) / " + k + ");\n";
    }
    out += "    cap_" + T + " = std::min(cap_" + T + ", cap);\n  }\n";
  }
  return out + "}\n\n";
}

std::string Emitter::query_decls(const std::string& ind) const {
  std::string out;
  for (std::size_t i = 0; i < tm_.model.queries.size(); ++i) {
    const Expr& q = *tm_.model.queries[i].expr;
    const std::string name = "q" + std::to_string(i);
    const std::string text = fe::print_expr(q);
    std::string lab;
    switch (q.type.kind) {
      case Type::Kind::Bool: lab = ", [](long long c) { return std::string(c ? \"true\" : \"false\"); }"; break;
      case Type::Kind::Object:
        lab = ", [](long long c) { return name_" + type_name(q.type.obj) + "(static_cast<int>(c)); }";
        break;
      default: break;
    }
    out += ind + "rt::QueryStat " + name + "(" + rt_quote(text) + ", " +
           (q.type.kind == Type::Kind::Real ? "true" : "false") + lab + ");\n";
    out += ind + name + ".configure(opt.n);\n";
  }
  return out;
}

std::string Emitter::query_record(const std::string& mode, const std::string& logw, const std::string& ind) const {
  std::string out;
  const Ctx c{{}, mode};
  for (std::size_t i = 0; i < tm_.model.queries.size(); ++i) {
    const Expr& q = *tm_.model.queries[i].expr;
    const std::string v = "v" + std::to_string(i);
    const std::string name = "q" + std::to_string(i);
    out += ind + "const auto " + v + " = " + ex(q, c) + ";\n";
    switch (q.type.kind) {
      case Type::Kind::Real: out += ind + name + ".add_real(" + v + ", " + logw + ");\n"; break;
      case Type::Kind::Bool: out += ind + name + ".add(" + v + " ? 1 : 0, " + logw + ");\n"; break;
      default: out += ind + name + ".add(static_cast<long long>(" + v + "), " + logw + ");\n"; break;
    }
  }
  return out;
}

std::string Emitter::stats_tail() const {
  std::string out;
  out += "  rt::RunStats st;\n";
  out += "  st.model = " + rt_quote(opt_.model_name) + ";\n";
  out += std::string("  st.algo = \"") + algo_name(opt_.algo) + "\";\n";
  out += "  st.n_samples = opt.n;\n  st.seed = opt.seed;\n  st.wall_time_s = clock.seconds();\n";
  out += "  st.rng_calls = W.rng.calls;\n  st.likelihood_evals = W.counters.likelihood_evals;\n";
  if (opt_.algo != Algo::LW) {
    out += "  const double moves = static_cast<double>(W.counters.accepted + W.counters.rejected);\n";
    out += "  st.accept_rate = moves > 0 ? static_cast<double>(W.counters.accepted) / moves : 0.0;\n";
  }
  out += "  st.world_size = W.active_vars.size();\n";
  out += "  if (opt.debug_oracle)\n    st.debug_checks = {{\"consistency\", W.counters.consistency_checks},\n"
         "                       {\"atomicity\", W.counters.atomicity_checks},\n"
         "                       {\"memo\", W.counters.memo_checks},\n"
         "                       {\"conjugate\", W.counters.conjugate_checks}};\n";
  for (std::size_t i = 0; i < tm_.model.queries.size(); ++i) out += "  st.queries.push_back(&q" + std::to_string(i) + ");\n";
  out += "  rt::finish(st, opt);\n";
  return out;
}

std::string Emitter::lw_run() const {
  std::string out = "void run(const rt::Options& opt) {\n";
  out += query_decls("  ");
  out += "  rt::Stopwatch clock;\n";
  out += "  for (std::uint64_t it = 0; it < opt.n; ++it) {\n";
  out += "    W.bump_generation();\n    W.log_weight = 0.0;\n    W.impossible = false;\n";
  if (!opt_.db) {
    out += "    // Eager: every instantiable variable, number variables first.\n";
    for (const TInfo& t : ti_)
      if (t.number) out += "    (void)get_" + t.fn + "<rt::Access::Lw>();\n";
    for (const TInfo& t : ti_) {
      if (t.number) continue;
      std::string ind = "    ";
      std::string args;
      for (std::size_t j = 0; j < t.params.size(); ++j) {
        const std::string v = "e" + std::to_string(j);
        const ParamInfo& p = t.params[j];
        const std::string lim = p.open ? "static_cast<int>(get_num_" + type_name(p.type) + "<rt::Access::Lw>())"
                                       : std::to_string(p.count);
        out += ind + "for (int " + v + " = 0; " + v + " < " + lim + "; ++" + v + ")\n";
        ind += "  ";
        args += (j ? ", " : "") + v;
      }
      out += ind + "(void)get_" + t.fn + "<rt::Access::Lw>(" + args + ");\n";
    }
  }
  const Ctx lw{{}, kLw};
  for (std::size_t i = 0; i < tm_.model.evidence.size(); ++i) {
    const auto& ev = tm_.model.evidence[i];
    if (a_.pinned_evidence[i] >= 0) {
      out += "    (void)" + ref_expr(*ev.lhs, lw) + ".get<rt::Access::Lw>();\n";
    } else {
      out += "    " + ref_expr(*ev.lhs, lw) + ".force_lw(" + literal(*ev.rhs) + ");\n";
    }
  }
  out += "    const double logw = W.impossible ? rt::kNegInf : W.log_weight;\n";
  out += query_record(kLw, "logw", "    ");
  out += "    if (opt.debug_oracle) {\n      const std::uint64_t calls = W.rng.calls;\n";
  for (std::size_t i = 0; i < tm_.model.queries.size(); ++i) {
    const Expr& q = *tm_.model.queries[i].expr;
    out += "      if (!(" + ex(q, lw) + " == v" + std::to_string(i) + ") && !W.impossible)\n";
    const std::string quoted = rt_quote("memoised query " + fe::print_expr(q) + " changed within one generation");
    out += "        throw rt::RuntimeFault(" + quoted + ");\n";
  }
  out += "      if (W.rng.calls != calls) throw rt::RuntimeFault(\"memoised getters drew new randomness\");\n";
  out += "      ++W.counters.memo_checks;\n    }\n";
  if (opt_.clear_memory_every > 0)
    out += "    if ((it + 1) % " + std::to_string(opt_.clear_memory_every) + " == 0) shrink_memory();\n";
  out += "  }\n";
  out += stats_tail();
  return out + "}\n\n";
}

std::string Emitter::init_world() const {
  std::string out = "bool init_attempt() {\n";
  out += "  W.reset_all();\n  W.initializing = true;\n  W.impossible = false;\n";
  const Ctx cur{{}, kCur};
  for (std::size_t i = 0; i < tm_.model.evidence.size(); ++i) {
    const auto& ev = tm_.model.evidence[i];
    if (a_.pinned_evidence[i] >= 0) {
      out += "  {\n    auto& c = " + ref_expr(*ev.lhs, cur) + ";\n";
      out += "    (void)c.get<rt::Access::Cur>();\n    W.add_root(&c, true);\n";
      out += "    if (W.impossible) return false;\n  }\n";
      continue;
    }
    const int d = a_.obs_site[i];
    const TInfo& t = tinfo_of_ref(*ev.lhs);
    const std::string v = literal(*ev.rhs);
    const std::string so = site_obj(d);
    out += "  {\n    auto& t = " + ref_expr(*ev.lhs, cur) + ";\n";
    out += "    if (!t.active) {\n";
    out += "      if (t.kind == rt::VarKind::Pinned && t.val != " + v + ") return false;\n";
    out += "      t.val = " + v + ";\n";
    if (t.number) out += "      ensure_" + type_name(a_.decls[t.decl].open_type) + "(t.val);\n";
    out += "      if (!std::isfinite(t.loglik<rt::Access::Cur>(t.val))) return false;\n";
    out += "      W.activate(&t);\n      t.add_to_ch();\n";
    out += "    } else if (t.val != " + v + ") {\n      return false;\n    }\n";
    out += "    W.activate(&" + so + ");\n    W.add_root(&" + so + ", false);\n    " + so + ".add_to_ch();\n";
    out += "    if (W.impossible) return false;\n  }\n";
  }
  for (std::size_t i = 0; i < tm_.model.queries.size(); ++i) {
    const Expr& q = *tm_.model.queries[i].expr;
    const int d = a_.query_site[i];
    if (d < 0) {
      out += "  {\n    auto& c = " + ref_expr(q, cur) + ";\n";
      out += "    (void)c.get<rt::Access::Cur>();\n    W.add_root(&c, true);\n  }\n";
    } else {
      const std::string so = site_obj(d);
      out += "  (void)(" + ex(q, cur) + ");\n";
      out += "  W.activate(&" + so + ");\n  W.add_root(&" + so + ", false);\n  " + so + ".add_to_ch();\n";
    }
  }
  out += "  W.initializing = false;\n  return !W.impossible;\n}\n\n";
  out += "void init_world() {\n";
  out += "  for (int attempt = 0; attempt < 100000; ++attempt)\n    if (init_attempt()) return;\n";
  out += "  W.initializing = false;\n";
  out += "  throw rt::RuntimeFault(\"no world consistent with the evidence found in 100000 attempts\");\n}\n\n";
  return out;
}

std::string Emitter::mh_run() const {
  std::string out = init_world();
  out += "void run(const rt::Options& opt) {\n";
  out += std::string("  W.acu = ") + (opt_.acu ? "true" : "false") + ";\n";
  out += std::string("  W.rc = ") + (opt_.rc ? "true" : "false") + ";\n";
  out += "  W.debug = opt.debug_oracle;\n";
  out += query_decls("  ");
  out += "  rt::Stopwatch clock;\n  init_world();\n";
  out += "  rt::StepMonitor mon(W, opt);\n  mon.initial();\n";
  out += "  for (std::uint64_t it = 0; it < opt.n; ++it) {\n";
  out += "    mon.before();\n";
  out += opt_.algo == Algo::Gibbs ? "    W.gibbs_step();\n" : "    W.pmh_step();\n";
  out += "    mon.after(it);\n";
  out += query_record(kCur, "0.0", "    ");
  if (opt_.clear_memory_every > 0)
    out += "    if ((it + 1) % " + std::to_string(opt_.clear_memory_every) + " == 0) shrink_memory();\n";
  out += "  }\n";
  out += stats_tail();
  return out + "}\n\n";
}

std::string Emitter::driver() {
  std::string out = setup();
  out += shrink();
  out += opt_.algo == Algo::LW ? lw_run() : mh_run();
  out += "}  // namespace\n\n";
  out += "int main(int argc, char** argv) {\n";
  out += "  const rt::Options opt = rt::parse_options(argc, argv);\n";
  out += "  try {\n    setup();\n    W.rng.reseed(opt.seed);\n    run(opt);\n";
  out += "  } catch (const std::exception& e) {\n    std::fprintf(stderr, \"error: %s\\n\", e.what());\n    return 1;\n  }\n";
  out += "  return 0;\n}\n";
  return out;
}

std::string Emitter::program() {
  std::string out = header();
  out += names();
  out += forwards();
  out += fixed_functions();
  for (int t = 0; t < a_.num_templates; ++t) out += class_decl(t);
  for (std::size_t d = static_cast<std::size_t>(a_.num_templates); d < a_.decls.size(); ++d)
    out += site_decl(static_cast<int>(d));
  out += storage();
  for (int t = 0; t < a_.num_templates; ++t) out += members(t);
  for (std::size_t d = static_cast<std::size_t>(a_.num_templates); d < a_.decls.size(); ++d)
    out += site_members(static_cast<int>(d));
  out += driver();
  return out;
}

}  // namespace

std::string emit_program(const TypedModel& tm, const AnalysisResult& a, const CodegenOptions& opt) {
  return Emitter(tm, a, opt).program();
}

std::string emit_getter(const TypedModel& tm, const AnalysisResult& a, int decl, const CodegenOptions& opt) {
  if (decl < 0 || decl >= a.num_templates) throw CodegenError("emit_getter: not a template");
  return Emitter(tm, a, opt).getter(decl);
}

std::string emit_acu(const TypedModel& tm, const AnalysisResult& a, int decl, const CodegenOptions& opt) {
  if (decl < 0 || decl >= static_cast<int>(a.decls.size())) throw CodegenError("emit_acu: no such declaration");
  return Emitter(tm, a, opt).acu(decl);
}

std::string emit_accept_rc(const TypedModel& tm, const AnalysisResult& a, int decl, const CodegenOptions& opt) {
  if (decl < 0 || decl >= a.num_templates) throw CodegenError("emit_accept_rc: not a template");
  return Emitter(tm, a, opt).accept(decl);
}

std::string emit_driver(const TypedModel& tm, const AnalysisResult& a, const CodegenOptions& opt) {
  return Emitter(tm, a, opt).driver();
}

}  // namespace blogc::cg
