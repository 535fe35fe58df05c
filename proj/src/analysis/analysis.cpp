#include "blogc/analysis/analysis.hpp"

#include <algorithm>
#include <map>

#include "blogc/frontend/printer.hpp"
#include "json.hpp"

namespace blogc::an {

using fe::DistKind;
using fe::ExprKind;
using fe::RefKind;

const char* conjugacy_name(Conjugacy c) {
  switch (c) {
    case Conjugacy::None: return "None";
    case Conjugacy::BetaBernoulli: return "BetaBernoulli";
    case Conjugacy::GammaPoisson: return "GammaPoisson";
    case Conjugacy::GaussianGaussianMean: return "GaussianGaussianMean";
  }
  return "?";
}

bool constant_instance(const Expr& e) {
  if (e.kind == ExprKind::Number) return true;
  if (!((e.kind == ExprKind::Call || e.kind == ExprKind::Name) && e.ref == RefKind::Random)) return false;
  for (const auto& a : e.args)
    if (a->ref != RefKind::Object) return false;
  return true;
}

int AnalysisResult::number_decl(int stmt) const {
  for (std::size_t i = 0; i < decls.size(); ++i)
    if (decls[i].kind == Decl::Kind::Number && decls[i].index == stmt) return static_cast<int>(i);
  return -1;
}

namespace {

int template_of(const TypedModel& tm, const Expr& e) {
  if (e.ref == RefKind::Random) return e.ref_index;
  if (e.kind == ExprKind::Number) return static_cast<int>(tm.model.random_fns.size()) + tm.types[e.ref_index].number_stmt;
  return -1;
}

ArgMap arg_map(const Expr& a) {
  ArgMap m;
  if (a.ref == RefKind::Param) {
    m.kind = ArgMap::Kind::Param;
    m.param = a.ref_index;
  } else if (a.ref == RefKind::Object) {
    m.kind = ArgMap::Kind::Constant;
    m.obj = a.obj;
  }
  return m;
}

struct FvWalker {
  const TypedModel& tm;
  std::vector<VarRef> refs;
  std::set<std::string> switching;

  void add(const Expr& e, bool sw) {
    VarRef r;
    r.tmpl = template_of(tm, e);
    r.node = &e;
    r.key = fe::print_expr(e);
    for (const auto& a : e.args) r.args.push_back(arg_map(*a));
    if (sw) switching.insert(r.key);
    for (const auto& x : refs)
      if (x.key == r.key) return;
    refs.push_back(std::move(r));
  }

  void walk(const Expr& e, bool sw) {
    switch (e.kind) {
      case ExprKind::If:
        walk(*e.args[0], true);
        walk(*e.args[1], sw);
        walk(*e.args[2], sw);
        return;
      case ExprKind::Name:
      case ExprKind::Call:
        if (e.ref == RefKind::Random) {
          for (const auto& a : e.args) walk(*a, true);
          add(e, sw);
          return;
        }
        for (const auto& a : e.args) walk(*a, sw);
        return;
      case ExprKind::Number:
        add(e, sw);
        return;
      case ExprKind::TypeSet:
        if (tm.open(e.ref_index)) {
          // The set {T t} of an open type reads #T.
          Expr num;
          num.kind = ExprKind::Number;
          num.name = tm.types[e.ref_index].name;
          num.ref = RefKind::Number;
          num.ref_index = e.ref_index;
          VarRef r;
          r.tmpl = template_of(tm, num);
          r.node = &e;
          r.key = "#" + num.name;
          if (sw) switching.insert(r.key);
          for (const auto& x : refs)
            if (x.key == r.key) return;
          refs.push_back(std::move(r));
        }
        return;
      default:
        for (const auto& a : e.args) walk(*a, sw);
        return;
    }
  }
};

bool has_random_fv(const TypedModel& tm, const Expr& e) {
  FvWalker w{tm, {}, {}};
  w.walk(e, false);
  return !w.refs.empty();
}

bool is_ref_to(const TypedModel& tm, const Expr& e, int tmpl) {
  return (e.kind == ExprKind::Call || e.kind == ExprKind::Name || e.kind == ExprKind::Number) &&
         (e.ref == RefKind::Random || e.ref == RefKind::Number) && template_of(tm, e) == tmpl;
}

Conjugacy family_of(const TypedModel& tm, const Expr& body) {
  if (body.kind != ExprKind::Dist) return Conjugacy::None;
  DistKind dk;
  fe::lookup_dist(body.name, dk);
  for (const auto& a : body.args)
    if (has_random_fv(tm, *a)) return Conjugacy::None;
  switch (dk) {
    case DistKind::Beta: return Conjugacy::BetaBernoulli;
    case DistKind::Gamma: return Conjugacy::GammaPoisson;
    case DistKind::Gaussian: return Conjugacy::GaussianGaussianMean;
    default: return Conjugacy::None;
  }
}

// The child must draw from the matching likelihood with the parent in the
// designated slot and nowhere else.
bool conjugate_child(const TypedModel& tm, const AnalysisResult& a, Conjugacy fam, int parent, int child) {
  const Decl& d = a.decls[child];
  if (d.kind == Decl::Kind::QuerySite) return true;
  if (d.kind != Decl::Kind::Random) return false;
  const Expr& body = *d.body;
  if (body.kind != ExprKind::Dist) return false;
  DistKind dk;
  fe::lookup_dist(body.name, dk);
  const DistKind want = fam == Conjugacy::BetaBernoulli  ? DistKind::Bernoulli
                        : fam == Conjugacy::GammaPoisson ? DistKind::Poisson
                                                         : DistKind::Gaussian;
  if (dk != want) return false;
  if (!is_ref_to(tm, *body.args[0], parent)) return false;
  int count = 0;
  for (const auto& r : a.info[child].fv)
    if (r.tmpl == parent) ++count;
  if (count != 1) return false;
  if (fam == Conjugacy::GaussianGaussianMean) {
    FvWalker w{tm, {}, {}};
    w.walk(*body.args[1], false);
    for (const auto& r : w.refs)
      if (r.tmpl == parent) return false;
  }
  return true;
}

bool finite_domain(const TypedModel& tm, const Decl& d) {
  const fe::Type ret = d.kind == Decl::Kind::Number ? fe::Type::integer() : tm.model.random_fns[d.index].ret;
  if (ret.kind == fe::Type::Kind::Bool || ret.kind == fe::Type::Kind::Object) return true;
  if (ret.kind != fe::Type::Kind::Int) return false;
  const Expr& b = *d.body;
  return b.kind == ExprKind::Dist && b.name == "UniformInt" && b.args[0]->kind == ExprKind::Int &&
         b.args[1]->kind == ExprKind::Int;
}

}  // namespace

std::vector<VarRef> free_vars(const TypedModel& tm, const Expr& e, const std::vector<fe::Param>&) {
  FvWalker w{tm, {}, {}};
  w.walk(e, false);
  return w.refs;
}

int AnalysisResult::decl_of_ref(const Expr& e) const {
  if (e.ref == RefKind::Random) return e.ref_index;
  for (std::size_t i = 0; i < decls.size(); ++i)
    if (decls[i].kind == Decl::Kind::Number && decls[i].open_type == e.ref_index) return static_cast<int>(i);
  return -1;
}

AnalysisResult analyze(const TypedModel& tm) {
  AnalysisResult a;
  const auto& m = tm.model;
  for (std::size_t i = 0; i < m.random_fns.size(); ++i) {
    Decl d;
    d.kind = Decl::Kind::Random;
    d.index = static_cast<int>(i);
    d.name = m.random_fns[i].name;
    d.body = m.random_fns[i].body.get();
    d.params = m.random_fns[i].params;
    a.decls.push_back(d);
  }
  for (std::size_t i = 0; i < m.number_stmts.size(); ++i) {
    Decl d;
    d.kind = Decl::Kind::Number;
    d.index = static_cast<int>(i);
    d.name = "#" + m.number_stmts[i].type_name;
    d.body = m.number_stmts[i].body.get();
    d.open_type = m.number_stmts[i].type;
    a.decls.push_back(d);
  }
  a.num_templates = static_cast<int>(a.decls.size());

  for (std::size_t i = 0; i < m.evidence.size(); ++i) {
    const Expr& lhs = *m.evidence[i].lhs;
    if (constant_instance(lhs)) {
      a.pinned_evidence.push_back(template_of(tm, lhs));
      a.obs_site.push_back(-1);
      continue;
    }
    Decl d;
    d.kind = Decl::Kind::ObsSite;
    d.index = static_cast<int>(i);
    d.name = "obs[" + std::to_string(i) + "]";
    d.body = &lhs;
    a.pinned_evidence.push_back(-1);
    a.obs_site.push_back(static_cast<int>(a.decls.size()));
    a.decls.push_back(d);
  }
  for (std::size_t i = 0; i < m.queries.size(); ++i) {
    const Expr& q = *m.queries[i].expr;
    if (constant_instance(q)) {
      a.query_site.push_back(-1);
      continue;
    }
    Decl d;
    d.kind = Decl::Kind::QuerySite;
    d.index = static_cast<int>(i);
    d.name = "query[" + std::to_string(i) + "]";
    d.body = &q;
    a.query_site.push_back(static_cast<int>(a.decls.size()));
    a.decls.push_back(d);
  }

  for (const Decl& d : a.decls) {
    FvWalker w{tm, {}, {}};
    // An obs site's target instance is itself a parent read along the path.
    w.walk(*d.body, false);
    DeclInfo info;
    info.fv = std::move(w.refs);
    info.switching = std::move(w.switching);
    a.info.push_back(std::move(info));
  }

  a.static_children.assign(a.num_templates, {});
  for (std::size_t c = 0; c < a.decls.size(); ++c) {
    for (const VarRef& r : a.info[c].fv) {
      StaticEdge e;
      e.child = static_cast<int>(c);
      e.mapping = r.args;
      e.switching = a.info[c].in_switching(r.key);
      e.key = r.key;
      a.static_children[r.tmpl].push_back(e);
    }
  }

  a.tracked.assign(a.num_templates, false);
  for (int t = 0; t < a.num_templates; ++t) {
    const Decl& d = a.decls[t];
    for (const auto& p : d.params)
      if (p.type.kind == fe::Type::Kind::Object && tm.open(p.type.obj)) a.tracked[t] = true;
  }

  a.conjugacy.assign(a.num_templates, {});
  a.gibbs.assign(a.num_templates, GibbsKind::None);
  for (int t = 0; t < a.num_templates; ++t) {
    const Decl& d = a.decls[t];
    if (d.kind == Decl::Kind::Random) {
      const Conjugacy fam = family_of(tm, *d.body);
      if (fam != Conjugacy::None) {
        bool ok = true;
        std::vector<int> kids;
        for (const StaticEdge& e : a.static_children[t]) {
          if (!conjugate_child(tm, a, fam, t, e.child)) {
            ok = false;
            break;
          }
          if (a.decls[e.child].kind != Decl::Kind::QuerySite &&
              std::find(kids.begin(), kids.end(), e.child) == kids.end())
            kids.push_back(e.child);
        }
        if (ok) a.conjugacy[t] = {fam, kids};
      }
    }
    if (a.conjugacy[t].kind != Conjugacy::None)
      a.gibbs[t] = GibbsKind::Conjugate;
    else if (finite_domain(tm, d))
      a.gibbs[t] = GibbsKind::Finite;
  }
  return a;
}

std::string gibbs_ineligible(const TypedModel& tm, const AnalysisResult& a) {
  for (int t = 0; t < a.num_templates; ++t) {
    if (a.gibbs[t] != GibbsKind::None) continue;
    const Decl& d = a.decls[t];
    // Templates whose every instance is observed are never resampled.
    bool all_pinned = false;
    if (d.kind == Decl::Kind::Random) {
      long long instances = 1;
      bool finite = true;
      for (const auto& p : d.params) {
        if (tm.open(p.type.obj)) finite = false;
        instances *= static_cast<long long>(tm.types[p.type.obj].objects.size());
      }
      std::set<std::string> pinned;
      for (std::size_t i = 0; i < tm.model.evidence.size(); ++i)
        if (a.pinned_evidence[i] == t) pinned.insert(fe::print_expr(*tm.model.evidence[i].lhs));
      all_pinned = finite && static_cast<long long>(pinned.size()) == instances;
    }
    if (!all_pinned) return d.name;
  }
  return "";
}

namespace {
nlohmann::ordered_json arg_json(const TypedModel& tm, const Decl& child, const ArgMap& m, int parent_param_type) {
  switch (m.kind) {
    case ArgMap::Kind::Param: return nlohmann::ordered_json{{"param", child.params[m.param].name}};
    case ArgMap::Kind::Constant: return nlohmann::ordered_json{{"const", tm.object_name(parent_param_type, m.obj)}};
    case ArgMap::Kind::Any: break;
  }
  return "any";
}
}  // namespace

std::string AnalysisResult::to_json(const TypedModel& tm) const {
  nlohmann::ordered_json out;
  out["templates"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const Decl& d = decls[i];
    nlohmann::ordered_json j;
    j["name"] = d.name;
    j["kind"] = d.kind == Decl::Kind::Random   ? "random"
                : d.kind == Decl::Kind::Number ? "number"
                : d.kind == Decl::Kind::ObsSite ? "obs_site"
                                                 : "query_site";
    std::vector<std::string> fv;
    std::vector<std::string> sw;
    for (const auto& r : info[i].fv) {
      fv.push_back(r.key);
      if (info[i].in_switching(r.key)) sw.push_back(r.key);
    }
    j["free_vars"] = fv;
    j["switching"] = sw;
    if (d.is_template()) {
      j["tracked"] = static_cast<bool>(tracked[i]);
      j["conjugacy"] = conjugacy_name(conjugacy[i].kind);
      j["gibbs"] = gibbs[i] == GibbsKind::Conjugate ? "conjugate" : gibbs[i] == GibbsKind::Finite ? "finite" : "none";
      nlohmann::ordered_json kids = nlohmann::ordered_json::array();
      for (const StaticEdge& e : static_children[i]) {
        nlohmann::ordered_json k;
        k["child"] = decls[e.child].name;
        k["via"] = e.key;
        nlohmann::ordered_json args = nlohmann::ordered_json::array();
        for (std::size_t p = 0; p < e.mapping.size(); ++p) {
          const int ptype = d.params[p].type.obj;
          args.push_back(arg_json(tm, decls[e.child], e.mapping[p], ptype));
        }
        k["args"] = args;
        k["contingent"] = e.switching;
        kids.push_back(k);
      }
      j["static_children"] = kids;
    }
    out["templates"].push_back(j);
  }
  return out.dump(2);
}

}  // namespace blogc::an
