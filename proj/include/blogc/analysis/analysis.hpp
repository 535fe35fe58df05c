#pragma once

#include <set>
#include <string>
#include <vector>

#include "blogc/frontend/validate.hpp"

namespace blogc::an {

using fe::Expr;
using fe::TypedModel;

/// Something that owns a declaration C_X: a random function, a number
/// statement, or an evidence/query site whose target is not a fixed instance.
struct Decl {
  enum class Kind { Random, Number, ObsSite, QuerySite };
  Kind kind = Kind::Random;
  int index = -1;  // random fn, number stmt, evidence or query index
  std::string name;
  const Expr* body = nullptr;
  std::vector<fe::Param> params;
  int open_type = -1;  // the type a number statement counts

  bool is_template() const { return kind == Kind::Random || kind == Kind::Number; }
  bool is_site() const { return !is_template(); }
};

/// How one argument of a parent reference relates to the child instance.
struct ArgMap {
  enum class Kind { Param, Constant, Any };
  Kind kind = Kind::Any;
  int param = -1;      // child parameter index for Param
  long long obj = -1;  // object index for Constant
  bool operator==(const ArgMap& o) const { return kind == o.kind && param == o.param && obj == o.obj; }
};

/// A syntactic reference to a random variable inside a declaration.
struct VarRef {
  int tmpl = -1;             // template (decl) index of the referenced variable
  const Expr* node = nullptr;
  std::string key;           // printed form; equal keys denote the same variable
  std::vector<ArgMap> args;
};

struct DeclInfo {
  std::vector<VarRef> fv;          // FV(C_X), unique by key in evaluation order
  std::set<std::string> switching; // keys in the switching approximation
  bool in_switching(const std::string& key) const { return switching.count(key) != 0; }
};

/// One element of the static children bound: child decl whose body refers
/// to the parent template with the given argument mapping.
struct StaticEdge {
  int child = -1;
  std::vector<ArgMap> mapping;
  bool switching = false;
  std::string key;
};

enum class Conjugacy { None, BetaBernoulli, GammaPoisson, GaussianGaussianMean };
const char* conjugacy_name(Conjugacy c);

struct ConjugacyTag {
  Conjugacy kind = Conjugacy::None;
  std::vector<int> children;  // decls that make the pair
};

/// Gibbs eligibility of a template.
enum class GibbsKind { None, Conjugate, Finite };

struct AnalysisResult {
  std::vector<Decl> decls;            // templates first (random fns, number stmts), then sites
  std::vector<DeclInfo> info;         // per decl
  std::vector<std::vector<StaticEdge>> static_children;  // per template
  std::vector<ConjugacyTag> conjugacy;  // per template
  std::vector<bool> tracked;            // per template: reference counted
  std::vector<GibbsKind> gibbs;         // per template
  std::vector<int> pinned_evidence;     // per evidence stmt: template index or -1 when it is a site
  std::vector<int> obs_site;            // per evidence stmt: decl index of the site or -1
  std::vector<int> query_site;          // per query: decl index of the site or -1

  int num_templates = 0;
  int random_decl(int fn) const { return fn; }
  int number_decl(int stmt) const;
  int decl_of_ref(const Expr& e) const;  // template index for a resolved Random/Number node

  std::string to_json(const TypedModel& tm) const;
};

/// FV(e): random-variable references reachable in e, fixed functions
/// excluded, unique by printed key.
std::vector<VarRef> free_vars(const TypedModel& tm, const Expr& e, const std::vector<fe::Param>& params);

AnalysisResult analyze(const TypedModel& tm);

/// Gibbs needs every non-evidence template to be conjugate or finite. Returns
/// the name of the first template that is neither, or "" when all qualify.
std::string gibbs_ineligible(const TypedModel& tm, const AnalysisResult& a);

/// True when a constant-argument reference: every argument is an object literal.
bool constant_instance(const Expr& e);

}  // namespace blogc::an
