#pragma once

// Reference interpreter over explicit possible worlds. Shares the AST and the
// distribution kernels with the compiler and nothing else.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "blogc/frontend/validate.hpp"
#include "blogc/runtime/rng.hpp"
#include "blogc/runtime/stats.hpp"

namespace blogc::interp {

class InterpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A variable instance, or an evidence / query site.
struct Id {
  enum Kind : std::uint8_t { Var, Obs, Query };
  Kind kind = Var;
  int index = 0;  // template, evidence or query index
  std::uint8_t n = 0;
  std::array<int, 4> args{};

  bool operator<(const Id& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (index != o.index) return index < o.index;
    if (n != o.n) return n < o.n;
    return args < o.args;
  }
  bool operator==(const Id& o) const { return kind == o.kind && index == o.index && n == o.n && args == o.args; }
  bool operator!=(const Id& o) const { return !(*this == o); }
  bool site() const { return kind != Var; }
};

struct Value {
  bool is_real = false;
  long long i = 0;
  double r = 0.0;

  static Value integer(long long v) { return {false, v, 0.0}; }
  static Value real(double v) { return {true, 0, v}; }
  double num() const { return is_real ? r : static_cast<double>(i); }
  bool truthy() const { return is_real ? r != 0.0 : i != 0; }
  bool operator==(const Value& o) const { return is_real || o.is_real ? num() == o.num() : i == o.i; }
  bool operator!=(const Value& o) const { return !(*this == o); }
};

/// One parent read while evaluating a declaration.
struct Read {
  Id id;
  bool switching = false;
};

/// The distribution a declaration evaluates to in a given world.
struct DistInst {
  enum Kind { Point, Bernoulli, Gaussian, Poisson, Beta, Gamma, UniformInt, UniformChoice, Categorical };
  Kind kind = Point;
  Value point;
  double p0 = 0.0, p1 = 0.0;
  long long lo = 0, hi = 0;  // UniformInt range; UniformChoice size in hi
  std::vector<Value> keys;
  std::vector<double> weights;
};

/// Explicit world: instantiated variables and their values. Sites are not stored.
using WorldMap = std::map<Id, Value>;

/// Reads of a missing variable go through this hook; it must return a value
/// (sampling, forcing or looking it up) or throw.
using Fetch = std::function<Value(const Id&)>;

class Semantics {
 public:
  explicit Semantics(const fe::TypedModel& tm);

  const fe::TypedModel& model() const { return tm_; }
  int num_templates() const { return static_cast<int>(tmpls_.size()); }
  const std::string& template_name(int t) const { return tmpls_[t].name; }
  fe::Type type_of(const Id& id) const { return tmpls_[id.index].ret; }
  bool tracked(const Id& id) const { return id.kind == Id::Var && tmpls_[id.index].tracked; }
  bool pinned(const Id& id) const { return id.kind == Id::Var && pinned_.count(id) != 0; }
  bool selectable(const Id& id) const { return id.kind == Id::Var && !pinned(id); }
  const std::map<Id, Value>& pinned_values() const { return pinned_; }

  /// Evidence targets, sites and static query instances, in model order.
  const std::vector<Id>& roots() const { return roots_; }
  const std::vector<Id>& sites() const { return sites_; }
  /// Query q: its site id, or the instance it names.
  const Id& query_target(int q) const { return query_ids_[q]; }
  std::string query_text(int q) const;
  fe::Type query_type(int q) const;
  int num_queries() const { return static_cast<int>(query_ids_.size()); }

  std::string name(const Id& id) const;
  bool parse_name(const std::string& s, Id& out) const;
  std::string show(const fe::Type& t, const Value& v) const;
  std::string show(const Id& id, const Value& v) const { return show(type_of(id), v); }
  bool parse_value(const Id& id, const std::string& s, Value& out) const;

  /// Distribution of variable `id`; parents are read through `fetch`.
  DistInst distribution(const Id& id, const Fetch& fetch, std::vector<Read>* reads) const;
  /// Log-likelihood of a site (0 for queries, indicator for evidence).
  double site_loglik(const Id& site, const Fetch& fetch, std::vector<Read>* reads) const;
  /// Value of query q.
  Value query_value(int q, const Fetch& fetch) const;
  /// For an evidence site: the instance its left-hand side names and the observed value.
  Id obs_target(const Id& site, const Fetch& fetch, std::vector<Read>* reads) const;
  Value observed(int evidence) const { return observed_[evidence]; }

  double loglik(const DistInst& d, const Value& v) const;
  Value sample(const DistInst& d, rt::Rng& rng) const;
  /// Finite support of d, or false when continuous or unbounded.
  bool support(const DistInst& d, std::vector<Value>& out) const;

  /// Instances of template t in a world whose number variables are read via `fetch`.
  void instances(int t, const Fetch& fetch, std::vector<Id>& out) const;

  /// Keys read in switching positions by a template, evidence or query body.
  const std::set<std::string>& switching_keys(const Id& id) const;

 private:
  struct Tmpl {
    std::string name;
    const fe::Expr* body = nullptr;
    std::vector<fe::Param> params;
    fe::Type ret;
    bool tracked = false;
    int counts = -1;  // type counted by a number statement
    std::set<std::string> sw;
  };
  struct Ctx;

  Value ev(const fe::Expr& e, Ctx& c) const;
  DistInst tail(const fe::Expr& e, Ctx& c) const;
  Value read(const Id& id, const fe::Expr& node, Ctx& c) const;
  long long set_size(const fe::Expr& set, Ctx& c) const;
  Value coerce(const fe::Type& t, const Value& v) const;
  Id instance_of(const fe::Expr& e, Ctx& c) const;
  const std::string& key_of(const fe::Expr& e) const;
  void collect_switching(const fe::Expr& e, bool sw, std::set<std::string>& out) const;
  long long parse_object(int type, const std::string& s) const;

  const fe::TypedModel& tm_;
  std::vector<Tmpl> tmpls_;
  std::vector<int> number_tmpl_;  // per type: template index of #T or -1
  std::map<Id, Value> pinned_;
  std::vector<Id> roots_;
  std::vector<Id> sites_;
  std::vector<Id> query_ids_;
  std::vector<Value> observed_;
  std::vector<std::set<std::string>> obs_sw_, query_sw_;
  mutable std::map<const fe::Expr*, std::string> keys_;
};

// ---- world structure ---------------------------------------------------------

/// Log Pr[w]: every instantiated variable and every site.
double log_prob(const Semantics& s, const WorldMap& w);

/// Parent reads of a variable or site, evaluated in w (all parents present).
std::vector<Read> parents_in(const Semantics& s, const WorldMap& w, const Id& id);

/// Number of selectable variables.
std::size_t world_size(const Semantics& s, const WorldMap& w);

struct Structure {
  std::map<Id, std::set<Id>> ch;    // Ch_w(X), sites included
  std::map<Id, std::set<Id>> cont;  // {Y in Ch_w(X) : X read through a switching key of Y}
};
Structure structure(const Semantics& s, const WorldMap& w);

/// The world reached from the roots and the untracked variables of `w`,
/// following parents; throws when a parent is missing.
std::set<Id> supported_closure(const Semantics& s, const WorldMap& w);

// ---- engines -------------------------------------------------------------------

struct RunResult {
  rt::RunStats stats;
  std::vector<std::unique_ptr<rt::QueryStat>> queries;
  std::string to_json() const;
};

RunResult interp_lw(const fe::TypedModel& tm, std::uint64_t n, std::uint64_t seed, bool eager = false);
RunResult interp_pmh_full(const fe::TypedModel& tm, std::uint64_t n, std::uint64_t seed);

/// One full-world Metropolis-Hastings transition.
struct FullStep {
  Id var;
  WorldMap proposed;  // w'
  double log_alpha = 0.0;
  std::size_t w_old = 0, w_new = 0;
};

/// Chooses the value of a variable a proposal instantiates.
using MakeValue = std::function<Value(const Id&, const DistInst&)>;

/// Build w' from w by setting x to v_new and re-establishing self-support
/// from the roots and the untracked variables (plus `extra_seeds`, which are
/// instantiated first). New variables take values from `make`.
FullStep full_world_proposal(const Semantics& s, const WorldMap& w, const Id& x, const Value& v_new,
                             const MakeValue& make, const std::vector<Id>& extra_seeds = {},
                             std::uint64_t* evals = nullptr);

struct ExactResult {
  std::vector<std::string> query_text;
  std::vector<std::map<std::string, double>> dist;  // per query, label -> probability
  double evidence_prob = 0.0;
  std::uint64_t worlds = 0;
};

/// Exact posterior by summing over minimal self-supporting worlds.
ExactResult enumerate_exact(const fe::TypedModel& tm, std::uint64_t max_worlds = 50000000);

struct ReplayReport {
  std::uint64_t steps = 0;
  std::uint64_t accepted = 0;
  std::uint64_t alpha_checks = 0;
  std::uint64_t state_checks = 0;
  double max_rel_err = 0.0;
  std::string failure;
  bool ok() const { return failure.empty(); }
  std::string to_json() const;
};

/// Re-run a compiled program's proposal trace with full-world acceptance ratios and
/// compare alpha, |w|, and (when recorded) values, cnt, Ch and Cont.
ReplayReport check_replay(const fe::TypedModel& tm, const std::string& trace_path, std::uint64_t max_steps = 0);

}  // namespace blogc::interp
