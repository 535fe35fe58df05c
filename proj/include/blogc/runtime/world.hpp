#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "blogc/runtime/distributions.hpp"
#include "blogc/runtime/rng.hpp"

namespace blogc::rt {

/// How a getter resolves a variable: LW memo (generation counter), the
/// current MH world, or the proposal cache.
enum class Access { Lw, Cur, Prop };

/// Internal-consistency violation in the runtime or the generated program.
class RuntimeFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Var;

/// Unordered set of variables with linear membership. Children and
/// contingent sets stay small in practice, so a flat vector wins.
class VarSet {
 public:
  bool insert(Var* v) {
    if (contains(v)) return false;
    items_.push_back(v);
    return true;
  }
  bool erase(Var* v) {
    auto it = std::find(items_.begin(), items_.end(), v);
    if (it == items_.end()) return false;
    *it = items_.back();
    items_.pop_back();
    return true;
  }
  bool contains(const Var* v) const { return std::find(items_.begin(), items_.end(), v) != items_.end(); }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  void clear() { items_.clear(); }
  const std::vector<Var*>& items() const { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::vector<Var*> items_;
};

enum class VarKind : std::uint8_t {
  Ordinary,   // selectable random variable
  Pinned,     // evidence instance with a fixed value
  ObsSite,    // evidence whose target depends on random arguments
  QuerySite,  // query expression that is not a single instance
};

/// A parent reached along the current execution path of a declaration.
struct ParentRef {
  Var* var;
  bool switching;
};

/// Abstract random variable. Generated code derives one class per function
/// template and specialises every entry point.
class Var {
 public:
  virtual ~Var() = default;

  virtual std::string name() const = 0;
  virtual std::string value_string() const = 0;
  virtual std::string cached_string() const = 0;
  virtual std::uint64_t value_bits() const = 0;
  virtual std::uint64_t cached_bits() const = 0;
  virtual void set_cached_bits(std::uint64_t bits) = 0;

  // MH entry points.
  virtual void propose() = 0;
  virtual double loglik_cur() = 0;
  virtual double loglik_prop() = 0;
  virtual void add_to_ch() = 0;
  virtual void del_from_ch() = 0;
  virtual void accept_value() = 0;
  virtual void commit() = 0;
  virtual void parents_cur(std::vector<ParentRef>& out) = 0;
  virtual void parents_prop(std::vector<ParentRef>& out) = 0;
  virtual void static_children(std::vector<Var*>&) {}
  virtual void static_contingents(std::vector<Var*>&) {}
  virtual void instantiate() = 0;

  // Gibbs entry points.
  virtual bool conjugate() const { return false; }
  virtual void propose_conjugate() {}
  virtual void conj_accumulate(Var*, ConjugateStats&) {}
  virtual std::size_t domain_size() { return 0; }
  virtual void propose_candidate(std::size_t) {}
  virtual double prior_loglik_cached() { return kNegInf; }

  bool selectable() const { return kind == VarKind::Ordinary; }
  bool is_site() const { return kind == VarKind::ObsSite || kind == VarKind::QuerySite; }

  VarKind kind = VarKind::Ordinary;
  bool tracked = false;  // reference counted (open-universe indexed)
  bool active = false;   // instantiated in the current MH world
  int active_index = -1;
  int cnt = 0;
  int pins = 0;
  std::uint64_t lw_mark = 0;
  std::uint64_t cache_mark = 0;
  std::uint64_t scan_mark = 0;
  std::uint64_t delta_mark = 0;
  std::uint64_t visit_mark = 0;
  int delta = 0;
  bool removed = false;
  VarSet ch;
  VarSet cont;
};

/// Growable table of variable cells with stable addresses. The logical
/// length follows the number variable; capacity only grows unless shrunk.
template <class Cell>
class DynamicTable {
 public:
  template <class Factory>
  void ensure(std::size_t n, Factory&& make) {
    while (cells_.size() < n) cells_.push_back(make(cells_.size()));
  }
  Cell& operator[](std::size_t i) { return *cells_[i]; }
  const Cell& operator[](std::size_t i) const { return *cells_[i]; }
  std::size_t capacity() const { return cells_.size(); }

  /// Drop trailing cells at index >= live that `idle` reports unused.
  template <class Idle, class OnDrop>
  void shrink(std::size_t live, Idle&& idle, OnDrop&& on_drop) {
    while (cells_.size() > live && idle(*cells_.back())) {
      on_drop(*cells_.back());
      cells_.pop_back();
    }
  }

 private:
  std::vector<std::unique_ptr<Cell>> cells_;
};

struct Counters {
  std::uint64_t likelihood_evals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  // Debug-oracle checks performed.
  std::uint64_t consistency_checks = 0;
  std::uint64_t atomicity_checks = 0;
  std::uint64_t memo_checks = 0;
  std::uint64_t conjugate_checks = 0;
};

/// Per-step record handed to a trace observer (debug oracle runs).
struct StepRecord {
  Var* var = nullptr;
  double log_alpha = 0.0;
  bool has_alpha = true;
  std::size_t w_old = 0;
  std::size_t w_new = 0;
  bool accepted = false;
  std::vector<std::pair<Var*, std::string>> proposed;
};

/// The world registry: active variables, generation counters, proposal
/// scratch state, counters, and the generic PMH / Gibbs transitions.
class World {
 public:
  Rng rng;
  Counters counters;
  Posterior posterior;  // set by conjugate draws, read by check_conjugate
  std::uint64_t gen = 0;   // LW generation
  std::uint64_t pgen = 0;  // proposal generation
  double log_weight = 0.0;
  bool impossible = false;
  bool acu = true;
  bool rc = true;
  bool debug = false;
  bool initializing = false;  // Cur getters may instantiate only while set

  std::vector<Var*> active_vars;
  std::vector<Var*> proposed;
  std::vector<Var*> roots;
  std::vector<Var*> all;
  StepRecord* record = nullptr;

  // ---- generation / memo --------------------------------------------------

  void bump_generation() { ++gen; }
  void bump_proposal() {
    ++pgen;
    proposed.clear();
    impossible = false;
  }

  void register_var(Var* v) { all.push_back(v); }
  void unregister_var(Var* v) {
    auto it = std::find(all.begin(), all.end(), v);
    if (it != all.end()) {
      *it = all.back();
      all.pop_back();
    }
  }

  // ---- membership -----------------------------------------------------------

  void activate(Var* v) {
    if (v->active) return;
    v->active = true;
    if (v->selectable()) {
      v->active_index = static_cast<int>(active_vars.size());
      active_vars.push_back(v);
    }
  }

  void deactivate(Var* v) {
    if (!v->active) return;
    v->active = false;
    if (v->active_index >= 0) {
      Var* last = active_vars.back();
      active_vars[v->active_index] = last;
      last->active_index = v->active_index;
      active_vars.pop_back();
      v->active_index = -1;
    }
  }

  /// Forget the whole MH world (used when initialisation must restart).
  void reset_all() {
    for (Var* v : all) {
      v->active = false;
      v->active_index = -1;
      v->cnt = 0;
      v->pins = 0;
      v->removed = false;
      v->delta_mark = 0;
      v->ch.clear();
      v->cont.clear();
    }
    active_vars.clear();
    roots.clear();
    pending_.clear();
    proposed.clear();
    ++pgen;
  }

  [[noreturn]] void not_instantiated(const Var* v) const {
    throw RuntimeFault("read of uninstantiated variable " + v->name() + " outside a proposal");
  }

  void add_root(Var* v, bool pin) {
    roots.push_back(v);
    if (pin) ++v->pins;
  }

  // ---- reference counting ---------------------------------------------------

  void inc_cnt(Var* v) { ++v->cnt; }

  void dec_cnt(Var* v) {
    if (v->cnt <= 0) throw RuntimeFault("dec_cnt below zero on " + v->name());
    if (--v->cnt == 0 && v->pins == 0) pending_.push_back(v);
  }

  /// Deferred removal of tracked variables whose count dropped to zero.
  void collect() {
    while (!pending_.empty()) {
      Var* v = pending_.back();
      pending_.pop_back();
      if (!v->active || v->cnt != 0 || v->pins != 0) continue;
      v->del_from_ch();
      deactivate(v);
    }
  }

  // ---- children / contingent sets -----------------------------------------

  bool ch_add(Var* parent, Var* child) { return parent->ch.insert(child); }
  bool ch_del(Var* parent, Var* child) { return parent->ch.erase(child); }
  void cont_add(Var* parent, Var* child) { parent->cont.insert(child); }
  void cont_del(Var* parent, Var* child) { parent->cont.erase(child); }

  /// Add `v` to a small parent list unless present.
  static void push_unique(Var** ps, int& n, Var* v) {
    for (int i = 0; i < n; ++i)
      if (ps[i] == v) return;
    ps[n++] = v;
  }

  // ---- proposal cache -------------------------------------------------------

  void note_proposed(Var* v) { proposed.push_back(v); }

  // ---- transitions ------------------------------------------------------------

  Var* pick_variable() {
    if (active_vars.empty()) throw RuntimeFault("no selectable variable in the world");
    return active_vars[rng.index(active_vars.size())];
  }

  /// One parental Metropolis-Hastings transition.
  bool pmh_step() {
    Var* x = pick_variable();
    bump_proposal();
    x->propose();
    if (impossible) return finish_reject(x, kNegInf, active_vars.size(), active_vars.size());

    const std::vector<Var*>& children = children_of(x);
    double log_ratio = 0.0;
    scored_.clear();
    for (Var* c : children) {
      if (c->kind == VarKind::QuerySite || !c->active) continue;
      const double before = c->loglik_cur();
      if (!std::isfinite(before)) throw RuntimeFault("non-finite current likelihood for " + c->name());
      const double after = c->loglik_prop();
      if (std::isnan(after) || after == std::numeric_limits<double>::infinity())
        throw RuntimeFault("invalid proposed likelihood for " + c->name());
      counters.likelihood_evals += 2;
      scored_.push_back({c, after - before});
    }

    std::size_t w_old = 0;
    std::size_t w_new = 0;
    if (rc) {
      w_old = active_vars.size();
      w_new = predict_world_size(x, w_old);
    } else {
      w_old = scan_world(false);
      w_new = scan_world(true);
    }
    for (const auto& s : scored_) {
      Var* c = s.first;
      const bool leaves = rc ? c->removed : (c->tracked && c->scan_mark != scan_id_);
      if (!leaves) log_ratio += s.second;
    }
    const double log_alpha = std::log(static_cast<double>(w_old)) - std::log(static_cast<double>(w_new)) + log_ratio;
    if (impossible || std::isnan(log_alpha)) return finish_reject(x, kNegInf, w_old, w_new);

    const bool accept = log_alpha >= 0.0 || std::log(rng.uniform01()) < log_alpha;
    if (record) fill_record(x, log_alpha, true, w_old, w_new, accept);
    if (!accept) {
      ++counters.rejected;
      return false;
    }
    accept_proposal(x);
    ++counters.accepted;
    if (debug && rc && active_vars.size() != w_new)
      throw RuntimeFault("predicted |w'| = " + std::to_string(w_new) + " but world has " +
                         std::to_string(active_vars.size()) + " variables after accepting " + x->name());
    return true;
  }

  /// One Gibbs transition: conjugate posterior draw or support enumeration.
  void gibbs_step() {
    Var* x = pick_variable();
    if (x->conjugate()) {
      bump_proposal();
      x->propose_conjugate();
      if (debug) check_conjugate(x);
    } else {
      const std::size_t n = x->domain_size();
      if (n == 0) throw RuntimeFault("Gibbs cannot enumerate " + x->name());
      weights_.assign(n, kNegInf);
      saved_.clear();
      saved_offsets_.assign(n + 1, 0);
      for (std::size_t k = 0; k < n; ++k) {
        bump_proposal();
        x->propose_candidate(k);
        saved_offsets_[k] = saved_.size();
        double lw = x->prior_loglik_cached();
        if (lw != kNegInf && !impossible) {
          for (Var* c : children_of(x)) {
            if (c->kind == VarKind::QuerySite || !c->active) continue;
            lw += c->loglik_prop();
            ++counters.likelihood_evals;
          }
          if (impossible) lw = kNegInf;
        }
        weights_[k] = std::isnan(lw) ? kNegInf : lw;
        for (Var* v : proposed) saved_.push_back({v, v->cached_bits()});
      }
      saved_offsets_[n] = saved_.size();
      const std::size_t pick = sample_log_categorical(rng, weights_);
      bump_proposal();
      for (std::size_t i = saved_offsets_[pick]; i < saved_offsets_[pick + 1]; ++i) {
        Var* v = saved_[i].first;
        v->cache_mark = pgen;
        v->set_cached_bits(saved_[i].second);
        proposed.push_back(v);
      }
    }
    // Query sites are not scored; instantiate what they read under the new value.
    for (Var* c : contingents_of(x))
      if (c->kind == VarKind::QuerySite && c->active) {
        parents_.clear();
        c->parents_prop(parents_);
      }
    std::size_t w_old = active_vars.size();
    std::size_t w_new = rc ? predict_world_size(x, w_old) : w_old;
    if (record) fill_record(x, 0.0, false, w_old, w_new, true);
    accept_proposal(x);
    ++counters.accepted;
  }

  // ---- full scans (no-RC baseline and debug) -------------------------------

  /// Count selectable variables reachable from the roots and from untracked
  /// active variables, following parents in the current or proposed world.
  std::size_t scan_world(bool proposal) {
    ++scan_id_;
    stack_.clear();
    for (Var* r : roots) stack_.push_back(r);
    for (Var* v : active_vars)
      if (!v->tracked) stack_.push_back(v);
    if (proposal)
      for (Var* n : proposed)
        if (!n->active && !n->tracked) stack_.push_back(n);
    std::size_t count = 0;
    while (!stack_.empty()) {
      Var* v = stack_.back();
      stack_.pop_back();
      if (v->scan_mark == scan_id_) continue;
      v->scan_mark = scan_id_;
      if (v->selectable()) ++count;
      parents_.clear();
      if (proposal)
        v->parents_prop(parents_);
      else
        v->parents_cur(parents_);
      for (const ParentRef& p : parents_)
        if (p.var->scan_mark != scan_id_) stack_.push_back(p.var);
    }
    return count;
  }

  /// Rebuild the slice after an accept when RC is off: tracked variables not
  /// reachable from the roots leave the world.
  void rebuild_slice() {
    scan_world(false);
    drop_.clear();
    for (Var* v : active_vars)
      if (v->tracked && v->scan_mark != scan_id_) drop_.push_back(v);
    for (Var* v : drop_) {
      if (acu) v->del_from_ch();
      deactivate(v);
    }
  }

  // ---- debug checks ---------------------------------------------------------

  /// Order-sensitive hash of every registered variable's world state.
  std::uint64_t state_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
      h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    for (const Var* v : active_vars) mix(reinterpret_cast<std::uintptr_t>(v));
    for (const Var* v : all) {
      // Idle cells (e.g. capacity grown by a rejected proposal) are not world state.
      if (!v->active && v->cnt == 0 && v->pins == 0 && v->ch.empty() && v->cont.empty()) continue;
      mix(reinterpret_cast<std::uintptr_t>(v));
      mix(v->active ? 1 : 0);
      if (v->active) mix(v->value_bits());
      mix(static_cast<std::uint64_t>(v->cnt));
      mix(static_cast<std::uint64_t>(v->active_index + 1));
      for (const Var* c : v->ch) mix(reinterpret_cast<std::uintptr_t>(c) * 3);
      for (const Var* c : v->cont) mix(reinterpret_cast<std::uintptr_t>(c) * 5);
    }
    return h;
  }

  /// The closed-form conditional of a conjugate draw and the Markov blanket
  /// density Pr[x] * prod Pr[child | x] must differ by a constant in x.
  void check_conjugate(Var* x) {
    const std::uint64_t drawn = x->cached_bits();
    const double v = std::bit_cast<double>(drawn);
    double probes[3] = {v, v, v};
    switch (posterior.family) {
      case Posterior::Family::Gaussian: probes[1] = v - std::sqrt(posterior.b); probes[2] = v + 2.0 * std::sqrt(posterior.b); break;
      case Posterior::Family::Beta: probes[1] = 0.5 * v; probes[2] = 0.5 * (1.0 + v); break;
      case Posterior::Family::Gamma: probes[1] = 0.5 * v; probes[2] = 2.0 * v; break;
      case Posterior::Family::None: throw RuntimeFault("conjugate draw of " + x->name() + " reported no posterior");
    }
    double first = 0.0;
    for (int k = 0; k < 3; ++k) {
      x->set_cached_bits(std::bit_cast<std::uint64_t>(probes[k]));
      double blanket = x->prior_loglik_cached();
      for (Var* c : children_of(x))
        if (c->kind != VarKind::QuerySite && c->active) blanket += c->loglik_prop();
      const double diff = posterior.logpdf(probes[k]) - blanket;
      if (!std::isfinite(diff)) throw RuntimeFault("non-finite conjugate check for " + x->name());
      if (k == 0) first = diff;
      else if (std::abs(diff - first) > 1e-9 * std::max(1.0, std::abs(blanket)))
        throw RuntimeFault("closed-form conditional of " + x->name() + " disagrees with its Markov blanket by " +
                           std::to_string(diff - first));
    }
    x->set_cached_bits(drawn);
    posterior = {};
    ++counters.conjugate_checks;
  }

  /// Recompute parents of every active variable from scratch and compare
  /// against the maintained Ch, Cont and cnt. Throws on the first mismatch.
  void check_consistency() {
    ++counters.consistency_checks;
    std::vector<Var*> live;
    for (Var* v : all)
      if (v->active) live.push_back(v);
    struct Edge {
      Var* parent;
      Var* child;
      bool switching;
    };
    std::vector<Edge> edges;
    for (Var* v : live) {
      parents_.clear();
      v->parents_cur(parents_);
      for (const ParentRef& p : parents_) {
        if (!p.var->active)
          throw RuntimeFault("world not self-supporting: " + v->name() + " reads inactive " + p.var->name());
        bool dup = false;
        for (Edge& e : edges)
          if (e.parent == p.var && e.child == v) {
            e.switching = e.switching || p.switching;
            dup = true;
          }
        if (!dup) edges.push_back({p.var, v, p.switching});
      }
    }
    std::size_t selectable = 0;
    for (Var* v : live) {
      if (v->selectable()) ++selectable;
      std::size_t n_ch = 0;
      std::size_t n_cont = 0;
      for (const Edge& e : edges) {
        if (e.parent != v) continue;
        ++n_ch;
        if (acu && !v->ch.contains(e.child))
          throw RuntimeFault("Ch(" + v->name() + ") is missing " + e.child->name());
        if (e.switching) {
          ++n_cont;
          if (acu && !v->cont.contains(e.child))
            throw RuntimeFault("Cont(" + v->name() + ") is missing " + e.child->name());
        }
      }
      if (acu && v->ch.size() != n_ch) throw RuntimeFault("Ch(" + v->name() + ") has stale entries");
      if (acu && v->cont.size() != n_cont) throw RuntimeFault("Cont(" + v->name() + ") has stale entries");
      if (rc && v->tracked && v->cnt != static_cast<int>(n_ch))
        throw RuntimeFault("cnt(" + v->name() + ") = " + std::to_string(v->cnt) + ", expected " + std::to_string(n_ch));
    }
    if (selectable != active_vars.size()) throw RuntimeFault("active_vars out of sync with active flags");
    if (rc) {
      for (Var* v : live)
        if (v->tracked && v->cnt == 0 && v->pins == 0)
          throw RuntimeFault("unreferenced tracked variable still active: " + v->name());
    }
  }

  // ---- children (maintained Ch, or the static bound when ACU is off) -------

  const std::vector<Var*>& children_of(Var* x) {
    if (acu) return x->ch.items();
    children_scratch_.clear();
    x->static_children(children_scratch_);
    dedup(children_scratch_);
    return children_scratch_;
  }

  const std::vector<Var*>& contingents_of(Var* x) {
    if (acu) return x->cont.items();
    cont_scratch_.clear();
    x->static_contingents(cont_scratch_);
    dedup(cont_scratch_);
    return cont_scratch_;
  }

  /// Remove repeated entries, keeping first occurrences in order.
  void dedup(std::vector<Var*>& vs) {
    ++visit_id_;
    std::size_t k = 0;
    for (Var* v : vs)
      if (v->visit_mark != visit_id_) {
        v->visit_mark = visit_id_;
        vs[k++] = v;
      }
    vs.resize(k);
  }

 private:

  void touch(Var* v, int d) {
    if (!v->tracked) return;
    if (v->delta_mark != pgen) {
      v->delta_mark = pgen;
      v->delta = 0;
      v->removed = false;
      touched_.push_back(v);
    }
    v->delta += d;
  }

  void touch_parents(Var* v, bool proposal, int d) {
    parents_.clear();
    if (proposal)
      v->parents_prop(parents_);
    else
      v->parents_cur(parents_);
    dedup_parents();
    for (const ParentRef& p : parents_) touch(p.var, d);
  }

  void dedup_parents() {
    for (std::size_t i = 0; i < parents_.size(); ++i)
      for (std::size_t j = parents_.size(); j-- > i + 1;)
        if (parents_[j].var == parents_[i].var) {
          parents_[i].switching = parents_[i].switching || parents_[j].switching;
          parents_.erase(parents_.begin() + static_cast<std::ptrdiff_t>(j));
        }
  }

  /// Dry-run of the reference-count updates an accept would perform, giving
  /// |w'| and flagging variables that would leave the world. Freshly sampled
  /// tracked variables nothing refers to in w' are flagged too and never join.
  std::size_t predict_world_size(Var* x, std::size_t w_old) {
    touched_.clear();
    contingent_now_.clear();
    for (Var* u : contingents_of(x))
      if (u->active) contingent_now_.push_back(u);
    for (Var* u : contingent_now_) {
      touch_parents(u, false, -1);
      touch_parents(u, true, +1);
    }
    for (std::size_t i = 0; i < proposed.size(); ++i) {
      Var* n = proposed[i];
      if (n == x || n->active) continue;
      touch_parents(n, true, +1);
    }
    removal_.clear();
    for (Var* n : proposed)
      if (n != x && !n->active && dead(n)) mark_removed(n);
    for (std::size_t i = 0; i < touched_.size(); ++i)
      if (dead(touched_[i])) mark_removed(touched_[i]);
    std::size_t removed = 0;
    for (std::size_t i = 0; i < removal_.size(); ++i) {
      Var* r = removal_[i];
      if (r->active) ++removed;
      // A contingent or fresh variable leaving releases its parents under the new value.
      const bool prop_side = !r->active || std::find(contingent_now_.begin(), contingent_now_.end(), r) !=
                                               contingent_now_.end();
      touch_parents(r, prop_side, -1);
      for (const ParentRef& p : parents_)
        if (dead(p.var)) mark_removed(p.var);
    }
    std::size_t added = 0;
    for (Var* n : proposed)
      if (n != x && !n->active && n->selectable() && !n->removed) ++added;
    for (Var* v : touched_)
      if (!v->removed) v->delta_mark = 0;
    return w_old + added - removed;
  }

  bool dead(Var* v) const {
    if (!v->tracked || v->removed || v->pins != 0) return false;
    if (!v->active && v->cache_mark != pgen) return false;
    return v->cnt + (v->delta_mark == pgen ? v->delta : 0) == 0;
  }

  void mark_removed(Var* v) {
    if (v->delta_mark != pgen) {
      v->delta_mark = pgen;
      v->delta = 0;
      touched_.push_back(v);
    }
    v->removed = true;
    removal_.push_back(v);
  }

  void accept_proposal(Var* x) {
    fresh_.clear();
    for (Var* n : proposed)
      if (n != x && !n->active && !(rc && n->removed)) {
        n->commit();
        activate(n);
        fresh_.push_back(n);
      }
    // Clear removal marks left over from the dry run.
    for (Var* v : touched_) {
      v->removed = false;
      v->delta_mark = 0;
    }
    touched_.clear();
    x->accept_value();
    for (Var* n : fresh_) n->add_to_ch();
    if (rc)
      collect();
    else
      rebuild_slice();
    // Invalidate the cache so later getters read committed values.
    ++pgen;
  }

  bool finish_reject(Var* x, double log_alpha, std::size_t w_old, std::size_t w_new) {
    for (Var* v : touched_) {
      v->removed = false;
      v->delta_mark = 0;
    }
    touched_.clear();
    if (record) fill_record(x, log_alpha, true, w_old, w_new, false);
    ++counters.rejected;
    return false;
  }

  void fill_record(Var* x, double log_alpha, bool has_alpha, std::size_t w_old, std::size_t w_new, bool accepted) {
    record->var = x;
    record->log_alpha = log_alpha;
    record->has_alpha = has_alpha;
    record->w_old = w_old;
    record->w_new = w_new;
    record->accepted = accepted;
    record->proposed.clear();
    for (Var* v : proposed) record->proposed.push_back({v, v->cached_string()});
  }

  std::vector<Var*> pending_;
  std::vector<Var*> children_scratch_;
  std::vector<Var*> cont_scratch_;
  std::vector<Var*> contingent_now_;
  std::vector<Var*> touched_;
  std::vector<Var*> removal_;
  std::vector<Var*> fresh_;
  std::vector<Var*> stack_;
  std::vector<Var*> drop_;
  std::vector<ParentRef> parents_;
  std::vector<std::pair<Var*, double>> scored_;
  std::vector<double> weights_;
  std::vector<std::pair<Var*, std::uint64_t>> saved_;
  std::vector<std::size_t> saved_offsets_;
  std::uint64_t scan_id_ = 0;
  std::uint64_t visit_id_ = 0;
};

}  // namespace blogc::rt
