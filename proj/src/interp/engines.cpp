#include <chrono>
#include <cmath>

#include "blogc/interp/interp.hpp"
#include "blogc/runtime/distributions.hpp"

namespace blogc::interp {

namespace {

constexpr int kMaxDepth = 10000;
constexpr double kNegInf = rt::kNegInf;

Fetch strict(const Semantics& s, const WorldMap& w) {
  return [&s, &w](const Id& id) -> Value {
    auto it = w.find(id);
    if (it == w.end()) throw InterpError("world is not self-supporting: " + s.name(id) + " is missing");
    return it->second;
  };
}

/// Instantiates missing variables on demand. `make` chooses the value of a
/// new variable given its distribution.
class Builder {
 public:
  Builder(const Semantics& s, WorldMap& w, MakeValue make) : s_(s), w_(w), make_(std::move(make)) {
    fetch = [this](const Id& id) { return get(id); };
  }

  Value get(const Id& id) {
    auto it = w_.find(id);
    if (it != w_.end()) return it->second;
    if (++depth_ > kMaxDepth) throw InterpError("recursion depth limit exceeded while instantiating " + s_.name(id));
    const DistInst d = s_.distribution(id, fetch, nullptr);
    const Value v = make_(id, d);
    --depth_;
    w_.emplace(id, v);
    fresh.push_back(id);
    return v;
  }

  /// Variables reachable from `seeds` through parents, instantiating as needed.
  std::set<Id> closure(const std::vector<Id>& seeds) {
    std::set<Id> seen;
    std::vector<Id> stack(seeds.rbegin(), seeds.rend());
    std::vector<Read> reads;
    while (!stack.empty()) {
      const Id y = stack.back();
      stack.pop_back();
      if (!seen.insert(y).second) continue;
      reads.clear();
      if (y.site()) {
        s_.site_loglik(y, fetch, &reads);
      } else {
        get(y);
        s_.distribution(y, fetch, &reads);
      }
      for (auto r = reads.rbegin(); r != reads.rend(); ++r)
        if (!seen.count(r->id)) stack.push_back(r->id);
    }
    return seen;
  }

  Fetch fetch;
  std::vector<Id> fresh;

 private:
  const Semantics& s_;
  WorldMap& w_;
  MakeValue make_;
  int depth_ = 0;
};

std::vector<Id> seeds_of(const Semantics& s, const WorldMap& w) {
  std::vector<Id> seeds = s.roots();
  for (const auto& [id, v] : w)
    if (!s.tracked(id)) seeds.push_back(id);
  return seeds;
}

void restrict_to(WorldMap& w, const std::set<Id>& keep) {
  for (auto it = w.begin(); it != w.end();) {
    if (keep.count(it->first))
      ++it;
    else
      it = w.erase(it);
  }
}

std::vector<std::unique_ptr<rt::QueryStat>> make_queries(const Semantics& s, std::uint64_t n) {
  std::vector<std::unique_ptr<rt::QueryStat>> qs;
  for (int q = 0; q < s.num_queries(); ++q) {
    const fe::Type t = s.query_type(q);
    rt::QueryStat::Labeler lab;
    if (t.kind != fe::Type::Kind::Int) lab = [&s, t](long long c) { return s.show(t, Value::integer(c)); };
    qs.push_back(std::make_unique<rt::QueryStat>(s.query_text(q), t.kind == fe::Type::Kind::Real, lab));
    qs.back()->configure(n);
  }
  return qs;
}

void add_queries(const Semantics& s, const Fetch& fetch, double logw,
                 std::vector<std::unique_ptr<rt::QueryStat>>& qs) {
  for (int q = 0; q < s.num_queries(); ++q) {
    const Value v = s.query_value(q, fetch);
    if (qs[q]->real())
      qs[q]->add_real(v.num(), logw);
    else
      qs[q]->add(v.i, logw);
  }
}

void finish_stats(RunResult& r, const Semantics& s, const char* algo, std::uint64_t n, std::uint64_t seed,
                  double seconds, const rt::Rng& rng, std::uint64_t evals) {
  (void)s;
  r.stats.model = "model";
  r.stats.algo = algo;
  r.stats.n_samples = n;
  r.stats.seed = seed;
  r.stats.wall_time_s = seconds;
  r.stats.rng_calls = rng.calls;
  r.stats.likelihood_evals = evals;
  for (const auto& q : r.queries) {
    q->freeze_labels();
    r.stats.queries.push_back(q.get());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// ---- world structure -------------------------------------------------------------

double log_prob(const Semantics& s, const WorldMap& w) {
  const Fetch f = strict(s, w);
  double lp = 0.0;
  for (const auto& [id, v] : w) lp += s.loglik(s.distribution(id, f, nullptr), v);
  for (const Id& site : s.sites()) lp += s.site_loglik(site, f, nullptr);
  return lp;
}

std::vector<Read> parents_in(const Semantics& s, const WorldMap& w, const Id& id) {
  std::vector<Read> reads;
  const Fetch f = strict(s, w);
  if (id.site())
    s.site_loglik(id, f, &reads);
  else
    s.distribution(id, f, &reads);
  return reads;
}

std::size_t world_size(const Semantics& s, const WorldMap& w) {
  std::size_t n = 0;
  for (const auto& kv : w)
    if (s.selectable(kv.first)) ++n;
  return n;
}

Structure structure(const Semantics& s, const WorldMap& w) {
  Structure st;
  auto add = [&](const Id& y) {
    for (const Read& r : parents_in(s, w, y)) {
      st.ch[r.id].insert(y);
      if (r.switching) st.cont[r.id].insert(y);
    }
  };
  for (const auto& kv : w) add(kv.first);
  for (const Id& site : s.sites()) add(site);
  return st;
}

std::set<Id> supported_closure(const Semantics& s, const WorldMap& w) {
  WorldMap copy = w;
  Builder b(s, copy, [&s](const Id& id, const DistInst&) -> Value {
    throw InterpError("world is not self-supporting: " + s.name(id) + " is missing");
  });
  return b.closure(seeds_of(s, w));
}

std::string RunResult::to_json() const { return stats.to_json(); }

// ---- likelihood weighting ----------------------------------------------------------

RunResult interp_lw(const fe::TypedModel& tm, std::uint64_t n, std::uint64_t seed, bool eager) {
  const auto t0 = std::chrono::steady_clock::now();
  const Semantics s(tm);
  rt::Rng rng(seed);
  RunResult res;
  res.queries = make_queries(s, n);
  std::uint64_t evals = 0;
  double logw = 0.0;
  WorldMap w;
  Builder b(s, w, [&](const Id& id, const DistInst& d) -> Value {
    auto p = s.pinned_values().find(id);
    if (p == s.pinned_values().end()) return s.sample(d, rng);
    logw += s.loglik(d, p->second);
    ++evals;
    return p->second;
  });
  const auto& ev = tm.model.evidence;
  std::vector<Id> all;
  for (std::uint64_t it = 0; it < n; ++it) {
    w.clear();
    logw = 0.0;
    if (eager) {
      for (int t = 0; t < s.num_templates(); ++t)
        if (s.template_name(t)[0] == '#') {
          Id id;
          id.index = t;
          b.get(id);
        }
      for (int t = 0; t < s.num_templates(); ++t) {
        if (s.template_name(t)[0] == '#') continue;
        s.instances(t, b.fetch, all);
        for (const Id& id : all) b.get(id);
      }
    }
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const Id& root = s.roots()[i];
      if (!root.site()) {
        b.get(root);
        continue;
      }
      // The target of dynamic evidence is forced when not yet sampled.
      const Id target = s.obs_target(root, b.fetch, nullptr);
      const Value obs = s.observed(static_cast<int>(i));
      ++evals;
      if (w.count(target)) {
        if (w[target] != obs) logw = kNegInf;
        continue;
      }
      const DistInst d = s.distribution(target, b.fetch, nullptr);
      logw += s.loglik(d, obs);
      w.emplace(target, obs);
    }
    add_queries(s, b.fetch, logw, res.queries);
  }
  finish_stats(res, s, "lw", n, seed, seconds_since(t0), rng, evals);
  res.stats.world_size = world_size(s, w);
  return res;
}

// ---- Metropolis-Hastings with the full-world ratio ---------------------------------

FullStep full_world_proposal(const Semantics& s, const WorldMap& w, const Id& x, const Value& v_new,
                             const MakeValue& make, const std::vector<Id>& extra_seeds, std::uint64_t* evals) {
  FullStep st;
  st.var = x;
  st.proposed = w;
  st.proposed[x] = v_new;
  Builder b(s, st.proposed, make);
  std::vector<Id> seeds = seeds_of(s, st.proposed);
  for (const Id& e : extra_seeds) {
    b.get(e);
    seeds.push_back(e);
  }
  restrict_to(st.proposed, b.closure(seeds));

  st.w_old = world_size(s, w);
  st.w_new = world_size(s, st.proposed);
  const double lp_old = log_prob(s, w);
  const double lp_new = log_prob(s, st.proposed);
  if (evals) *evals += w.size() + st.proposed.size() + 2 * s.sites().size();
  if (!std::isfinite(lp_old)) throw InterpError("current world has log-probability " + std::to_string(lp_old));
  if (std::isnan(lp_new) || lp_new == INFINITY) throw InterpError("proposed world has invalid log-probability");
  if (lp_new == kNegInf) {
    st.log_alpha = kNegInf;
    return st;
  }
  // g(v' -> v): x back to its old value and removed variables resampled; g(v -> v'): the reverse.
  const Fetch fo = strict(s, w);
  const Fetch fn = strict(s, st.proposed);
  double g_rev = s.loglik(s.distribution(x, fo, nullptr), w.at(x));
  double g_fwd = s.loglik(s.distribution(x, fn, nullptr), v_new);
  for (const auto& [id, v] : w)
    if (id != x && !st.proposed.count(id)) g_rev += s.loglik(s.distribution(id, fo, nullptr), v);
  for (const auto& [id, v] : st.proposed)
    if (id != x && !w.count(id)) g_fwd += s.loglik(s.distribution(id, fn, nullptr), v);
  st.log_alpha = std::log(static_cast<double>(st.w_old)) - std::log(static_cast<double>(st.w_new)) + lp_new -
                 lp_old + g_rev - g_fwd;
  return st;
}

namespace {

WorldMap initial_world(const Semantics& s, rt::Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    WorldMap w;
    Builder b(s, w, [&](const Id& id, const DistInst& d) -> Value {
      auto p = s.pinned_values().find(id);
      return p == s.pinned_values().end() ? s.sample(d, rng) : p->second;
    });
    restrict_to(w, b.closure(s.roots()));
    if (log_prob(s, w) > kNegInf) return w;
  }
  throw InterpError("no world consistent with the evidence found in 100000 attempts");
}

}  // namespace

RunResult interp_pmh_full(const fe::TypedModel& tm, std::uint64_t n, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const Semantics s(tm);
  rt::Rng rng(seed);
  RunResult res;
  res.queries = make_queries(s, n);
  std::uint64_t evals = 0;
  std::uint64_t accepted = 0;
  WorldMap w = initial_world(s, rng);
  const MakeValue fresh = [&](const Id&, const DistInst& d) { return s.sample(d, rng); };
  std::vector<Id> pool;
  for (std::uint64_t it = 0; it < n; ++it) {
    pool.clear();
    for (const auto& kv : w)
      if (s.selectable(kv.first)) pool.push_back(kv.first);
    if (pool.empty()) throw InterpError("no selectable variable in the world");
    const Id x = pool[rng.index(pool.size())];
    const Value v_new = s.sample(s.distribution(x, strict(s, w), nullptr), rng);
    FullStep st = full_world_proposal(s, w, x, v_new, fresh, {}, &evals);
    if (st.log_alpha >= 0.0 || std::log(rng.uniform01()) < st.log_alpha) {
      w = std::move(st.proposed);
      ++accepted;
    }
    add_queries(s, strict(s, w), 0.0, res.queries);
  }
  finish_stats(res, s, "pmh", n, seed, seconds_since(t0), rng, evals);
  res.stats.accept_rate = n ? static_cast<double>(accepted) / static_cast<double>(n) : NAN;
  res.stats.world_size = world_size(s, w);
  return res;
}

// ---- exact enumeration ---------------------------------------------------------------

namespace {

struct Missing {
  Id id;
};

class Enumerator {
 public:
  Enumerator(const Semantics& s, std::uint64_t max_worlds) : s_(s), max_(max_worlds) {
    fetch_ = [this](const Id& id) -> Value {
      auto it = w_.find(id);
      if (it == w_.end()) throw Missing{id};
      return it->second;
    };
    for (int q = 0; q < s.num_queries(); ++q) {
      res.query_text.push_back(s.query_text(q));
      res.dist.emplace_back();
    }
  }

  void run() {
    w_ = s_.pinned_values();
    explore();
    if (!(res.evidence_prob > 0.0)) throw InterpError("evidence has probability zero");
    for (auto& d : res.dist)
      for (auto& kv : d) kv.second /= res.evidence_prob;
  }

  ExactResult res;

 private:
  // The first missing variable whose own parents are all present.
  bool next_missing(Id& out) {
    std::set<Id> seen;
    std::vector<Id> stack(s_.roots().rbegin(), s_.roots().rend());
    std::vector<Read> reads;
    try {
      while (!stack.empty()) {
        const Id y = stack.back();
        stack.pop_back();
        if (!seen.insert(y).second) continue;
        reads.clear();
        if (y.site()) {
          s_.site_loglik(y, fetch_, &reads);
        } else {
          fetch_(y);
          s_.distribution(y, fetch_, &reads);
        }
        for (auto r = reads.rbegin(); r != reads.rend(); ++r)
          if (!seen.count(r->id)) stack.push_back(r->id);
      }
    } catch (const Missing& m) {
      out = m.id;
      for (int depth = 0;; ++depth) {
        if (depth > kMaxDepth) throw InterpError("recursion depth limit exceeded at " + s_.name(out));
        try {
          s_.distribution(out, fetch_, nullptr);
          return true;
        } catch (const Missing& p) {
          out = p.id;
        }
      }
    }
    return false;
  }

  void explore() {
    Id x;
    if (!next_missing(x)) {
      if (++res.worlds > max_) throw InterpError("enumeration exceeded " + std::to_string(max_) + " worlds");
      const double lp = log_prob(s_, w_);
      if (lp == kNegInf) return;
      const double p = std::exp(lp);
      res.evidence_prob += p;
      for (int q = 0; q < s_.num_queries(); ++q)
        res.dist[q][s_.show(s_.query_type(q), s_.query_value(q, fetch_))] += p;
      return;
    }
    const DistInst d = s_.distribution(x, fetch_, nullptr);
    std::vector<Value> vals;
    if (!s_.support(d, vals))
      throw InterpError("cannot enumerate " + s_.name(x) + ": its distribution is continuous or unbounded");
    for (const Value& v : vals) {
      if (s_.loglik(d, v) == kNegInf) continue;
      w_[x] = v;
      explore();
      w_.erase(x);
    }
  }

  const Semantics& s_;
  std::uint64_t max_;
  WorldMap w_;
  Fetch fetch_;
};

}  // namespace

ExactResult enumerate_exact(const fe::TypedModel& tm, std::uint64_t max_worlds) {
  const Semantics s(tm);
  Enumerator e(s, max_worlds);
  e.run();
  return e.res;
}

}  // namespace blogc::interp
