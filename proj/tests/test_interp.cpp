#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "blogc/analysis/analysis.hpp"
#include "blogc/codegen/codegen.hpp"
#include "blogc/interp/interp.hpp"
#include "blogc/runtime/distributions.hpp"
#include "doctest.h"

using namespace blogc;
using namespace blogc::interp;
namespace fs = std::filesystem;

namespace {

fe::TypedModel load(const std::string& name) {
  return fe::load_model_file(std::string(BLOGC_MODELS_DIR) + "/" + name + ".blog");
}

// Brute-force sum over the burglary joint.
double burglary_exact() {
  auto bern = [](bool v, double p) { return v ? p : 1.0 - p; };
  double num = 0.0, den = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int e = 0; e < 2; ++e)
      for (int a = 0; a < 2; ++a) {
        const double pa = b ? (e ? 0.95 : 0.94) : (e ? 0.29 : 0.01);
        const double p = bern(b, 0.1) * bern(e, 0.2) * bern(a, pa) * (a ? 0.9 : 0.05) * (a ? 0.7 : 0.01);
        den += p;
        if (b) num += p;
      }
  return num / den;
}

// Two draws with distinct balls are needed for Blue then Green; the next
// draw repeats ball 0, repeats ball 1, or hits a fresh ball.
double urn_20_2_exact() {
  double num = 0.0, den = 0.0;
  for (int n = 1; n <= 20; ++n) {
    const double w = (1.0 - 1.0 / n) * 0.9 * 0.1;
    den += w;
    num += w * (1.0 / n + (1.0 - 2.0 / n) * 0.9);
  }
  return num / den;
}

/// Random walk over positive-probability worlds using full-world proposals.
struct Walker {
  fe::TypedModel tm;
  Semantics s;
  rt::Rng rng;
  WorldMap w;
  MakeValue make;

  Walker(fe::TypedModel model, std::uint64_t seed) : tm(std::move(model)), s(tm), rng(seed) {
    make = [this](const Id&, const DistInst& d) { return s.sample(d, rng); };
    for (int attempt = 0; attempt < 10000; ++attempt) {
      w = s.pinned_values();
      Fetch f;
      f = [&](const Id& id) -> Value {
        auto it = w.find(id);
        if (it != w.end()) return it->second;
        const Value v = s.sample(s.distribution(id, f, nullptr), rng);
        w[id] = v;
        return v;
      };
      for (const Id& r : s.roots()) {
        if (r.site())
          s.site_loglik(r, f, nullptr);
        else if (s.pinned(r))
          s.distribution(r, f, nullptr);
        else
          f(r);
      }
      for (int t = 0; t < s.num_templates(); ++t) {
        Id probe;
        probe.index = t;
        if (s.tracked(probe)) continue;
        std::vector<Id> ids;
        s.instances(t, f, ids);
        for (const Id& id : ids)
          if (s.pinned(id))
            s.distribution(id, f, nullptr);
          else
            f(id);
      }
      if (log_prob(s, w) > rt::kNegInf) return;
    }
    FAIL("no initial world");
  }

  Id pick() {
    std::vector<Id> pool;
    for (const auto& kv : w)
      if (s.selectable(kv.first)) pool.push_back(kv.first);
    return pool[rng.index(pool.size())];
  }

  Value fresh_value(const Id& x) {
    Fetch f = [this](const Id& id) { return w.at(id); };
    return s.sample(s.distribution(x, f, nullptr), rng);
  }

  void step() {
    const Id x = pick();
    FullStep st = full_world_proposal(s, w, x, fresh_value(x), make);
    if (st.log_alpha > rt::kNegInf) w = std::move(st.proposed);
  }
};

std::set<Id> parent_ids(const Semantics& s, const WorldMap& w, const Id& y) {
  std::set<Id> out;
  for (const Read& r : parents_in(s, w, y)) out.insert(r.id);
  return out;
}

int decl_of(const Semantics& s, const an::AnalysisResult& a, const Id& id) {
  const int nfn = static_cast<int>(s.model().model.random_fns.size());
  switch (id.kind) {
    case Id::Obs: return a.obs_site[id.index];
    case Id::Query: return a.query_site[id.index];
    default: return id.index < nfn ? id.index : a.number_decl(id.index - nfn);
  }
}

}  // namespace

TEST_CASE("enumeration matches independent closed forms") {
  auto b = enumerate_exact(load("burglary"));
  CHECK(b.dist[0]["true"] == doctest::Approx(burglary_exact()).epsilon(1e-12));
  CHECK(b.dist[0]["true"] == doctest::Approx(0.6106406752874747).epsilon(1e-12));
  auto h = enumerate_exact(load("hurricane"));
  CHECK(h.dist[0]["A"] == doctest::Approx(0.38 / 0.94).epsilon(1e-12));
  auto u = enumerate_exact(load("urnball_20_2"));
  CHECK(u.dist[0]["Blue"] == doctest::Approx(urn_20_2_exact()).epsilon(1e-10));
}

TEST_CASE("enumeration of a deterministic model is a point mass") {
  auto r = enumerate_exact(fe::load_model("random Boolean a ~ true;\nrandom Integer k ~ if a then 3 else 4;\nquery k;\n"));
  CHECK(r.worlds == 1);
  CHECK(r.dist[0].size() == 1);
  CHECK(r.dist[0]["3"] == 1.0);
}

TEST_CASE("enumeration refuses continuous variables") {
  CHECK_THROWS_WITH_AS(enumerate_exact(load("gmm")), doctest::Contains("continuous or unbounded"), InterpError);
}

TEST_CASE("interpreter LW converges on burglary, lazy and eager") {
  const double exact = burglary_exact();
  auto lazy = interp_lw(load("burglary"), 100000, 1);
  CHECK(std::abs(lazy.queries[0]->probability("true") - exact) < 0.01);
  auto eager = interp_lw(load("burglary"), 100000, 2, true);
  CHECK(std::abs(eager.queries[0]->probability("true") - exact) < 0.01);
}

TEST_CASE("LW without evidence keeps unit weights") {
  auto r = interp_lw(fe::load_model("random Boolean a ~ Bernoulli(0.3);\nquery a;\n"), 2000, 4);
  CHECK(r.queries[0]->total_weight() == doctest::Approx(2000.0));
}

TEST_CASE("LW and PMH agree with enumeration on the open-universe urn") {
  const double exact = urn_20_2_exact();
  auto lw = interp_lw(load("urnball_20_2"), 100000, 3);
  CHECK(std::abs(lw.queries[0]->probability("Blue") - exact) < 0.01);
  auto mh = interp_pmh_full(load("urnball_20_2"), 100000, 3);
  CHECK(std::abs(mh.queries[0]->probability("Blue") - exact) < 0.015);
  auto hb = interp_pmh_full(load("burglary"), 200000, 3);
  CHECK(std::abs(hb.queries[0]->probability("true") - burglary_exact()) < 0.025);
}

TEST_CASE("proposing the current value gives alpha one") {
  for (const char* m : {"burglary", "hurricane", "urnball_20_10", "infgmm"}) {
    Walker wk(load(m), 11);
    for (int i = 0; i < 200; ++i) {
      wk.step();
      const Id x = wk.pick();
      FullStep st = full_world_proposal(wk.s, wk.w, x, wk.w.at(x), wk.make);
      CHECK(st.log_alpha == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(st.proposed == wk.w);
    }
  }
}

TEST_CASE("changed parent sets are covered by contingent sets and switching keys") {
  for (const char* m : {"hurricane", "urnball_20_10", "infgmm", "burglary"}) {
    auto tm = load(m);
    auto a = an::analyze(tm);
    Walker wk(tm, 5);
    std::size_t changed = 0;
    for (int i = 0; i < 1000; ++i) {
      const Id x = wk.pick();
      FullStep st = full_world_proposal(wk.s, wk.w, x, wk.fresh_value(x), wk.make);
      const Structure before = structure(wk.s, wk.w);
      std::vector<Id> ys;
      for (const auto& kv : wk.w)
        if (st.proposed.count(kv.first)) ys.push_back(kv.first);
      for (const Id& site : wk.s.sites()) ys.push_back(site);
      for (const Id& y : ys) {
        if (parent_ids(wk.s, wk.w, y) == parent_ids(wk.s, st.proposed, y)) continue;
        ++changed;
        // Delta-coverage: Y is a contingent of X in w.
        auto it = before.cont.find(x);
        CHECK_MESSAGE((it != before.cont.end() && it->second.count(y)),
                      (wk.s.name(y) + " changed parents but is not in Cont(" + wk.s.name(x) + ")"));
        // Soundness of the static switching set.
        const int dy = decl_of(wk.s, a, y);
        bool covered = false;
        for (const auto& r : a.info[dy].fv)
          if (a.info[dy].in_switching(r.key) && r.tmpl == decl_of(wk.s, a, x)) covered = true;
        CHECK_MESSAGE(covered, 
                      (wk.s.template_name(x.index) + " missing from the switching set of " + wk.s.name(y)));
      }
      if (st.log_alpha > rt::kNegInf) wk.w = std::move(st.proposed);
    }
    if (std::string(m) == "burglary")
      CHECK(changed == 0);
    else
      CHECK(changed > 0);
  }
}

TEST_CASE("static children bound every dynamic child edge") {
  for (const char* m : {"hurricane", "urnball_20_10", "infgmm", "gmm", "burglary"}) {
    auto tm = load(m);
    auto a = an::analyze(tm);
    Walker wk(tm, 9);
    for (int i = 0; i < 1000; ++i) {
      wk.step();
      if (i % 10) continue;
      const Structure st = structure(wk.s, wk.w);
      for (const auto& [x, children] : st.ch) {
        const int dx = decl_of(wk.s, a, x);
        for (const Id& y : children) {
          const int dy = decl_of(wk.s, a, y);
          bool found = false;
          for (const an::StaticEdge& e : a.static_children[dx]) {
            if (e.child != dy) continue;
            bool ok = true;
            for (std::size_t p = 0; p < e.mapping.size(); ++p) {
              const an::ArgMap& am = e.mapping[p];
              if (am.kind == an::ArgMap::Kind::Param && y.args[am.param] != x.args[p]) ok = false;
              if (am.kind == an::ArgMap::Kind::Constant && x.args[p] != am.obj) ok = false;
            }
            found = found || ok;
          }
          CHECK_MESSAGE(found, 
                        (wk.s.name(y) + " reads " + wk.s.name(x) + " outside the static children bound"));
        }
      }
    }
  }
}

namespace {

// log density of the closed-form conditional at v, up to a constant.
double closed_form(const Semantics& s, const WorldMap& w, const Id& x, an::Conjugacy kind, double v) {
  const Structure st = structure(s, w);
  rt::ConjugateStats cs;
  const Fetch f = [&w](const Id& id) { return w.at(id); };
  const DistInst prior = s.distribution(x, f, nullptr);
  auto ch = st.ch.find(x);
  if (ch != st.ch.end())
    for (const Id& y : ch->second) {
      if (y.site()) continue;
      const DistInst d = s.distribution(y, f, nullptr);
      if (kind == an::Conjugacy::BetaBernoulli) cs.add_bernoulli(w.at(y).truthy());
      if (kind == an::Conjugacy::GammaPoisson) cs.add_poisson(w.at(y).i);
      if (kind == an::Conjugacy::GaussianGaussianMean) cs.add_gaussian(w.at(y).num(), d.p1);
    }
  switch (kind) {
    case an::Conjugacy::BetaBernoulli: {
      const auto p = rt::beta_bernoulli_posterior({prior.p0, prior.p1}, cs.successes, cs.failures);
      return rt::loglik_beta(v, p.alpha, p.beta);
    }
    case an::Conjugacy::GammaPoisson: {
      const auto p = rt::gamma_poisson_posterior({prior.p0, prior.p1}, cs.count_sum, cs.n);
      return rt::loglik_gamma(v, p.shape, p.rate);
    }
    default: {
      const auto p = rt::gaussian_mean_posterior({prior.p0, prior.p1}, cs.weighted_sum, cs.precision_sum);
      return rt::loglik_gaussian(v, p.mean, p.var);
    }
  }
}

void check_conjugacy(const fe::TypedModel& tm, std::uint64_t seed) {
  auto a = an::analyze(tm);
  Walker wk(tm, seed);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    for (int k = 0; k < 5; ++k) wk.step();
    const Id x = wk.pick();
    const an::Conjugacy kind = a.conjugacy[decl_of(wk.s, a, x)].kind;
    if (kind == an::Conjugacy::None) continue;
    double lo = INFINITY, hi = -INFINITY;
    for (double v : {0.15, 0.35, 0.5, 0.8, 1.7}) {
      WorldMap w2 = wk.w;
      const double u = kind == an::Conjugacy::GaussianGaussianMean ? 4.0 * v - 3.0
                       : kind == an::Conjugacy::BetaBernoulli      ? v / 2.0
                                                                   : v;
      w2[x] = Value::real(u);
      const double diff = closed_form(wk.s, w2, x, kind, w2[x].num()) - log_prob(wk.s, w2);
      if (!std::isfinite(diff)) continue;
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    CHECK(hi - lo < 1e-9);
    ++checked;
  }
  CHECK(checked > 0);
}

}  // namespace

TEST_CASE("conjugate closed forms match the Markov blanket density") {
  check_conjugacy(fe::load_model("type Trial;\ndistinct Trial T[6];\nrandom Real p ~ Beta(2.0, 3.0);\n"
                                 "random Boolean f(Trial t) ~ Bernoulli(p);\nobs f(T[0]) = true;\n"
                                 "obs f(T[1]) = false;\nobs f(T[2]) = true;\nquery p;\n"),
                  1);
  check_conjugacy(fe::load_model("type Day;\ndistinct Day Dy[5];\nrandom Real rate ~ Gamma(2.0, 1.0);\n"
                                 "random Integer k(Day d) ~ Poisson(rate);\nobs k(Dy[0]) = 3;\n"
                                 "obs k(Dy[1]) = 5;\nquery rate;\n"),
                  2);
  check_conjugacy(load("gmm"), 3);
  check_conjugacy(load("infgmm"), 4);
}

TEST_CASE("names and values round-trip") {
  auto tm = load("urnball_20_2");
  Semantics s(tm);
  Id id;
  REQUIRE(s.parse_name("color(Ball[7])", id));
  CHECK(s.name(id) == "color(Ball[7])");
  REQUIRE(s.parse_name("#Ball", id));
  CHECK(s.name(id) == "#Ball");
  REQUIRE(s.parse_name("drawn(D[2])", id));
  Value v;
  REQUIRE(s.parse_value(id, "Ball[3]", v));
  CHECK(v.i == 3);
  CHECK_FALSE(s.parse_name("colour(Ball[1])", id));
  CHECK_FALSE(s.parse_name("drawn(Q[2])", id));
}

TEST_CASE("replay accepts a compiled trace and rejects a tampered one") {
  auto tm = load("urnball_20_10");
  cg::CodegenOptions opt;
  opt.model_name = "urnball_20_10";
  const fs::path dir = fs::temp_directory_path() / "blogc_unit_build";
  const fs::path exe = cg::build(cg::emit_program(tm, an::analyze(tm), opt), dir, "urn_pmh");
  const fs::path trace = dir / "urn_trace.jsonl";
  const std::string cmd = exe.string() + " -n 1500 --seed 4 --quiet --record-state --record-proposals " + trace.string();
  REQUIRE(std::system(cmd.c_str()) == 0);
  const ReplayReport ok = check_replay(tm, trace.string());
  CHECK_MESSAGE(ok.ok(), ok.failure);
  CHECK(ok.steps == 1500);
  CHECK(ok.state_checks == ok.accepted);
  CHECK(ok.max_rel_err < 1e-9);

  // Perturb the first finite log alpha.
  std::ifstream in(trace);
  std::string all, line;
  bool done = false;
  while (std::getline(in, line)) {
    const auto p = line.find("\"log_alpha\":");
    if (!done && p != std::string::npos && line.compare(p + 12, 4, "-1e3") != 0 && line.compare(p + 12, 4, "null") != 0) {
      line.insert(p + 12, "0.5+");
      const auto q = line.find(',', p);
      const std::string num = line.substr(p + 16, q - p - 16);
      line = line.substr(0, p + 12) + rt::fmt_real(std::stod(num) + 0.5) + line.substr(q);
      done = true;
    }
    all += line + "\n";
  }
  REQUIRE(done);
  const fs::path bad = dir / "urn_trace_bad.jsonl";
  std::ofstream(bad) << all;
  const ReplayReport r = check_replay(tm, bad.string());
  CHECK_FALSE(r.ok());
  CHECK(r.failure.find("log alpha") != std::string::npos);
}
