#include <algorithm>
#include <string>

#include "blogc/analysis/analysis.hpp"
#include "blogc/frontend/validate.hpp"
#include "doctest.h"

using namespace blogc;
using an::AnalysisResult;

namespace {
fe::TypedModel load(const std::string& name) {
  return fe::load_model_file(std::string(BLOGC_MODELS_DIR) + "/" + name + ".blog");
}

std::vector<std::string> keys(const std::vector<an::VarRef>& refs) {
  std::vector<std::string> k;
  for (const auto& r : refs) k.push_back(r.key);
  std::sort(k.begin(), k.end());
  return k;
}

int decl(const AnalysisResult& a, const std::string& name) {
  for (std::size_t i = 0; i < a.decls.size(); ++i)
    if (a.decls[i].name == name) return static_cast<int>(i);
  return -1;
}
}  // namespace

TEST_CASE("free variables of the mixture observation body") {
  auto tm = load("infgmm");
  const auto& x = tm.model.random_fns[tm.find_random("x")];
  CHECK(keys(an::free_vars(tm, *x.body, x.params)) == std::vector<std::string>{"mu(z(d))", "z(d)"});
}

TEST_CASE("free variables of literals and conditionals") {
  auto tm = fe::load_model("random Boolean burglary ~ Bernoulli(0.5);\nrandom Real p ~ if burglary then 0.9 else 0.1;");
  const auto& p = tm.model.random_fns[1];
  CHECK(keys(an::free_vars(tm, *p.body, p.params)) == std::vector<std::string>{"burglary"});
  auto lit = fe::load_model("random Real q ~ 0.5;");
  CHECK(an::free_vars(lit, *lit.model.random_fns[0].body, {}).empty());
}

TEST_CASE("fixed functions are not free variables") {
  auto tm = load("burglary");
  auto a = an::analyze(tm);
  const int alarm = decl(a, "Alarm");
  CHECK(keys(a.info[alarm].fv) == std::vector<std::string>{"Burglary", "Earthquake"});
  CHECK(a.info[alarm].switching.empty());
}

TEST_CASE("switching sets are drawn from free variables") {
  for (const char* name : {"burglary", "hurricane", "urnball_20_10", "gmm", "infgmm"}) {
    CAPTURE(name);
    auto tm = load(name);
    auto a = an::analyze(tm);
    for (const auto& info : a.info)
      for (const auto& k : info.switching) {
        bool found = false;
        for (const auto& r : info.fv) found = found || r.key == k;
        CHECK(found);
      }
  }
}

TEST_CASE("switching approximation of the mixture observation") {
  auto tm = load("infgmm");
  auto a = an::analyze(tm);
  const int x = decl(a, "x");
  CHECK(a.info[x].switching == std::set<std::string>{"z(d)"});
  const int z = decl(a, "z");
  CHECK(keys(a.info[z].fv) == std::vector<std::string>{"#Cluster"});
  CHECK(a.info[z].switching.empty());
}

TEST_CASE("case scrutinee is switching in the hurricane model") {
  auto tm = load("hurricane");
  auto a = an::analyze(tm);
  const int prep = decl(a, "Prep");
  CHECK(a.info[prep].switching == std::set<std::string>{"Damage(First)", "First"});
  const int damage = decl(a, "Damage");
  CHECK(a.info[damage].switching == std::set<std::string>{"Prep(c)"});
}

TEST_CASE("static children bound with argument mappings") {
  auto tm = load("urnball_20_2");
  auto a = an::analyze(tm);
  const int color = decl(a, "color");
  const int drawn = decl(a, "drawn");
  const int num = decl(a, "#Ball");
  // color(b) is read by every site through a random argument
  REQUIRE(a.static_children[color].size() == 3);
  for (const auto& e : a.static_children[color]) CHECK(e.mapping[0].kind == an::ArgMap::Kind::Any);
  // drawn(D[i]) is read by site i only
  REQUIRE(a.static_children[drawn].size() == 3);
  CHECK(a.static_children[drawn][0].mapping[0].kind == an::ArgMap::Kind::Constant);
  CHECK(a.static_children[drawn][0].mapping[0].obj == 0);
  CHECK(a.static_children[drawn][2].mapping[0].obj == 2);
  CHECK(a.static_children[drawn][0].switching);
  REQUIRE(a.static_children[num].size() == 1);
  CHECK(a.decls[a.static_children[num][0].child].name == "drawn");
  CHECK(a.tracked[color]);
  CHECK_FALSE(a.tracked[drawn]);
  CHECK_FALSE(a.tracked[num]);
}

TEST_CASE("evidence with constant arguments is pinned, otherwise a site") {
  auto gmm = an::analyze(load("gmm"));
  for (int p : gmm.obs_site) CHECK(p == -1);
  auto urn = an::analyze(load("urnball_20_2"));
  for (int p : urn.obs_site) CHECK(p >= 0);
  CHECK(urn.query_site[0] >= 0);
  auto inf = an::analyze(load("infgmm"));
  CHECK(inf.query_site[0] == -1);
}

TEST_CASE("conjugacy tags") {
  auto gmm_tm = load("gmm");
  auto gmm = an::analyze(gmm_tm);
  CHECK(gmm.conjugacy[decl(gmm, "mu")].kind == an::Conjugacy::GaussianGaussianMean);
  CHECK(gmm.conjugacy[decl(gmm, "z")].kind == an::Conjugacy::None);
  CHECK(gmm.gibbs[decl(gmm, "z")] == an::GibbsKind::Finite);
  CHECK(an::gibbs_ineligible(gmm_tm, gmm).empty());

  auto coin = fe::load_model(
      "type Toss; distinct Toss T[3];\n"
      "random Real bias ~ Beta(2.0, 2.0);\n"
      "random Boolean flip(Toss t) ~ Bernoulli(bias);\n"
      "obs flip(T[0]) = true;\n");
  auto ca = an::analyze(coin);
  CHECK(ca.conjugacy[0].kind == an::Conjugacy::BetaBernoulli);

  auto pois = fe::load_model(
      "type S; distinct S s[2];\n"
      "random Real rate ~ Gamma(2.0, 1.0);\n"
      "random Integer count(S x) ~ Poisson(rate);\n");
  CHECK(an::analyze(pois).conjugacy[0].kind == an::Conjugacy::GammaPoisson);

  // the prior mean also appears in the variance: not conjugate
  auto bad = fe::load_model(
      "random Real m ~ Gaussian(0.0, 1.0);\n"
      "random Real y ~ Gaussian(m, m * m + 1.0);\n");
  auto ba = an::analyze(bad);
  CHECK(ba.conjugacy[0].kind == an::Conjugacy::None);
  CHECK(an::gibbs_ineligible(bad, ba) == "m");
}
