#include <cmath>
#include <vector>

#include "blogc/runtime/runtime.hpp"
#include "doctest.h"

using namespace blogc::rt;

TEST_CASE("distribution log-densities at fixed points") {
  CHECK(loglik_gaussian(0.0, 0.0, 1.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-12));
  CHECK(loglik_gaussian(1.0, 1.0, 4.0) == doctest::Approx(-0.9189385332046727 - std::log(2.0)).epsilon(1e-12));
  CHECK(loglik_bernoulli(true, 0.25) == doctest::Approx(std::log(0.25)));
  CHECK(loglik_poisson(3, 2.0) == doctest::Approx(3 * std::log(2.0) - 2.0 - std::log(6.0)));
  CHECK(loglik_poisson(-1, 2.0) == kNegInf);
  CHECK(loglik_beta(0.5, 2.0, 2.0) == doctest::Approx(std::log(1.5)));
  CHECK(loglik_gamma(1.0, 1.0, 1.0) == doctest::Approx(-1.0));
  CHECK(loglik_gamma(-1.0, 1.0, 1.0) == kNegInf);
  CHECK(loglik_uniform_int(3, 1, 4) == doctest::Approx(-std::log(4.0)));
  CHECK(loglik_uniform_int(5, 1, 4) == kNegInf);
  CHECK(loglik_uniform_choice(0, 0) == kNegInf);
  const std::vector<double> p{0.2, 0.3, 0.5};
  CHECK(loglik_categorical(2, p) == doctest::Approx(std::log(0.5)));
}

TEST_CASE("invalid parameters raise domain errors") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_bernoulli(rng, 1.5), DomainError);
  CHECK_THROWS_AS(loglik_gaussian(0.0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(loglik_beta(0.5, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(sample_uniform_int(rng, 3, 2), DomainError);
  CHECK(sample_uniform_choice(rng, 0) == -1);
}

TEST_CASE("conjugate posterior updates") {
  const BetaParams b = beta_bernoulli_posterior({1.0, 1.0}, 7, 3);
  CHECK(b.alpha == 8.0);
  CHECK(b.beta == 4.0);
  ConjugateStats s;
  s.add_poisson(3);
  s.add_poisson(5);
  const GammaParams g = gamma_poisson_posterior({2.0, 1.0}, s.count_sum, s.n);
  CHECK(g.shape == 10.0);
  CHECK(g.rate == 3.0);
  ConjugateStats t;
  t.add_gaussian(1.0, 1.0);
  t.add_gaussian(3.0, 1.0);
  const GaussianParams m = gaussian_mean_posterior({0.0, 1.0}, t.weighted_sum, t.precision_sum);
  CHECK(m.mean == doctest::Approx(4.0 / 3.0));
  CHECK(m.var == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("rng counts logical draws and is reproducible") {
  Rng a(7), b(7);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform01() == b.uniform01());
  CHECK(a.calls == 10);
  a.index(5);
  CHECK(a.calls == 11);
  Rng c(7, 1);
  CHECK(c.uniform01() != Rng(7).uniform01());
}

TEST_CASE("log-categorical sampling follows the weights") {
  Rng rng(3);
  const std::vector<double> lw{std::log(0.1), kNegInf, std::log(0.9)};
  int hits[3] = {0, 0, 0};
  for (int i = 0; i < 20000; ++i) ++hits[sample_log_categorical(rng, lw)];
  CHECK(hits[1] == 0);
  CHECK(hits[2] / 20000.0 == doctest::Approx(0.9).epsilon(0.02));
}

TEST_CASE("variable sets keep unique members") {
  struct Dummy : Var {
    std::string name() const override { return "d"; }
    std::string value_string() const override { return ""; }
    std::string cached_string() const override { return ""; }
    std::uint64_t value_bits() const override { return 0; }
    std::uint64_t cached_bits() const override { return 0; }
    void set_cached_bits(std::uint64_t) override {}
    void propose() override {}
    double loglik_cur() override { return 0; }
    double loglik_prop() override { return 0; }
    void add_to_ch() override {}
    void del_from_ch() override {}
    void accept_value() override {}
    void commit() override {}
    void parents_cur(std::vector<ParentRef>&) override {}
    void parents_prop(std::vector<ParentRef>&) override {}
    void instantiate() override {}
  };
  Dummy x, y;
  VarSet s;
  CHECK(s.insert(&x));
  CHECK_FALSE(s.insert(&x));
  CHECK(s.insert(&y));
  CHECK(s.size() == 2);
  CHECK(s.erase(&x));
  CHECK_FALSE(s.contains(&x));
  CHECK_FALSE(s.erase(&x));

  World w;
  x.tracked = true;
  w.inc_cnt(&x);
  w.dec_cnt(&x);
  CHECK_THROWS_AS(w.dec_cnt(&x), RuntimeFault);

  std::vector<Var*> vs{&x, &y, &x, &y, &x};
  w.dedup(vs);
  CHECK(vs == std::vector<Var*>{&x, &y});

  const auto g = w.gen;
  w.bump_generation();
  CHECK(w.gen == g + 1);
}

TEST_CASE("query statistics normalise weights") {
  QueryStat q("b", false, [](long long c) { return c ? std::string("true") : std::string("false"); });
  q.add(1, std::log(3.0));
  q.add(0, std::log(1.0));
  CHECK(q.probability("true") == doctest::Approx(0.75));
  q.add(1, 800.0);  // forces a rescale without overflow
  CHECK(q.probability("true") == doctest::Approx(1.0));
  QueryStat r("x", true);
  r.add_real(2.0, 0.0);
  r.add_real(4.0, 0.0);
  CHECK(r.mean() == doctest::Approx(3.0));
  CHECK(fmt_real(0.1) == "0.10000000000000001");
}
