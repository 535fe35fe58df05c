#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "blogc/runtime/rng.hpp"

namespace blogc::rt {

/// Raised when a distribution receives parameters outside its domain.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

namespace detail {
[[noreturn]] inline void bad_param(const char* family, const std::string& what) {
  throw DomainError(std::string(family) + ": " + what);
}
inline double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }
}  // namespace detail

// ---- Bernoulli -------------------------------------------------------------

inline void check_bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) detail::bad_param("Bernoulli", "p must lie in [0,1], got " + std::to_string(p));
}
inline bool sample_bernoulli(Rng& rng, double p) {
  check_bernoulli(p);
  ++rng.calls;
  return rng.open01() < p;
}
inline double loglik_bernoulli(bool v, double p) {
  check_bernoulli(p);
  return std::log(v ? p : 1.0 - p);
}

// ---- Gaussian (mean, variance) ----------------------------------------------

inline void check_gaussian(double var) {
  if (!(var > 0.0) || !std::isfinite(var))
    detail::bad_param("Gaussian", "variance must be positive and finite, got " + std::to_string(var));
}
inline double sample_gaussian(Rng& rng, double mean, double var) {
  check_gaussian(var);
  ++rng.calls;
  return std::normal_distribution<double>(mean, std::sqrt(var))(rng.engine());
}
inline double loglik_gaussian(double x, double mean, double var) {
  check_gaussian(var);
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

// ---- Poisson -----------------------------------------------------------------

inline void check_poisson(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) detail::bad_param("Poisson", "rate must be positive, got " + std::to_string(rate));
}
inline long long sample_poisson(Rng& rng, double rate) {
  check_poisson(rate);
  ++rng.calls;
  return std::poisson_distribution<long long>(rate)(rng.engine());
}
inline double loglik_poisson(long long k, double rate) {
  check_poisson(rate);
  if (k < 0) return kNegInf;
  return static_cast<double>(k) * std::log(rate) - rate - std::lgamma(static_cast<double>(k) + 1.0);
}

// ---- Gamma (shape, rate) -----------------------------------------------------

inline void check_gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) detail::bad_param("Gamma", "shape and rate must be positive");
}
inline double sample_gamma(Rng& rng, double shape, double rate) {
  check_gamma(shape, rate);
  ++rng.calls;
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng.engine());
}
inline double loglik_gamma(double x, double shape, double rate) {
  check_gamma(shape, rate);
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

// ---- Beta --------------------------------------------------------------------

inline void check_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) detail::bad_param("Beta", "both shape parameters must be positive");
}
inline double sample_beta(Rng& rng, double a, double b) {
  check_beta(a, b);
  ++rng.calls;
  const double x = std::gamma_distribution<double>(a, 1.0)(rng.engine());
  const double y = std::gamma_distribution<double>(b, 1.0)(rng.engine());
  return x / (x + y);
}
inline double loglik_beta(double x, double a, double b) {
  check_beta(a, b);
  if (!(x > 0.0 && x < 1.0)) return kNegInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - detail::log_beta_fn(a, b);
}

// ---- UniformInt [lo, hi] -----------------------------------------------------

inline void check_uniform_int(long long lo, long long hi) {
  if (lo > hi) detail::bad_param("UniformInt", "empty range [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
}
inline long long sample_uniform_int(Rng& rng, long long lo, long long hi) {
  check_uniform_int(lo, hi);
  ++rng.calls;
  return std::uniform_int_distribution<long long>(lo, hi)(rng.engine());
}
inline double loglik_uniform_int(long long v, long long lo, long long hi) {
  check_uniform_int(lo, hi);
  if (v < lo || v > hi) return kNegInf;
  return -std::log(static_cast<double>(hi - lo + 1));
}

// ---- UniformChoice over {0..n-1} ---------------------------------------------
// An empty set has no sample; callers treat the draw as impossible.

inline int sample_uniform_choice(Rng& rng, long long n) {
  ++rng.calls;
  if (n <= 0) return -1;
  return static_cast<int>(std::uniform_int_distribution<long long>(0, n - 1)(rng.engine()));
}
inline double loglik_uniform_choice(long long v, long long n) {
  if (v < 0 || v >= n) return kNegInf;
  return -std::log(static_cast<double>(n));
}

// ---- Categorical over explicit weights ---------------------------------------

inline void check_categorical(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) detail::bad_param("Categorical", "negative weight");
    total += p;
  }
  if (!(total > 0.0)) detail::bad_param("Categorical", "weights sum to zero");
}
/// Returns the index of the drawn outcome. Weights need not be normalised.
inline std::size_t sample_categorical(Rng& rng, std::span<const double> probs) {
  check_categorical(probs);
  ++rng.calls;
  double total = 0.0;
  for (double p : probs) total += p;
  double u = rng.open01() * total;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}
inline double loglik_categorical(std::size_t index, std::span<const double> probs) {
  check_categorical(probs);
  if (index >= probs.size()) return kNegInf;
  double total = 0.0;
  for (double p : probs) total += p;
  return std::log(probs[index] / total);
}

/// Draw an index proportional to exp(log_weights); -inf entries are never drawn.
inline std::size_t sample_log_categorical(Rng& rng, std::span<const double> log_weights) {
  double mx = kNegInf;
  for (double w : log_weights) mx = std::max(mx, w);
  if (mx == kNegInf) throw DomainError("Categorical: every candidate has zero probability");
  ++rng.calls;
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - mx);
  double u = rng.open01() * total;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double p = std::exp(log_weights[i] - mx);
    if (u < p) return i;
    u -= p;
  }
  for (std::size_t i = log_weights.size(); i-- > 0;)
    if (log_weights[i] != kNegInf) return i;
  return 0;
}

// ---- Conjugate posteriors ----------------------------------------------------

struct BetaParams {
  double alpha;
  double beta;
};
struct GammaParams {
  double shape;
  double rate;
};
struct GaussianParams {
  double mean;
  double var;
};

inline BetaParams beta_bernoulli_posterior(BetaParams prior, long long successes, long long failures) {
  return {prior.alpha + static_cast<double>(successes), prior.beta + static_cast<double>(failures)};
}

inline GammaParams gamma_poisson_posterior(GammaParams prior, long long sum_counts, long long n) {
  return {prior.shape + static_cast<double>(sum_counts), prior.rate + static_cast<double>(n)};
}

/// Gaussian prior on a mean with Gaussian children of known variance.
/// `precision_sum` = sum of 1/var_i, `weighted_sum` = sum of y_i/var_i.
inline GaussianParams gaussian_mean_posterior(GaussianParams prior, double weighted_sum, double precision_sum) {
  const double precision = 1.0 / prior.var + precision_sum;
  return {(prior.mean / prior.var + weighted_sum) / precision, 1.0 / precision};
}

/// Accumulates sufficient statistics from the children of a conjugate prior.
struct ConjugateStats {
  long long successes = 0;
  long long failures = 0;
  long long count_sum = 0;
  long long n = 0;
  double weighted_sum = 0.0;
  double precision_sum = 0.0;

  void add_bernoulli(bool v) { v ? ++successes : ++failures; }
  void add_poisson(long long k) {
    count_sum += k;
    ++n;
  }
  void add_gaussian(double y, double var) {
    check_gaussian(var);
    weighted_sum += y / var;
    precision_sum += 1.0 / var;
    ++n;
  }
};

/// A conjugate conditional as a density over the prior's value.
struct Posterior {
  enum class Family { None, Beta, Gamma, Gaussian };
  Family family = Family::None;
  double a = 0.0, b = 0.0;  // (alpha, beta), (shape, rate) or (mean, var)

  double logpdf(double v) const {
    switch (family) {
      case Family::Beta: return loglik_beta(v, a, b);
      case Family::Gamma: return loglik_gamma(v, a, b);
      case Family::Gaussian: return loglik_gaussian(v, a, b);
      case Family::None: break;
    }
    return kNegInf;
  }
};

}  // namespace blogc::rt
