#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace blogc::rt {

/// Escape a string for a JSON literal.
inline std::string json_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

inline std::string json_number(double x) {
  if (std::isnan(x)) return "null";
  if (std::isinf(x)) return x > 0 ? "1e308" : "-1e308";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Shortest round-trip rendering of a real value.
inline std::string fmt_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Running estimate for one query. Discrete queries keep a weighted
/// histogram keyed by an integer value code, rendered through a labeler;
/// real queries keep a weighted mean and, for unweighted chains, batch
/// means for the standard error.
class QueryStat {
 public:
  using Labeler = std::function<std::string(long long)>;

  QueryStat(std::string text, bool real, Labeler labeler = {})
      : text_(std::move(text)), real_(real), labeler_(std::move(labeler)) {}

  void configure(std::uint64_t n_samples, std::uint64_t batches = 50) {
    batch_size_ = std::max<std::uint64_t>(1, n_samples / batches);
  }

  /// Add an observation with log-weight `logw` (0 for MCMC samples).
  void add(long long code, double logw) {
    ++count_;
    if (logw == -INFINITY) return;
    if (logw == 0.0 && (!has_shift_ || shift_ == 0.0)) {
      has_shift_ = true;
      hist_[code] += 1.0;
      total_ += 1.0;
      return;
    }
    rescale(logw);
    const double w = std::exp(logw - shift_);
    hist_[code] += w;
    total_ += w;
  }

  void add_real(double value, double logw) {
    ++count_;
    if (logw == -INFINITY) return;
    rescale(logw);
    const double w = std::exp(logw - shift_);
    sum_ += w * value;
    total_ += w;
    if (logw == 0.0) {
      batch_sum_ += value;
      if (++batch_n_ == batch_size_) {
        batch_means_.push_back(batch_sum_ / static_cast<double>(batch_n_));
        batch_sum_ = 0.0;
        batch_n_ = 0;
      }
    }
  }

  const std::string& text() const { return text_; }
  bool real() const { return real_; }
  double total_weight() const { return total_; }

  std::string label(long long code) const { return labeler_ ? labeler_(code) : std::to_string(code); }

  /// Resolve the labels of every recorded code so the labeler's captures may die.
  void freeze_labels() {
    if (!labeler_) return;
    std::map<long long, std::string> names;
    for (const auto& kv : hist_) names[kv.first] = labeler_(kv.first);
    labeler_ = [names = std::move(names)](long long c) {
      auto it = names.find(c);
      return it == names.end() ? std::to_string(c) : it->second;
    };
  }

  double probability(const std::string& lbl) const {
    if (total_ <= 0.0) return 0.0;
    for (const auto& [k, w] : hist_)
      if (label(k) == lbl) return w / total_;
    return 0.0;
  }

  /// Normalised histogram keyed by label.
  std::map<std::string, double> histogram() const {
    std::map<std::string, double> out;
    for (const auto& [k, w] : hist_) out[label(k)] += total_ > 0.0 ? w / total_ : NAN;
    return out;
  }

  double mean() const { return total_ > 0.0 ? sum_ / total_ : NAN; }

  /// Batch-means standard error of the mean (NaN with fewer than 2 batches).
  double std_error() const {
    const std::size_t b = batch_means_.size();
    if (b < 2) return NAN;
    double m = 0.0;
    for (double x : batch_means_) m += x;
    m /= static_cast<double>(b);
    double v = 0.0;
    for (double x : batch_means_) v += (x - m) * (x - m);
    v /= static_cast<double>(b - 1);
    return std::sqrt(v / static_cast<double>(b));
  }

  std::string to_json() const {
    std::string out = "{\"query\":" + json_quote(text_);
    if (real_) {
      out += ",\"mean\":" + json_number(mean()) + ",\"std_error\":" + json_number(std_error());
    } else {
      out += ",\"histogram\":{";
      bool first = true;
      for (const auto& [k, p] : histogram()) {
        if (!first) out += ",";
        first = false;
        out += json_quote(k) + ":" + json_number(p);
      }
      out += "}";
    }
    return out + "}";
  }

 private:
  void rescale(double logw) {
    if (!has_shift_) {
      shift_ = logw;
      has_shift_ = true;
      return;
    }
    if (logw <= shift_) return;
    const double f = std::exp(shift_ - logw);
    for (auto& kv : hist_) kv.second *= f;
    total_ *= f;
    sum_ *= f;
    shift_ = logw;
  }

  std::string text_;
  bool real_;
  Labeler labeler_;
  std::map<long long, double> hist_;
  double total_ = 0.0;
  double sum_ = 0.0;
  double shift_ = 0.0;
  bool has_shift_ = false;
  std::uint64_t count_ = 0;
  std::uint64_t batch_size_ = 1;
  std::uint64_t batch_n_ = 0;
  double batch_sum_ = 0.0;
  std::vector<double> batch_means_;
};

struct RunStats {
  std::string model;
  std::string algo;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::uint64_t rng_calls = 0;
  std::uint64_t likelihood_evals = 0;
  double accept_rate = NAN;
  std::size_t world_size = 0;
  std::vector<const QueryStat*> queries;
  std::vector<std::pair<std::string, std::uint64_t>> debug_checks;  // debug-oracle runs only

  std::string to_json() const {
    std::string out = "{";
    out += "\"model\":" + json_quote(model);
    out += ",\"algo\":" + json_quote(algo);
    out += ",\"n_samples\":" + std::to_string(n_samples);
    out += ",\"seed\":" + std::to_string(seed);
    out += ",\"wall_time_s\":" + json_number(wall_time_s);
    out += ",\"rng_calls\":" + std::to_string(rng_calls);
    out += ",\"likelihood_evals\":" + std::to_string(likelihood_evals);
    out += ",\"accept_rate\":" + json_number(accept_rate);
    out += ",\"world_size\":" + std::to_string(world_size);
    out += ",\"query_results\":[";
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (i) out += ",";
      out += queries[i]->to_json();
    }
    out += "]";
    if (!debug_checks.empty()) {
      out += ",\"debug_checks\":{";
      for (std::size_t i = 0; i < debug_checks.size(); ++i)
        out += (i ? "," : "") + json_quote(debug_checks[i].first) + ":" + std::to_string(debug_checks[i].second);
      out += "}";
    }
    return out + "}";
  }
};

}  // namespace blogc::rt
