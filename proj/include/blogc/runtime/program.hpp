#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "blogc/runtime/stats.hpp"
#include "blogc/runtime/world.hpp"

namespace blogc::rt {

/// Command line of a generated inference program.
struct Options {
  std::uint64_t n = 10000;
  std::uint64_t seed = 1;
  std::string stats_path;
  std::string record_path;
  bool record_state = false;
  bool debug_oracle = false;
  bool quiet = false;
};

inline void usage(const char* prog) {
  std::fprintf(stderr,
               "usage: %s [-n N] [--seed S] [--stats FILE] [--debug-oracle]\n"
               "          [--record-proposals FILE] [--record-state] [--quiet]\n",
               prog);
}

inline Options parse_options(int argc, char** argv) {
  Options o;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        usage(argv[0]);
        std::exit(2);
      }
      return argv[++i];
    };
    if (a == "-n")
      o.n = std::stoull(next());
    else if (a == "--seed")
      o.seed = std::stoull(next());
    else if (a == "--stats")
      o.stats_path = next();
    else if (a == "--record-proposals")
      o.record_path = next();
    else if (a == "--record-state")
      o.record_state = true;
    else if (a == "--debug-oracle")
      o.debug_oracle = true;
    else if (a == "--quiet")
      o.quiet = true;
    else {
      usage(argv[0]);
      std::exit(2);
    }
  }
  return o;
}

/// Observes MH / Gibbs steps: writes the proposal trace and, in debug-oracle
/// mode, checks atomicity of rejected proposals and the maintained sets.
class StepMonitor {
 public:
  StepMonitor(World& world, const Options& opt) : world_(world), opt_(opt) {
    if (!opt.record_path.empty()) {
      out_ = std::fopen(opt.record_path.c_str(), "w");
      if (!out_) throw std::runtime_error("cannot open " + opt.record_path);
    }
    if (out_ || opt.debug_oracle) world_.record = &rec_;
  }
  ~StepMonitor() {
    if (out_) std::fclose(out_);
    world_.record = nullptr;
  }
  StepMonitor(const StepMonitor&) = delete;
  StepMonitor& operator=(const StepMonitor&) = delete;

  void initial() {
    if (opt_.debug_oracle) world_.check_consistency();
    if (!out_) return;
    std::string line = "{\"kind\":\"init\",\"acu\":";
    line += world_.acu ? "true" : "false";
    line += ",\"rc\":";
    line += world_.rc ? "true" : "false";
    line += ",\"world\":" + world_json(false) + "}\n";
    std::fputs(line.c_str(), out_);
  }

  void before() {
    if (opt_.debug_oracle) hash_ = world_.state_hash();
  }

  void after(std::uint64_t i) {
    if (opt_.debug_oracle) {
      if (!rec_.accepted) ++world_.counters.atomicity_checks;
      if (!rec_.accepted && world_.state_hash() != hash_)
        throw RuntimeFault("rejected proposal on " + rec_.var->name() + " modified the world at step " +
                           std::to_string(i));
      if (rec_.accepted) world_.check_consistency();
    }
    if (!out_) return;
    std::string line = "{\"kind\":\"step\",\"i\":" + std::to_string(i);
    line += ",\"var\":" + json_quote(rec_.var->name());
    line += ",\"proposed\":[";
    for (std::size_t k = 0; k < rec_.proposed.size(); ++k) {
      if (k) line += ",";
      line += "[" + json_quote(rec_.proposed[k].first->name()) + "," + json_quote(rec_.proposed[k].second) + "]";
    }
    line += "],\"log_alpha\":";
    line += rec_.has_alpha ? json_number(rec_.log_alpha) : std::string("null");
    line += ",\"w\":" + std::to_string(rec_.w_old) + ",\"w_new\":" + std::to_string(rec_.w_new);
    line += ",\"accepted\":";
    line += rec_.accepted ? "true" : "false";
    if (rec_.accepted && opt_.record_state) line += ",\"state\":" + world_json(true);
    line += "}\n";
    std::fputs(line.c_str(), out_);
  }

 private:
  std::string world_json(bool full) const {
    std::string s = "[";
    bool first = true;
    for (const Var* v : world_.all) {
      if (!v->active || v->is_site()) continue;
      if (!first) s += ",";
      first = false;
      s += "[" + json_quote(v->name()) + "," + json_quote(v->value_string());
      if (full) {
        s += "," + std::to_string(v->cnt) + "," + names(v->ch) + "," + names(v->cont);
      }
      s += "]";
    }
    return s + "]";
  }

  static std::string names(const VarSet& set) {
    std::vector<std::string> ns;
    for (const Var* c : set) ns.push_back(c->name());
    std::sort(ns.begin(), ns.end());
    std::string s = "[";
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (i) s += ",";
      s += json_quote(ns[i]);
    }
    return s + "]";
  }

  World& world_;
  const Options& opt_;
  StepRecord rec_;
  std::FILE* out_ = nullptr;
  std::uint64_t hash_ = 0;
};

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

/// Write the stats JSON (when requested) and a short summary on stdout.
inline void finish(const RunStats& stats, const Options& opt) {
  const std::string json = stats.to_json();
  if (!opt.stats_path.empty()) {
    std::FILE* f = std::fopen(opt.stats_path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + opt.stats_path);
    std::fputs(json.c_str(), f);
    std::fputs("\n", f);
    std::fclose(f);
  }
  if (!opt.quiet) std::printf("%s\n", json.c_str());
}

}  // namespace blogc::rt
