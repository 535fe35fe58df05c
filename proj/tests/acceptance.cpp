// Acceptance suite: one pass/fail line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blogc/analysis/analysis.hpp"
#include "blogc/bench/bench.hpp"
#include "blogc/codegen/codegen.hpp"
#include "blogc/frontend/validate.hpp"
#include "blogc/interp/interp.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace blogc;

namespace {

struct Env {
  fs::path models;
  fs::path tests;
  fs::path work;
  int jobs = 1;
};

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fixed(double x, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return out + "'";
}

std::string suffix(const bench::Flags& f) {
  std::string s;
  if (!f.db) s += "_nodb";
  if (!f.rc) s += "_norc";
  if (!f.acu) s += "_noacu";
  return s;
}

/// Same naming as the bench harness so both share the build cache.
fs::path build_program(const Env& e, const fs::path& model, cg::Algo algo, bench::Flags f = {}) {
  const fe::TypedModel tm = fe::load_model_file(model.string());
  cg::CodegenOptions opt;
  opt.algo = algo;
  opt.db = f.db;
  opt.rc = f.rc;
  opt.acu = f.acu;
  opt.model_name = model.stem().string();
  return cg::build(cg::emit_program(tm, an::analyze(tm), opt), e.work / "build",
                   opt.model_name + "_" + cg::algo_name(algo) + suffix(f));
}

/// Run a compiled program and return its stats; `wall` gets the process wall time.
json run_program(const Env& e, const fs::path& exe, std::uint64_t n, std::uint64_t seed, const std::string& extra = "",
                 double* wall = nullptr) {
  const fs::path dir = e.work / "runs";
  fs::create_directories(dir);
  const std::string stem = exe.filename().string() + "_" + std::to_string(n) + "_" + std::to_string(seed);
  const fs::path stats = dir / (stem + ".json");
  const fs::path err = dir / (stem + ".stderr");
  const std::string cmd = "timeout 3600 " + quote(exe.string()) + " -n " + std::to_string(n) + " --seed " +
                          std::to_string(seed) + " --quiet --stats " + quote(stats.string()) + " " + extra + " 2> " +
                          quote(err.string());
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  if (wall) *wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    std::ifstream in(err);
    std::string line, last;
    while (std::getline(in, line))
      if (!line.empty()) last = line;
    throw std::runtime_error(exe.filename().string() + " seed " + std::to_string(seed) + " failed: " + last);
  }
  std::ifstream in(stats);
  return json::parse(in);
}

/// Largest absolute difference between an estimated and an exact histogram.
double hist_error(const json& est, const std::map<std::string, double>& exact) {
  double err = 0.0;
  for (const auto& [label, p] : exact) {
    const double q = est.contains(label) ? est.at(label).get<double>() : 0.0;
    err = std::max(err, std::abs(q - p));
  }
  return err;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

// ---- criteria ----------------------------------------------------------------

Result correctness_vs_exact(const Env& e) {
  Result r{true, ""};
  double worst = 0.0, slowest = 0.0;
  std::vector<std::string> misses;
  for (const char* m : {"burglary", "hurricane"}) {
    const fs::path path = e.models / (std::string(m) + ".blog");
    const interp::ExactResult exact = interp::enumerate_exact(fe::load_model_file(path.string()));
    for (cg::Algo algo : {cg::Algo::LW, cg::Algo::PMH, cg::Algo::Gibbs}) {
      const fs::path exe = build_program(e, path, algo);
      for (std::uint64_t seed : kSeeds) {
        double wall = 0.0;
        const json st = run_program(e, exe, 1000000, seed, "", &wall);
        const double err = hist_error(st["query_results"][0]["histogram"], exact.dist[0]);
        worst = std::max(worst, err);
        slowest = std::max(slowest, wall);
        if (err > 0.005 || wall > 60.0) {
          r.pass = false;
          misses.push_back(std::string(m) + "/" + cg::algo_name(algo) + " seed " + std::to_string(seed) + " err " +
                           fixed(err, 4) + (wall > 60.0 ? " slow " + fixed(wall, 1) + "s" : ""));
        }
      }
    }
  }
  r.detail = "18 runs at 1e6, max |err| " + fixed(worst, 4) + " (bound 0.005), slowest " + fixed(slowest, 2) + "s";
  for (const std::string& s : misses) r.detail += "; " + s;
  return r;
}

Result open_universe_correctness(const Env& e) {
  const fs::path path = e.models / "urnball_20_2.blog";
  const interp::ExactResult exact = interp::enumerate_exact(fe::load_model_file(path.string()));
  const fs::path exe = build_program(e, path, cg::Algo::PMH);
  Result r{true, ""};
  double worst = 0.0;
  for (std::uint64_t seed : kSeeds) {
    const json st = run_program(e, exe, 1000000, seed);
    const double err = hist_error(st["query_results"][0]["histogram"], exact.dist[0]);
    worst = std::max(worst, err);
    if (err > 0.01) r.pass = false;
  }
  r.detail = "exact P(Blue) " + fixed(exact.dist[0].at("Blue"), 6) + " over " + std::to_string(exact.worlds) +
             " worlds; max |err| " + fixed(worst, 4) + " at 1e6, seeds 1-3 (bound 0.01)";
  return r;
}

Result incremental_ratio_matches_full(const Env& e) {
  Result r{true, ""};
  double worst = 0.0;
  for (const char* m : {"burglary", "hurricane", "urnball_20_10", "infgmm"}) {
    const fs::path path = e.models / (std::string(m) + ".blog");
    const fs::path exe = build_program(e, path, cg::Algo::PMH);
    const fs::path trace = e.work / "runs" / (std::string(m) + "_eq.jsonl");
    run_program(e, exe, 10000, 1, "--record-proposals " + quote(trace.string()));
    const interp::ReplayReport rep = interp::check_replay(fe::load_model_file(path.string()), trace.string());
    worst = std::max(worst, rep.max_rel_err);
    const bool ok = rep.ok() && rep.steps == 10000 && rep.alpha_checks == 10000 && rep.max_rel_err <= 1e-9;
    if (!ok) {
      r.pass = false;
      r.detail += std::string(m) + ": " + (rep.ok() ? "incomplete trace" : rep.failure) + "; ";
    }
  }
  r.detail += "4 models x 1e4 paired steps, max relative log-alpha difference " + sci(worst) + " (bound 1e-9)";
  return r;
}

/// Runs cells through the bench harness and reports its comparison rows.
Result bench_rows(const Env& e, bench::BenchSpec spec, const std::string& name) {
  spec.models_dir = e.models.string();
  spec.work_dir = e.work.string();
  spec.jobs = e.jobs;
  const bench::BenchReport rep = bench::run_suite(spec);
  std::ofstream(e.work / (name + ".json")) << bench::render_json(rep);
  Result r{rep.acceptance_ok(), ""};
  for (const bench::ComparisonResult& c : rep.comparisons) {
    if (!r.detail.empty()) r.detail += "; ";
    r.detail += c.cmp.label + " ";
    switch (c.cmp.kind) {
      case bench::Comparison::Kind::CallsSaved:
      case bench::Comparison::Kind::Overhead: r.detail += fixed(100.0 * c.value, 1) + "%"; break;
      case bench::Comparison::Kind::Speedup: r.detail += fixed(c.value, 2) + "x"; break;
      case bench::Comparison::Kind::Identical: r.detail += c.value == 1.0 ? "identical" : "differ"; break;
    }
    if (c.status != bench::ComparisonResult::Status::Pass && c.status != bench::ComparisonResult::Status::Info)
      r.detail += std::string(" [") + bench::status_name(c.status) + (c.note.empty() ? "" : ": " + c.note) + "]";
  }
  // Counters must not depend on the repetition.
  for (const bench::CellResult& c : rep.cells)
    for (const bench::RunRecord& run : c.runs)
      for (const bench::RunRecord& other : c.runs)
        if (run.seed == other.seed &&
            (run.rng_calls != other.rng_calls || run.likelihood_evals != other.likelihood_evals)) {
          r.pass = false;
          r.detail += "; " + c.cell.id() + " counters differ between repetitions";
          return r;
        }
  return r;
}

bench::Cell cell(const std::string& model, cg::Algo algo, bench::Flags f, std::uint64_t n, int reps,
                 std::vector<std::uint64_t> seeds = kSeeds) {
  bench::Cell c;
  c.model = model;
  c.algo = algo;
  c.flags = f;
  c.n = n;
  c.reps = reps;
  c.seeds = std::move(seeds);
  return c;
}

using K = bench::Comparison::Kind;
const bench::Flags kOn{};
const bench::Flags kNoDb{false, true, true};
const bench::Flags kNoRc{true, false, true};
const bench::Flags kNoAcu{true, true, false};

Result db_calls_saved(const Env& e) {
  bench::BenchSpec s;
  for (const char* m : {"burglary", "urnball_20_2", "hurricane"}) {
    s.cells.push_back(cell(m, cg::Algo::LW, kOn, 100000, 2));
    s.cells.push_back(cell(m, cg::Algo::LW, kNoDb, 100000, 2));
  }
  const std::string g = "DB";
  s.comparisons = {
      {g, "burglary rng calls", K::Identical, "rng_calls", "burglary/lw", "burglary/lw/nodb", std::nullopt, true},
      {g, "urnball_20_2 saved", K::CallsSaved, "rng_calls", "urnball_20_2/lw", "urnball_20_2/lw/nodb", 0.50, true},
      {g, "hurricane saved", K::CallsSaved, "rng_calls", "hurricane/lw", "hurricane/lw/nodb", 0.25, true},
  };
  return bench_rows(e, s, "db");
}

Result acu_calls_saved(const Env& e) {
  bench::BenchSpec s;
  s.cells.push_back(cell("burglary", cg::Algo::PMH, kOn, 1000000, 11));
  s.cells.push_back(cell("burglary", cg::Algo::PMH, kNoAcu, 1000000, 11));
  for (const char* m : {"urnball_20_10", "urnball_40_20"}) {
    s.cells.push_back(cell(m, cg::Algo::PMH, kOn, 100000, 2));
    s.cells.push_back(cell(m, cg::Algo::PMH, kNoAcu, 100000, 2));
  }
  const std::string g = "ACU";
  s.comparisons = {
      {g, "burglary likelihood evals", K::Identical, "likelihood_evals", "burglary/pmh", "burglary/pmh/noacu",
       std::nullopt, true},
      {g, "burglary overhead", K::Overhead, "wall_time_s", "burglary/pmh", "burglary/pmh/noacu", 0.05, true},
      {g, "urnball_20_10 saved", K::CallsSaved, "likelihood_evals", "urnball_20_10/pmh", "urnball_20_10/pmh/noacu",
       0.60, true},
      {g, "urnball_40_20 saved", K::CallsSaved, "likelihood_evals", "urnball_40_20/pmh", "urnball_40_20/pmh/noacu",
       0.70, true},
  };
  return bench_rows(e, s, "acu");
}

Result rc_speedup(const Env& e) {
  bench::BenchSpec s;
  s.cells.push_back(cell("urnball_40_20", cg::Algo::PMH, kOn, 1000000, 5));
  s.cells.push_back(cell("urnball_40_20", cg::Algo::PMH, kNoRc, 1000000, 5));
  s.comparisons = {{"RC", "urnball_40_20 speedup (median of 5)", K::Speedup, "wall_time_s", "urnball_40_20/pmh",
                    "urnball_40_20/pmh/norc", 1.3, true}};
  return bench_rows(e, s, "rc");
}

Result compiled_vs_interpreted(const Env& e) {
  bench::BenchSpec s;
  s.cells.push_back(cell("gmm", cg::Algo::PMH, kOn, 100000, 5));
  bench::Cell in = cell("gmm", cg::Algo::PMH, kOn, 100000, 1);
  in.engine = bench::Engine::Interp;
  in.timeout_s = 3600.0;
  s.cells.push_back(in);
  s.comparisons = {{"Interp", "gmm PMH speedup", K::Speedup, "wall_time_s", "gmm/pmh", "gmm/pmh/interp", 10.0, true}};
  return bench_rows(e, s, "interp");
}

Result invariant_suites(const Env& e) {
  struct Model {
    fs::path path;
    bool gibbs_conjugate;
  };
  const std::vector<Model> models = {
      {e.models / "burglary.blog", false},      {e.models / "hurricane.blog", false},
      {e.models / "urnball_20_2.blog", false},  {e.models / "urnball_20_10.blog", false},
      {e.models / "urnball_40_20.blog", false},
      {e.models / "gmm.blog", true},            {e.models / "infgmm.blog", true},
      {e.tests / "fixtures" / "coin.blog", true}, {e.tests / "fixtures" / "storms.blog", true},
  };
  const std::uint64_t kMin = 1000;
  Result r{true, ""};
  std::map<std::string, std::uint64_t> least{
      {"consistency", ~0ull}, {"atomicity", ~0ull}, {"memo", ~0ull}, {"state", ~0ull}, {"conjugate", ~0ull}};
  std::map<std::string, std::uint64_t> families;
  auto need = [&](const std::string& what, const std::string& model, std::uint64_t got) {
    least[what] = std::min(least[what], got);
    if (got < kMin) {
      r.pass = false;
      r.detail += model + ": only " + std::to_string(got) + " " + what + " checks; ";
    }
  };
  for (const Model& m : models) {
    const std::string name = m.path.stem().string();
    try {
      const fe::TypedModel tm = fe::load_model_file(m.path.string());
      // RC and ACU exactness against the runtime's own recomputation, atomicity of rejections.
      const fs::path trace = e.work / "runs" / (name + "_inv.jsonl");
      const json pmh = run_program(e, build_program(e, m.path, cg::Algo::PMH), 10000, 7,
                                   "--debug-oracle --record-state --record-proposals " + quote(trace.string()));
      need("consistency", name, pmh["debug_checks"]["consistency"]);
      need("atomicity", name, pmh["debug_checks"]["atomicity"]);
      // Values, cnt, Ch and Cont against the interpreter after every accepted step.
      const interp::ReplayReport rep = interp::check_replay(tm, trace.string());
      if (!rep.ok()) {
        r.pass = false;
        r.detail += name + ": " + rep.failure + "; ";
      }
      need("state", name, rep.state_checks);
      // Memoised getters return the same value within a generation.
      const json lw = run_program(e, build_program(e, m.path, cg::Algo::LW), 10000, 7, "--debug-oracle");
      need("memo", name, lw["debug_checks"]["memo"]);
      if (m.gibbs_conjugate) {
        const json g = run_program(e, build_program(e, m.path, cg::Algo::Gibbs), 40000, 7, "--debug-oracle");
        need("conjugate", name, g["debug_checks"]["conjugate"]);
        const an::AnalysisResult a = an::analyze(tm);
        for (const an::ConjugacyTag& t : a.conjugacy)
          if (t.kind != an::Conjugacy::None) families[an::conjugacy_name(t.kind)] += g["debug_checks"]["conjugate"].get<std::uint64_t>();
      }
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail += name + ": " + ex.what() + "; ";
    }
  }
  for (const char* f : {"BetaBernoulli", "GammaPoisson", "GaussianGaussianMean"})
    if (families[f] < kMin) {
      r.pass = false;
      r.detail += std::string("conjugate family ") + f + " checked " + std::to_string(families[f]) + " times; ";
    }
  r.detail += std::to_string(models.size()) + " models, fewest checks per model:";
  for (const auto& [k, v] : least) r.detail += " " + k + " " + std::to_string(v);
  return r;
}

Result gibbs_validity(const Env& e) {
  const fs::path path = e.models / "gmm.blog";
  const json g = run_program(e, build_program(e, path, cg::Algo::Gibbs), 1000000, 1);
  const json p = run_program(e, build_program(e, path, cg::Algo::PMH), 1000000, 1);
  Result r{g["accept_rate"].get<double>() == 1.0, ""};
  r.detail = "Gibbs acceptance " + fixed(g["accept_rate"].get<double>(), 6) + "; mu z-scores vs PMH:";
  double worst = 0.0;
  for (std::size_t i = 0; i < g["query_results"].size(); ++i) {
    const json& a = g["query_results"][i];
    const json& b = p["query_results"][i];
    const double se = std::hypot(a["std_error"].get<double>(), b["std_error"].get<double>());
    const double z = std::abs(a["mean"].get<double>() - b["mean"].get<double>()) / se;
    worst = std::max(worst, z);
    r.detail += " " + fixed(z, 2);
  }
  if (!(worst <= 3.0)) r.pass = false;
  r.detail += " (bound 3)";
  return r;
}

Result emission_goldens(const Env& e) {
  Result r{true, ""};
  int programs = 0;
  for (const char* m : {"burglary", "hurricane", "urnball_20_2", "urnball_20_10", "urnball_40_20", "gmm", "infgmm"}) {
    const std::string path = (e.models / (std::string(m) + ".blog")).string();
    for (cg::Algo algo : {cg::Algo::LW, cg::Algo::PMH, cg::Algo::Gibbs})
      for (int bits = 0; bits < 8; ++bits) {
        cg::CodegenOptions opt;
        opt.algo = algo;
        opt.db = bits & 1;
        opt.rc = bits & 2;
        opt.acu = bits & 4;
        opt.model_name = m;
        const fe::TypedModel t1 = fe::load_model_file(path);
        const fe::TypedModel t2 = fe::load_model_file(path);
        if (cg::emit_program(t1, an::analyze(t1), opt) != cg::emit_program(t2, an::analyze(t2), opt)) {
          r.pass = false;
          r.detail += std::string(m) + "/" + cg::algo_name(algo) + " flags " + std::to_string(bits) + " differs; ";
        }
        ++programs;
      }
  }
  // The build writes the same bytes it was given.
  const fe::TypedModel tm = fe::load_model_file((e.models / "infgmm.blog").string());
  cg::CodegenOptions opt;
  opt.model_name = "infgmm";
  const std::string src = cg::emit_program(tm, an::analyze(tm), opt);
  const fs::path exe = build_program(e, e.models / "infgmm.blog", cg::Algo::PMH);
  std::ifstream built(exe.string() + ".cpp");
  std::stringstream ss;
  ss << built.rdbuf();
  if (built && ss.str() != src) {
    r.pass = false;
    r.detail += "built source differs from emission; ";
  }

  const auto b = src.find("void Var_x::add_to_ch() {");
  const auto end = src.find("void Var_x::del_from_ch()");
  std::ifstream gf(e.tests / "golden" / "infgmm_x_add_to_ch.txt");
  std::stringstream golden;
  golden << gf.rdbuf();
  const std::string section = b == std::string::npos || end == std::string::npos ? "" : src.substr(b, end - b);
  int regs = 0;
  std::istringstream lines(section);
  for (std::string line; std::getline(lines, line);)
    if (line.find("W.ch_add(") != std::string::npos || line.find("W.cont_add(") != std::string::npos) ++regs;
  if (section.empty() || section != golden.str()) {
    r.pass = false;
    r.detail += "infgmm add_to_Ch differs from the golden; ";
  }
  if (regs != 3) r.pass = false;
  r.detail += std::to_string(programs) + " programs emitted twice, byte-identical" +
              std::string(r.pass ? "" : " (see above)") + "; infgmm add_to_Ch has " + std::to_string(regs) +
              " registrations";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blogc acceptance suite"};
  Env env;
  std::string work = "acceptance_work";
  std::string models = BLOGC_MODELS_DIR;
  std::string tests = BLOGC_TESTS_DIR;
  std::vector<int> only;
  std::vector<int> known_red;
  app.add_option("--work-dir", work, "build and run directory")->capture_default_str();
  app.add_option("--models-dir", models, "model corpus")->capture_default_str();
  app.add_option("--tests-dir", tests, "fixtures and goldens")->capture_default_str();
  app.add_option("--only", only, "run only these criteria (1-10)");
  app.add_option("--known-red", known_red, "criteria whose failure is reported but does not set the exit status");
  app.add_option("--jobs", env.jobs, "concurrent bench cells")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  env.work = fs::absolute(work);
  env.models = models;
  env.tests = tests;
  fs::create_directories(env.work);

  const std::vector<std::pair<std::string, std::function<Result(const Env&)>>> criteria = {
      {"LW, PMH and Gibbs match exact enumeration on burglary and hurricane", correctness_vs_exact},
      {"PMH matches exact enumeration on the open-universe urn", open_universe_correctness},
      {"incremental acceptance ratio equals the full-world ratio", incremental_ratio_matches_full},
      {"dynamic backchaining call savings", db_calls_saved},
      {"adaptive contingency updating call savings", acu_calls_saved},
      {"reference counting speedup", rc_speedup},
      {"compiled PMH at least 10x faster than the interpreter", compiled_vs_interpreted},
      {"invariant suites", invariant_suites},
      {"Gibbs validity on GMM", gibbs_validity},
      {"deterministic emission and add_to_Ch golden", emission_goldens},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Result r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r = criteria[i].second(env);
    } catch (const std::exception& ex) {
      r = {false, std::string("error: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool known = std::find(known_red.begin(), known_red.end(), id) != known_red.end();
    if (!r.pass && !known) ++failed;
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << id << ". " << criteria[i].first << ": " << r.detail << " ("
              << fixed(secs, 1) << "s)" << (!r.pass && known ? " [known red]" : "") << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failed ? 1 : 0;
}
