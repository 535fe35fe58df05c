// blogc command line: compile, run, enumerate, check-replay, bench.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "blogc/analysis/analysis.hpp"
#include "blogc/bench/bench.hpp"
#include "blogc/codegen/codegen.hpp"
#include "blogc/frontend/validate.hpp"
#include "blogc/interp/interp.hpp"

namespace fs = std::filesystem;
using namespace blogc;

namespace {

struct CompileArgs {
  std::string model;
  std::string algo = "pmh";
  bool no_db = false;
  bool no_rc = false;
  bool no_acu = false;
  long clear_memory_every = 0;
  std::string output;
  bool emit_only = false;
  bool dump_analysis = false;
};

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

cg::CodegenOptions codegen_options(const CompileArgs& a) {
  cg::CodegenOptions o;
  if (!cg::parse_algo(a.algo, o.algo)) throw CLI::ValidationError("--algo", "expected lw, pmh or gibbs");
  o.db = !a.no_db;
  o.rc = !a.no_rc;
  o.acu = !a.no_acu;
  o.clear_memory_every = a.clear_memory_every;
  o.model_name = stem_of(a.model);
  return o;
}

int do_compile(const CompileArgs& a) {
  const fe::TypedModel tm = fe::load_model_file(a.model);
  const an::AnalysisResult an = an::analyze(tm);
  if (a.dump_analysis) {
    std::cout << an.to_json(tm) << "\n";
    return 0;
  }
  const cg::CodegenOptions opt = codegen_options(a);
  const std::string src = cg::emit_program(tm, an, opt);
  if (a.emit_only) {
    if (a.output.empty() || a.output == "-") {
      std::cout << src;
    } else {
      std::ofstream(a.output) << src;
    }
    return 0;
  }
  fs::path out = a.output.empty() ? fs::path(opt.model_name + "_" + cg::algo_name(opt.algo)) : fs::path(a.output);
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  const fs::path exe = cg::build(src, dir / ".blogc-build", out.filename().string());
  fs::copy_file(exe, out, fs::copy_options::overwrite_existing);
  std::cerr << "wrote " << out.string() << "\n";
  return 0;
}

struct RunArgs {
  CompileArgs c;
  std::string engine = "compiled";
  std::uint64_t n = 10000;
  std::uint64_t seed = 1;
  std::string stats;
  std::string record;
  bool record_state = false;
  bool debug_oracle = false;
  std::string replay;
  bool quiet = false;
};

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return out + "'";
}

int run_compiled(const RunArgs& a) {
  const fe::TypedModel tm = fe::load_model_file(a.c.model);
  const cg::CodegenOptions opt = codegen_options(a.c);
  std::string name = opt.model_name + "_" + cg::algo_name(opt.algo);
  if (!opt.db) name += "_nodb";
  if (!opt.rc) name += "_norc";
  if (!opt.acu) name += "_noacu";
  const fs::path exe = cg::build(cg::emit_program(tm, an::analyze(tm), opt), fs::path(".blogc-build"), name);
  std::string cmd = quote(exe.string()) + " -n " + std::to_string(a.n) + " --seed " + std::to_string(a.seed);
  if (!a.stats.empty()) cmd += " --stats " + quote(a.stats);
  if (!a.record.empty()) cmd += " --record-proposals " + quote(a.record);
  if (a.record_state) cmd += " --record-state";
  if (a.debug_oracle) cmd += " --debug-oracle";
  if (a.quiet) cmd += " --quiet";
  const int rc = std::system(cmd.c_str());
  return rc == 0 ? 0 : 1;
}

int run_interp(const RunArgs& a) {
  const fe::TypedModel tm = fe::load_model_file(a.c.model);
  if (!a.replay.empty()) {
    const interp::ReplayReport rep = interp::check_replay(tm, a.replay);
    std::cout << rep.to_json() << "\n";
    return rep.ok() ? 0 : 1;
  }
  cg::Algo algo;
  if (!cg::parse_algo(a.c.algo, algo)) throw CLI::ValidationError("--algo", "expected lw, pmh or gibbs");
  interp::RunResult res;
  if (algo == cg::Algo::LW)
    res = interp::interp_lw(tm, a.n, a.seed, a.c.no_db);
  else if (algo == cg::Algo::PMH)
    res = interp::interp_pmh_full(tm, a.n, a.seed);
  else
    throw std::runtime_error("the interpreter runs lw and pmh only");
  res.stats.model = stem_of(a.c.model);
  const std::string j = res.to_json();
  if (!a.stats.empty()) std::ofstream(a.stats) << j << "\n";
  if (!a.quiet) std::cout << j << "\n";
  return 0;
}

int do_enumerate(const std::string& model) {
  const interp::ExactResult r = interp::enumerate_exact(fe::load_model_file(model));
  nlohmann::ordered_json j;
  j["model"] = stem_of(model);
  j["worlds"] = r.worlds;
  j["evidence_prob"] = r.evidence_prob;
  j["queries"] = nlohmann::ordered_json::array();
  for (std::size_t q = 0; q < r.query_text.size(); ++q) {
    nlohmann::ordered_json e;
    e["query"] = r.query_text[q];
    e["distribution"] = r.dist[q];
    j["queries"].push_back(e);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct BenchArgs {
  std::string suite = "default";
  std::string models_dir;
  std::string work_dir = ".blogc-bench";
  std::string out;
  std::string csv;
  std::uint64_t n = 100000;
  int reps = 5;
  int jobs = 1;
};

int do_bench(const BenchArgs& a) {
  std::string models = a.models_dir;
  if (models.empty()) models = std::getenv("BLOGC_MODELS_DIR") ? std::getenv("BLOGC_MODELS_DIR") : "models";
  bench::BenchSpec spec = bench::default_suite(models, a.n, a.reps);
  spec.work_dir = a.work_dir;
  spec.jobs = a.jobs;
  const bench::BenchReport rep = bench::run_suite(spec);
  std::cout << bench::render_table(rep);
  if (!a.out.empty()) std::ofstream(a.out) << bench::render_json(rep);
  if (!a.csv.empty()) std::ofstream(a.csv) << bench::render_csv(rep);
  return rep.acceptance_ok() ? 0 : 2;
}

void add_compile_flags(CLI::App* sub, CompileArgs& a) {
  sub->add_option("model", a.model, "model file (.blog)")->required()->check(CLI::ExistingFile);
  sub->add_option("--algo", a.algo, "lw, pmh or gibbs")->capture_default_str();
  sub->add_flag("--no-db", a.no_db, "eager sampling instead of lazy memoised getters (LW)");
  sub->add_flag("--no-rc", a.no_rc, "disable reference counting");
  sub->add_flag("--no-acu", a.no_acu, "disable maintained children / contingent sets");
  sub->add_option("--clear-memory-every", a.clear_memory_every, "shrink dynamic tables every K iterations");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blogc: compiler for a subset of BLOG"};
  app.require_subcommand(1);

  CompileArgs compile;
  CLI::App* c = app.add_subcommand("compile", "emit and build an inference program");
  add_compile_flags(c, compile);
  c->add_option("-o,--output", compile.output, "output executable (or source with --emit-source)");
  c->add_flag("--emit-source", compile.emit_only, "write the generated C++ instead of building it");
  c->add_flag("--dump-analysis", compile.dump_analysis, "print the dependency analysis as JSON");

  RunArgs run;
  CLI::App* r = app.add_subcommand("run", "run inference with the compiled program or the interpreter");
  add_compile_flags(r, run.c);
  r->add_option("--engine", run.engine, "compiled or interp")->check(CLI::IsMember({"compiled", "interp"}))->capture_default_str();
  r->add_option("-n", run.n, "number of samples or steps")->capture_default_str();
  r->add_option("--seed", run.seed, "random seed")->capture_default_str();
  r->add_option("--stats", run.stats, "write the stats JSON here");
  r->add_option("--record-proposals", run.record, "write the proposal trace (compiled engine)");
  r->add_flag("--record-state", run.record_state, "include world, cnt, Ch and Cont after each accepted step");
  r->add_flag("--debug-oracle", run.debug_oracle, "check invariants after every step (compiled engine)");
  r->add_option("--replay-proposals", run.replay, "re-check a recorded trace with the interpreter");
  r->add_flag("--quiet", run.quiet, "no summary on stdout");

  std::string enum_model;
  CLI::App* e = app.add_subcommand("enumerate", "exact posterior of a finite discrete model");
  e->add_option("model", enum_model, "model file")->required()->check(CLI::ExistingFile);

  std::string replay_model, replay_trace;
  std::uint64_t replay_max = 0;
  CLI::App* cr = app.add_subcommand("check-replay", "compare a proposal trace against full-world acceptance ratios");
  cr->add_option("model", replay_model, "model file")->required()->check(CLI::ExistingFile);
  cr->add_option("trace", replay_trace, "trace written with --record-proposals")->required()->check(CLI::ExistingFile);
  cr->add_option("--max-steps", replay_max, "stop after this many steps (0 = all)");

  BenchArgs bench_args;
  CLI::App* b = app.add_subcommand("bench", "run the ablation suite and report calls saved and speedups");
  b->add_option("--suite", bench_args.suite, "suite name")->check(CLI::IsMember({"default"}))->capture_default_str();
  b->add_option("--models-dir", bench_args.models_dir, "model corpus (default $BLOGC_MODELS_DIR or ./models)");
  b->add_option("--work-dir", bench_args.work_dir, "build and run directory")->capture_default_str();
  b->add_option("--out", bench_args.out, "write the JSON report here");
  b->add_option("--csv", bench_args.csv, "write the comparison rows as CSV here");
  b->add_option("-n", bench_args.n, "samples or steps per run")->check(CLI::Range(1000, 1000000000))->capture_default_str();
  b->add_option("--reps", bench_args.reps, "repetitions per compiled cell")->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--jobs", bench_args.jobs, "cells run concurrently")->check(CLI::PositiveNumber)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (c->parsed()) return do_compile(compile);
    if (r->parsed()) {
      if (!run.replay.empty() || run.engine == "interp") return run_interp(run);
      return run_compiled(run);
    }
    if (e->parsed()) return do_enumerate(enum_model);
    if (b->parsed()) return do_bench(bench_args);
    if (cr->parsed()) {
      const interp::ReplayReport rep =
          interp::check_replay(fe::load_model_file(replay_model), replay_trace, replay_max);
      std::cout << rep.to_json() << "\n";
      return rep.ok() ? 0 : 1;
    }
  } catch (const cg::BuildError& e) {
    std::cerr << e.what();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "blogc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
