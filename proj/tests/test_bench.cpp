#include <filesystem>
#include <fstream>
#include <string>

#include "blogc/bench/bench.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace blogc;
using namespace blogc::bench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "blogc_unit_bench" / name;
  fs::create_directories(p);
  return p;
}

Cell small(const std::string& model, cg::Algo algo, Flags f = {}) {
  Cell c;
  c.model = model;
  c.algo = algo;
  c.flags = f;
  c.n = 1000;
  c.seeds = {1, 2};
  c.reps = 2;
  return c;
}

RunRecord record(std::uint64_t seed, int rep, double wall, std::uint64_t rng, std::uint64_t evals) {
  RunRecord r;
  r.seed = seed;
  r.rep = rep;
  r.wall_time_s = wall;
  r.rng_calls = rng;
  r.likelihood_evals = evals;
  r.query_results = "[]";
  return r;
}

}  // namespace

TEST_CASE("empty spec gives an empty report") {
  BenchSpec spec;
  spec.models_dir = BLOGC_MODELS_DIR;
  spec.work_dir = scratch("empty").string();
  const BenchReport r = run_suite(spec);
  CHECK(r.cells.empty());
  CHECK(r.comparisons.empty());
  CHECK(r.acceptance_ok());
  const auto j = nlohmann::json::parse(render_json(r));
  CHECK(j["schema_version"] == 1);
  CHECK(j["cells"].empty());
  CHECK(render_csv(r) == "group,label,kind,metric,optimized,baseline,value,bound,acceptance,status\n");
}

TEST_CASE("spec validation") {
  BenchSpec spec;
  spec.models_dir = BLOGC_MODELS_DIR;
  spec.cells.push_back(small("no_such_model", cg::Algo::LW));
  CHECK_THROWS_WITH_AS(validate(spec), doctest::Contains("not in"), BenchError);
  spec.cells = {small("burglary", cg::Algo::LW)};
  spec.cells[0].n = 999;
  CHECK_THROWS_WITH_AS(validate(spec), doctest::Contains("at least 1000"), BenchError);
  spec.cells = {small("burglary", cg::Algo::LW), small("burglary", cg::Algo::LW)};
  CHECK_THROWS_WITH_AS(validate(spec), doctest::Contains("duplicate"), BenchError);
  spec.cells = {small("burglary", cg::Algo::LW)};
  spec.comparisons.push_back({"g", "x", Comparison::Kind::CallsSaved, "rng_calls", "burglary/lw", "burglary/lw/nodb"});
  CHECK_THROWS_WITH_AS(validate(spec), doctest::Contains("unknown cell"), BenchError);
  spec.cells.push_back(small("burglary", cg::Algo::LW, {false, true, true}));
  spec.comparisons[0].kind = Comparison::Kind::Speedup;
  CHECK_THROWS_WITH_AS(validate(spec), doctest::Contains("does not fit"), BenchError);
  spec.comparisons[0].metric = "wall_time_s";
  CHECK_NOTHROW(validate(spec));
  CHECK(default_suite(BLOGC_MODELS_DIR).cells.size() > 0);
  CHECK_NOTHROW(validate(default_suite(BLOGC_MODELS_DIR)));
}

TEST_CASE("cell ids") {
  CHECK(small("urnball_20_10", cg::Algo::PMH, {true, true, false}).id() == "urnball_20_10/pmh/noacu");
  Cell c = small("gmm", cg::Algo::PMH);
  c.engine = Engine::Interp;
  CHECK(c.id() == "gmm/pmh/interp");
  CHECK(small("burglary", cg::Algo::LW, {false, false, true}).id() == "burglary/lw/nodb/norc");
}

TEST_CASE("comparisons over synthetic results") {
  BenchReport rep;
  Cell a = small("m", cg::Algo::PMH), b = small("m", cg::Algo::PMH, {true, true, false});
  b.seeds = {2, 3};
  rep.cells.push_back({a, "", {record(1, 0, 1.0, 10, 100), record(2, 0, 2.0, 10, 30), record(1, 1, 3.0, 10, 100),
                               record(2, 1, 4.0, 10, 30)}});
  rep.cells.push_back({b, "", {record(2, 0, 6.0, 10, 120), record(3, 0, 9.0, 10, 999), record(2, 1, 10.0, 10, 120),
                               record(3, 1, 9.0, 10, 999)}});
  using K = Comparison::Kind;
  std::vector<Comparison> cmps = {
      {"g", "saved", K::CallsSaved, "likelihood_evals", a.id(), b.id(), 0.7, true},
      {"g", "same rng", K::Identical, "rng_calls", a.id(), b.id(), std::nullopt, true},
      {"g", "same evals", K::Identical, "likelihood_evals", a.id(), b.id(), std::nullopt, false},
      {"g", "speedup", K::Speedup, "wall_time_s", a.id(), b.id(), 2.0, false},
      {"g", "overhead", K::Overhead, "wall_time_s", b.id(), a.id(), std::nullopt, false},
  };
  const auto res = compare(rep, cmps);
  REQUIRE(res.size() == 5);
  // Only seed 2 is shared: 1 - 30/120.
  CHECK(res[0].seeds == std::vector<std::uint64_t>{2});
  CHECK(res[0].value == doctest::Approx(0.75));
  CHECK(res[0].status == ComparisonResult::Status::Pass);
  CHECK(res[1].status == ComparisonResult::Status::Pass);
  CHECK(res[2].status == ComparisonResult::Status::Fail);
  CHECK(res[2].note.find("30 vs 120") != std::string::npos);
  // Medians over reps on seed 2: optimized {2, 4} -> 3, baseline {6, 10} -> 8.
  CHECK(res[3].value == doctest::Approx(8.0 / 3.0));
  CHECK(res[3].status == ComparisonResult::Status::Pass);
  CHECK(res[4].value == doctest::Approx(8.0 / 3.0 - 1.0));
  CHECK(res[4].status == ComparisonResult::Status::Info);

  rep.cells[1].error = "build failed: boom";
  rep.cells[1].runs.clear();
  const auto bad = compare(rep, {cmps[0]});
  CHECK(bad[0].status == ComparisonResult::Status::Error);
  CHECK(bad[0].note.find("boom") != std::string::npos);
  BenchReport with_bad = rep;
  with_bad.comparisons = bad;
  CHECK_FALSE(with_bad.acceptance_ok());
  CHECK(render_table(with_bad).find("error") != std::string::npos);
}

TEST_CASE("one-cell suite: one row, seed-deterministic counters") {
  BenchSpec spec;
  spec.models_dir = BLOGC_MODELS_DIR;
  spec.work_dir = scratch("one").string();
  spec.cells.push_back(small("burglary", cg::Algo::LW));
  const BenchReport r = run_suite(spec);
  REQUIRE(r.cells.size() == 1);
  const CellResult& c = r.cells[0];
  REQUIRE_MESSAGE(c.ok(), c.error);
  REQUIRE(c.runs.size() == 4);
  for (std::uint64_t seed : {1, 2}) {
    std::vector<const RunRecord*> same;
    for (const RunRecord& run : c.runs)
      if (run.seed == seed) same.push_back(&run);
    REQUIRE(same.size() == 2);
    CHECK(same[0]->rng_calls == same[1]->rng_calls);
    CHECK(same[0]->likelihood_evals == same[1]->likelihood_evals);
    CHECK(same[0]->query_results == same[1]->query_results);
  }
  const auto j = nlohmann::json::parse(render_json(r));
  CHECK(j["cells"].size() == 1);
  CHECK(j["cells"][0]["id"] == "burglary/lw");
  CHECK(j["cells"][0]["runs"].size() == 4);
}

TEST_CASE("burglary LW saves no rng calls; a failing cell does not stop the suite") {
  const fs::path models = scratch("models");
  fs::copy_file(fs::path(BLOGC_MODELS_DIR) / "burglary.blog", models / "burglary.blog",
                fs::copy_options::overwrite_existing);
  std::ofstream(models / "nogibbs.blog") << "random Real a ~ Gaussian(0.0, 1.0);\n"
                                            "random Real b ~ Gaussian(a * a, 1.0);\nobs b = 1.0;\nquery a;\n";
  BenchSpec spec;
  spec.models_dir = models.string();
  spec.work_dir = scratch("db").string();
  spec.jobs = 2;
  spec.cells = {small("burglary", cg::Algo::LW), small("burglary", cg::Algo::LW, {false, true, true}),
                small("nogibbs", cg::Algo::Gibbs)};
  using K = Comparison::Kind;
  spec.comparisons = {
      {"DB", "burglary rng calls saved", K::CallsSaved, "rng_calls", "burglary/lw", "burglary/lw/nodb", 0.0, true},
      {"DB", "burglary rng calls", K::Identical, "rng_calls", "burglary/lw", "burglary/lw/nodb", std::nullopt, true},
      {"X", "broken", K::Speedup, "wall_time_s", "nogibbs/gibbs", "burglary/lw", std::nullopt, false},
  };
  const BenchReport r = run_suite(spec);
  REQUIRE(r.cells.size() == 3);
  CHECK(r.cells[0].ok());
  CHECK(r.cells[1].ok());
  CHECK_FALSE(r.cells[2].ok());
  CHECK(r.cells[2].error.find("build failed") != std::string::npos);
  CHECK(r.comparisons[0].value == 0.0);
  CHECK(r.comparisons[0].status == ComparisonResult::Status::Pass);
  CHECK(r.comparisons[1].status == ComparisonResult::Status::Pass);
  CHECK(r.comparisons[2].status == ComparisonResult::Status::Error);
  CHECK(r.acceptance_ok());

  const std::string csv = render_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find("DB,burglary rng calls saved,calls_saved,rng_calls,burglary/lw,burglary/lw/nodb,0,0,true,pass") !=
        std::string::npos);
  const std::string table = render_table(r);
  CHECK(table.find("burglary rng calls") != std::string::npos);
  CHECK(table.find("all pass") != std::string::npos);
  // Rendering is deterministic for a fixed report.
  CHECK(render_json(r) == render_json(r));
}
