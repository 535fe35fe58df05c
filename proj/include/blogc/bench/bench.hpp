#pragma once

// Ablation harness: runs (model, algorithm, flags, engine) cells over a seed
// set, then compares cells pairwise by call counts and wall time.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blogc/codegen/codegen.hpp"

namespace blogc::bench {

class BenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Engine { Compiled, Interp };

struct Flags {
  bool db = true;
  bool rc = true;
  bool acu = true;
};

/// One configuration: a model run with one engine and flag set.
struct Cell {
  std::string model;  // stem of a file in the corpus directory
  cg::Algo algo = cg::Algo::PMH;
  Flags flags;
  Engine engine = Engine::Compiled;
  std::uint64_t n = 100000;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int reps = 5;
  double timeout_s = 600.0;

  /// Stable identifier, e.g. "urnball_20_10/pmh/noacu" or "gmm/pmh/interp".
  std::string id() const;
};

struct Comparison {
  enum class Kind {
    CallsSaved,  // 1 - optimized/baseline on a counter; bound is a minimum
    Speedup,     // baseline/optimized median wall time; bound is a minimum
    Identical,   // counter equal on every shared seed
    Overhead,    // optimized/baseline - 1 on wall time; bound is a maximum
  };
  std::string group;  // table the row belongs to
  std::string label;
  Kind kind = Kind::CallsSaved;
  std::string metric = "rng_calls";  // rng_calls, likelihood_evals, or wall_time_s for timing rows
  std::string optimized, baseline;   // cell ids
  std::optional<double> bound;
  bool acceptance = false;
};

struct BenchSpec {
  std::string models_dir;
  std::string work_dir = ".blogc-bench";
  std::vector<Cell> cells;
  std::vector<Comparison> comparisons;
  int jobs = 1;
};

/// One process (or interpreter instance) run.
struct RunRecord {
  std::uint64_t seed = 0;
  int rep = 0;
  double wall_time_s = 0.0;
  std::uint64_t rng_calls = 0;
  std::uint64_t likelihood_evals = 0;
  double accept_rate = 0.0;
  std::size_t world_size = 0;
  std::string query_results;  // JSON array as written by the program
};

struct CellResult {
  Cell cell;
  std::string error;  // build failure, timeout or crash; empty when ok
  std::vector<RunRecord> runs;

  bool ok() const { return error.empty(); }
  /// Median over reps of the wall time summed over `seeds` (all seeds if empty).
  double median_wall(const std::vector<std::uint64_t>& seeds = {}) const;
  /// Counter summed over `seeds` using rep 0.
  std::uint64_t total(const std::string& metric, const std::vector<std::uint64_t>& seeds = {}) const;
  std::uint64_t counter(const std::string& metric, std::uint64_t seed) const;
};

struct ComparisonResult {
  Comparison cmp;
  double value = 0.0;
  std::vector<std::uint64_t> seeds;  // seeds both cells ran
  enum class Status { Pass, Fail, Info, Error } status = Status::Info;
  std::string note;
};

struct BenchReport {
  static constexpr int kSchemaVersion = 1;
  std::vector<CellResult> cells;
  std::vector<ComparisonResult> comparisons;

  const CellResult* find(const std::string& id) const;
  /// False when an acceptance-tagged comparison failed or errored.
  bool acceptance_ok() const;
};

/// Check the spec: known models, N >= 1000, unique cell ids, comparisons name cells.
void validate(const BenchSpec& spec);

BenchReport run_suite(const BenchSpec& spec);

/// Evaluate comparisons over already-run cells.
std::vector<ComparisonResult> compare(const BenchReport& cells, const std::vector<Comparison>& cmps);

std::string render_table(const BenchReport& r);
std::string render_json(const BenchReport& r);
std::string render_csv(const BenchReport& r);

/// Calls-saved, RC and compiled-vs-interpreter rows over the bundled models.
/// `n` scales every cell; `reps` applies to compiled cells.
BenchSpec default_suite(const std::string& models_dir, std::uint64_t n = 100000, int reps = 5);

const char* kind_name(Comparison::Kind k);
const char* status_name(ComparisonResult::Status s);

}  // namespace blogc::bench
