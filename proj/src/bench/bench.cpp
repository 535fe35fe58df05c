#include "blogc/bench/bench.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "blogc/analysis/analysis.hpp"
#include "blogc/frontend/validate.hpp"
#include "blogc/interp/interp.hpp"
#include "json.hpp"

namespace blogc::bench {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return out + "'";
}

std::string flag_suffix(const Flags& f) {
  std::string s;
  if (!f.db) s += "_nodb";
  if (!f.rc) s += "_norc";
  if (!f.acu) s += "_noacu";
  return s;
}

fs::path model_path(const BenchSpec& spec, const std::string& model) {
  return fs::path(spec.models_dir) / (model + ".blog");
}

RunRecord parse_stats(const std::string& text, std::uint64_t seed, int rep) {
  const json j = json::parse(text);
  RunRecord r;
  r.seed = seed;
  r.rep = rep;
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.rng_calls = j.at("rng_calls").get<std::uint64_t>();
  r.likelihood_evals = j.at("likelihood_evals").get<std::uint64_t>();
  r.accept_rate = j.at("accept_rate").is_null() ? NAN : j.at("accept_rate").get<double>();
  r.world_size = j.at("world_size").get<std::size_t>();
  r.query_results = j.at("query_results").dump();
  return r;
}

/// Runs `fn(i)` for i in [0, n) on at most `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct Task {
  std::size_t cell;
  std::uint64_t seed;
  int rep;
  RunRecord record;
  std::string error;
};

void run_compiled(const fs::path& exe, const fs::path& out_dir, const Cell& c, Task& t) {
  const std::string stem = std::to_string(t.seed) + "_" + std::to_string(t.rep);
  const fs::path stats = out_dir / (stem + ".json");
  const fs::path err = out_dir / (stem + ".stderr");
  fs::remove(stats);
  char timeout[32];
  std::snprintf(timeout, sizeof timeout, "%.0f", std::ceil(c.timeout_s));
  const std::string cmd = "timeout " + std::string(timeout) + " " + quote(exe.string()) + " -n " +
                          std::to_string(c.n) + " --seed " + std::to_string(t.seed) + " --quiet --stats " +
                          quote(stats.string()) + " > /dev/null 2> " + quote(err.string());
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (code == 124) {
    t.error = "timeout after " + std::string(timeout) + " s (seed " + std::to_string(t.seed) + ")";
    return;
  }
  if (code != 0) {
    std::ifstream e(err);
    std::string line, last;
    while (std::getline(e, line))
      if (!line.empty()) last = line;
    t.error = "exit status " + std::to_string(code) + " (seed " + std::to_string(t.seed) + ")";
    if (!last.empty()) t.error += ": " + last;
    return;
  }
  std::ifstream in(stats);
  std::stringstream ss;
  ss << in.rdbuf();
  t.record = parse_stats(ss.str(), t.seed, t.rep);
}

void run_interp(const BenchSpec& spec, const Cell& c, Task& t) {
  const fe::TypedModel tm = fe::load_model_file(model_path(spec, c.model).string());
  interp::RunResult r = c.algo == cg::Algo::LW ? interp::interp_lw(tm, c.n, t.seed, !c.flags.db)
                                               : interp::interp_pmh_full(tm, c.n, t.seed);
  if (r.stats.wall_time_s > c.timeout_s) {
    t.error = "timeout: interpreter took " + std::to_string(r.stats.wall_time_s) + " s";
    return;
  }
  t.record = parse_stats(r.to_json(), t.seed, t.rep);
}

std::vector<std::uint64_t> shared_seeds(const Cell& a, const Cell& b) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s : a.seeds)
    if (std::find(b.seeds.begin(), b.seeds.end(), s) != b.seeds.end()) out.push_back(s);
  return out;
}

bool in(const std::vector<std::uint64_t>& seeds, std::uint64_t s) {
  return seeds.empty() || std::find(seeds.begin(), seeds.end(), s) != seeds.end();
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(double x, int prec) {
  if (std::isnan(x)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

std::string fmt_value(const ComparisonResult& r) {
  switch (r.cmp.kind) {
    case Comparison::Kind::CallsSaved:
    case Comparison::Kind::Overhead: return fmt(100.0 * r.value, 1) + "%";
    case Comparison::Kind::Speedup: return fmt(r.value, 2) + "x";
    case Comparison::Kind::Identical: return r.value == 1.0 ? "identical" : "differs";
  }
  return "";
}

std::string fmt_bound(const Comparison& c) {
  if (c.kind == Comparison::Kind::Identical) return "identical";
  if (!c.bound) return "";
  switch (c.kind) {
    case Comparison::Kind::CallsSaved: return ">= " + fmt(100.0 * *c.bound, 1) + "%";
    case Comparison::Kind::Overhead: return "<= " + fmt(100.0 * *c.bound, 1) + "%";
    default: return ">= " + fmt(*c.bound, 2) + "x";
  }
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string Cell::id() const {
  std::string s = model + "/" + cg::algo_name(algo);
  if (!flags.db) s += "/nodb";
  if (!flags.rc) s += "/norc";
  if (!flags.acu) s += "/noacu";
  if (engine == Engine::Interp) s += "/interp";
  return s;
}

double CellResult::median_wall(const std::vector<std::uint64_t>& seeds) const {
  std::map<int, double> per_rep;
  for (const RunRecord& r : runs)
    if (in(seeds, r.seed)) per_rep[r.rep] += r.wall_time_s;
  std::vector<double> v;
  for (const auto& kv : per_rep) v.push_back(kv.second);
  return median(v);
}

std::uint64_t CellResult::counter(const std::string& metric, std::uint64_t seed) const {
  for (const RunRecord& r : runs)
    if (r.rep == 0 && r.seed == seed) return metric == "likelihood_evals" ? r.likelihood_evals : r.rng_calls;
  return 0;
}

std::uint64_t CellResult::total(const std::string& metric, const std::vector<std::uint64_t>& seeds) const {
  std::uint64_t sum = 0;
  for (const RunRecord& r : runs)
    if (r.rep == 0 && in(seeds, r.seed)) sum += metric == "likelihood_evals" ? r.likelihood_evals : r.rng_calls;
  return sum;
}

const CellResult* BenchReport::find(const std::string& id) const {
  for (const CellResult& c : cells)
    if (c.cell.id() == id) return &c;
  return nullptr;
}

bool BenchReport::acceptance_ok() const {
  for (const ComparisonResult& c : comparisons)
    if (c.cmp.acceptance && c.status != ComparisonResult::Status::Pass) return false;
  return true;
}

const char* kind_name(Comparison::Kind k) {
  switch (k) {
    case Comparison::Kind::CallsSaved: return "calls_saved";
    case Comparison::Kind::Speedup: return "speedup";
    case Comparison::Kind::Identical: return "identical";
    case Comparison::Kind::Overhead: return "overhead";
  }
  return "";
}

const char* status_name(ComparisonResult::Status s) {
  switch (s) {
    case ComparisonResult::Status::Pass: return "pass";
    case ComparisonResult::Status::Fail: return "FAIL";
    case ComparisonResult::Status::Info: return "info";
    case ComparisonResult::Status::Error: return "error";
  }
  return "";
}

void validate(const BenchSpec& spec) {
  std::set<std::string> ids;
  for (const Cell& c : spec.cells) {
    if (!fs::exists(model_path(spec, c.model))) throw BenchError("model '" + c.model + "' is not in " + spec.models_dir);
    if (c.n < 1000) throw BenchError(c.id() + ": N must be at least 1000");
    if (c.seeds.empty() || c.reps < 1) throw BenchError(c.id() + ": needs at least one seed and one rep");
    if (c.engine == Engine::Interp && c.algo == cg::Algo::Gibbs)
      throw BenchError(c.id() + ": the interpreter runs lw and pmh only");
    if (!ids.insert(c.id()).second) throw BenchError("duplicate cell " + c.id());
  }
  for (const Comparison& c : spec.comparisons) {
    if (!ids.count(c.optimized)) throw BenchError(c.label + ": unknown cell " + c.optimized);
    if (!ids.count(c.baseline)) throw BenchError(c.label + ": unknown cell " + c.baseline);
    const bool timing = c.kind == Comparison::Kind::Speedup || c.kind == Comparison::Kind::Overhead;
    if (timing ? c.metric != "wall_time_s" : c.metric != "rng_calls" && c.metric != "likelihood_evals")
      throw BenchError(c.label + ": metric " + c.metric + " does not fit a " + kind_name(c.kind) + " row");
  }
}

BenchReport run_suite(const BenchSpec& spec) {
  validate(spec);
  BenchReport rep;
  const fs::path work = fs::absolute(spec.work_dir);
  std::vector<fs::path> exes(spec.cells.size());
  for (const Cell& c : spec.cells) rep.cells.push_back(CellResult{c, "", {}});

  // Builds go through the same worker pool; each cell has its own output name.
  parallel_for(spec.cells.size(), spec.jobs, [&](std::size_t i) {
    const Cell& c = spec.cells[i];
    if (c.engine != Engine::Compiled) return;
    try {
      const fe::TypedModel tm = fe::load_model_file(model_path(spec, c.model).string());
      cg::CodegenOptions opt;
      opt.algo = c.algo;
      opt.db = c.flags.db;
      opt.rc = c.flags.rc;
      opt.acu = c.flags.acu;
      opt.model_name = c.model;
      exes[i] = cg::build(cg::emit_program(tm, an::analyze(tm), opt), work / "build",
                          c.model + "_" + cg::algo_name(c.algo) + flag_suffix(c.flags));
    } catch (const std::exception& e) {
      rep.cells[i].error = std::string("build failed: ") + e.what();
    }
  });

  std::vector<Task> tasks;
  for (std::size_t i = 0; i < spec.cells.size(); ++i) {
    if (!rep.cells[i].ok()) continue;
    const Cell& c = spec.cells[i];
    for (int r = 0; r < c.reps; ++r)
      for (std::uint64_t s : c.seeds) tasks.push_back({i, s, r, {}, ""});
  }
  // Interleave cells so a slow period hits every cell of a timing comparison alike.
  std::stable_sort(tasks.begin(), tasks.end(),
                   [](const Task& a, const Task& b) { return std::tie(a.rep, a.seed) < std::tie(b.rep, b.seed); });
  parallel_for(tasks.size(), spec.jobs, [&](std::size_t k) {
    Task& t = tasks[k];
    const Cell& c = spec.cells[t.cell];
    try {
      if (c.engine == Engine::Compiled) {
        std::string dir = c.id();
        std::replace(dir.begin(), dir.end(), '/', '_');
        const fs::path out = work / "runs" / dir;
        fs::create_directories(out);
        run_compiled(exes[t.cell], out, c, t);
      } else {
        run_interp(spec, c, t);
      }
    } catch (const std::exception& e) {
      t.error = e.what();
    }
  });
  for (Task& t : tasks) {
    CellResult& cr = rep.cells[t.cell];
    if (!t.error.empty()) {
      if (cr.error.empty()) cr.error = t.error;
      continue;
    }
    cr.runs.push_back(std::move(t.record));
  }
  for (CellResult& cr : rep.cells) {
    std::sort(cr.runs.begin(), cr.runs.end(),
              [](const RunRecord& a, const RunRecord& b) { return std::tie(a.rep, a.seed) < std::tie(b.rep, b.seed); });
    if (!cr.ok()) cr.runs.clear();
  }
  rep.comparisons = compare(rep, spec.comparisons);
  return rep;
}

std::vector<ComparisonResult> compare(const BenchReport& cells, const std::vector<Comparison>& cmps) {
  std::vector<ComparisonResult> out;
  for (const Comparison& c : cmps) {
    ComparisonResult r;
    r.cmp = c;
    const CellResult* opt = cells.find(c.optimized);
    const CellResult* base = cells.find(c.baseline);
    if (!opt || !base || !opt->ok() || !base->ok()) {
      r.status = ComparisonResult::Status::Error;
      r.value = NAN;
      r.note = !opt || !base ? "cell missing" : !opt->ok() ? c.optimized + ": " + opt->error : c.baseline + ": " + base->error;
      out.push_back(r);
      continue;
    }
    r.seeds = shared_seeds(opt->cell, base->cell);
    if (r.seeds.empty()) {
      r.status = ComparisonResult::Status::Error;
      r.value = NAN;
      r.note = "no shared seeds";
      out.push_back(r);
      continue;
    }
    bool ok = true;
    switch (c.kind) {
      case Comparison::Kind::CallsSaved: {
        const double b = static_cast<double>(base->total(c.metric, r.seeds));
        r.value = b > 0.0 ? 1.0 - static_cast<double>(opt->total(c.metric, r.seeds)) / b : 0.0;
        ok = !c.bound || r.value >= *c.bound;
        break;
      }
      case Comparison::Kind::Speedup:
        r.value = base->median_wall(r.seeds) / opt->median_wall(r.seeds);
        ok = !c.bound || r.value >= *c.bound;
        break;
      case Comparison::Kind::Overhead:
        r.value = opt->median_wall(r.seeds) / base->median_wall(r.seeds) - 1.0;
        ok = !c.bound || r.value <= *c.bound;
        break;
      case Comparison::Kind::Identical: {
        r.value = 1.0;
        for (std::uint64_t s : r.seeds)
          if (opt->counter(c.metric, s) != base->counter(c.metric, s)) {
            r.value = 0.0;
            r.note = "seed " + std::to_string(s) + ": " + std::to_string(opt->counter(c.metric, s)) + " vs " +
                     std::to_string(base->counter(c.metric, s));
            break;
          }
        ok = r.value == 1.0;
        break;
      }
    }
    if (c.kind == Comparison::Kind::Identical || c.bound)
      r.status = ok ? ComparisonResult::Status::Pass : ComparisonResult::Status::Fail;
    else
      r.status = ComparisonResult::Status::Info;
    out.push_back(r);
  }
  return out;
}

std::string render_table(const BenchReport& r) {
  std::ostringstream os;
  if (!r.cells.empty()) {
    std::size_t cw = 6;
  for (const CellResult& c : r.cells) cw = std::max(cw, c.cell.id().size() + 2);
  os << pad("cell", cw) << pad("N", 10) << pad("seeds", 8) << pad("wall(s)", 11) << pad("rng/sample", 13)
       << pad("evals/sample", 14) << "accept\n";
    for (const CellResult& c : r.cells) {
      os << pad(c.cell.id(), cw) << pad(std::to_string(c.cell.n), 10) << pad(std::to_string(c.cell.seeds.size()), 8);
      if (!c.ok()) {
        os << "error: " << c.error << "\n";
        continue;
      }
      const double per = static_cast<double>(c.cell.n * c.cell.seeds.size());
      double acc = 0.0;
      std::size_t na = 0;
      for (const RunRecord& run : c.runs)
        if (run.rep == 0 && !std::isnan(run.accept_rate)) acc += run.accept_rate, ++na;
      os << pad(fmt(c.median_wall(), 4), 11) << pad(fmt(c.total("rng_calls") / per, 3), 13)
         << pad(fmt(c.total("likelihood_evals") / per, 3), 14) << (na ? fmt(acc / na, 4) : "-") << "\n";
    }
  }
  std::size_t lw = 4;
  for (const ComparisonResult& c : r.comparisons) lw = std::max(lw, c.cmp.label.size() + 2);
  std::string group;
  for (const ComparisonResult& c : r.comparisons) {
    if (c.cmp.group != group) {
      group = c.cmp.group;
      os << "\n" << group << "\n";
      os << "  " << pad("row", lw) << pad("metric", 18) << pad("value", 12) << pad("bound", 12) << "status\n";
    }
    os << "  " << pad(c.cmp.label, lw) << pad(c.cmp.metric, 18)
       << pad(c.status == ComparisonResult::Status::Error ? "-" : fmt_value(c), 12) << pad(fmt_bound(c.cmp), 12)
       << status_name(c.status) << (c.cmp.acceptance ? " *" : "") << (c.note.empty() ? "" : "  " + c.note) << "\n";
  }
  if (!r.comparisons.empty()) os << "\n* acceptance-tagged; " << (r.acceptance_ok() ? "all pass" : "FAILED") << "\n";
  return os.str();
}

std::string render_json(const BenchReport& r) {
  json j;
  j["schema_version"] = BenchReport::kSchemaVersion;
  j["acceptance_ok"] = r.acceptance_ok();
  j["cells"] = json::array();
  for (const CellResult& c : r.cells) {
    json e;
    e["id"] = c.cell.id();
    e["model"] = c.cell.model;
    e["algo"] = cg::algo_name(c.cell.algo);
    e["engine"] = c.cell.engine == Engine::Compiled ? "compiled" : "interp";
    e["flags"] = {{"db", c.cell.flags.db}, {"rc", c.cell.flags.rc}, {"acu", c.cell.flags.acu}};
    e["n"] = c.cell.n;
    e["seeds"] = c.cell.seeds;
    e["reps"] = c.cell.reps;
    if (!c.ok()) {
      e["error"] = c.error;
    } else {
      e["median_wall_time_s"] = c.median_wall();
      e["rng_calls"] = c.total("rng_calls");
      e["likelihood_evals"] = c.total("likelihood_evals");
    }
    e["runs"] = json::array();
    for (const RunRecord& run : c.runs) {
      json x;
      x["seed"] = run.seed;
      x["rep"] = run.rep;
      x["wall_time_s"] = run.wall_time_s;
      x["rng_calls"] = run.rng_calls;
      x["likelihood_evals"] = run.likelihood_evals;
      x["accept_rate"] = std::isnan(run.accept_rate) ? json(nullptr) : json(run.accept_rate);
      x["world_size"] = run.world_size;
      x["query_results"] = json::parse(run.query_results);
      e["runs"].push_back(x);
    }
    j["cells"].push_back(e);
  }
  j["comparisons"] = json::array();
  for (const ComparisonResult& c : r.comparisons) {
    json e;
    e["group"] = c.cmp.group;
    e["label"] = c.cmp.label;
    e["kind"] = kind_name(c.cmp.kind);
    e["metric"] = c.cmp.metric;
    e["optimized"] = c.cmp.optimized;
    e["baseline"] = c.cmp.baseline;
    e["value"] = std::isnan(c.value) ? json(nullptr) : json(c.value);
    e["bound"] = c.cmp.bound ? json(*c.cmp.bound) : json(nullptr);
    e["acceptance"] = c.cmp.acceptance;
    e["seeds"] = c.seeds;
    e["status"] = status_name(c.status);
    if (!c.note.empty()) e["note"] = c.note;
    j["comparisons"].push_back(e);
  }
  return j.dump(2) + "\n";
}

std::string render_csv(const BenchReport& r) {
  std::ostringstream os;
  os << "group,label,kind,metric,optimized,baseline,value,bound,acceptance,status\n";
  for (const ComparisonResult& c : r.comparisons) {
    char val[32] = "";
    if (!std::isnan(c.value)) std::snprintf(val, sizeof val, "%.6g", c.value);
    char bound[32] = "";
    if (c.cmp.bound) std::snprintf(bound, sizeof bound, "%.6g", *c.cmp.bound);
    os << csv_field(c.cmp.group) << "," << csv_field(c.cmp.label) << "," << kind_name(c.cmp.kind) << ","
       << c.cmp.metric << "," << csv_field(c.cmp.optimized) << "," << csv_field(c.cmp.baseline) << "," << val << ","
       << bound << "," << (c.cmp.acceptance ? "true" : "false") << "," << status_name(c.status) << "\n";
  }
  return os.str();
}

BenchSpec default_suite(const std::string& models_dir, std::uint64_t n, int reps) {
  BenchSpec s;
  s.models_dir = models_dir;
  auto cell = [&](const std::string& model, cg::Algo algo, Flags f, Engine e = Engine::Compiled) {
    Cell c;
    c.model = model;
    c.algo = algo;
    c.flags = f;
    c.engine = e;
    c.n = n;
    c.reps = reps;
    s.cells.push_back(c);
    return c.id();
  };
  auto row = [&](const std::string& group, const std::string& label, Comparison::Kind k, const std::string& metric,
                 const std::string& opt, const std::string& base, std::optional<double> bound, bool acc) {
    s.comparisons.push_back({group, label, k, metric, opt, base, bound, acc});
  };
  using K = Comparison::Kind;
  const Flags on;
  const Flags nodb{false, true, true}, norc{true, false, true}, noacu{true, true, false};

  const std::string db = "Dynamic backchaining (LW, vs --no-db)";
  for (const auto& [m, bound] : std::vector<std::pair<std::string, std::optional<double>>>{
           {"burglary", std::nullopt}, {"hurricane", 0.25}, {"urnball_20_2", 0.50}}) {
    const std::string a = cell(m, cg::Algo::LW, on), b = cell(m, cg::Algo::LW, nodb);
    if (m == "burglary")
      row(db, m + " rng calls", K::Identical, "rng_calls", a, b, std::nullopt, true);
    else
      row(db, m + " rng calls saved", K::CallsSaved, "rng_calls", a, b, bound, true);
    row(db, m + " speedup", K::Speedup, "wall_time_s", a, b, std::nullopt, false);
  }

  const std::string acu = "Adaptive contingency updating (PMH, vs --no-acu)";
  for (const auto& [m, bound] : std::vector<std::pair<std::string, std::optional<double>>>{
           {"burglary", std::nullopt},
           {"hurricane", std::nullopt},
           {"urnball_20_10", 0.60},
           {"urnball_40_20", 0.70},
           {"infgmm", std::nullopt}}) {
    const std::string a = cell(m, cg::Algo::PMH, on), b = cell(m, cg::Algo::PMH, noacu);
    if (m == "burglary") {
      row(acu, m + " likelihood evals", K::Identical, "likelihood_evals", a, b, std::nullopt, true);
      row(acu, m + " overhead", K::Overhead, "wall_time_s", a, b, 0.05, false);
    } else {
      row(acu, m + " likelihood evals saved", K::CallsSaved, "likelihood_evals", a, b, bound, bound.has_value());
      row(acu, m + " speedup", K::Speedup, "wall_time_s", a, b, std::nullopt, false);
    }
  }

  const std::string rc = "Reference counting (PMH, vs --no-rc)";
  for (const auto& [m, bound] : std::vector<std::pair<std::string, std::optional<double>>>{
           {"urnball_20_10", std::nullopt}, {"urnball_40_20", 1.3}, {"infgmm", std::nullopt}}) {
    Cell full;  // already added by the ACU rows
    full.model = m;
    const std::string b = cell(m, cg::Algo::PMH, norc);
    row(rc, m + " speedup", K::Speedup, "wall_time_s", full.id(), b, bound, bound.has_value());
  }

  const std::string ci = "Compiled vs interpreter (PMH)";
  const std::string interp = cell("gmm", cg::Algo::PMH, on, Engine::Interp);
  s.cells.back().seeds = {1};
  s.cells.back().reps = 1;
  s.cells.back().timeout_s = 3600.0;
  const std::string compiled = cell("gmm", cg::Algo::PMH, on);
  row(ci, "gmm speedup", K::Speedup, "wall_time_s", compiled, interp, 10.0, true);
  return s;
}

}  // namespace blogc::bench
