#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "blogc/analysis/analysis.hpp"

namespace blogc::cg {

enum class Algo { LW, PMH, Gibbs };

const char* algo_name(Algo a);
bool parse_algo(const std::string& s, Algo& out);

struct CodegenOptions {
  Algo algo = Algo::PMH;
  bool db = true;   // lazy memoised getters; off = eager sampling (LW only)
  bool rc = true;   // reference counting of open-universe variables
  bool acu = true;  // maintained Ch / Cont sets
  long clear_memory_every = 0;
  std::string model_name = "model";
};

class CodegenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The compiler failed on emitted code; what() carries its output verbatim.
class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Whole translation unit for one (model, algorithm, flags) triple.
std::string emit_program(const fe::TypedModel& tm, const an::AnalysisResult& a, const CodegenOptions& opt);

// Fragments of the program, exposed for inspection and golden tests. `decl`
// is an analysis declaration index.
std::string emit_getter(const fe::TypedModel& tm, const an::AnalysisResult& a, int decl, const CodegenOptions& opt);
std::string emit_acu(const fe::TypedModel& tm, const an::AnalysisResult& a, int decl, const CodegenOptions& opt);
std::string emit_accept_rc(const fe::TypedModel& tm, const an::AnalysisResult& a, int decl, const CodegenOptions& opt);
std::string emit_driver(const fe::TypedModel& tm, const an::AnalysisResult& a, const CodegenOptions& opt);

/// Compile `source` into `out_dir/name`. A manifest records a hash of the
/// source, compiler, flags and runtime headers; a matching manifest skips
/// the compile. Returns the executable path.
std::filesystem::path build(const std::string& source, const std::filesystem::path& out_dir, const std::string& name);

/// Compiler and runtime include directory used by build().
std::string compiler_path();
std::string runtime_include_dir();

}  // namespace blogc::cg
