#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "blogc/codegen/codegen.hpp"

#ifndef BLOGC_DEFAULT_CXX
#define BLOGC_DEFAULT_CXX "c++"
#endif
#ifndef BLOGC_DEFAULT_INCLUDE_DIR
#define BLOGC_DEFAULT_INCLUDE_DIR "include"
#endif

namespace blogc::cg {

namespace fs = std::filesystem;

namespace {

const char* const kFlags = "-O2 -std=c++20";

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

// Hash of everything that affects the binary.
std::string manifest_hash(const std::string& source) {
  std::uint64_t h = fnv1a(source);
  h = fnv1a(compiler_path(), h);
  h = fnv1a(kFlags, h);
  const fs::path rt = fs::path(runtime_include_dir()) / "blogc" / "runtime";
  std::error_code ec;
  std::vector<fs::path> headers;
  for (const auto& entry : fs::directory_iterator(rt, ec))
    if (entry.path().extension() == ".hpp") headers.push_back(entry.path());
  std::sort(headers.begin(), headers.end());
  for (const auto& hp : headers) h = fnv1a(read_file(hp), fnv1a(hp.filename().string(), h));
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string compiler_path() {
  if (const char* env = std::getenv("BLOGC_CXX"); env && *env) return env;
  return BLOGC_DEFAULT_CXX;
}

std::string runtime_include_dir() {
  if (const char* env = std::getenv("BLOGC_RUNTIME_INCLUDE"); env && *env) return env;
  return BLOGC_DEFAULT_INCLUDE_DIR;
}

fs::path build(const std::string& source, const fs::path& out_dir, const std::string& name) {
  fs::create_directories(out_dir);
  const fs::path src = out_dir / (name + ".cpp");
  const fs::path exe = out_dir / name;
  const fs::path manifest = out_dir / (name + ".manifest");
  const fs::path log = out_dir / (name + ".log");
  const std::string hash = manifest_hash(source);

  if (fs::exists(exe) && fs::exists(manifest) && read_file(manifest) == hash + "\n" && read_file(src) == source)
    return exe;

  {
    std::ofstream out(src, std::ios::binary);
    out << source;
    if (!out) throw BuildError("cannot write " + src.string());
  }
  std::error_code ec;
  fs::remove(manifest, ec);
  const std::string cmd = shell_quote(compiler_path()) + " " + kFlags + " -I" + shell_quote(runtime_include_dir()) +
                          " -o " + shell_quote(exe.string()) + " " + shell_quote(src.string()) + " > " +
                          shell_quote(log.string()) + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (rc != 0) throw BuildError(read_file(log));
  std::ofstream(manifest) << hash << "\n";
  return exe;
}

}  // namespace blogc::cg
