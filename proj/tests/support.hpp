#pragma once

// Shared fixtures for the test binaries: paths, temp dirs, the bundled
// build, and a subprocess runner for the CLI.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "seongdo/seongdo.hpp"

namespace seongdo::testing {

inline std::filesystem::path source_dir() { return SEONGDO_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }
inline std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }
inline std::filesystem::path test_data_dir() { return source_dir() / "tests" / "data"; }
#ifdef SEONGDO_CLI
inline std::string cli_path() { return SEONGDO_CLI; }
#endif

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 salt(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("seongdo-test-" + std::to_string(salt()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << body;
}

struct BundledBuild {
  CatalogParse gaia, hip;
  FilterResult gaia_kept, hip_kept;
  CrossRefParse xref;
  ConstellationFile defs;
  FusedCatalog catalog;
  BuildResult built;
};

// Built once per process; the same steps `seongdo build` runs.
inline const BundledBuild& bundled() {
  static const BundledBuild b = [] {
    BundledBuild r;
    r.gaia = parse_catalog(data_dir() / "gaia.csv", CatalogFormat::kGaiaLike);
    r.hip = parse_catalog(data_dir() / "hipparcos.csv", CatalogFormat::kHipparcosLike);
    r.gaia_kept = filter_positive_parallax(r.gaia.rows);
    r.hip_kept = filter_positive_parallax(r.hip.rows);
    r.xref = parse_crossref(data_dir() / "crossref.csv");
    r.defs = load_constellation_defs(data_dir() / "constellations.yaml");
    r.catalog = FusedCatalog::fuse(r.gaia_kept, r.hip_kept, r.xref.table);
    r.built = build_atlas(r.catalog, r.defs, r.xref.table);
    return r;
  }();
  return b;
}

inline const Atlas& bundled_atlas() {
  static const Atlas a(bundled().built.snapshot);
  return a;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs a shell command line, capturing stdout and stderr.
inline RunResult run(const std::string& cmdline) {
  TempDir tmp;
  const auto out = tmp / "stdout";
  const auto err = tmp / "stderr";
  const std::string full = cmdline + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(full.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text(out);
  r.err = read_text(err);
  return r;
}

// A child process with stdout and stderr captured to files; killed on
// destruction if still running.
class Child {
 public:
  Child(const std::vector<std::string>& argv, const std::filesystem::path& log_dir) {
    out_ = log_dir / "child.out";
    err_ = log_dir / "child.err";
    pid_ = ::fork();
    if (pid_ == 0) {
      const int o = ::open(out_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      const int e = ::open(err_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      ::dup2(o, 1);
      ::dup2(e, 2);
      std::vector<char*> args;
      for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
      args.push_back(nullptr);
      ::execv(args[0], args.data());
      ::_exit(127);
    }
  }
  ~Child() {
    if (pid_ > 0 && !reaped_) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }
  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  void signal(int sig) const { ::kill(pid_, sig); }

  // Exit code, or -1 on timeout or abnormal termination.
  int wait(std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    int status = 0;
    while (std::chrono::steady_clock::now() < deadline) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        reaped_ = true;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return -1;
  }

  std::string err() const { return read_text(err_); }

 private:
  pid_t pid_ = -1;
  bool reaped_ = false;
  std::filesystem::path out_, err_;
};

// Polls until `path` holds a port number.
inline int wait_for_port_file(const std::filesystem::path& path,
                              std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) {
      const auto text = read_text(path);
      if (!text.empty() && text.back() == '\n') return std::stoi(text);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return -1;
}

}  // namespace seongdo::testing
