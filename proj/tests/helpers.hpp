#pragma once

// Shared test scaffolding: bundled-data paths, self-cleaning temp dirs, and
// a subprocess runner for exercising the CLI binary.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "tmr/util.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
  return std::string(TMR_DATA_DIR) + "/" + name;
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("tmr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline CmdResult run_cmd(const std::string& cmd) {
  static std::atomic<int> counter{0};
  const std::string base =
      (std::filesystem::temp_directory_path() /
       ("tmr_cmd_" + std::to_string(::getpid()) + "_" + std::to_string(counter++)))
          .string();
  const std::string out_path = base + ".out";
  const std::string err_path = base + ".err";
  const int rc = std::system((cmd + " >" + out_path + " 2>" + err_path).c_str());

  CmdResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  if (std::filesystem::exists(out_path)) r.out = tmr::read_file(out_path);
  if (std::filesystem::exists(err_path)) r.err = tmr::read_file(err_path);
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return r;
}

// End-to-end fixture: a 12-document informal corpus whose formal rewrites are
// replayed from a pre-recorded cache, so no variant ever calls a provider.
inline std::string fixture_config_text(const std::string& outdir) {
  return "input = " + data_path("fixture_corpus.jsonl") +
         "\n"
         "variants = none, colloquial_to_formal\n"
         "output = " +
         outdir +
         "\n"
         "provider = mock\n"
         "model = fixture-llm\n"
         "reference_corpus = " +
         data_path("fixture_reference.txt") +
         "\n"
         "k = 2\n"
         "n = 5\n"
         "iterations = 200\n"
         "seed = 7\n"
         "min_doc_freq = 2\n"
         "samples = 2\n"
         "alpha = 0.5\n";
}

inline void seed_fixture_cache(const std::string& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(outdir) / "cache");
  fs::copy_file(data_path("fixture_cache.jsonl"), fs::path(outdir) / "cache" / "c_to_f.jsonl",
                fs::copy_options::overwrite_existing);
}

}  // namespace testutil
