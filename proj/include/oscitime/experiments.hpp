#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "oscitime/common.hpp"

namespace oscitime {

enum class Suite { Ccr, Classification, Evolution, Galapon, Angle, Bridge, Divergence, All };

Suite suite_from_string(const std::string& s);
const char* to_string(Suite s);

struct ExperimentConfig {
  Suite suite = Suite::All;
  std::size_t dim = 128;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<cplx> omegas;      // boundary grid; defaults set in normalize()
  std::vector<unsigned> ms = {1, 2, 3};
  std::vector<cplx> alphas;      // series-family grid
  std::vector<double> ts = {0.4, 0.7, 1.3, 2.9};
  std::map<std::string, double> tolerances;
  std::string output_dir = "oscitime-out";
  unsigned threads = 0;  // 0: hardware concurrency, capped by OSCITIME_THREADS

  double tol(const std::string& key, double fallback) const;
  void normalize();  // fills empty grids with defaults, validates
};

// TOML subset: `key = value` pairs and [section] tables (flattened to
// section.key), strings, integers, floats, booleans and flat arrays; '#'
// comments. Complex values are strings like "0.5+0.5i" or "i".
ExperimentConfig load_config_toml(const std::string& path);
void apply_toml_text(ExperimentConfig& config, const std::string& text);
cplx parse_complex(const std::string& text);

struct SuiteResult {
  std::string name;
  int pass = 0;
  int fail = 0;
  int inconclusive = 0;
  std::vector<std::string> failures;
};

struct ExperimentOutcome {
  std::vector<SuiteResult> suites;
  std::vector<std::pair<std::string, std::string>> files;  // filename -> content

  int total_fail() const;
  std::string summary_json() const;
};

// Runs the selected suites; deterministic in (config, seeds). Files are
// returned in memory; run_and_write also persists them under output_dir and
// returns the process exit code (0 iff no Fail verdict).
ExperimentOutcome run(const ExperimentConfig& config);
int run_and_write(const ExperimentConfig& config);

// Three-row classification document with computed witnesses.
std::string table1_report_json(std::size_t dim);

// Work-pool helper: applies fn(i) for i in [0, count); cell order in the
// output is by index, so results are deterministic regardless of scheduling.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace oscitime
