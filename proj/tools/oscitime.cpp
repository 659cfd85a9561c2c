#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oscitime/experiments.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::size_t dim = 0;
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::vector<std::string> tols;
  unsigned threads = 0;
};

void attach_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "TOML config file (flags override it)");
  cmd->add_option("--dim", opts.dim, "truncation dimension");
  cmd->add_option("--seed", opts.seeds, "seed list for sampled vectors");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--tol", opts.tols, "tolerance override, key=value");
  cmd->add_option("--threads", opts.threads, "worker cap (also OSCITIME_THREADS)");
}

oscitime::ExperimentConfig build_config(const CommonOpts& opts, oscitime::Suite suite) {
  oscitime::ExperimentConfig config;
  if (!opts.config_path.empty()) config = oscitime::load_config_toml(opts.config_path);
  config.suite = suite;
  if (opts.dim) config.dim = opts.dim;
  if (!opts.seeds.empty()) config.seeds = opts.seeds;
  if (!opts.out.empty()) config.output_dir = opts.out;
  if (opts.threads) config.threads = opts.threads;
  for (const std::string& kv : opts.tols) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--tol expects key=value, got " + kv);
    config.tolerances[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return config;
}

int run_suite(const CommonOpts& opts, oscitime::Suite suite) {
  oscitime::ExperimentConfig config = build_config(opts, suite);
  int rc = oscitime::run_and_write(config);
  std::ifstream summary(std::filesystem::path(config.output_dir) / "summary.json");
  std::cout << summary.rdbuf() << "\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscitime: conjugate/time operator verification for the harmonic oscillator"};
  app.require_subcommand(1);

  CommonOpts opts;
  oscitime::Suite verify_suite = oscitime::Suite::Ccr;

  auto* verify = app.add_subcommand("verify", "run the CCR verification suite");
  attach_common(verify, opts);
  verify->add_option("--suite", [&verify_suite](const std::vector<std::string>& vals) {
    verify_suite = oscitime::suite_from_string(vals.at(0));
    return true;
  }, "suite override: ccr|classification|evolution|galapon|angle|bridge|divergence|all");

  auto* classify = app.add_subcommand("classify", "classification of the T_{omega,m} family");
  attach_common(classify, opts);
  auto* evolve = app.add_subcommand("evolve", "Heisenberg evolution and periodicity checks");
  attach_common(evolve, opts);
  auto* galapon = app.add_subcommand("galapon-norm", "norm ladder against the Hilbert bound");
  attach_common(galapon, opts);
  auto* bridge = app.add_subcommand("bridge", "Hermite-coefficient bridge checks");
  attach_common(bridge, opts);
  auto* diverge = app.add_subcommand("diverge", "phase-operator divergence probes");
  attach_common(diverge, opts);

  auto* report = app.add_subcommand("report", "emit the three-family classification table");
  std::size_t report_dim = 128;
  std::string report_out;
  report->add_option("--dim", report_dim, "truncation dimension");
  report->add_option("--out", report_out, "write table1.json under this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) {
      std::string doc = oscitime::table1_report_json(report_dim);
      if (!report_out.empty()) {
        std::filesystem::create_directories(report_out);
        std::ofstream f(std::filesystem::path(report_out) / "table1.json",
                        std::ios::binary | std::ios::trunc);
        f << doc;
      }
      std::cout << doc << "\n";
      return 0;
    }
    if (verify->parsed()) return run_suite(opts, verify_suite);
    if (classify->parsed()) return run_suite(opts, oscitime::Suite::Classification);
    if (evolve->parsed()) return run_suite(opts, oscitime::Suite::Evolution);
    if (galapon->parsed()) return run_suite(opts, oscitime::Suite::Galapon);
    if (bridge->parsed()) return run_suite(opts, oscitime::Suite::Bridge);
    if (diverge->parsed()) return run_suite(opts, oscitime::Suite::Divergence);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
