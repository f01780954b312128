#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcmc/bench.hpp"
#include "gcmc/driver.hpp"
#include "gcmc/validate.hpp"

namespace {

constexpr int k_exit_ok = 0;
constexpr int k_exit_error = 1;  // config / IO / usage
constexpr int k_exit_audit = 2;  // a checkpoint or termination audit failed

struct RunOptions {
  std::string config_path;
  std::string strategy;
  std::optional<std::uint64_t> steps;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string resume_path;
};

int cmd_run(const RunOptions& opt) {
  gcmc::RunConfig cfg = gcmc::parse_config_file(opt.config_path);
  if (!opt.strategy.empty()) cfg.strategy = gcmc::strategy_from_string(opt.strategy);
  if (opt.steps) cfg.steps = *opt.steps;
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.validate();

  std::optional<std::filesystem::path> resume;
  if (!opt.resume_path.empty()) resume = opt.resume_path;

  const auto result = gcmc::run_with_files(cfg, opt.out_dir, resume, &std::cout);
  std::cout << "stats: " << result.stats_path.string() << '\n'
            << "checkpoint: " << result.final_checkpoint_path.string() << '\n';
  return k_exit_ok;
}

int cmd_validate(const std::string& config_path) {
  using namespace gcmc;
  const RunConfig cfg = parse_config_file(config_path);

  const std::size_t particles =
      cfg.initial_particles > 0
          ? cfg.initial_particles
          : static_cast<std::size_t>(std::max(128.0, 0.5 * cfg.volume()));
  const double density = static_cast<double>(particles) / cfg.volume();

  std::vector<validate::CheckResult> checks;
  checks.push_back(validate::cross_strategy_equivalence(particles, density, cfg.r_cut,
                                                        2000, 1e-10, cfg.seed)
                       .result);
  checks.push_back(validate::grid_rebin_consistency(Strategy::cell_list, 20000, particles,
                                                    density, cfg.temperature,
                                                    cfg.chemical_potential, cfg.seed)
                       .result);
  checks.push_back(validate::grid_rebin_consistency(Strategy::microcell, 20000, particles,
                                                    density, cfg.temperature,
                                                    cfg.chemical_potential, cfg.seed)
                       .result);
  checks.push_back(
      validate::neighborhood_coverage(Strategy::cell_list, cfg.r_cut, cfg.box_length, 20000,
                                      cfg.seed)
          .result);
  checks.push_back(
      validate::neighborhood_coverage(Strategy::microcell, cfg.r_cut, cfg.box_length, 20000,
                                      cfg.seed)
          .result);
  // Engine-level law check at a fixed, fast scale with a pinned seed;
  // looser bands than the full-length run keep this a quick smoke test.
  checks.push_back(
      validate::ideal_gas_poisson(600.0, 10.0, 400000, 50000, 0.03, 0.15, 20260808).result);

  bool all_ok = true;
  std::printf("%-38s %-6s %s\n", "check", "result", "detail");
  for (const auto& c : checks) {
    all_ok = all_ok && c.passed;
    std::printf("%-38s %-6s %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                c.detail.c_str());
  }
  return all_ok ? k_exit_ok : k_exit_error;
}

struct BenchOptions {
  std::vector<std::size_t> sizes;
  std::vector<std::string> strategies;
  std::vector<double> cutoffs{2.5};
  std::uint64_t steps = 100000;
  int repeats = 1;
  std::string out_file = "bench.csv";
  double density = 0.67;
  double temperature = 2.0;
  double mu = -2.0;
  std::uint64_t seed = 1;
};

int cmd_bench(const BenchOptions& opt) {
  gcmc::BenchSpec spec;
  spec.sizes = opt.sizes;
  for (const auto& s : opt.strategies) spec.strategies.push_back(gcmc::strategy_from_string(s));
  spec.cutoffs = opt.cutoffs;
  spec.steps = opt.steps;
  spec.repeats = opt.repeats;
  spec.density = opt.density;
  spec.temperature = opt.temperature;
  spec.chemical_potential = opt.mu;
  spec.seed = opt.seed;

  const auto rows = gcmc::run_bench(spec, &std::cout);
  const auto groups = gcmc::summarize_bench(rows);
  gcmc::write_bench_csv(opt.out_file, rows, groups);
  const auto script = std::filesystem::path(opt.out_file).replace_extension(".gp");
  gcmc::write_gnuplot_script(script, std::filesystem::path(opt.out_file).filename().string());
  std::cout << "wrote " << opt.out_file << " and " << script.string() << '\n';
  return k_exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grand canonical Monte Carlo simulation of Lennard-Jones fluids"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run a simulation from a config file");
  run->add_option("--config", run_opt.config_path, "key=value config file")->required();
  run->add_option("--strategy", run_opt.strategy, "all_pairs | cell_list | microcell");
  run->add_option("--steps", run_opt.steps, "override the configured move count");
  run->add_option("--seed", run_opt.seed, "override the configured RNG seed");
  run->add_option("--out", run_opt.out_dir, "output directory (stats.csv, checkpoints)");
  run->add_option("--resume", run_opt.resume_path, "continue from a checkpoint file");

  std::string validate_config;
  auto* val = app.add_subcommand("validate", "Run the correctness suites and print a table");
  val->add_option("--config", validate_config, "key=value config file")->required();

  BenchOptions bench_opt;
  auto* bench = app.add_subcommand("bench", "Time the neighbor strategies");
  bench->add_option("--sizes", bench_opt.sizes, "particle counts")->required()->delimiter(',');
  bench->add_option("--strategies", bench_opt.strategies, "strategies to time")
      ->required()
      ->delimiter(',');
  bench->add_option("--steps", bench_opt.steps, "moves per run");
  bench->add_option("--repeats", bench_opt.repeats, "runs per configuration");
  bench->add_option("--out", bench_opt.out_file, "output CSV (a .gp script lands beside it)");
  bench->add_option("--cutoffs", bench_opt.cutoffs, "cutoff radii")->delimiter(',');
  bench->add_option("--density", bench_opt.density, "initial number density");
  bench->add_option("--temperature", bench_opt.temperature, "reduced temperature");
  bench->add_option("--mu", bench_opt.mu, "chemical potential");
  bench->add_option("--seed", bench_opt.seed, "base RNG seed (repeat r uses seed+r)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (val->parsed()) return cmd_validate(validate_config);
    if (bench->parsed()) return cmd_bench(bench_opt);
  } catch (const gcmc::AuditFailure& e) {
    std::cerr << "audit failure: " << e.what() << '\n';
    return k_exit_audit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return k_exit_error;
  }
  return k_exit_error;
}
