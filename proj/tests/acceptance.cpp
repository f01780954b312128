// Integration gate: one line per criterion, nonzero exit if any fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gcmc/bench.hpp"
#include "gcmc/checkpoint.hpp"
#include "gcmc/driver.hpp"
#include "gcmc/validate.hpp"

using namespace gcmc;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const char* title, bool passed, const std::string& detail) {
  if (!passed) ++g_failures;
  std::printf("[%2d/10] %s  %s: %s\n", id, passed ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const BenchGroup* find_group(const std::vector<BenchGroup>& groups, std::size_t particles,
                             Strategy strategy, double cutoff) {
  for (const auto& g : groups)
    if (g.particles == particles && g.strategy == strategy && g.cutoff == cutoff) return &g;
  return nullptr;
}

// --- criteria -------------------------------------------------------------

void criterion_1_ideal_gas() {
  const auto r = validate::ideal_gas_poisson(/*target*/ 600.0, /*L*/ 10.0,
                                             /*steps*/ 2'000'000, /*equilibration*/ 100'000,
                                             /*mean tol*/ 0.02, /*var tol*/ 0.05,
                                             /*seed*/ 20260808);
  report(1, "ideal-gas GCMC exactness (<N> = zV, Poisson)", r.result.passed, r.result.detail);
}

void criterion_2_cross_strategy() {
  const auto r = validate::cross_strategy_equivalence(/*N*/ 4096, /*rho*/ 0.6, /*rc*/ 2.5,
                                                      /*proposals per kind*/ 10000,
                                                      /*tol*/ 1e-10, /*seed*/ 11);
  report(2, "cross-strategy delta equivalence at N=4096", r.result.passed, r.result.detail);
}

void criterion_3_incremental_audit() {
  RunConfig cfg;
  cfg.temperature = 2.0;
  cfg.chemical_potential = -2.0;
  cfg.initial_particles = 1000;
  cfg.density = 0.6;
  cfg.box_length = std::cbrt(1000.0 / 0.6);
  cfg.strategy = Strategy::microcell;
  cfg.seed = 7;
  cfg.steps = 1'000'000;
  cfg.checkpoint_interval = 10'000;

  bool passed = true;
  std::string detail;
  double worst = 0.0;
  int audits = 0;
  try {
    Simulation sim(cfg);
    sim.run_to(cfg.steps, [&](const Simulation&, const AuditReport& r) {
      ++audits;
      const double drift =
          std::fabs(r.u_tracked - r.u_recomputed) / std::max(1.0, std::fabs(r.u_recomputed));
      worst = std::max(worst, drift);
    });
    std::ostringstream os;
    os << audits << " audits over 1e6 moves, worst relative drift " << format_g17(worst)
       << " (bound 1e-8)";
    detail = os.str();
  } catch (const std::exception& e) {
    passed = false;
    detail = e.what();
  }
  report(3, "incremental-energy audit over 1e6 steps", passed, detail);
}

void criterion_4_grid_consistency() {
  bool passed = true;
  std::string detail;
  for (const Strategy s : {Strategy::cell_list, Strategy::microcell}) {
    const auto r = validate::grid_rebin_consistency(s, /*committed*/ 100'000, /*N*/ 2000,
                                                    /*rho*/ 0.65, /*T*/ 2.0, /*mu*/ -2.0,
                                                    /*seed*/ 13);
    passed = passed && r.result.passed;
    if (s == Strategy::microcell) {
      passed = passed && r.peak_occupancy <= 5;
      detail += std::string(to_string(s)) + ": " + r.result.detail + "; ";
    } else {
      detail += std::string(to_string(s)) + ": " + r.result.detail + "; ";
    }
  }
  report(4, "grid self-consistency after 1e5 committed moves", passed, detail);
}

void criterion_5_coverage() {
  bool passed = true;
  std::string detail;
  for (const Strategy s : {Strategy::cell_list, Strategy::microcell}) {
    for (const double rc : {2.5, 2.75, 3.0, 3.75, 4.25}) {
      // 13.23 sigma: the boundary microcell is 0.23 sigma thin.
      const auto r = validate::neighborhood_coverage(s, rc, 13.23, 100'000, 17);
      passed = passed && r.result.passed;
      if (!r.result.passed)
        detail += std::string(to_string(s)) + "@" + format_g17(rc) + ": " + r.result.detail + "; ";
    }
  }
  if (passed) detail = "1e5 random in-cutoff points per (grid, cutoff), zero outside traversal";
  report(5, "neighborhood coverage for r_cut in {2.5..4.25}", passed, detail);
}

std::vector<BenchGroup> size_sweep_groups;

void criteria_6_7_size_trend() {
  BenchSpec spec;
  spec.sizes = {1024, 4096, 16384, 65536};
  spec.strategies = {Strategy::all_pairs, Strategy::cell_list, Strategy::microcell};
  spec.cutoffs = {2.5};
  spec.steps = 100'000;
  spec.repeats = 1;
  spec.density = 0.67;
  spec.temperature = 2.0;
  spec.chemical_potential = -2.0;
  spec.seed = 3;
  const auto rows = run_bench(spec, nullptr);
  size_sweep_groups = summarize_bench(rows);

  // 6: the traditional cell list only pays off at scale.
  {
    std::vector<double> speedups;
    for (const std::size_t n : spec.sizes)
      speedups.push_back(
          find_group(size_sweep_groups, n, Strategy::cell_list, 2.5)->speedup_vs_all_pairs.value());
    bool monotone = true;
    for (std::size_t i = 1; i < speedups.size(); ++i)
      monotone = monotone && speedups[i] >= speedups[i - 1];
    const bool passed = speedups.front() < 1.3 && speedups.back() > 2.0 && monotone;
    std::ostringstream os;
    os << "cell-list speedup vs all-pairs over {1024,4096,16384,65536}: ";
    for (double s : speedups) os << format_g17(s) << ' ';
    os << "(need <1.3 at 1024, >2 at 65536, nondecreasing)";
    report(6, "traditional cell-list crossover with system size", passed, os.str());
  }

  // 7: the microcell list wins everywhere and keeps growing.
  {
    bool dominates = true;
    bool increasing = true;
    double prev = 0.0;
    std::ostringstream os;
    for (const std::size_t n : spec.sizes) {
      const auto* micro = find_group(size_sweep_groups, n, Strategy::microcell, 2.5);
      const auto* cell = find_group(size_sweep_groups, n, Strategy::cell_list, 2.5);
      dominates = dominates && micro->mean_us_per_move <= cell->mean_us_per_move;
      const double s = micro->speedup_vs_all_pairs.value();
      increasing = increasing && s > prev;
      prev = s;
      os << "N=" << n << " micro=" << format_g17(micro->mean_us_per_move)
         << "us cell=" << format_g17(cell->mean_us_per_move) << "us speedup="
         << format_g17(s) << "; ";
    }
    report(7, "microcell dominates the traditional cell list", dominates && increasing,
           os.str());
  }
}

void criterion_8_cutoff_trend() {
  BenchSpec spec;
  spec.sizes = {16384};
  spec.strategies = {Strategy::all_pairs, Strategy::microcell};
  spec.cutoffs = {2.5, 3.25, 4.25};
  spec.steps = 100'000;
  spec.repeats = 1;
  spec.density = 0.67;
  spec.temperature = 2.0;
  spec.chemical_potential = -2.0;
  spec.seed = 5;
  const auto groups = summarize_bench(run_bench(spec, nullptr));

  std::vector<double> speedups;
  for (const double rc : spec.cutoffs)
    speedups.push_back(
        find_group(groups, 16384, Strategy::microcell, rc)->speedup_vs_all_pairs.value());
  const bool declining = speedups[0] > speedups[1] && speedups[1] > speedups[2];
  const bool passed = declining && speedups.back() > 1.0;
  std::ostringstream os;
  os << "microcell speedup at r_cut {2.5, 3.25, 4.25}: " << format_g17(speedups[0]) << ' '
     << format_g17(speedups[1]) << ' ' << format_g17(speedups[2])
     << " (need declining, >1 at 4.25)";
  report(8, "microcell speedup declines with cutoff but stays ahead", passed, os.str());
}

void criterion_9_formulas() {
  bool ok = true;
  std::ostringstream os;

  const LjParams lj(1.0, 1.0, 2.5);
  ok = ok && lj_pair(1.0, lj).u == 0.0;
  ok = ok && std::fabs(lj_pair(std::cbrt(2.0), lj).u + 1.0) <= 1e-13;
  ok = ok && std::fabs(lj_pair(6.25, lj).u - (-0.016316891136)) <= 1e-12;
  ok = ok && lj_pair(1.0, lj).w == 24.0;

  RngStream rng(2);
  double worst_fd = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double r = 0.8 + rng.uniform() * (2.4 - 0.8);
    const double h = 1e-5 * r;
    const double up = lj_pair((r + h) * (r + h), lj).u;
    const double um = lj_pair((r - h) * (r - h), lj).u;
    const double fd = -r * (up - um) / (2.0 * h);
    const double w = lj_pair(r * r, lj).w;
    worst_fd = std::max(worst_fd, std::fabs(w - fd) / std::fabs(fd));
  }
  ok = ok && worst_fd <= 1e-6;

  ok = ok && displacement_acceptance(-5.0, 1.0) == 1.0;
  ok = ok && displacement_acceptance(0.0, 1.0) == 1.0;
  ok = ok && std::fabs(displacement_acceptance(std::log(2.0), 1.0) - 0.5) <= 1e-15;
  ok = ok && insertion_acceptance(0.0, 99, 100.0, 1.0, 0.0, 1.0) == 1.0;
  ok = ok && insertion_acceptance(k_overlap_energy, 5, 100.0, 1.0, 0.0, 1.0) == 0.0;
  ok = ok && deletion_acceptance(0.0, 100, 100.0, 1.0, 0.0, 1.0) == 1.0;
  ok = ok && deletion_acceptance(0.0, 1, 1e9, 1.0, 40.0, 1.0) < 1e-12;

  os << "LJ landmarks, virial vs finite difference (worst rel " << format_g17(worst_fd)
     << "), acceptance probabilities at the worked points";
  report(9, "formula unit checks to stated tolerances", ok, os.str());
}

void criterion_10_determinism() {
  RunConfig cfg;
  cfg.temperature = 2.0;
  cfg.chemical_potential = -2.0;
  cfg.initial_particles = 250;
  cfg.density = 0.5;
  cfg.box_length = std::cbrt(250.0 / 0.5);
  cfg.strategy = Strategy::cell_list;
  cfg.seed = 99;
  cfg.steps = 20'000;
  cfg.checkpoint_interval = 5'000;

  const fs::path base = fs::temp_directory_path() / "gcmc_acceptance";
  fs::remove_all(base);
  const auto dir1 = base / "a", dir2 = base / "b", part = base / "part", res = base / "resumed";

  bool passed = true;
  std::string detail;
  try {
    run_with_files(cfg, dir1, std::nullopt);
    run_with_files(cfg, dir2, std::nullopt);
    const bool stats_equal = slurp(dir1 / "stats.csv") == slurp(dir2 / "stats.csv");

    RunConfig half = cfg;
    half.steps = 10'000;
    run_with_files(half, part, std::nullopt);
    run_with_files(cfg, res, part / "checkpoint_10000.txt");
    const bool resume_equal =
        slurp(res / "checkpoint_20000.txt") == slurp(dir1 / "checkpoint_20000.txt");

    passed = stats_equal && resume_equal;
    detail = std::string("stats.csv identical: ") + (stats_equal ? "yes" : "NO") +
             "; resumed final checkpoint identical: " + (resume_equal ? "yes" : "NO");
  } catch (const std::exception& e) {
    passed = false;
    detail = e.what();
  }
  report(10, "determinism and checkpoint round-trip", passed, detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite: grand-canonical LJ engine\n");
  criterion_1_ideal_gas();
  criterion_2_cross_strategy();
  criterion_3_incremental_audit();
  criterion_4_grid_consistency();
  criterion_5_coverage();
  criteria_6_7_size_trend();
  criterion_8_cutoff_trend();
  criterion_9_formulas();
  criterion_10_determinism();
  if (g_failures) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
