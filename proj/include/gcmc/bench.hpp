#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "gcmc/engine.hpp"
#include "gcmc/init_config.hpp"
#include "gcmc/text.hpp"

namespace gcmc {

struct BenchSpec {
  std::vector<std::size_t> sizes;
  std::vector<Strategy> strategies;
  std::vector<double> cutoffs{2.5};
  std::uint64_t steps = 100000;
  int repeats = 1;
  double density = 0.67;
  double temperature = 2.0;
  double chemical_potential = -2.0;
  double displace_percent = 0.30;
  std::uint64_t seed = 1;
  int cell_capacity = 0;
  int microcell_capacity = 5;
};

struct BenchRow {
  std::size_t particles = 0;
  Strategy strategy = Strategy::all_pairs;
  double cutoff = 2.5;
  int repeat = 0;
  std::uint64_t steps = 0;
  double init_seconds = 0.0;  // binning + initial total energy
  double move_seconds = 0.0;  // the move loop only
  double us_per_move = 0.0;
};

/// Per-(cutoff, size, strategy) aggregate over the repeats.
struct BenchGroup {
  std::size_t particles = 0;
  Strategy strategy = Strategy::all_pairs;
  double cutoff = 2.5;
  double mean_init_seconds = 0.0;
  double mean_move_seconds = 0.0;
  double mean_us_per_move = 0.0;
  double spread_pct = 0.0;  // max deviation of move_seconds from the mean, percent
  std::optional<double> speedup_vs_all_pairs;
};

inline RunConfig bench_config(const BenchSpec& spec, std::size_t particles, double cutoff,
                              Strategy strategy, int repeat) {
  RunConfig cfg;
  cfg.temperature = spec.temperature;
  cfg.chemical_potential = spec.chemical_potential;
  cfg.r_cut = cutoff;
  cfg.box_length = std::cbrt(static_cast<double>(particles) / spec.density);
  cfg.displace_percent = spec.displace_percent;
  cfg.steps = spec.steps;
  cfg.seed = spec.seed + static_cast<std::uint64_t>(repeat);
  cfg.checkpoint_interval = spec.steps + 1;  // the bench loop does its own bookkeeping
  cfg.strategy = strategy;
  cfg.cell_capacity = spec.cell_capacity;
  cfg.microcell_capacity = spec.microcell_capacity;
  cfg.validate();
  return cfg;
}

/// Times every (cutoff, size, strategy, repeat) combination. Within one
/// (cutoff, size, repeat) cell all strategies start from the same initial
/// configuration and the same RNG state, so they process the same proposal
/// stream. Rows come back in deterministic order.
inline std::vector<BenchRow> run_bench(const BenchSpec& spec, std::ostream* log = nullptr) {
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (double cutoff : spec.cutoffs) {
    for (std::size_t n : spec.sizes) {
      for (int rep = 0; rep < spec.repeats; ++rep) {
        const SimBox box(std::cbrt(static_cast<double>(n) / spec.density));
        RngStream gen(spec.seed + static_cast<std::uint64_t>(rep));
        const ParticleStore initial = random_initial_configuration(n, box, 0.85, gen);
        for (Strategy strategy : spec.strategies) {
          const RunConfig cfg = bench_config(spec, n, cutoff, strategy, rep);
          const auto t0 = clock::now();
          Simulation sim(cfg, initial, gen);
          const auto t1 = clock::now();
          for (std::uint64_t s = 0; s < spec.steps; ++s) sim.step();
          const auto t2 = clock::now();
          if (auto issue = sim.strategy().rebuild_check())
            throw std::runtime_error("bench: grid inconsistent after run: " + *issue);

          BenchRow row;
          row.particles = n;
          row.strategy = strategy;
          row.cutoff = cutoff;
          row.repeat = rep;
          row.steps = spec.steps;
          row.init_seconds = std::chrono::duration<double>(t1 - t0).count();
          row.move_seconds = std::chrono::duration<double>(t2 - t1).count();
          row.us_per_move = row.move_seconds * 1e6 / static_cast<double>(spec.steps);
          rows.push_back(row);
          if (log)
            *log << "bench: N=" << n << " strategy=" << to_string(strategy)
                 << " cutoff=" << format_g17(cutoff) << " repeat=" << rep
                 << " init=" << format_g17(row.init_seconds)
                 << "s moves=" << format_g17(row.move_seconds) << "s ("
                 << format_g17(row.us_per_move) << " us/move)\n";
        }
      }
    }
  }
  return rows;
}

inline std::vector<BenchGroup> summarize_bench(const std::vector<BenchRow>& rows) {
  std::map<std::tuple<double, std::size_t, int>, BenchGroup> groups;
  std::map<std::tuple<double, std::size_t, int>, std::vector<double>> move_times;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.cutoff, r.particles, static_cast<int>(r.strategy));
    auto& g = groups[key];
    g.particles = r.particles;
    g.strategy = r.strategy;
    g.cutoff = r.cutoff;
    g.mean_init_seconds += r.init_seconds;
    g.mean_move_seconds += r.move_seconds;
    g.mean_us_per_move += r.us_per_move;
    move_times[key].push_back(r.move_seconds);
  }
  std::vector<BenchGroup> out;
  for (auto& [key, g] : groups) {
    const auto count = static_cast<double>(move_times[key].size());
    g.mean_init_seconds /= count;
    g.mean_move_seconds /= count;
    g.mean_us_per_move /= count;
    double spread = 0.0;
    for (double t : move_times[key])
      spread = std::max(spread, std::fabs(t - g.mean_move_seconds));
    g.spread_pct = g.mean_move_seconds > 0.0 ? 100.0 * spread / g.mean_move_seconds : 0.0;
    out.push_back(g);
  }
  for (auto& g : out) {
    if (g.strategy == Strategy::all_pairs) continue;
    for (const auto& ref : out) {
      if (ref.strategy == Strategy::all_pairs && ref.particles == g.particles &&
          ref.cutoff == g.cutoff && ref.mean_move_seconds > 0.0) {
        g.speedup_vs_all_pairs = ref.mean_move_seconds / g.mean_move_seconds;
        break;
      }
    }
  }
  return out;
}

inline constexpr std::string_view k_bench_csv_header =
    "particles,strategy,cutoff,repeat,steps,init_seconds,move_seconds,us_per_move,"
    "speedup_vs_all_pairs,spread_pct";

inline void write_bench_csv(const std::filesystem::path& path,
                            const std::vector<BenchRow>& rows,
                            const std::vector<BenchGroup>& groups) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << k_bench_csv_header << '\n';
  for (const auto& r : rows) {
    out << r.particles << ',' << to_string(r.strategy) << ',' << format_g17(r.cutoff) << ','
        << r.repeat << ',' << r.steps << ',' << format_g17(r.init_seconds) << ','
        << format_g17(r.move_seconds) << ',' << format_g17(r.us_per_move) << ",,\n";
  }
  for (const auto& g : groups) {
    out << g.particles << ',' << to_string(g.strategy) << ',' << format_g17(g.cutoff)
        << ",mean," << '0' << ',' << format_g17(g.mean_init_seconds) << ','
        << format_g17(g.mean_move_seconds) << ',' << format_g17(g.mean_us_per_move) << ','
        << (g.speedup_vs_all_pairs ? format_g17(*g.speedup_vs_all_pairs) : std::string{})
        << ',' << format_g17(g.spread_pct) << '\n';
  }
}

/// Companion plot script: per-move cost and speedup over the all-pairs
/// baseline as functions of the particle count.
inline void write_gnuplot_script(const std::filesystem::path& script_path,
                                 const std::string& csv_name) {
  std::ofstream out(script_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + script_path.string() + "'");
  out << "set datafile separator ','\n"
         "set logscale x 2\n"
         "set xlabel 'particles'\n"
         "set key left top\n"
         "set terminal pngcairo size 900,600\n"
         "set output 'bench_us_per_move.png'\n"
         "set ylabel 'us per move (mean)'\n"
         "set logscale y\n"
         "plot \\\n"
         "  '< grep \",mean,\" "
      << csv_name
      << " | grep \",all_pairs,\"' using 1:8 with linespoints title 'all pairs', \\\n"
         "  '< grep \",mean,\" "
      << csv_name
      << " | grep \",cell_list,\"' using 1:8 with linespoints title 'cell list', \\\n"
         "  '< grep \",mean,\" "
      << csv_name
      << " | grep \",microcell,\"' using 1:8 with linespoints title 'microcell'\n"
         "set output 'bench_speedup.png'\n"
         "set ylabel 'speedup vs all pairs (mean)'\n"
         "unset logscale y\n"
         "plot \\\n"
         "  '< grep \",mean,\" "
      << csv_name
      << " | grep \",cell_list,\"' using 1:9 with linespoints title 'cell list', \\\n"
         "  '< grep \",mean,\" "
      << csv_name
      << " | grep \",microcell,\"' using 1:9 with linespoints title 'microcell'\n";
}

}  // namespace gcmc
