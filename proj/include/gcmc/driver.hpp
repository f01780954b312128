#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "gcmc/checkpoint.hpp"
#include "gcmc/engine.hpp"
#include "gcmc/text.hpp"

namespace gcmc {

inline constexpr std::string_view k_stats_csv_header =
    "step,N,U,P,acc_disp,acc_ins,acc_del";

inline std::string stats_csv_row(const Simulation& sim) {
  const auto& st = sim.state();
  std::string row = std::to_string(sim.current_step());
  row += ',';
  row += std::to_string(sim.particle_count());
  row += ',';
  row += format_g17(sim.reported_energy());
  row += ',';
  row += format_g17(sim.pressure());
  row += ',';
  row += format_g17(st.acceptance_ratio(MoveKind::displace));
  row += ',';
  row += format_g17(st.acceptance_ratio(MoveKind::insert));
  row += ',';
  row += format_g17(st.acceptance_ratio(MoveKind::remove));
  return row;
}

struct RunFilesResult {
  std::uint64_t final_step = 0;
  std::filesystem::path stats_path;
  std::filesystem::path final_checkpoint_path;
};

/// Runs a simulation to config.steps, writing a checkpoint and a stats row
/// at every checkpoint boundary (plus the starting row and the final state).
/// With `resume` set, the simulation continues from that checkpoint instead
/// of initializing a new one; the resumed trajectory is identical to an
/// uninterrupted run. AuditFailure propagates to the caller.
inline RunFilesResult run_with_files(const RunConfig& cfg,
                                     const std::filesystem::path& out_dir,
                                     const std::optional<std::filesystem::path>& resume,
                                     std::ostream* log = nullptr) {
  std::filesystem::create_directories(out_dir);

  std::optional<Simulation> sim;
  if (resume) {
    Checkpoint c = read_checkpoint(*resume);
    // The run is still governed by cfg (steps may extend the trajectory and
    // the strategy may be swapped), but the physics must match what the
    // checkpoint was produced with.
    RunConfig merged = cfg;
    auto physics_only = [](RunConfig x) {
      x.steps = 0;
      x.seed = 0;
      x.checkpoint_interval = 0;
      x.strategy = Strategy::all_pairs;
      return x.serialize();
    };
    if (physics_only(c.config) != physics_only(merged))
      throw std::runtime_error("resume: config does not match the checkpoint's parameters");
    sim.emplace(merged, ParticleStore(c.positions),
                RngStream::deserialize_hex(c.rng_state_hex), c.step, c.energy, c.virial);
  } else {
    sim.emplace(cfg);
  }

  RunFilesResult result;
  result.stats_path = out_dir / "stats.csv";
  std::ofstream stats(result.stats_path, std::ios::binary | std::ios::trunc);
  if (!stats) throw std::runtime_error("cannot write '" + result.stats_path.string() + "'");
  stats << k_stats_csv_header << '\n' << stats_csv_row(*sim) << '\n';

  auto checkpoint_path = [&out_dir](std::uint64_t step) {
    return out_dir / ("checkpoint_" + std::to_string(step) + ".txt");
  };

  const std::uint64_t initial_step = sim->current_step();
  sim->run_to(cfg.steps, [&](const Simulation& s, const AuditReport&) {
    write_checkpoint(checkpoint_path(s.current_step()), snapshot(s));
    stats << stats_csv_row(s) << '\n';
    if (log)
      *log << "step " << s.current_step() << ": N=" << s.particle_count()
           << " U=" << format_g17(s.state().energy) << '\n';
  });

  // A zero-length run still leaves a restorable final state behind.
  if (sim->current_step() == initial_step) {
    const AuditReport report = sim->audit();
    if (!report.passed()) throw AuditFailure("final audit failed: " + report.describe());
    write_checkpoint(checkpoint_path(sim->current_step()), snapshot(*sim));
  }

  result.final_step = sim->current_step();
  result.final_checkpoint_path = checkpoint_path(result.final_step);

  if (log) {
    const auto& st = sim->statistics();
    *log << "done: steps=" << sim->current_step() << " N=" << sim->particle_count()
         << " U=" << format_g17(sim->state().energy)
         << " P=" << format_g17(sim->pressure()) << '\n'
         << "samples=" << st.samples << " <N>=" << format_g17(st.mean_n())
         << " <U>=" << format_g17(st.mean_u()) << " <P>=" << format_g17(st.mean_p()) << '\n'
         << "acceptance: displace=" << format_g17(sim->state().acceptance_ratio(MoveKind::displace))
         << " insert=" << format_g17(sim->state().acceptance_ratio(MoveKind::insert))
         << " delete=" << format_g17(sim->state().acceptance_ratio(MoveKind::remove)) << '\n';
  }
  return result;
}

}  // namespace gcmc
