#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gcmc/engine.hpp"
#include "gcmc/init_config.hpp"
#include "gcmc/text.hpp"

namespace gcmc::validate {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline double rel_disc(double got, double ref) {
  return std::fabs(got - ref) / std::max(1.0, std::fabs(ref));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cross-strategy delta equivalence
// ---------------------------------------------------------------------------

struct EquivalenceResult {
  CheckResult result;
  double max_rel_u = 0.0;
  double max_rel_w = 0.0;
};

/// Evaluates random displacement/insertion/deletion proposals with all three
/// strategies over one configuration; the grids must match the all-pairs
/// sums to `tolerance` relative (with a floor of 1 on the magnitude).
inline EquivalenceResult cross_strategy_equivalence(std::size_t particles, double density,
                                                    double r_cut, int proposals_per_kind,
                                                    double tolerance, std::uint64_t seed) {
  const SimBox box(std::cbrt(static_cast<double>(particles) / density));
  RngStream rng(seed);
  ParticleStore store = random_initial_configuration(particles, box, 0.85, rng);
  const LjParams lj(1.0, 1.0, r_cut);
  AllPairsStrategy all_pairs(store, box, lj);
  CellGridStrategy cells(store, box, lj);
  MicrocellGridStrategy micro(store, box, lj);

  EquivalenceResult out;
  auto track = [&out](const PairInteraction& ref, const PairInteraction& got) {
    out.max_rel_u = std::max(out.max_rel_u, detail::rel_disc(got.u, ref.u));
    out.max_rel_w = std::max(out.max_rel_w, detail::rel_disc(got.w, ref.w));
  };
  auto random_point = [&rng, &box]() {
    const double l = box.side_length;
    return wrap_position({rng.uniform() * l, rng.uniform() * l, rng.uniform() * l}, box);
  };

  for (int k = 0; k < proposals_per_kind; ++k) {
    const std::size_t pid = rng.uniform_index(store.size());
    const Vec3 pos = random_point();
    const auto ref = all_pairs.delta_displace(pid, pos);
    track(ref, cells.delta_displace(pid, pos));
    track(ref, micro.delta_displace(pid, pos));
  }
  for (int k = 0; k < proposals_per_kind; ++k) {
    const Vec3 pos = random_point();
    const auto ref = all_pairs.delta_insert(pos);
    track(ref, cells.delta_insert(pos));
    track(ref, micro.delta_insert(pos));
  }
  for (int k = 0; k < proposals_per_kind; ++k) {
    const std::size_t pid = rng.uniform_index(store.size());
    const auto ref = all_pairs.delta_delete(pid);
    track(ref, cells.delta_delete(pid));
    track(ref, micro.delta_delete(pid));
  }

  out.result.name = "cross-strategy delta equivalence";
  out.result.passed = out.max_rel_u <= tolerance && out.max_rel_w <= tolerance;
  std::ostringstream os;
  os << "N=" << particles << " proposals=" << 3 * proposals_per_kind
     << " max rel dU=" << format_g17(out.max_rel_u)
     << " max rel dW=" << format_g17(out.max_rel_w) << " tol=" << format_g17(tolerance);
  out.result.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Grid consistency after committed moves
// ---------------------------------------------------------------------------

struct RebinResult {
  CheckResult result;
  std::uint64_t committed = 0;
  int peak_occupancy = 0;
};

/// Runs real GCMC moves until `committed_target` of them were accepted, then
/// compares the grid against a fresh binning. For the microcell grid the
/// peak occupancy must stay within its hard bound.
inline RebinResult grid_rebin_consistency(Strategy strategy, std::uint64_t committed_target,
                                          std::size_t particles, double density,
                                          double temperature, double mu,
                                          std::uint64_t seed) {
  RunConfig cfg;
  cfg.temperature = temperature;
  cfg.chemical_potential = mu;
  cfg.initial_particles = particles;
  cfg.density = density;
  cfg.box_length = std::cbrt(static_cast<double>(particles) / density);
  cfg.strategy = strategy;
  cfg.seed = seed;
  cfg.checkpoint_interval = std::uint64_t(1) << 62;  // no audits here
  cfg.validate();

  Simulation sim(cfg);
  RebinResult out;
  const std::uint64_t attempt_cap = committed_target * 200 + 1000;
  std::uint64_t attempts = 0;
  while (out.committed < committed_target && attempts < attempt_cap) {
    ++attempts;
    if (sim.step().accepted) ++out.committed;
  }
  out.peak_occupancy = sim.strategy().peak_cell_occupancy();

  out.result.name = std::string("grid rebinning (") + std::string(to_string(strategy)) + ")";
  std::ostringstream os;
  if (out.committed < committed_target) {
    out.result.passed = false;
    os << "only " << out.committed << " accepted moves in " << attempts << " attempts";
  } else if (auto issue = sim.strategy().rebuild_check()) {
    out.result.passed = false;
    os << *issue;
  } else {
    out.result.passed = true;
    os << out.committed << " committed moves, N=" << sim.particle_count()
       << ", peak cell occupancy " << out.peak_occupancy;
  }
  out.result.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Neighborhood coverage of the cutoff sphere
// ---------------------------------------------------------------------------

struct CoverageResult {
  CheckResult result;
  int violations = 0;
  int tested = 0;
};

/// Randomized search for a point within the cutoff of some particle whose
/// cell is outside the traversed neighborhood. Membership is checked with
/// cyclic offsets; the traversal itself is pinned to the same window by
/// spot-checking neighborhood_cells() against the cube enumeration.
inline CoverageResult neighborhood_coverage(Strategy strategy, double r_cut,
                                            double box_length, int trials,
                                            std::uint64_t seed) {
  if (strategy == Strategy::all_pairs)
    throw std::invalid_argument("coverage check applies to grid strategies");
  const SimBox box(box_length);
  RngStream rng(seed);
  const auto n = static_cast<std::size_t>(std::max(64.0, 0.4 * box.volume()));
  ParticleStore store = random_initial_configuration(n, box, 0.85, rng);
  const LjParams lj(1.0, 1.0, r_cut);

  CoverageResult out;
  out.result.name = std::string("coverage (") + std::string(to_string(strategy)) + ")";

  int dims = 0;
  std::unique_ptr<NeighborStrategy> grid;
  std::vector<std::int32_t> (*neigh_of)(const NeighborStrategy&, int) = nullptr;
  if (strategy == Strategy::cell_list) {
    auto g = std::make_unique<CellGridStrategy>(store, box, lj);
    dims = g->cells_per_dim();
    neigh_of = [](const NeighborStrategy& s, int c) {
      return static_cast<const CellGridStrategy&>(s).neighborhood_cells(c);
    };
    grid = std::move(g);
  } else {
    auto g = std::make_unique<MicrocellGridStrategy>(store, box, lj);
    dims = g->dims();
    neigh_of = [](const NeighborStrategy& s, int c) {
      return static_cast<const MicrocellGridStrategy&>(s).neighborhood_cells(c);
    };
    grid = std::move(g);
  }

  auto cell_coords = [dims](int cell) {
    return std::array<int, 3>{cell % dims, (cell / dims) % dims, cell / (dims * dims)};
  };
  auto cell_of = [&](const Vec3& p) {
    if (strategy == Strategy::cell_list)
      return static_cast<const CellGridStrategy&>(*grid).cell_of(p);
    return static_cast<const MicrocellGridStrategy&>(*grid).cell_of(p);
  };
  // Per-axis window of the delta traversal: a fixed +-1 cell band for the
  // traditional grid, the coordinate-derived arc for the microcell grid.
  auto axis_arc = [&](const Vec3& pos, int center_coord, int a) {
    if (strategy == Strategy::cell_list) {
      int first = (center_coord - 1) % dims;
      if (first < 0) first += dims;
      return AxisArc{first, std::min(3, dims)};
    }
    const double coord = a == 0 ? pos.x : (a == 1 ? pos.y : pos.z);
    return microcell_axis_arc(coord, r_cut, lj.sigma, box_length, dims);
  };
  auto member = [&](const Vec3& pos, int target) {
    const auto c = cell_coords(cell_of(pos));
    const auto t = cell_coords(target);
    for (int a = 0; a < 3; ++a) {
      const auto arc = axis_arc(pos, c[static_cast<std::size_t>(a)], a);
      if (arc.count >= dims) continue;
      int d = (t[static_cast<std::size_t>(a)] - arc.first) % dims;
      if (d < 0) d += dims;
      if (d >= arc.count) return false;
    }
    return true;
  };

  // Pin the actual traversal to the window the membership test assumes.
  for (int k = 0; k < 32; ++k) {
    const auto pid = rng.uniform_index(store.size());
    const Vec3 pos = store[pid];
    std::vector<std::int32_t> cells;
    std::size_t expect = 1;
    if (strategy == Strategy::cell_list) {
      cells = neigh_of(*grid, cell_of(pos));
      expect = 27;
    } else {
      cells = static_cast<const MicrocellGridStrategy&>(*grid).neighborhood_cells(pos);
      const auto c = cell_coords(cell_of(pos));
      for (int a = 0; a < 3; ++a)
        expect *= static_cast<std::size_t>(axis_arc(pos, c[static_cast<std::size_t>(a)], a).count);
    }
    if (cells.size() != expect) {
      out.result.passed = false;
      out.result.detail = "traversal size mismatch";
      return out;
    }
    for (std::int32_t t : cells)
      if (!member(pos, t)) {
        out.result.passed = false;
        out.result.detail = "traversal visits a cell outside the checked window";
        return out;
      }
  }

  const double rc2 = r_cut * r_cut;
  for (int k = 0; k < trials; ++k) {
    const auto pid = rng.uniform_index(store.size());
    Vec3 dir;
    double n2 = 0.0;
    do {
      dir = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
      n2 = dir.norm2();
    } while (n2 > 1.0 || n2 < 1e-12);
    Vec3 offset = r_cut * dir;
    if (k % 8 == 0) {
      const double scale = r_cut / std::sqrt(n2 * r_cut * r_cut);
      offset = scale * offset;  // push to the boundary of the cutoff sphere
    }
    const Vec3 target = wrap_position(store[pid] + offset, box);
    if (min_image_dist2(store[pid], target, box) > rc2) continue;  // rounded past the cutoff
    ++out.tested;
    if (!member(store[pid], cell_of(target))) ++out.violations;
  }

  out.result.passed = out.violations == 0;
  std::ostringstream os;
  os << out.tested << " points within r_cut=" << format_g17(r_cut) << ", L="
     << format_g17(box_length) << ": " << out.violations << " outside the neighborhood";
  out.result.detail = os.str();
  return out;
}

// ---------------------------------------------------------------------------
// Ideal-gas law for the full move loop
// ---------------------------------------------------------------------------

struct IdealGasResult {
  CheckResult result;
  double mean_n = 0.0;
  double var_over_mean = 0.0;
};

/// With epsilon = 0 every move is accepted per the pure ensemble weights and
/// the particle count must follow a Poisson law with mean zV = e^(beta*mu)
/// V / Lambda^3. Exercises move selection and both exchange acceptances end
/// to end.
inline IdealGasResult ideal_gas_poisson(double target_mean, double box_length,
                                        std::uint64_t steps, std::uint64_t equilibration,
                                        double mean_tol_rel, double var_ratio_tol,
                                        std::uint64_t seed) {
  RunConfig cfg;
  cfg.temperature = 1.0;
  cfg.lambda = 1.0;
  cfg.epsilon = 0.0;
  cfg.box_length = box_length;
  cfg.chemical_potential = std::log(target_mean / cfg.volume());
  cfg.strategy = Strategy::all_pairs;
  cfg.seed = seed;
  cfg.steps = steps;
  cfg.equilibration_steps = equilibration;
  cfg.checkpoint_interval = std::uint64_t(1) << 62;
  cfg.validate();

  Simulation sim(cfg);
  for (std::uint64_t s = 0; s < steps; ++s) sim.step();

  IdealGasResult out;
  out.mean_n = sim.statistics().mean_n();
  out.var_over_mean = out.mean_n > 0.0 ? sim.statistics().variance_n() / out.mean_n : 0.0;
  const double mean_err = std::fabs(out.mean_n - target_mean) / target_mean;
  const double var_err = std::fabs(out.var_over_mean - 1.0);
  out.result.name = "ideal-gas Poisson law";
  out.result.passed = mean_err <= mean_tol_rel && var_err <= var_ratio_tol;
  std::ostringstream os;
  os << "<N>=" << format_g17(out.mean_n) << " (target " << format_g17(target_mean)
     << ", err " << format_g17(mean_err) << "), var/mean=" << format_g17(out.var_over_mean);
  out.result.detail = os.str();
  return out;
}

}  // namespace gcmc::validate
