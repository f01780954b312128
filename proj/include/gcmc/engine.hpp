#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "gcmc/box.hpp"
#include "gcmc/cell_grid.hpp"
#include "gcmc/config.hpp"
#include "gcmc/init_config.hpp"
#include "gcmc/kahan.hpp"
#include "gcmc/microcell_grid.hpp"
#include "gcmc/particles.hpp"
#include "gcmc/potential.hpp"
#include "gcmc/rng.hpp"
#include "gcmc/strategy.hpp"

namespace gcmc {

// ---------------------------------------------------------------------------
// Metropolis acceptance
// ---------------------------------------------------------------------------

inline double metropolis(double ratio) { return ratio < 1.0 ? ratio : 1.0; }

/// Displacement: accept with min[1, e^(-beta*dU)].
inline double displacement_acceptance(double delta_u, double beta) {
  return metropolis(std::exp(-beta * delta_u));
}

/// Uncapped insertion weight V/(Lambda^3 (N+1)) * e^(beta*(mu - dU)), where
/// dU = U(N+1) - U(N) and N counts particles before the insertion.
inline double insertion_ratio(double delta_u, std::size_t n, double volume, double beta,
                              double mu, double lambda) {
  const double lambda3 = lambda * lambda * lambda;
  return volume / (lambda3 * static_cast<double>(n + 1)) * std::exp(beta * (mu - delta_u));
}

/// Uncapped deletion weight Lambda^3 N / V * e^(-beta*(mu + dU)), where
/// dU = U(N-1) - U(N) and N counts particles before the deletion.
inline double deletion_ratio(double delta_u, std::size_t n, double volume, double beta,
                             double mu, double lambda) {
  const double lambda3 = lambda * lambda * lambda;
  return lambda3 * static_cast<double>(n) / volume * std::exp(-beta * (mu + delta_u));
}

inline double insertion_acceptance(double delta_u, std::size_t n, double volume,
                                   double beta, double mu, double lambda) {
  return metropolis(insertion_ratio(delta_u, n, volume, beta, mu, lambda));
}

inline double deletion_acceptance(double delta_u, std::size_t n, double volume,
                                  double beta, double mu, double lambda) {
  return metropolis(deletion_ratio(delta_u, n, volume, beta, mu, lambda));
}

// ---------------------------------------------------------------------------
// Total energy (initialization and audits)
// ---------------------------------------------------------------------------

struct TotalEnergy {
  double u = 0.0;
  double w = 0.0;
};

/// Triangular sum over the N(N-1)/2 unique pairs within the cutoff, pairs in
/// ascending (i, j) order with compensated accumulation. Called once at
/// startup and from audits; a pair below the overlap floor means the
/// configuration is corrupt and raises an error.
inline TotalEnergy total_energy(const ParticleStore& store, const SimBox& box,
                                const LjParams& lj) {
  KahanSum u, w;
  const std::size_t n = store.size();
  const double floor2 = k_overlap_r2_floor * lj.sigma2;
  const double rc2 = lj.r_cut2;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Vec3& pi = store[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r2 = min_image_dist2(pi, store[j], box);
      if (r2 > rc2) continue;
      if (r2 < floor2)
        throw std::runtime_error("total_energy: particles " + std::to_string(i) + " and " +
                                 std::to_string(j) + " overlap");
      const auto p = lj_pair(r2, lj);
      u.add(p.u);
      w.add(p.w);
    }
  }
  return {u.value(), w.value()};
}

// ---------------------------------------------------------------------------
// Running state and statistics
// ---------------------------------------------------------------------------

enum class MoveKind { displace, insert, remove };

/// Evaluation of one proposed move. The acceptance probability is a pure
/// function of delta_u, N, V, beta, mu and Lambda.
struct MoveOutcome {
  MoveKind kind = MoveKind::displace;
  bool accepted = false;
  double delta_u = 0.0;
  double delta_w = 0.0;
  double acceptance_prob = 0.0;
};

struct SystemState {
  double energy = 0.0;
  double virial = 0.0;
  std::uint64_t attempted[3] = {0, 0, 0};
  std::uint64_t accepted[3] = {0, 0, 0};

  double acceptance_ratio(MoveKind k) const {
    const auto i = static_cast<std::size_t>(k);
    return attempted[i] ? static_cast<double>(accepted[i]) / static_cast<double>(attempted[i])
                        : 0.0;
  }
};

struct RunStatistics {
  std::uint64_t samples = 0;
  double sum_u = 0.0;
  double sum_p = 0.0;
  double sum_n = 0.0;
  double sum_n2 = 0.0;

  double mean_u() const { return samples ? sum_u / static_cast<double>(samples) : 0.0; }
  double mean_p() const { return samples ? sum_p / static_cast<double>(samples) : 0.0; }
  double mean_n() const { return samples ? sum_n / static_cast<double>(samples) : 0.0; }
  double variance_n() const {
    if (!samples) return 0.0;
    const double m = mean_n();
    return sum_n2 / static_cast<double>(samples) - m * m;
  }
};

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

inline constexpr double k_audit_rel_tolerance = 1e-8;
inline constexpr double k_audit_abs_floor = 1e-12;

struct AuditReport {
  double u_tracked = 0.0, u_recomputed = 0.0;
  double w_tracked = 0.0, w_recomputed = 0.0;
  std::optional<std::string> grid_issue;

  static bool within_tolerance(double tracked, double reference) {
    const double tol =
        std::max(k_audit_abs_floor, k_audit_rel_tolerance * std::max(1.0, std::fabs(reference)));
    return std::fabs(tracked - reference) <= tol;
  }

  bool energy_ok() const { return within_tolerance(u_tracked, u_recomputed); }
  bool virial_ok() const { return within_tolerance(w_tracked, w_recomputed); }
  bool passed() const { return energy_ok() && virial_ok() && !grid_issue; }

  std::string describe() const;
};

inline std::string AuditReport::describe() const {
  std::string s;
  if (!energy_ok())
    s += "energy drift: tracked " + std::to_string(u_tracked) + " vs recomputed " +
         std::to_string(u_recomputed) + "; ";
  if (!virial_ok())
    s += "virial drift: tracked " + std::to_string(w_tracked) + " vs recomputed " +
         std::to_string(w_recomputed) + "; ";
  if (grid_issue) s += "grid: " + *grid_issue;
  return s.empty() ? "ok" : s;
}

/// Thrown when a checkpoint or termination audit fails.
class AuditFailure : public std::runtime_error {
 public:
  explicit AuditFailure(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Simulation driver
// ---------------------------------------------------------------------------

inline std::unique_ptr<NeighborStrategy> make_strategy(const RunConfig& cfg,
                                                       ParticleStore& store,
                                                       const SimBox& box,
                                                       const LjParams& lj) {
  switch (cfg.strategy) {
    case Strategy::all_pairs:
      return std::make_unique<AllPairsStrategy>(store, box, lj);
    case Strategy::cell_list:
      return std::make_unique<CellGridStrategy>(store, box, lj, cfg.cell_capacity);
    case Strategy::microcell:
      return std::make_unique<MicrocellGridStrategy>(store, box, lj, cfg.microcell_capacity);
  }
  throw std::logic_error("unknown strategy");
}

/// One grand-canonical Monte Carlo run: move selection, Metropolis
/// acceptance, incremental energy bookkeeping and statistics.
///
/// Every step consumes a fixed number of RNG draws for its move type,
/// whether or not the move is accepted (and even when there is no particle
/// to act on), so trajectories with different strategies stay aligned draw
/// for draw:
///   displacement: selector, particle pick, 3 coordinates, acceptance (6)
///   insertion:    selector, source pick, 3 coordinates, acceptance  (6)
///   deletion:     selector, source pick, particle pick, acceptance  (4)
class Simulation {
 public:
  explicit Simulation(const RunConfig& cfg)
      : cfg_(cfg), box_(cfg.box_length), lj_(cfg.epsilon, cfg.sigma, cfg.r_cut),
        rng_(cfg.seed) {
    cfg_.validate();
    if (cfg_.initial_particles > 0)
      store_ = random_initial_configuration(cfg_.initial_particles, box_,
                                            0.85 * cfg_.sigma, rng_);
    strategy_ = make_strategy(cfg_, store_, box_, lj_);
    const auto e = total_energy(store_, box_, lj_);
    state_.energy = e.u;
    state_.virial = e.w;
  }

  /// Starts a fresh run from an externally prepared configuration: bins it
  /// and computes the initial totals.
  Simulation(const RunConfig& cfg, ParticleStore store, RngStream rng)
      : cfg_(cfg), box_(cfg.box_length), lj_(cfg.epsilon, cfg.sigma, cfg.r_cut),
        store_(std::move(store)), rng_(std::move(rng)) {
    cfg_.validate();
    strategy_ = make_strategy(cfg_, store_, box_, lj_);
    const auto e = total_energy(store_, box_, lj_);
    state_.energy = e.u;
    state_.virial = e.w;
  }

  /// Resume: adopt a previously saved configuration, RNG state and running
  /// totals exactly; nothing is recomputed so the trajectory continues bit
  /// for bit.
  Simulation(const RunConfig& cfg, ParticleStore store, RngStream rng,
             std::uint64_t step, double energy, double virial)
      : cfg_(cfg), box_(cfg.box_length), lj_(cfg.epsilon, cfg.sigma, cfg.r_cut),
        store_(std::move(store)), rng_(std::move(rng)), step_(step) {
    cfg_.validate();
    strategy_ = make_strategy(cfg_, store_, box_, lj_);
    state_.energy = energy;
    state_.virial = virial;
  }

  // The strategy holds a reference to the particle store member, so a
  // Simulation must stay where it was constructed.
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;
  Simulation(Simulation&&) = delete;
  Simulation& operator=(Simulation&&) = delete;

  const RunConfig& config() const { return cfg_; }
  const SimBox& box() const { return box_; }
  const LjParams& lj() const { return lj_; }
  const ParticleStore& particles() const { return store_; }
  ParticleStore& particles() { return store_; }
  const NeighborStrategy& strategy() const { return *strategy_; }
  const SystemState& state() const { return state_; }
  const RunStatistics& statistics() const { return stats_; }
  const RngStream& rng() const { return rng_; }
  std::uint64_t current_step() const { return step_; }
  std::size_t particle_count() const { return store_.size(); }

  double density() const { return static_cast<double>(store_.size()) / box_.volume(); }

  /// Instantaneous virial-route pressure rho*T + W/(3V), plus the tail term
  /// when enabled.
  double pressure() const {
    double p = density() * cfg_.temperature + state_.virial / (3.0 * box_.volume());
    if (cfg_.tail_corrections)
      p += tail_corrections(density(), cfg_.epsilon, cfg_.sigma, cfg_.r_cut).pressure;
    return p;
  }

  /// Total energy including the tail term when enabled.
  double reported_energy() const {
    double u = state_.energy;
    if (cfg_.tail_corrections)
      u += static_cast<double>(store_.size()) *
           tail_corrections(density(), cfg_.epsilon, cfg_.sigma, cfg_.r_cut).u_per_particle;
    return u;
  }

  MoveOutcome step() {
    MoveOutcome out;
    const double selector = rng_.uniform();
    if (selector < cfg_.displace_percent) {
      out = attempt_displace();
    } else if (rng_.uniform() < 0.5) {
      out = attempt_delete();
    } else {
      out = attempt_insert();
    }
    ++step_;
    if (step_ > cfg_.equilibration_steps &&
        (step_ - cfg_.equilibration_steps) % cfg_.sampling_interval == 0)
      sample();
    return out;
  }

  /// Runs moves until `target_step`, auditing at every checkpoint boundary
  /// and at the end. The callback fires after each passing audit; a failed
  /// audit throws AuditFailure.
  template <class F>
  void run_to(std::uint64_t target_step, F&& on_checkpoint) {
    while (step_ < target_step) {
      step();
      if (step_ == target_step || step_ % cfg_.checkpoint_interval == 0) {
        const AuditReport report = audit();
        if (!report.passed())
          throw AuditFailure("audit failed at step " + std::to_string(step_) + ": " +
                             report.describe());
        on_checkpoint(*this, report);
      }
    }
  }

  void run() {
    run_to(cfg_.steps, [](const Simulation&, const AuditReport&) {});
  }

  /// Recomputes (U, W) from scratch and checks the spatial index against a
  /// fresh binning.
  AuditReport audit() const {
    AuditReport r;
    r.u_tracked = state_.energy;
    r.w_tracked = state_.virial;
    const auto e = total_energy(store_, box_, lj_);
    r.u_recomputed = e.u;
    r.w_recomputed = e.w;
    r.grid_issue = strategy_->rebuild_check();
    return r;
  }

 private:
  Vec3 point_from(double u1, double u2, double u3) const {
    const double l = box_.side_length;
    return wrap_position({u1 * l, u2 * l, u3 * l}, box_);
  }

  MoveOutcome attempt_displace() {
    ++state_.attempted[static_cast<std::size_t>(MoveKind::displace)];
    const double pick = rng_.uniform();
    const double u1 = rng_.uniform(), u2 = rng_.uniform(), u3 = rng_.uniform();
    const double accept_draw = rng_.uniform();
    if (store_.empty()) return {MoveKind::displace, false, 0.0};

    const std::size_t pid = RngStream::index_from(pick, store_.size());
    Vec3 new_pos;
    if (cfg_.max_displacement > 0.0) {
      const double cap = cfg_.max_displacement;
      const Vec3& old_pos = store_[pid];
      new_pos = wrap_position({old_pos.x + (2.0 * u1 - 1.0) * cap,
                               old_pos.y + (2.0 * u2 - 1.0) * cap,
                               old_pos.z + (2.0 * u3 - 1.0) * cap},
                              box_);
    } else {
      new_pos = point_from(u1, u2, u3);
    }
    const auto d = strategy_->delta_displace(pid, new_pos);
    const double p = displacement_acceptance(d.u, cfg_.beta());
    if (accept_draw < p) {
      strategy_->commit_displace(pid, new_pos);
      apply_delta(MoveKind::displace, d);
      return {MoveKind::displace, true, d.u, d.w, p};
    }
    return {MoveKind::displace, false, d.u, d.w, p};
  }

  MoveOutcome attempt_insert() {
    ++state_.attempted[static_cast<std::size_t>(MoveKind::insert)];
    const double u1 = rng_.uniform(), u2 = rng_.uniform(), u3 = rng_.uniform();
    const double accept_draw = rng_.uniform();
    const Vec3 pos = point_from(u1, u2, u3);
    const auto d = strategy_->delta_insert(pos);
    const double p = insertion_acceptance(d.u, store_.size(), box_.volume(), cfg_.beta(),
                                          cfg_.chemical_potential, cfg_.lambda);
    if (accept_draw < p) {
      strategy_->commit_insert(pos);
      apply_delta(MoveKind::insert, d);
      return {MoveKind::insert, true, d.u, d.w, p};
    }
    return {MoveKind::insert, false, d.u, d.w, p};
  }

  MoveOutcome attempt_delete() {
    ++state_.attempted[static_cast<std::size_t>(MoveKind::remove)];
    const double pick = rng_.uniform();
    const double accept_draw = rng_.uniform();
    if (store_.empty()) return {MoveKind::remove, false, 0.0};

    const std::size_t pid = RngStream::index_from(pick, store_.size());
    const auto d = strategy_->delta_delete(pid);
    const double p = deletion_acceptance(d.u, store_.size(), box_.volume(), cfg_.beta(),
                                         cfg_.chemical_potential, cfg_.lambda);
    if (accept_draw < p) {
      strategy_->commit_delete(pid);
      apply_delta(MoveKind::remove, d);
      return {MoveKind::remove, true, d.u, d.w, p};
    }
    return {MoveKind::remove, false, d.u, d.w, p};
  }

  void apply_delta(MoveKind kind, const PairInteraction& d) {
    state_.energy += d.u;
    state_.virial += d.w;
    ++state_.accepted[static_cast<std::size_t>(kind)];
  }

  void sample() {
    ++stats_.samples;
    const auto n = static_cast<double>(store_.size());
    stats_.sum_n += n;
    stats_.sum_n2 += n * n;
    stats_.sum_u += reported_energy();
    stats_.sum_p += pressure();
  }

  RunConfig cfg_;
  SimBox box_;
  LjParams lj_;
  ParticleStore store_;
  RngStream rng_;
  std::unique_ptr<NeighborStrategy> strategy_;
  SystemState state_;
  RunStatistics stats_;
  std::uint64_t step_ = 0;
};

}  // namespace gcmc
