#include <doctest.h>

#include <cmath>
#include <vector>

#include "gcmc/engine.hpp"
#include "gcmc/validate.hpp"

using namespace gcmc;

TEST_CASE("displacement acceptance follows min[1, e^(-beta dU)]") {
  CHECK(displacement_acceptance(-5.0, 1.0) == 1.0);
  CHECK(displacement_acceptance(0.0, 1.0) == 1.0);
  const double ln2 = std::log(2.0);
  CHECK(std::fabs(displacement_acceptance(ln2, 1.0) - 0.5) <= 1e-15);
  CHECK(displacement_acceptance(k_overlap_energy, 1.0) == 0.0);
}

TEST_CASE("insertion acceptance at the worked points") {
  // zV/(N+1) = 1 with dU = 0 accepts with probability exactly 1.
  CHECK(insertion_acceptance(0.0, 99, 100.0, 1.0, 0.0, 1.0) == 1.0);
  CHECK(insertion_acceptance(k_overlap_energy, 10, 100.0, 1.0, 0.0, 1.0) == 0.0);
  // Below the boundary the weight itself is the probability.
  const double p = insertion_acceptance(0.0, 199, 100.0, 1.0, 0.0, 1.0);
  CHECK(std::fabs(p - 0.5) <= 1e-15);
}

TEST_CASE("deletion acceptance at the worked points") {
  CHECK(deletion_acceptance(0.0, 100, 100.0, 1.0, 0.0, 1.0) == 1.0);
  // One particle in a huge box with a strongly favorable reservoir stays put.
  CHECK(deletion_acceptance(0.0, 1, 1e6, 1.0, 30.0, 1.0) < 1e-12);
  const double p = deletion_acceptance(0.0, 50, 100.0, 1.0, 0.0, 1.0);
  CHECK(std::fabs(p - 0.5) <= 1e-15);
}

TEST_CASE("insert and delete weights satisfy detailed balance") {
  RngStream rng(31);
  for (int i = 0; i < 500; ++i) {
    const double beta = 0.2 + rng.uniform() * 3.0;
    const double mu = -4.0 + rng.uniform() * 8.0;
    const double lambda = 0.5 + rng.uniform();
    const double volume = 10.0 + rng.uniform() * 1000.0;
    const double du = -10.0 + rng.uniform() * 20.0;
    const auto n = rng.uniform_index(500);

    const double p_ins = insertion_acceptance(du, n, volume, beta, mu, lambda);
    const double p_del = deletion_acceptance(-du, n + 1, volume, beta, mu, lambda);
    const double expected =
        std::exp(beta * (mu - du)) * volume / (std::pow(lambda, 3.0) * static_cast<double>(n + 1));
    // min(1, x) / min(1, 1/x) == x identically.
    CHECK(p_ins / p_del == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("total energy landmarks") {
  const SimBox box(20.0);
  const LjParams lj(1.0, 1.0, 2.5);

  ParticleStore none;
  CHECK(total_energy(none, box, lj).u == 0.0);

  ParticleStore one;
  one.append({1, 1, 1});
  CHECK(total_energy(one, box, lj).u == 0.0);

  ParticleStore pair;
  pair.append({1.0, 1.0, 1.0});
  pair.append({1.0 + std::pow(2.0, 1.0 / 6.0), 1.0, 1.0});
  const auto e = total_energy(pair, box, lj);
  CHECK(e.u == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(std::fabs(e.w) <= 1e-12);

  // Equilateral triangle with unit sides: three pairs at the zero crossing.
  ParticleStore tri;
  tri.append({5.0, 5.0, 5.0});
  tri.append({6.0, 5.0, 5.0});
  tri.append({5.5, 5.0 + std::sqrt(3.0) / 2.0, 5.0});
  CHECK(std::fabs(total_energy(tri, box, lj).u) <= 1e-12);

  ParticleStore overlap;
  overlap.append({1, 1, 1});
  overlap.append({1, 1, 1});
  CHECK_THROWS(total_energy(overlap, box, lj));
}

namespace {

RunConfig ideal_gas_config(double zv, double box_length, std::uint64_t seed) {
  RunConfig cfg;
  cfg.temperature = 1.0;
  cfg.epsilon = 0.0;
  cfg.box_length = box_length;
  cfg.chemical_potential = std::log(zv / cfg.volume());
  cfg.seed = seed;
  cfg.checkpoint_interval = std::uint64_t(1) << 62;
  return cfg;
}

}  // namespace

TEST_CASE("every move type consumes its documented number of draws") {
  RunConfig cfg = ideal_gas_config(50.0, 10.0, 5);

  SUBCASE("displacement-only runs use six draws per step") {
    cfg.displace_percent = 1.0;
    Simulation sim(cfg);
    for (int i = 0; i < 200; ++i) {
      const auto before = sim.rng().draw_count();
      sim.step();
      CHECK(sim.rng().draw_count() - before == 6);
    }
  }

  SUBCASE("exchange moves use six (insert) or four (delete) draws") {
    cfg.displace_percent = 0.0;
    Simulation sim(cfg);
    for (int i = 0; i < 400; ++i) {
      const auto before = sim.rng().draw_count();
      const auto out = sim.step();
      const auto used = sim.rng().draw_count() - before;
      if (out.kind == MoveKind::insert) CHECK(used == 6);
      if (out.kind == MoveKind::remove) CHECK(used == 4);
    }
  }

  SUBCASE("an empty box rejects deletions but still consumes the draws") {
    cfg.displace_percent = 0.0;
    cfg.chemical_potential = -100.0;  // insertions essentially never accepted
    Simulation sim(cfg);
    for (int i = 0; i < 100; ++i) {
      const auto before = sim.rng().draw_count();
      const auto out = sim.step();
      const auto used = sim.rng().draw_count() - before;
      if (out.kind == MoveKind::remove) {
        CHECK(used == 4);
        CHECK(!out.accepted);
        CHECK(sim.particle_count() == 0);
      }
    }
  }
}

TEST_CASE("with epsilon = 0 all strategies walk the same trajectory") {
  std::vector<std::size_t> counts[3];
  const Strategy strategies[3] = {Strategy::all_pairs, Strategy::cell_list,
                                  Strategy::microcell};
  for (int s = 0; s < 3; ++s) {
    RunConfig cfg = ideal_gas_config(100.0, 10.0, 1234);
    cfg.strategy = strategies[s];
    Simulation sim(cfg);
    for (int i = 0; i < 20000; ++i) {
      sim.step();
      if (i % 50 == 0) counts[s].push_back(sim.particle_count());
    }
  }
  CHECK(counts[0] == counts[1]);
  CHECK(counts[0] == counts[2]);
}

TEST_CASE("ideal-gas law at reduced scale") {
  const auto r = validate::ideal_gas_poisson(300.0, 10.0, 150000, 20000, 0.05, 0.25, 2024);
  INFO(r.result.detail);
  CHECK(r.result.passed);
}

TEST_CASE("audit: clean on a fresh state, trips on corruption") {
  RunConfig cfg;
  cfg.temperature = 2.0;
  cfg.chemical_potential = -2.0;
  cfg.initial_particles = 300;
  cfg.density = 0.5;
  cfg.box_length = std::cbrt(300.0 / 0.5);
  cfg.strategy = Strategy::microcell;
  cfg.seed = 4;
  cfg.checkpoint_interval = std::uint64_t(1) << 62;

  Simulation sim(cfg);
  CHECK(sim.audit().passed());
  CHECK(sim.audit().u_tracked == sim.audit().u_recomputed);

  for (int i = 0; i < 5000; ++i) sim.step();
  const auto mid = sim.audit();
  INFO(mid.describe());
  CHECK(mid.passed());

  // Move a particle behind the engine's back: the recomputed energy and the
  // stale grid slot must both be flagged.
  const Vec3 p = sim.particles()[0];
  sim.particles().set(0, wrap_position({p.x + 3.1, p.y + 2.2, p.z}, sim.box()));
  const auto bad = sim.audit();
  CHECK(!bad.passed());
  CHECK(bad.grid_issue.has_value());
}

TEST_CASE("run_to audits at checkpoints and reports them") {
  RunConfig cfg;
  cfg.temperature = 2.0;
  cfg.chemical_potential = -2.5;
  cfg.initial_particles = 200;
  cfg.density = 0.4;
  cfg.box_length = std::cbrt(200.0 / 0.4);
  cfg.strategy = Strategy::cell_list;
  cfg.seed = 6;
  cfg.steps = 3000;
  cfg.checkpoint_interval = 1000;

  Simulation sim(cfg);
  std::vector<std::uint64_t> checkpoints;
  sim.run_to(cfg.steps, [&](const Simulation& s, const AuditReport& r) {
    checkpoints.push_back(s.current_step());
    CHECK(r.passed());
  });
  CHECK(checkpoints == std::vector<std::uint64_t>{1000, 2000, 3000});
  CHECK(sim.statistics().samples == 3000);
}

TEST_CASE("sample count is floor(steps / sampling_interval)") {
  RunConfig cfg = ideal_gas_config(80.0, 10.0, 3);
  cfg.sampling_interval = 7;
  Simulation sim(cfg);
  for (int i = 0; i < 1000; ++i) sim.step();
  CHECK(sim.statistics().samples == 1000 / 7);
}

TEST_CASE("tail corrections only touch the reported observables when enabled") {
  RunConfig cfg;
  cfg.temperature = 2.0;
  cfg.chemical_potential = -2.0;
  cfg.initial_particles = 200;
  cfg.density = 0.5;
  cfg.box_length = std::cbrt(200.0 / 0.5);
  cfg.seed = 12;

  Simulation plain(cfg);
  cfg.tail_corrections = true;
  Simulation tailed(cfg);
  CHECK(plain.state().energy == tailed.state().energy);
  const auto t = tail_corrections(plain.density(), 1.0, 1.0, cfg.r_cut);
  CHECK(tailed.reported_energy() ==
        doctest::Approx(plain.reported_energy() + 200.0 * t.u_per_particle).epsilon(1e-12));
  CHECK(tailed.pressure() == doctest::Approx(plain.pressure() + t.pressure).epsilon(1e-12));
}
