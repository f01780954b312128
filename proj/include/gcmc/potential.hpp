#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gcmc {

/// Pairwise energy and virial contribution. Both are zero beyond the cutoff.
struct PairInteraction {
  double u = 0.0;
  double w = 0.0;
};

/// Lennard-Jones parameters with the derived squares cached. All distances
/// enter as squared lengths so the hot path never takes a square root.
struct LjParams {
  double epsilon = 1.0;
  double sigma = 1.0;
  double r_cut = 2.5;
  double sigma2 = 1.0;
  double r_cut2 = 6.25;

  LjParams() = default;
  LjParams(double eps, double sig, double rc)
      : epsilon(eps), sigma(sig), r_cut(rc), sigma2(sig * sig), r_cut2(rc * rc) {}
};

/// Pairs closer than this (in units of sigma^2) are treated as overlapping.
inline constexpr double k_overlap_r2_floor = 1e-12;

/// Energy assigned to an overlapping proposal: large enough that the move is
/// always rejected, finite so the evaluation itself stays well-defined.
inline constexpr double k_overlap_energy = 1e30;

/// Lennard-Jones pair energy u = 4*eps*[(sigma^2/r2)^6 - (sigma^2/r2)^3] and
/// virial w = 24*eps*[2*(sigma^2/r2)^6 - (sigma^2/r2)^3], both zero past the
/// cutoff. r2 must be strictly positive.
inline PairInteraction lj_pair(double r2, const LjParams& p) {
  if (!(r2 > 0.0)) throw std::domain_error("lj_pair: overlapping particles (r2 <= 0)");
  if (r2 > p.r_cut2) return {};
  const double s2 = p.sigma2 / r2;
  const double s6 = s2 * s2 * s2;
  const double s12 = s6 * s6;
  return {4.0 * p.epsilon * (s12 - s6), 24.0 * p.epsilon * (2.0 * s12 - s6)};
}

/// Cutoff-limited pair terms for proposal evaluation: a near-overlap yields
/// an enormous positive energy instead of an error, so random insertions on
/// top of an existing particle are evaluable and simply rejected.
inline PairInteraction lj_pair_clamped(double r2, const LjParams& p) {
  if (r2 < k_overlap_r2_floor * p.sigma2) return {k_overlap_energy, k_overlap_energy};
  return lj_pair(r2, p);
}

/// Long-range corrections for the truncated potential at number density rho:
/// energy per particle and pressure term.
struct TailCorrection {
  double u_per_particle = 0.0;
  double pressure = 0.0;
};

inline TailCorrection tail_corrections(double rho, double epsilon, double sigma,
                                       double r_cut) {
  const double sr3 = (sigma / r_cut) * (sigma / r_cut) * (sigma / r_cut);
  const double sr9 = sr3 * sr3 * sr3;
  const double s3 = sigma * sigma * sigma;
  const double pi = std::numbers::pi;
  const double u = (8.0 / 3.0) * pi * rho * epsilon * s3 * (sr9 / 3.0 - sr3);
  const double pr = (16.0 / 3.0) * pi * rho * rho * epsilon * s3 * (2.0 / 3.0 * sr9 - sr3);
  return {u, pr};
}

}  // namespace gcmc
