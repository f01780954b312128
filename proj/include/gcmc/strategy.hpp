#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gcmc/box.hpp"
#include "gcmc/kahan.hpp"
#include "gcmc/particles.hpp"
#include "gcmc/potential.hpp"

namespace gcmc {

/// One interchangeable neighbor-search backend. A strategy references the
/// particle store it indexes; delta_* evaluate the energy/virial change of a
/// proposed move against the current configuration, commit_* apply an
/// accepted move to both the store and the spatial index.
///
/// Contract: every delta_* returns the same cutoff-limited pair sums the
/// all-pairs reference would return (to tight tolerance), and after any
/// commit the index matches what a fresh build() of the new configuration
/// would produce. A commit must be preceded by the matching delta on the
/// same proposal. Instances are single-writer; delta_* are safe to call
/// repeatedly between commits.
class NeighborStrategy {
 public:
  virtual ~NeighborStrategy() = default;

  virtual std::string_view name() const = 0;

  /// (Re)bins the current store contents into the spatial index.
  virtual void build() = 0;

  virtual PairInteraction delta_displace(std::size_t pid, const Vec3& new_pos) const = 0;
  virtual PairInteraction delta_insert(const Vec3& pos) const = 0;
  virtual PairInteraction delta_delete(std::size_t pid) const = 0;

  virtual void commit_displace(std::size_t pid, const Vec3& new_pos) = 0;
  virtual std::size_t commit_insert(const Vec3& pos) = 0;
  virtual void commit_delete(std::size_t pid) = 0;

  /// Compares the index against a fresh binning of the current positions.
  /// Returns a description of the first inconsistency, or nullopt when clean.
  virtual std::optional<std::string> rebuild_check() const = 0;

  /// Highest per-cell occupancy observed so far (0 for gridless strategies).
  virtual int peak_cell_occupancy() const { return 0; }
};

/// Reference strategy: scans every particle, in ascending index order, with
/// compensated accumulation. It is the correctness oracle for the grids and
/// the baseline of the benchmark.
class AllPairsStrategy final : public NeighborStrategy {
 public:
  AllPairsStrategy(ParticleStore& store, const SimBox& box, const LjParams& lj)
      : store_(store), box_(box), lj_(lj) {}

  std::string_view name() const override { return "all_pairs"; }

  void build() override {}

  PairInteraction delta_displace(std::size_t pid, const Vec3& new_pos) const override {
    require_valid(pid);
    const Vec3 old_pos = store_[pid];
    KahanSum du, dw, ou, ow;
    const std::size_t n = store_.size();
    const double rc2 = lj_.r_cut2;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == pid) continue;
      const Vec3& q = store_[j];
      const double r2n = min_image_dist2(new_pos, q, box_);
      if (r2n <= rc2) {
        const auto pn = lj_pair_clamped(r2n, lj_);
        du.add(pn.u);
        dw.add(pn.w);
      }
      const double r2o = min_image_dist2(old_pos, q, box_);
      if (r2o <= rc2) {
        const auto po = lj_pair_clamped(r2o, lj_);
        ou.add(po.u);
        ow.add(po.w);
      }
    }
    return {du.value() - ou.value(), dw.value() - ow.value()};
  }

  PairInteraction delta_insert(const Vec3& pos) const override {
    KahanSum u, w;
    const double rc2 = lj_.r_cut2;
    for (std::size_t j = 0; j < store_.size(); ++j) {
      const double r2 = min_image_dist2(pos, store_[j], box_);
      if (r2 > rc2) continue;
      const auto p = lj_pair_clamped(r2, lj_);
      u.add(p.u);
      w.add(p.w);
    }
    return {u.value(), w.value()};
  }

  PairInteraction delta_delete(std::size_t pid) const override {
    require_valid(pid);
    const Vec3 pos = store_[pid];
    KahanSum u, w;
    const double rc2 = lj_.r_cut2;
    for (std::size_t j = 0; j < store_.size(); ++j) {
      if (j == pid) continue;
      const double r2 = min_image_dist2(pos, store_[j], box_);
      if (r2 > rc2) continue;
      const auto p = lj_pair_clamped(r2, lj_);
      u.add(p.u);
      w.add(p.w);
    }
    return {-u.value(), -w.value()};
  }

  void commit_displace(std::size_t pid, const Vec3& new_pos) override {
    require_valid(pid);
    store_.set(pid, new_pos);
  }

  std::size_t commit_insert(const Vec3& pos) override { return store_.append(pos); }

  void commit_delete(std::size_t pid) override {
    require_valid(pid);
    store_.remove_swap_last(pid);
  }

  std::optional<std::string> rebuild_check() const override { return std::nullopt; }

 private:
  void require_valid(std::size_t pid) const {
    if (pid >= store_.size()) throw std::out_of_range("all_pairs: invalid particle id");
  }

  ParticleStore& store_;
  SimBox box_;
  LjParams lj_;
};

}  // namespace gcmc
