#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gcmc/box.hpp"
#include "gcmc/grid_common.hpp"
#include "gcmc/kahan.hpp"
#include "gcmc/particles.hpp"
#include "gcmc/potential.hpp"
#include "gcmc/strategy.hpp"

namespace gcmc {

struct CellDims {
  int cells_per_dim = 0;
  double cell_size = 0.0;
};

/// Largest integer cell count T with L/T >= r_cut; at least 3 cells per
/// dimension, so a box smaller than 3*r_cut uses S = L/3 and the 27-cell
/// neighborhood spans the whole box.
inline CellDims compute_cell_dims(double box_length, double r_cut) {
  int t = static_cast<int>(box_length / r_cut);
  while (static_cast<double>(t + 1) * r_cut <= box_length) ++t;
  while (t > 1 && static_cast<double>(t) * r_cut > box_length) --t;
  if (t < 3) t = 3;
  return {t, box_length / t};
}

/// Per-cutoff default for the fixed per-cell slot arrays.
inline int default_cell_capacity(double r_cut, double sigma) {
  return r_cut <= 4.0 * sigma ? 48 : 96;
}

/// Traditional cell list: cells at least r_cut wide (when the box allows),
/// fixed-capacity slot arrays per cell, and a 27-entry neighbor table per
/// cell built once up front. Removal swaps the last slot entry into the
/// freed position; a displacement that stays in its cell leaves the slots
/// untouched.
class CellGridStrategy final : public NeighborStrategy {
 public:
  CellGridStrategy(ParticleStore& store, const SimBox& box, const LjParams& lj,
                   int capacity_override = 0)
      : store_(store), box_(box), lj_(lj) {
    const auto d = compute_cell_dims(box.side_length, lj.r_cut);
    dims_ = d.cells_per_dim;
    cell_size_ = d.cell_size;
    inv_cell_ = 1.0 / cell_size_;
    capacity_ = capacity_override > 0 ? capacity_override
                                      : default_cell_capacity(lj.r_cut, lj.sigma);
    const std::size_t ncells = cell_count();
    occupancy_.assign(ncells, 0);
    slots_.assign(ncells * static_cast<std::size_t>(capacity_), -1);
    neighbors_.reserve(ncells * 27);
    for (int z = 0; z < dims_; ++z)
      for (int y = 0; y < dims_; ++y)
        for (int x = 0; x < dims_; ++x) {
          const auto cube = detail::cube_cells(x, y, z, 1, dims_);
          neighbors_.insert(neighbors_.end(), cube.begin(), cube.end());
        }
    scratch_.resize(static_cast<std::size_t>(capacity_));
    build();
  }

  std::string_view name() const override { return "cell_list"; }

  int cells_per_dim() const { return dims_; }
  double cell_size() const { return cell_size_; }
  int capacity_per_cell() const { return capacity_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims_) * dims_ * dims_;
  }
  std::span<const std::int32_t> occupancy_view() const { return occupancy_; }
  std::span<const std::int32_t> slots_view() const { return slots_; }

  int cell_of(const Vec3& p) const {
    return linear_cell(coord(p.x), coord(p.y), coord(p.z));
  }

  /// The 27 cells the delta path scans around `cell`, in table order.
  std::vector<std::int32_t> neighborhood_cells(int cell) const {
    const std::int32_t* t = &neighbors_[static_cast<std::size_t>(cell) * 27];
    return std::vector<std::int32_t>(t, t + 27);
  }

  void build() override {
    std::fill(occupancy_.begin(), occupancy_.end(), 0);
    for (std::size_t i = 0; i < store_.size(); ++i)
      insert_id(cell_of(store_[i]), static_cast<std::int32_t>(i));
  }

  PairInteraction delta_displace(std::size_t pid, const Vec3& new_pos) const override {
    require_valid(pid);
    const Vec3 old_pos = store_[pid];
    const int old_cell = cell_of(old_pos);
    const int new_cell = cell_of(new_pos);
    if (old_cell == new_cell) {
      // Same neighborhood for both endpoints: one traversal covers them.
      KahanSum nu, nw, ou, ow;
      const double rc2 = lj_.r_cut2;
      for_cell_ids(new_cell, [&](std::size_t j) {
        if (j == pid) return;
        const Vec3& q = store_[j];
        const double r2n = min_image_dist2(new_pos, q, box_);
        if (r2n <= rc2) {
          const auto pn = lj_pair_clamped(r2n, lj_);
          nu.add(pn.u);
          nw.add(pn.w);
        }
        const double r2o = min_image_dist2(old_pos, q, box_);
        if (r2o <= rc2) {
          const auto po = lj_pair_clamped(r2o, lj_);
          ou.add(po.u);
          ow.add(po.w);
        }
      });
      return {nu.value() - ou.value(), nw.value() - ow.value()};
    }
    const auto sn = sum_around(new_cell, new_pos, pid);
    const auto so = sum_around(old_cell, old_pos, pid);
    return {sn.u - so.u, sn.w - so.w};
  }

  PairInteraction delta_insert(const Vec3& pos) const override {
    return sum_around(cell_of(pos), pos, store_.size());
  }

  PairInteraction delta_delete(std::size_t pid) const override {
    require_valid(pid);
    const Vec3 pos = store_[pid];
    const auto s = sum_around(cell_of(pos), pos, pid);
    return {-s.u, -s.w};
  }

  void commit_displace(std::size_t pid, const Vec3& new_pos) override {
    require_valid(pid);
    const int old_cell = cell_of(store_[pid]);
    const int new_cell = cell_of(new_pos);
    store_.set(pid, new_pos);
    if (old_cell == new_cell) return;  // fast path: slot lists unchanged
    remove_id(old_cell, static_cast<std::int32_t>(pid));
    insert_id(new_cell, static_cast<std::int32_t>(pid));
  }

  std::size_t commit_insert(const Vec3& pos) override {
    const std::size_t pid = store_.append(pos);
    insert_id(cell_of(pos), static_cast<std::int32_t>(pid));
    return pid;
  }

  void commit_delete(std::size_t pid) override {
    require_valid(pid);
    const std::size_t last = store_.size() - 1;
    remove_id(cell_of(store_[pid]), static_cast<std::int32_t>(pid));
    if (pid != last) {
      // The last record is about to take index pid; relabel its slot entry.
      relabel_id(cell_of(store_[last]), static_cast<std::int32_t>(last),
                 static_cast<std::int32_t>(pid));
    }
    store_.remove_swap_last(pid);
  }

  std::optional<std::string> rebuild_check() const override {
    std::vector<std::int32_t> occ(cell_count(), 0);
    std::vector<std::int32_t> fresh(cell_count() * static_cast<std::size_t>(capacity_), -1);
    for (std::size_t i = 0; i < store_.size(); ++i) {
      const int c = cell_of(store_[i]);
      if (occ[static_cast<std::size_t>(c)] >= capacity_)
        return "rebin overflow in cell " + std::to_string(c);
      fresh[static_cast<std::size_t>(c) * capacity_ + occ[static_cast<std::size_t>(c)]++] =
          static_cast<std::int32_t>(i);
    }
    for (std::size_t c = 0; c < cell_count(); ++c) {
      if (occ[c] != occupancy_[c])
        return "cell " + std::to_string(c) + ": occupancy " + std::to_string(occupancy_[c]) +
               ", rebinned " + std::to_string(occ[c]);
      std::vector<std::int32_t> a(slots_.begin() + static_cast<std::ptrdiff_t>(c * capacity_),
                                  slots_.begin() + static_cast<std::ptrdiff_t>(c * capacity_) + occ[c]);
      std::vector<std::int32_t> b(fresh.begin() + static_cast<std::ptrdiff_t>(c * capacity_),
                                  fresh.begin() + static_cast<std::ptrdiff_t>(c * capacity_) + occ[c]);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) return "cell " + std::to_string(c) + ": occupant sets differ from fresh binning";
    }
    return std::nullopt;
  }

  int peak_cell_occupancy() const override { return peak_; }

 private:
  int coord(double v) const {
    int c = static_cast<int>(v * inv_cell_);
    return c < dims_ ? c : dims_ - 1;
  }
  int linear_cell(int x, int y, int z) const { return x + dims_ * (y + dims_ * z); }

  void require_valid(std::size_t pid) const {
    if (pid >= store_.size()) throw std::out_of_range("cell_list: invalid particle id");
  }

  /// Applies f to every occupant of the 27 cells around `cell`, cells in
  /// table order, ids ascending within each cell.
  template <class F>
  void for_cell_ids(int cell, F&& f) const {
    const std::int32_t* table = &neighbors_[static_cast<std::size_t>(cell) * 27];
    for (int t = 0; t < 27; ++t) {
      const auto c = static_cast<std::size_t>(table[t]);
      const int occ = occupancy_[c];
      if (occ == 0) continue;
      std::int32_t* ids = scratch_.data();
      const std::int32_t* slot = &slots_[c * static_cast<std::size_t>(capacity_)];
      for (int k = 0; k < occ; ++k) ids[k] = slot[k];
      detail::sort_ids(ids, occ);
      for (int k = 0; k < occ; ++k) f(static_cast<std::size_t>(ids[k]));
    }
  }

  PairInteraction sum_around(int cell, const Vec3& pos, std::size_t exclude) const {
    KahanSum u, w;
    const double rc2 = lj_.r_cut2;
    for_cell_ids(cell, [&](std::size_t j) {
      if (j == exclude) return;
      const double r2 = min_image_dist2(pos, store_[j], box_);
      if (r2 > rc2) return;
      const auto p = lj_pair_clamped(r2, lj_);
      u.add(p.u);
      w.add(p.w);
    });
    return {u.value(), w.value()};
  }

  void insert_id(int cell, std::int32_t id) {
    auto& occ = occupancy_[static_cast<std::size_t>(cell)];
    if (occ >= capacity_) {
      std::ostringstream os;
      os << "cell_list: cell " << cell << " exceeds capacity " << capacity_
         << " (occupancy " << occ << "); rerun with a larger cell_capacity";
      throw std::runtime_error(os.str());
    }
    slots_[static_cast<std::size_t>(cell) * capacity_ + occ] = id;
    ++occ;
    if (occ > peak_) peak_ = occ;
  }

  void remove_id(int cell, std::int32_t id) {
    auto& occ = occupancy_[static_cast<std::size_t>(cell)];
    std::int32_t* slot = &slots_[static_cast<std::size_t>(cell) * capacity_];
    for (int k = 0; k < occ; ++k) {
      if (slot[k] == id) {
        slot[k] = slot[occ - 1];  // last entry fills the hole
        --occ;
        return;
      }
    }
    throw std::runtime_error("cell_list: particle " + std::to_string(id) +
                             " not found in cell " + std::to_string(cell));
  }

  void relabel_id(int cell, std::int32_t from, std::int32_t to) {
    auto& occ = occupancy_[static_cast<std::size_t>(cell)];
    std::int32_t* slot = &slots_[static_cast<std::size_t>(cell) * capacity_];
    for (int k = 0; k < occ; ++k) {
      if (slot[k] == from) {
        slot[k] = to;
        return;
      }
    }
    throw std::runtime_error("cell_list: particle " + std::to_string(from) +
                             " not found in cell " + std::to_string(cell));
  }

  ParticleStore& store_;
  SimBox box_;
  LjParams lj_;
  int dims_ = 0;
  double cell_size_ = 0.0;
  double inv_cell_ = 0.0;
  int capacity_ = 0;
  int peak_ = 0;
  std::vector<std::int32_t> occupancy_;
  std::vector<std::int32_t> slots_;      // cell-major, capacity_ entries per cell
  std::vector<std::int32_t> neighbors_;  // 27 ids per cell, fixed traversal order
  mutable std::vector<std::int32_t> scratch_;
};

}  // namespace gcmc
