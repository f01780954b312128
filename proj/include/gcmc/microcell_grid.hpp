#pragma once

#include <bit>
#include <cmath>
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

struct MicrocellDims {
  int dims = 0;                 // cells per axis
  double last_cell_width = 1.0; // width of the boundary cell, sigma units
};

/// ceil(L/sigma) cells per axis; the last cell along each axis keeps the
/// leftover width. A vanishing sliver (the box is integral in sigma up to
/// rounding) counts as a full last cell.
inline MicrocellDims microcell_dims(double box_length, double sigma) {
  const double cells = box_length / sigma;
  const double whole = std::floor(cells);
  const double frac = cells - whole;
  if (frac < 1e-9) return {static_cast<int>(std::llround(whole)), 1.0};
  return {static_cast<int>(whole) + 1, frac};
}

/// Base half-extent of the search cube: ceil(r_cut/sigma) cells per side,
/// one full-width run of which spans the cutoff.
inline int microcell_extent(double r_cut, double sigma) {
  return static_cast<int>(std::ceil(r_cut / sigma));
}

/// One axis of the search window around a center cell, as offsets
/// lo..lo+count-1 relative to it. Normally lo = -extent and count =
/// 2*extent+1; a side whose run of cells crosses the thin boundary cell
/// spans less physical width, so that side gains one cell when the run
/// would otherwise fall short of r_cut. Clamped to the whole axis when the
/// window would wrap onto itself.
struct MicrocellWindow {
  int lo = 0;
  int count = 0;
};

inline MicrocellWindow microcell_axis_window(int center, double r_cut, double sigma,
                                             int dims, double last_cell_width) {
  const double rc = r_cut / sigma;
  const double deficit = 1.0 - last_cell_width;
  const int base = microcell_extent(r_cut, sigma);
  // j: how many steps along this side reach the thin cell (0 = the center
  // itself is the thin cell, so the side never crosses it).
  auto side = [&](int j) {
    int k = base;
    while (static_cast<double>(k) - ((j >= 1 && j <= k) ? deficit : 0.0) < rc) ++k;
    return k;
  };
  int to_thin_right = (dims - 1 - center) % dims;
  if (to_thin_right < 0) to_thin_right += dims;
  const int to_thin_left = (center + 1) % dims;
  const int right = side(to_thin_right);
  const int left = side(to_thin_left);
  if (left + right + 1 >= dims) return {-left, dims};
  return {-left, left + right + 1};
}

/// One axis of the per-move search window: the cyclic run of cells
/// intersecting [x - r_cut, x + r_cut]. The cell index is monotone in the
/// coordinate, so this arc covers every point within the cutoff by
/// construction, thin boundary cell included. A hair of padding absorbs
/// rounding at the interval ends.
struct AxisArc {
  int first = 0;
  int count = 0;
};

inline AxisArc microcell_axis_arc(double x, double r_cut, double sigma,
                                  double box_length, int dims) {
  const double pad = 1e-9 * sigma;
  const double inv_sigma = 1.0 / sigma;
  // Unwrapped cell index of the cell containing t; the period count is
  // derived from the wrapped remainder itself so the two always agree.
  auto global_cell = [&](double t) {
    const double w = detail::wrap_axis(t, box_length);
    const auto k = std::llround((t - w) / box_length);
    int c = static_cast<int>(w * inv_sigma);
    if (c >= dims) c = dims - 1;
    return k * dims + c;
  };
  const long long lo = global_cell(x - r_cut - pad);
  const long long span = global_cell(x + r_cut + pad) - lo + 1;
  const int first = static_cast<int>(((lo % dims) + dims) % dims);
  if (span >= dims) return {first, dims};
  return {first, static_cast<int>(span)};
}

/// Ordered cell set scanned around a center cell: the product of the three
/// axis windows, x-fastest then y then z, axes wrapped modulo dims.
inline std::vector<std::int32_t> microcell_neighborhood(int cx, int cy, int cz,
                                                        double r_cut, int dims,
                                                        double sigma = 1.0,
                                                        double last_cell_width = 1.0) {
  auto axis = [&](int center) {
    const auto w = microcell_axis_window(center, r_cut, sigma, dims, last_cell_width);
    std::vector<int> out(static_cast<std::size_t>(w.count));
    int v = (center + w.lo) % dims;
    if (v < 0) v += dims;
    for (int i = 0; i < w.count; ++i) {
      out[static_cast<std::size_t>(i)] = v;
      if (++v == dims) v = 0;
    }
    return out;
  };
  const auto xs = axis(cx), ys = axis(cy), zs = axis(cz);
  std::vector<std::int32_t> cells;
  cells.reserve(xs.size() * ys.size() * zs.size());
  for (int z : zs)
    for (int y : ys)
      for (int x : xs)
        cells.push_back(static_cast<std::int32_t>(x + dims * (y + dims * z)));
  return cells;
}

/// Fine cell list with sigma-sized cells (thinner on the boundary), at most
/// a handful of occupants per cell, and a slot-major index layout: the k-th
/// occupants of all cells are stored contiguously, so slot k of cell c lives
/// at k*cell_count + c. A particle's cell is the integer part of its
/// coordinates; neighborhoods are generated on the fly from integer
/// arithmetic rather than from a table.
class MicrocellGridStrategy final : public NeighborStrategy {
 public:
  MicrocellGridStrategy(ParticleStore& store, const SimBox& box, const LjParams& lj,
                        int capacity_override = 0)
      : store_(store), box_(box), lj_(lj) {
    const auto d = microcell_dims(box.side_length, lj.sigma);
    dims_ = d.dims;
    last_cell_width_ = d.last_cell_width;
    inv_sigma_ = 1.0 / lj.sigma;
    extent_ = microcell_extent(lj.r_cut, lj.sigma);
    const int max_span = std::min(2 * (extent_ + 1) + 1, dims_);
    capacity_ = capacity_override > 0 ? capacity_override : 5;
    occupancy_.assign(cell_count(), 0);
    slots_.assign(cell_count() * static_cast<std::size_t>(capacity_), -1);
    axis_y_.resize(static_cast<std::size_t>(max_span));
    axis_z_.resize(static_cast<std::size_t>(max_span));
    scratch_.resize(static_cast<std::size_t>(capacity_));
    build();
  }

  std::string_view name() const override { return "microcell"; }

  int dims() const { return dims_; }
  int neighborhood_extent() const { return extent_; }
  double last_cell_width() const { return last_cell_width_; }
  int capacity_per_cell() const { return capacity_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims_) * dims_ * dims_;
  }
  std::span<const std::int32_t> occupancy_view() const { return occupancy_; }
  std::span<const std::int32_t> slots_view() const { return slots_; }

  int coord(double v) const {
    const int c = static_cast<int>(v * inv_sigma_);
    return c < dims_ ? c : dims_ - 1;
  }
  int cell_of(const Vec3& p) const {
    return coord(p.x) + dims_ * (coord(p.y) + dims_ * coord(p.z));
  }

  /// The cell-level search window around `cell`, in traversal order.
  std::vector<std::int32_t> neighborhood_cells(int cell) const {
    std::vector<std::int32_t> out;
    for_each_neighborhood_cell(cell,
                               [&](std::size_t c) { out.push_back(static_cast<std::int32_t>(c)); });
    return out;
  }

  /// The cells the delta path scans for a proposal at `pos`: the product of
  /// the per-coordinate axis arcs.
  std::vector<std::int32_t> neighborhood_cells(const Vec3& pos) const {
    std::vector<std::int32_t> out;
    for_arc_ids_cells(pos, [&](std::size_t c) { out.push_back(static_cast<std::int32_t>(c)); });
    return out;
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
      // Same cell: the cell-level window covers both endpoints, so one
      // traversal serves the old and the new sums.
      KahanSum nu, nw, ou, ow;
      const double rc2 = lj_.r_cut2;
      for_neighborhood_ids(new_cell, [&](std::size_t j) {
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
    const auto sn = sum_around(new_pos, pid);
    const auto so = sum_around(old_pos, pid);
    return {sn.u - so.u, sn.w - so.w};
  }

  PairInteraction delta_insert(const Vec3& pos) const override {
    return sum_around(pos, store_.size());
  }

  PairInteraction delta_delete(std::size_t pid) const override {
    require_valid(pid);
    const auto s = sum_around(store_[pid], pid);
    return {-s.u, -s.w};
  }

  void commit_displace(std::size_t pid, const Vec3& new_pos) override {
    require_valid(pid);
    const int old_cell = cell_of(store_[pid]);
    const int new_cell = cell_of(new_pos);
    store_.set(pid, new_pos);
    if (old_cell == new_cell) return;  // slots stay bit-identical
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
      relabel_id(cell_of(store_[last]), static_cast<std::int32_t>(last),
                 static_cast<std::int32_t>(pid));
    }
    store_.remove_swap_last(pid);
  }

  std::optional<std::string> rebuild_check() const override {
    std::vector<std::int32_t> occ(cell_count(), 0);
    std::vector<std::vector<std::int32_t>> fresh(cell_count());
    for (std::size_t i = 0; i < store_.size(); ++i) {
      const auto c = static_cast<std::size_t>(cell_of(store_[i]));
      if (++occ[c] > capacity_)
        return "rebin overflow in microcell " + std::to_string(c);
      fresh[c].push_back(static_cast<std::int32_t>(i));
    }
    for (std::size_t c = 0; c < cell_count(); ++c) {
      if (occ[c] != occupancy_[c])
        return "microcell " + std::to_string(c) + ": occupancy " +
               std::to_string(occupancy_[c]) + ", rebinned " + std::to_string(occ[c]);
      std::vector<std::int32_t> a;
      for (int k = 0; k < occupancy_[c]; ++k)
        a.push_back(slots_[static_cast<std::size_t>(k) * cell_count() + c]);
      std::sort(a.begin(), a.end());
      std::sort(fresh[c].begin(), fresh[c].end());
      if (a != fresh[c])
        return "microcell " + std::to_string(c) + ": occupant sets differ from fresh binning";
    }
    return std::nullopt;
  }

  int peak_cell_occupancy() const override { return peak_; }

 private:
  void require_valid(std::size_t pid) const {
    if (pid >= store_.size()) throw std::out_of_range("microcell: invalid particle id");
  }

  int fill_axis(int center, std::vector<int>& out) const {
    const auto w =
        microcell_axis_window(center, lj_.r_cut, lj_.sigma, dims_, last_cell_width_);
    int v = (center + w.lo) % dims_;
    if (v < 0) v += dims_;
    for (int i = 0; i < w.count; ++i) {
      out[static_cast<std::size_t>(i)] = v;
      if (++v == dims_) v = 0;
    }
    return w.count;
  }

  /// Applies g to every cell of the search window around `cell`, x-fastest.
  /// The x axis is walked as at most two contiguous index runs so the
  /// occupancy row is scanned sequentially.
  template <class G>
  void for_each_neighborhood_cell(int cell, G&& g) const {
    const int cx = cell % dims_;
    const int cy = (cell / dims_) % dims_;
    const int cz = cell / (dims_ * dims_);
    const auto wx =
        microcell_axis_window(cx, lj_.r_cut, lj_.sigma, dims_, last_cell_width_);
    const int ny = fill_axis(cy, axis_y_);
    const int nz = fill_axis(cz, axis_z_);
    int x0 = (cx + wx.lo) % dims_;
    if (x0 < 0) x0 += dims_;
    const int run1 = std::min(wx.count, dims_ - x0);
    const int run2 = wx.count - run1;
    for (int iz = 0; iz < nz; ++iz) {
      const int zbase = dims_ * dims_ * axis_z_[static_cast<std::size_t>(iz)];
      for (int iy = 0; iy < ny; ++iy) {
        const int base = zbase + dims_ * axis_y_[static_cast<std::size_t>(iy)];
        for (int x = x0; x < x0 + run1; ++x) g(static_cast<std::size_t>(base + x));
        for (int x = 0; x < run2; ++x) g(static_cast<std::size_t>(base + x));
      }
    }
  }

  /// Occupant visitor shared by both traversals: gathers a cell's ids in
  /// ascending order and hands them to f.
  template <class F>
  void visit_cell_occupants(std::size_t c, F&& f) const {
    const std::int32_t* slots = slots_.data();
    const int occ = occupancy_[c];
    if (occ == 1) {
      f(static_cast<std::size_t>(slots[c]));
      return;
    }
    const std::size_t ncells = cell_count();
    std::int32_t local[16];
    std::int32_t* ids = occ <= 16 ? local : scratch_.data();
    for (int k = 0; k < occ; ++k)
      ids[k] = slots[static_cast<std::size_t>(k) * ncells + c];
    detail::sort_ids(ids, occ);
    for (int k = 0; k < occ; ++k) f(static_cast<std::size_t>(ids[k]));
  }

  /// Scans a contiguous run of cells: an occupancy bitmask is collected
  /// branch-free first, then only occupied cells are touched. Half the
  /// cells are empty at working densities, so this keeps the scan out of
  /// the branch predictor's way.
  template <class F>
  void scan_occupied_run(int first, int len, F&& f) const {
    const std::int32_t* occupancy = occupancy_.data();
    int i = 0;
    while (i < len) {
      const int chunk = std::min(len - i, 32);
      std::uint32_t mask = 0;
      for (int k = 0; k < chunk; ++k)
        mask |= static_cast<std::uint32_t>(occupancy[static_cast<std::size_t>(first + i + k)] != 0)
                << k;
      while (mask) {
        const int k = std::countr_zero(mask);
        mask &= mask - 1;
        visit_cell_occupants(static_cast<std::size_t>(first + i + k), f);
      }
      i += chunk;
    }
  }

  int fill_arc(const AxisArc& arc, std::vector<int>& out) const {
    int v = arc.first;
    for (int i = 0; i < arc.count; ++i) {
      out[static_cast<std::size_t>(i)] = v;
      if (++v == dims_) v = 0;
    }
    return arc.count;
  }

  /// Applies f to every occupant of the per-position search window around
  /// `pos`, cells in x-fastest order, ids ascending within each cell.
  template <class F>
  void for_arc_ids(const Vec3& pos, F&& f) const {
    const auto ax = microcell_axis_arc(pos.x, lj_.r_cut, lj_.sigma, box_.side_length, dims_);
    const auto ay = microcell_axis_arc(pos.y, lj_.r_cut, lj_.sigma, box_.side_length, dims_);
    const auto az = microcell_axis_arc(pos.z, lj_.r_cut, lj_.sigma, box_.side_length, dims_);
    const int ny = fill_arc(ay, axis_y_);
    const int nz = fill_arc(az, axis_z_);
    const int run1 = std::min(ax.count, dims_ - ax.first);
    const int run2 = ax.count - run1;
    for (int iz = 0; iz < nz; ++iz) {
      const int zbase = dims_ * dims_ * axis_z_[static_cast<std::size_t>(iz)];
      for (int iy = 0; iy < ny; ++iy) {
        const int base = zbase + dims_ * axis_y_[static_cast<std::size_t>(iy)];
        scan_occupied_run(base + ax.first, run1, f);
        scan_occupied_run(base, run2, f);
      }
    }
  }

  /// Arc traversal in cell order (every cell, occupied or not), used by the
  /// position overload of neighborhood_cells().
  template <class G>
  void for_arc_ids_cells(const Vec3& pos, G&& g) const {
    const auto ax = microcell_axis_arc(pos.x, lj_.r_cut, lj_.sigma, box_.side_length, dims_);
    const auto ay = microcell_axis_arc(pos.y, lj_.r_cut, lj_.sigma, box_.side_length, dims_);
    const auto az = microcell_axis_arc(pos.z, lj_.r_cut, lj_.sigma, box_.side_length, dims_);
    const int ny = fill_arc(ay, axis_y_);
    const int nz = fill_arc(az, axis_z_);
    const int run1 = std::min(ax.count, dims_ - ax.first);
    const int run2 = ax.count - run1;
    for (int iz = 0; iz < nz; ++iz) {
      const int zbase = dims_ * dims_ * axis_z_[static_cast<std::size_t>(iz)];
      for (int iy = 0; iy < ny; ++iy) {
        const int base = zbase + dims_ * axis_y_[static_cast<std::size_t>(iy)];
        for (int x = ax.first; x < ax.first + run1; ++x) g(static_cast<std::size_t>(base + x));
        for (int x = 0; x < run2; ++x) g(static_cast<std::size_t>(base + x));
      }
    }
  }

  /// Applies f to every occupant of the cell-level search window around
  /// `cell` (the same-cell displacement path, where one window must cover
  /// any position inside the cell).
  template <class F>
  void for_neighborhood_ids(int cell, F&& f) const {
    const int cx = cell % dims_;
    const int cy = (cell / dims_) % dims_;
    const int cz = cell / (dims_ * dims_);
    const auto wx =
        microcell_axis_window(cx, lj_.r_cut, lj_.sigma, dims_, last_cell_width_);
    const int ny = fill_axis(cy, axis_y_);
    const int nz = fill_axis(cz, axis_z_);
    int x0 = (cx + wx.lo) % dims_;
    if (x0 < 0) x0 += dims_;
    const int run1 = std::min(wx.count, dims_ - x0);
    const int run2 = wx.count - run1;
    for (int iz = 0; iz < nz; ++iz) {
      const int zbase = dims_ * dims_ * axis_z_[static_cast<std::size_t>(iz)];
      for (int iy = 0; iy < ny; ++iy) {
        const int base = zbase + dims_ * axis_y_[static_cast<std::size_t>(iy)];
        scan_occupied_run(base + x0, run1, f);
        scan_occupied_run(base, run2, f);
      }
    }
  }

  PairInteraction sum_around(const Vec3& pos, std::size_t exclude) const {
    KahanSum u, w;
    const double rc2 = lj_.r_cut2;
    for_arc_ids(pos, [&](std::size_t j) {
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
      os << "microcell: cell " << cell << " exceeds capacity " << capacity_
         << " (occupancy " << occ << "); rerun with a larger microcell_capacity";
      throw std::runtime_error(os.str());
    }
    slots_[static_cast<std::size_t>(occ) * cell_count() + static_cast<std::size_t>(cell)] = id;
    ++occ;
    if (occ > peak_) peak_ = occ;
  }

  void remove_id(int cell, std::int32_t id) {
    auto& occ = occupancy_[static_cast<std::size_t>(cell)];
    const std::size_t ncells = cell_count();
    const auto c = static_cast<std::size_t>(cell);
    for (int k = 0; k < occ; ++k) {
      if (slots_[static_cast<std::size_t>(k) * ncells + c] == id) {
        slots_[static_cast<std::size_t>(k) * ncells + c] =
            slots_[static_cast<std::size_t>(occ - 1) * ncells + c];
        --occ;
        return;
      }
    }
    throw std::runtime_error("microcell: particle " + std::to_string(id) +
                             " not found in cell " + std::to_string(cell));
  }

  void relabel_id(int cell, std::int32_t from, std::int32_t to) {
    auto& occ = occupancy_[static_cast<std::size_t>(cell)];
    const std::size_t ncells = cell_count();
    const auto c = static_cast<std::size_t>(cell);
    for (int k = 0; k < occ; ++k) {
      if (slots_[static_cast<std::size_t>(k) * ncells + c] == from) {
        slots_[static_cast<std::size_t>(k) * ncells + c] = to;
        return;
      }
    }
    throw std::runtime_error("microcell: particle " + std::to_string(from) +
                             " not found in cell " + std::to_string(cell));
  }

  ParticleStore& store_;
  SimBox box_;
  LjParams lj_;
  int dims_ = 0;
  double last_cell_width_ = 1.0;
  double inv_sigma_ = 1.0;
  int extent_ = 0;  // base half-extent; axis windows may add one near the boundary
  int capacity_ = 0;
  int peak_ = 0;
  std::vector<std::int32_t> occupancy_;
  std::vector<std::int32_t> slots_;  // slot-major: slot k of cell c at k*cells + c
  mutable std::vector<int> axis_y_, axis_z_;
  mutable std::vector<std::int32_t> scratch_;
};

}  // namespace gcmc
