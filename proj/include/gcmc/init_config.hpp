#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gcmc/box.hpp"
#include "gcmc/grid_common.hpp"
#include "gcmc/particles.hpp"
#include "gcmc/rng.hpp"

namespace gcmc {

/// Generates n particles uniformly at random in the box, rejecting any
/// candidate closer than min_sep to an already placed particle. A coarse
/// occupancy grid keeps each overlap query local. Throws after
/// max_consecutive_rejections candidates in a row fail, which signals a
/// density too high for this separation.
inline ParticleStore random_initial_configuration(std::size_t n, const SimBox& box,
                                                  double min_sep, RngStream& rng,
                                                  std::uint64_t max_consecutive_rejections =
                                                      1'000'000) {
  const double l = box.side_length;
  int dims = static_cast<int>(l / min_sep);
  if (dims < 1) dims = 1;
  const double inv_width = dims / l;
  const auto ncells = static_cast<std::size_t>(dims) * dims * dims;
  std::vector<std::vector<std::int32_t>> cells(ncells);

  auto coord = [&](double v) {
    const int c = static_cast<int>(v * inv_width);
    return c < dims ? c : dims - 1;
  };

  ParticleStore store;
  store.reserve(n);
  const double min_sep2 = min_sep * min_sep;
  std::uint64_t rejects = 0;
  while (store.size() < n) {
    const Vec3 cand = wrap_position({rng.uniform() * l, rng.uniform() * l, rng.uniform() * l}, box);
    bool clash = false;
    for (std::int32_t c : detail::cube_cells(coord(cand.x), coord(cand.y), coord(cand.z), 1, dims)) {
      for (std::int32_t j : cells[static_cast<std::size_t>(c)]) {
        if (min_image_dist2(cand, store[static_cast<std::size_t>(j)], box) < min_sep2) {
          clash = true;
          break;
        }
      }
      if (clash) break;
    }
    if (clash) {
      if (++rejects >= max_consecutive_rejections)
        throw std::runtime_error(
            "initial configuration: " + std::to_string(max_consecutive_rejections) +
            " consecutive rejections; density too high for the minimum separation");
      continue;
    }
    rejects = 0;
    const auto id = static_cast<std::int32_t>(store.append(cand));
    cells[static_cast<std::size_t>(coord(cand.x) + dims * (coord(cand.y) + dims * coord(cand.z)))]
        .push_back(id);
  }
  return store;
}

}  // namespace gcmc
