#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace gcmc::detail {

/// Ascending insertion sort for the short occupant lists gathered from one
/// cell. Cells hold at most a few dozen indices, so this beats std::sort.
inline void sort_ids(std::int32_t* ids, int n) {
  for (int i = 1; i < n; ++i) {
    const std::int32_t v = ids[i];
    int j = i - 1;
    while (j >= 0 && ids[j] > v) {
      ids[j + 1] = ids[j];
      --j;
    }
    ids[j + 1] = v;
  }
}

/// Linear cell ids of the cube of half-extent h around (cx, cy, cz), each
/// axis wrapped modulo dims, visited x-fastest then y then z. When the cube
/// would span the whole axis the window is clamped so every cell appears
/// exactly once.
inline std::vector<std::int32_t> cube_cells(int cx, int cy, int cz, int h, int dims) {
  const int count = std::min(2 * h + 1, dims);
  auto axis = [dims, h, count](int c) {
    std::vector<int> w(static_cast<std::size_t>(count));
    int v = (c - h) % dims;
    if (v < 0) v += dims;
    for (int i = 0; i < count; ++i) {
      w[static_cast<std::size_t>(i)] = v;
      if (++v == dims) v = 0;
    }
    return w;
  };
  const auto xs = axis(cx), ys = axis(cy), zs = axis(cz);
  std::vector<std::int32_t> out;
  out.reserve(static_cast<std::size_t>(count) * count * count);
  for (int z : zs)
    for (int y : ys)
      for (int x : xs)
        out.push_back(static_cast<std::int32_t>(x + dims * (y + dims * z)));
  return out;
}

}  // namespace gcmc::detail
