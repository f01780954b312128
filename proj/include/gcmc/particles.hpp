#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "gcmc/vec3.hpp"

namespace gcmc {

/// Dense storage for the positions of N identical particles. Indices 0..N-1
/// are live; a deletion moves the last record into the freed slot so the
/// range stays dense.
class ParticleStore {
 public:
  ParticleStore() = default;
  explicit ParticleStore(std::vector<Vec3> positions) : pos_(std::move(positions)) {}

  std::size_t size() const { return pos_.size(); }
  bool empty() const { return pos_.empty(); }

  const Vec3& operator[](std::size_t i) const { return pos_[i]; }
  std::span<const Vec3> positions() const { return pos_; }

  void set(std::size_t i, const Vec3& p) { pos_[i] = p; }

  std::size_t append(const Vec3& p) {
    pos_.push_back(p);
    return pos_.size() - 1;
  }

  /// Removes particle i by overwriting it with the last record. Returns the
  /// index of the particle that moved (== i when i was last).
  std::size_t remove_swap_last(std::size_t i) {
    if (i >= pos_.size()) throw std::out_of_range("remove_swap_last: bad index");
    const std::size_t last = pos_.size() - 1;
    if (i != last) pos_[i] = pos_[last];
    pos_.pop_back();
    return last;
  }

  void reserve(std::size_t n) { pos_.reserve(n); }
  void clear() { pos_.clear(); }

 private:
  std::vector<Vec3> pos_;
};

}  // namespace gcmc
