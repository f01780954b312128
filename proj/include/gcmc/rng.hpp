#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcmc {

/// Seeded Mersenne Twister stream shared by one simulation.
///
/// Draw mappings are fixed so that trajectories are reproducible bit for bit
/// from a seed:
///   - uniform():       the top 53 bits of one 64-bit twister word, divided
///                      by 2^53. Exactly representable, always in [0, 1).
///   - uniform_index(n): floor(uniform() * n), clamped to n-1. Consumes
///                      exactly one word regardless of n (the <= n/2^53
///                      selection bias is irrelevant at simulation sizes).
///
/// A stream is owned by exactly one simulation; draws are never shared.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::size_t uniform_index(std::size_t n) {
    return index_from(uniform(), n);
  }

  /// Maps an already-drawn uniform real onto 0..n-1.
  static std::size_t index_from(double u, std::size_t n) {
    auto i = static_cast<std::size_t>(u * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  /// Number of words consumed so far; used to verify stream alignment.
  std::uint64_t draw_count() const { return draws_; }

  /// State as hex words (textual engine state plus the draw counter).
  std::string serialize_hex() const {
    std::ostringstream os;
    os << engine_;
    std::vector<std::uint64_t> words;
    std::istringstream is(os.str());
    std::uint64_t w = 0;
    while (is >> w) words.push_back(w);
    std::ostringstream hex;
    hex << std::hex << words.size() << ' ' << draws_;
    for (std::uint64_t v : words) hex << ' ' << v;
    return hex.str();
  }

  static RngStream deserialize_hex(const std::string& text) {
    std::istringstream is(text);
    is >> std::hex;
    std::size_t count = 0;
    RngStream r;
    if (!(is >> count >> r.draws_)) throw std::runtime_error("rng state: bad header");
    std::ostringstream dec;
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t v = 0;
      if (!(is >> v)) throw std::runtime_error("rng state: truncated");
      if (i) dec << ' ';
      dec << std::dec << v;
    }
    std::istringstream engine_in(dec.str());
    engine_in >> r.engine_;
    if (!engine_in) throw std::runtime_error("rng state: malformed");
    return r;
  }

  friend bool operator==(const RngStream& a, const RngStream& b) {
    return a.engine_ == b.engine_ && a.draws_ == b.draws_;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace gcmc
