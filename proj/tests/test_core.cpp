#include <doctest.h>

#include <cmath>
#include <limits>

#include "gcmc/box.hpp"
#include "gcmc/kahan.hpp"
#include "gcmc/rng.hpp"

using namespace gcmc;

TEST_CASE("box volume is the cube of the side") {
  SimBox box(23.9);
  CHECK(box.volume() == doctest::Approx(23.9 * 23.9 * 23.9).epsilon(1e-15));
  CHECK_THROWS(SimBox(0.0));
  CHECK_THROWS(SimBox(-1.0));
}

TEST_CASE("wrap_position maps into [0, L)") {
  SimBox box(10.0);
  const Vec3 a = wrap_position({10.5, 0.2, -0.1}, box);
  CHECK(a.x == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(a.y == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(a.z == doctest::Approx(9.9).epsilon(1e-14));

  CHECK(wrap_position({0.0, 0.0, 0.0}, box) == Vec3{0.0, 0.0, 0.0});

  const Vec3 b = wrap_position({25.0, 25.0, 25.0}, box);
  CHECK(b.x == 5.0);
  CHECK(b.y == 5.0);
  CHECK(b.z == 5.0);

  CHECK_THROWS(wrap_position({std::numeric_limits<double>::infinity(), 0, 0}, box));
  CHECK_THROWS(wrap_position({std::numeric_limits<double>::quiet_NaN(), 0, 0}, box));
}

TEST_CASE("wrap_position is idempotent and shifts by whole boxes") {
  SimBox box(7.3);
  RngStream rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 p{(rng.uniform() - 0.5) * 80.0, (rng.uniform() - 0.5) * 80.0,
                 (rng.uniform() - 0.5) * 80.0};
    const Vec3 w = wrap_position(p, box);
    CHECK(w.x >= 0.0);
    CHECK(w.x < box.side_length);
    CHECK(w.y >= 0.0);
    CHECK(w.y < box.side_length);
    CHECK(w.z >= 0.0);
    CHECK(w.z < box.side_length);
    CHECK(wrap_position(w, box) == w);
    const double shift = (p.x - w.x) / box.side_length;
    CHECK(std::fabs(shift - std::round(shift)) <= 1e-9);
  }
}

TEST_CASE("min_image_dist2 picks the nearest periodic image") {
  SimBox box(10.0);
  CHECK(min_image_dist2({0.1, 0, 0}, {9.9, 0, 0}, box) == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(min_image_dist2({3.4, 5.5, 9.1}, {3.4, 5.5, 9.1}, box) == 0.0);
  SimBox big(100.0);
  CHECK(min_image_dist2({1, 2, 3}, {4, 6, 3}, big) == 25.0);
}

TEST_CASE("min_image_dist2 symmetry, translation invariance and bound") {
  SimBox box(9.4);
  const double l = box.side_length;
  RngStream rng(12);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 a{rng.uniform() * l, rng.uniform() * l, rng.uniform() * l};
    const Vec3 b{rng.uniform() * l, rng.uniform() * l, rng.uniform() * l};
    const double d = min_image_dist2(a, b, box);
    CHECK(d == min_image_dist2(b, a, box));
    CHECK(d <= 3.0 * (l / 2.0) * (l / 2.0) * (1.0 + 1e-12));
    const auto k = static_cast<double>(static_cast<int>(rng.uniform_index(5)) - 2);
    const Vec3 shifted{b.x + k * l, b.y, b.z - 2.0 * l};
    CHECK(min_image_dist2(a, shifted, box) == doctest::Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("rng streams are reproducible and serializable") {
  RngStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(a.draw_count() == 1000);

  for (int i = 0; i < 7; ++i) a.uniform();
  RngStream c = RngStream::deserialize_hex(a.serialize_hex());
  CHECK(c == a);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform() == c.uniform());

  RngStream other(43);
  CHECK(other.uniform() != RngStream(42).uniform());
}

TEST_CASE("uniform_index stays in range and covers the range") {
  RngStream rng(7);
  bool seen[5] = {};
  for (int i = 0; i < 500; ++i) {
    const auto k = rng.uniform_index(5);
    REQUIRE(k < 5);
    seen[k] = true;
  }
  for (bool s : seen) CHECK(s);
  CHECK(RngStream::index_from(0.9999999999999999, 3) == 2);
  CHECK(RngStream::index_from(0.0, 3) == 0);
}

TEST_CASE("kahan accumulation survives magnitude spread") {
  KahanSum s;
  s.add(1e16);
  for (int i = 0; i < 10000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == doctest::Approx(10000.0).epsilon(1e-12));
}
