#include <cmath>
#include <numbers>

#include <doctest.h>

#include "mabvp/sections.hpp"

using namespace mabvp;

namespace {

// |x|^2 / 2 as the max of its tangent planes on a grid of spacing `step`.
MaxAffine quadratic(double half_width = 2.0, double step = 0.02) {
  std::vector<Vec2> s;
  std::vector<double> w;
  const int n = static_cast<int>(std::lround(2.0 * half_width / step));
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k <= n; ++k) {
      const Vec2 y(-half_width + i * step, -half_width + k * step);
      s.push_back(y);
      w.push_back(0.5 * y.squaredNorm());
    }
  return MaxAffine(std::move(s), std::move(w));
}

const MaxAffine& q() {
  static const MaxAffine f = quadratic();
  return f;
}

const ConvexPolygon& square() {
  static const ConvexPolygon p = ConvexPolygon::box(Vec2(-1, -1), Vec2(1, 1), kBoundaryTag);
  return p;
}

}  // namespace

TEST_SUITE("sections") {

TEST_CASE("plain section of the quadratic is a disk") {
  const double h = 0.02;
  const Section s = plain_section(q(), square(), Vec2(0.2, 0.1), h);
  CHECK(s.polygon.area() == doctest::Approx(2.0 * std::numbers::pi * h).epsilon(0.01));
  CHECK((s.polygon.centroid() - Vec2(0.2, 0.1)).norm() < 1e-3);
  REQUIRE(s.john);
  CHECK(s.john->ellipse.area() <= s.polygon.area());
}

TEST_CASE("plain section size limit") {
  CHECK_THROWS_AS(plain_section(q(), square(), Vec2(0, 0), 2.0), Error);
  CHECK_THROWS_AS(plain_section(q(), square(), Vec2(0, 0), -1.0), Error);
}

TEST_CASE("centred section at a boundary point has that point as centroid") {
  const Section s = centred_section(q(), Vec2(0.0, -1.0), 0.02);
  CHECK((s.centroid - Vec2(0.0, -1.0)).norm() <= 1e-3 * s.polygon.diameter());
  // For the global quadratic the centred section is the disk about x0.
  CHECK(s.polygon.area() == doctest::Approx(2.0 * std::numbers::pi * 0.02).epsilon(0.01));
  CHECK(density_ratio(s, square()) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("balance is symmetric on the quadratic") {
  const Section s = centred_section(q(), Vec2(0.0, -1.0), 0.02);
  const BalanceStats b = balance_stats(s, Frame{Vec2(0, -1), Vec2(1, 0), Vec2(0, 1)});
  CHECK(b.ratio == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("pairing of the quadratic with itself is 2") {
  for (double h : {0.01, 0.04}) {
    const Section su = centred_section(q(), Vec2::Zero(), h);
    const Section sv = centred_section(q(), Vec2::Zero(), h);
    const PairingStats p = pairing_stats(su, sv);
    CHECK(p.upper == doctest::Approx(2.0).epsilon(0.02));
    CHECK(p.lower == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("volume scaling slope is one in the plane") {
  std::vector<Section> ladder;
  for (double h : height_ladder(0.04, 4, 2.0)) ladder.push_back(centred_section(q(), Vec2(0.0, -1.0), h));
  const ScalingFit fit = scaling_fit(ladder, Frame{Vec2(0, -1), Vec2(1, 0), Vec2(0, 1)});
  CHECK(fit.count == 4);
  CHECK(fit.volume == doctest::Approx(1.0).epsilon(0.02));
  CHECK(fit.tangential == doctest::Approx(0.5).epsilon(0.02));
  CHECK(fit.normal == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("decay profile of the quadratic") {
  const Frame fr{Vec2(0, -1), Vec2(1, 0), Vec2(0, 1)};
  const DecayProfile d = decay_profile(q(), square(), fr, {0.1, 0.2, 0.3, 0.4});
  REQUIRE(d.t.size() == 4);
  for (std::size_t i = 0; i < d.t.size(); ++i) CHECK(d.value[i] == doctest::Approx(0.5 * d.t[i] * d.t[i]).epsilon(0.01));
  CHECK(d.exponent == doctest::Approx(2.0).epsilon(0.01));
  const DecayProfile off = decay_profile(q(), square(), fr, {0.5, 1.5});
  CHECK(off.skipped.size() == 1);
}

TEST_CASE("D_h of the quadratic at a flat edge is a disk") {
  const Frame fr{Vec2(0, -1), Vec2(1, 0), Vec2(0, 1)};
  const DhSet d = dh_set(q(), square(), fr, 0.02);
  CHECK(d.a == 0.0);
  CHECK(d.inradius == doctest::Approx(std::sqrt(0.04)).epsilon(0.01));
  CHECK(d.circumradius == doctest::Approx(std::sqrt(0.04)).epsilon(0.01));
  CHECK_THROWS_AS(dh_set(q(), square(), fr, 0.0), Error);
}

TEST_CASE("D_h needs a positive cut near a corner") {
  // A section at the bottom edge that reaches past the right side.
  const Frame fr{Vec2(0.9, -1), Vec2(1, 0), Vec2(0, 1)};
  const DhSet d = dh_set(q(), square(), fr, 0.02);
  CHECK(d.a > 0.0);
  CHECK(square().contains(d.upper, 1e-9));
}

TEST_CASE("sandwich constant of the quadratic at an interior point") {
  const double b = sandwich_constant(q(), square(), Vec2(0.1, 0.1), 0.02);
  CHECK(b <= std::sqrt(2.0) + 1e-12);
}

TEST_CASE("recentred potential vanishes at the base point") {
  const Recentred r = recentre(q(), Vec2(0.3, -0.2));
  CHECK(std::abs(r(Vec2(0.3, -0.2))) < 1e-12);
  CHECK(r(Vec2(0.5, 0.0)) >= 0.0);
}

TEST_CASE("ladder and slope helpers") {
  const auto h = height_ladder(1.0, 3, 4.0);
  CHECK(h == std::vector<double>{1.0, 0.25, 0.0625});
  CHECK(loglog_slope({1, 2, 4}, {1, 4, 16}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), Error);
}

}  // TEST_SUITE
