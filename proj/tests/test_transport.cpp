#include <cmath>
#include <numeric>

#include <doctest.h>

#include "mabvp/transport.hpp"

using namespace mabvp;

namespace {

ConvexDomain unit_square() { return make_domain(DomainSpec{}); }

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("target sample is seeded, inside and mass-balanced") {
  const ConvexDomain sq = unit_square();
  const TargetSample a = sample_target(sq, 200, 5, 10);
  const TargetSample b = sample_target(sq, 200, 5, 10);
  const TargetSample c = sample_target(sq, 200, 6, 10);
  REQUIRE(a.sites.size() == 200);
  CHECK(a.sites == b.sites);
  CHECK_FALSE(a.sites == c.sites);
  for (const auto& y : a.sites) CHECK(sq.polygon().contains(y, 1e-12));
  CHECK(std::accumulate(a.masses.begin(), a.masses.end(), 0.0) == doctest::Approx(sq.area()));
}

TEST_CASE("Laguerre cells tile the region") {
  const ConvexDomain sq = unit_square();
  const TargetSample t = sample_target(sq, 300, 1, 5);
  const SemiDiscretePotential u(t.sites, t.masses, std::vector<double>(t.sites.size(), 0.0));
  const LaguerreDiagram d = laguerre_diagram(u, sq);
  double total = 0.0;
  for (const auto& c : d.cells) total += c.area();
  CHECK(total == doctest::Approx(sq.area()).epsilon(1e-10));
  for (const auto& a : d.adjacency) {
    CHECK(a.i < a.j);
    CHECK(a.length > 0.0);
  }
}

TEST_CASE("cells agree with argmax at their centroids") {
  const ConvexDomain sq = unit_square();
  const TargetSample t = sample_target(sq, 150, 2, 5);
  std::vector<double> w(t.sites.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.05 * std::sin(3.0 * static_cast<double>(i));
  const SemiDiscretePotential u(t.sites, t.masses, w);
  const LaguerreDiagram d = laguerre_diagram(u, sq);
  for (std::size_t i = 0; i < d.cells.size(); ++i)
    if (!d.cells[i].empty()) CHECK(u.cell_of(d.cells[i].centroid()) == static_cast<int>(i));
}

TEST_CASE("thread count does not change the diagram") {
  const ConvexDomain sq = unit_square();
  const TargetSample t = sample_target(sq, 200, 3, 5);
  const SemiDiscretePotential u(t.sites, t.masses, std::vector<double>(t.sites.size(), 0.0));
  const LaguerreDiagram a = laguerre_diagram(u, sq, 1);
  const LaguerreDiagram b = laguerre_diagram(u, sq, 3);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK(a.cells[i].vertices() == b.cells[i].vertices());
}

TEST_CASE("Newton solve reaches mass balance") {
  const ConvexDomain sq = unit_square();
  DensityField f;
  f.normalize(sq.polygon(), sq.area());
  const TargetSample t = sample_target(sq, 256, 1, 10);
  const SemiDiscretePotential u = solve_potential(sq, f, t.sites, t.masses);
  CHECK(u.residual <= 1e-7);
  CHECK(u.weights()[static_cast<std::size_t>(u.gauge())] == 0.0);
  const LaguerreDiagram d = laguerre_diagram(u, sq);
  for (std::size_t i = 0; i < u.size(); ++i)
    CHECK(f.integrate(d.cells[i]) == doctest::Approx(u.masses()[i]).epsilon(1e-6));
}

TEST_CASE("identity transport maps points near themselves") {
  const ConvexDomain sq = unit_square();
  DensityField f;
  f.normalize(sq.polygon(), sq.area());
  const TargetSample t = sample_target(sq, 1024, 1, 30);
  const SemiDiscretePotential u = solve_potential(sq, f, t.sites, t.masses);
  const double cell = std::sqrt(sq.area() / 1024.0);
  for (const Vec2& x : {Vec2(0.1, 0.2), Vec2(-0.5, 0.7), Vec2(0.8, -0.8)})
    CHECK((brenier_map(u, x) - x).norm() < 1.5 * cell);
}

TEST_CASE("mismatched masses are rejected") {
  const ConvexDomain sq = unit_square();
  DensityField f;
  const TargetSample t = sample_target(sq, 16, 1, 0);
  std::vector<double> m = t.masses;
  m[0] *= 2.0;
  CHECK_THROWS_AS(solve_potential(sq, f, t.sites, m), Error);
}

TEST_CASE("progress callback sees decreasing residuals") {
  const ConvexDomain sq = unit_square();
  DensityField f;
  f.normalize(sq.polygon(), sq.area());
  const TargetSample t = sample_target(sq, 128, 4, 5);
  std::vector<double> res;
  SolveOptions o;
  o.progress = [&](int, double r, double) { res.push_back(r); };
  solve_potential(sq, f, t.sites, t.masses, o);
  REQUIRE(res.size() >= 2);
  CHECK(res.back() < res.front());
}

TEST_CASE("Legendre dual reproduces the weights") {
  const ConvexDomain sq = unit_square();
  DensityField f;
  f.normalize(sq.polygon(), sq.area());
  const TargetSample t = sample_target(sq, 200, 9, 5);
  const SemiDiscretePotential u = solve_potential(sq, f, t.sites, t.masses);
  const DualPotential v = legendre_dual(u, sq);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(v(u.sites()[i]) == doctest::Approx(u.weights()[i]).epsilon(1e-10));
}

TEST_CASE("density integration is exact for radial polynomials") {
  DensitySpec s;
  s.kind = DensitySpec::Kind::kRadialPoly;
  s.coeffs = {1.0, 0.0, 3.0};
  const DensityField f(s);
  // Integral of 1 + 3 r^2 over [0,1]^2 = 1 + 3 * 2/3 = 3.
  CHECK(f.integrate(ConvexPolygon::box(Vec2(0, 0), Vec2(1, 1))) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("Hoelder density integrates to its radial mass on a disk-like polygon") {
  DensitySpec s;
  s.kind = DensitySpec::Kind::kHolder;
  s.alpha = 0.5;
  s.amplitude = 0.5;
  const DensityField f(s);
  // Over [-1,1]^2 by symmetry: 4 * int_{[0,1]^2} (1 + 0.5 r^{1/2}); compare with a fine midpoint sum.
  double ref = 0.0;
  const int n = 2000;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const Vec2 x((i + 0.5) / n, (k + 0.5) / n);
      ref += f.raw(x);
    }
  ref *= 4.0 / (static_cast<double>(n) * n);
  CHECK(f.integrate(ConvexPolygon::box(Vec2(-1, -1), Vec2(1, 1))) == doctest::Approx(ref).epsilon(1e-6));
}

}  // TEST_SUITE
