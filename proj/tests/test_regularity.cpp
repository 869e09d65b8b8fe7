#include <cmath>

#include <doctest.h>

#include "mabvp/oracles.hpp"
#include "mabvp/regularity.hpp"

using namespace mabvp;

namespace {

struct Solved {
  AffineOracle oracle;
  SemiDiscretePotential u;
  LaguerreDiagram diagram;
};

const Solved& affine_solution() {
  static const Solved s = [] {
    AffineOracle o = oracle_affine(2.0);
    DensityField f;
    f.normalize(o.source.polygon(), o.target.area());
    const TargetSample t = sample_target(o.target, 1024, 1, 30);
    SemiDiscretePotential u = solve_potential(o.source, f, t.sites, t.masses);
    LaguerreDiagram d = laguerre_diagram(u, o.source);
    return Solved{std::move(o), std::move(u), std::move(d)};
  }();
  return s;
}

}  // namespace

TEST_SUITE("regularity") {

TEST_CASE("lattice samples stay inside and skip corners") {
  const ConvexDomain sq = make_domain(DomainSpec{});
  const auto all = lattice_samples(sq, 0.25);
  const auto cut = lattice_samples(sq, 0.25, 0.0, 0.3);
  CHECK(all.size() > cut.size());
  for (const auto& x : all) CHECK(sq.polygon().contains(x, 1e-12));
}

TEST_CASE("Hessian field recovers the affine oracle") {
  const Solved& s = affine_solution();
  const auto pts = lattice_samples(s.oracle.source, 0.25, 0.0, 0.1);
  const HessianField h = hessian_field(s.u, s.diagram, s.oracle.source, pts);
  CHECK(h.dropped.empty());
  REQUIRE(!h.samples.empty());
  for (const auto& x : h.samples) CHECK((x.hessian - s.oracle.hessian()).norm() < 0.1);
  CHECK(sobolev_norm(h, 2.0) == doctest::Approx(s.oracle.sobolev_norm(2.0)).epsilon(0.05));
}

TEST_CASE("Hessian field is thread-count independent") {
  const Solved& s = affine_solution();
  const auto pts = lattice_samples(s.oracle.source, 0.3);
  const HessianField a = hessian_field(s.u, s.diagram, s.oracle.source, pts, {}, 1);
  const HessianField b = hessian_field(s.u, s.diagram, s.oracle.source, pts, {}, 2);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].hessian == b.samples[i].hessian);
}

TEST_CASE("second differences of the oracle potential") {
  const Solved& s = affine_solution();
  const Mat2 h = second_difference_hessian(s.u, Vec2(0.1, 0.2), 0.3);
  CHECK((h - s.oracle.hessian()).norm() < 0.15);
}

TEST_CASE("obliqueness of the affine oracle on its long edge") {
  const Solved& s = affine_solution();
  const ObliquenessProfile o = obliqueness_profile(s.u, s.oracle.source, s.oracle.target, 64, 0.2);
  CHECK(o.samples.size() < 64);
  CHECK(o.min >= 0.98);
  CHECK(o.unreliable == 0);
}

TEST_CASE("Hoelder seminorm of a synthetic field") {
  HessianField f;
  for (int i = 0; i < 20; ++i) {
    HessianSample s;
    s.x = Vec2(0.05 * i, 0.0);
    s.hessian = Mat2::Identity() * std::sqrt(s.x.x());
    s.weight = 1.0;
    f.samples.push_back(s);
  }
  // |sqrt(x) - sqrt(z)| * sqrt(2) / |x - z|^{1/2} <= sqrt(2).
  const auto bands = holder_seminorm(f, 0.5, 1.0, 3);
  REQUIRE(!bands.empty());
  for (const auto& b : bands) {
    CHECK(b.max <= std::sqrt(2.0) + 1e-12);
    CHECK(b.pairs > 0);
  }
  const auto near = holder_seminorm(f, 0.5, 1.0, 3, Vec2::Zero(), 0.3);
  int pairs = 0;
  for (const auto& b : near) pairs += b.pairs;
  CHECK(pairs < 190);
}

TEST_CASE("Sobolev norm of a constant field") {
  HessianField f;
  for (int i = 0; i < 4; ++i) {
    HessianSample s;
    s.hessian = Mat2::Identity();
    s.weight = 0.25;
    f.samples.push_back(s);
  }
  CHECK(sobolev_norm(f, 2.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sobolev_norm(f, 1.0) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("percentile interpolates") {
  CHECK(percentile({4, 1, 3, 2}, 0) == 1.0);
  CHECK(percentile({4, 1, 3, 2}, 100) == 4.0);
  CHECK(percentile({4, 1, 3, 2}, 50) == doctest::Approx(2.5));
}

TEST_CASE("modulus report of a constant-Hessian field is flat") {
  const Solved& s = affine_solution();
  const auto pts = lattice_samples(s.oracle.source, 0.25, 0.0, 0.1);
  const HessianField h = hessian_field(s.u, s.diagram, s.oracle.source, pts);
  DensityField f;
  const ModulusReport m = modulus_report(h, f, {0.25, 0.5, 1.0});
  REQUIRE(m.omega.size() == 3);
  for (double w : m.omega) CHECK(w < 0.1);
  for (double d : m.dini) CHECK(d == 0.0);
}

}  // TEST_SUITE
