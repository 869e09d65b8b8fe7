#pragma once

// Property checks shared by the property test binary and the acceptance run.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "mabvp/harness.hpp"
#include "mabvp/transport.hpp"

namespace mabvp::props {

/// Random convex polygons (hulls of 3..12 points under a random linear map);
/// counts bodies violating E ⊆ K ⊆ 2E for the John ellipse E.
inline int john_containment_violations(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> npts(3, 12);
  int bad = 0;
  for (int c = 0; c < count; ++c) {
    Mat2 a;
    a << U(rng), U(rng), U(rng), U(rng);
    a += 1.5 * Mat2::Identity();
    std::vector<Vec2> pts;
    const int n = npts(rng);
    for (int k = 0; k < n; ++k) pts.push_back(a * Vec2(U(rng), U(rng)) + Vec2(3.0 * U(rng), 3.0 * U(rng)));
    const ConvexPolygon body = convex_hull(pts);
    if (body.empty() || body.area() < 1e-3 * body.diameter() * body.diameter()) continue;
    const JohnResult j = john_normalize(body, 1e-8);
    const double tol = 1e-6 * body.diameter();
    bool ok = true;
    for (int k = 0; k < 64 && ok; ++k)
      ok = body.contains(j.ellipse.boundary_point(2.0 * std::numbers::pi * k / 64), tol);
    for (const auto& v : body.vertices()) {
      const Vec2 d = v - j.ellipse.center;
      ok = ok && d.dot(j.ellipse.shape * d) <= 4.0 * (1.0 + 1e-6);
    }
    bad += !ok;
  }
  return bad;
}

struct Solved {
  ConvexDomain source;
  DensityField density;
  SemiDiscretePotential u;
};

inline Solved solve_example(int n, double angle = 0.0, double tol = 1e-10) {
  DomainSpec src;
  src.corner_radius = 0.2;
  DomainSpec tgt;
  tgt.kind = DomainSpec::Kind::kDisk;
  ConvexDomain source = make_domain(src).rotated(angle);
  const ConvexDomain target = make_domain(tgt).rotated(angle);
  DensitySpec ds;
  ds.kind = DensitySpec::Kind::kHolder;
  ds.anchor = Vec2(0.3, -0.2);
  DensityField f = DensityField(ds).rotated(angle);
  f.normalize(source.polygon(), target.area());
  const TargetSample t = sample_target(target, n, 7, 10, angle);
  SolveOptions o;
  o.tol = tol;
  SemiDiscretePotential u = solve_potential(source, f, t.sites, t.masses, o);
  return Solved{std::move(source), std::move(f), std::move(u)};
}

inline std::vector<Vec2> points_in(const ConvexDomain& d, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto [lo, hi] = d.polygon().bounds();
  std::uniform_real_distribution<double> X(lo.x(), hi.x()), Y(lo.y(), hi.y());
  std::vector<Vec2> out;
  while (static_cast<int>(out.size()) < count) {
    const Vec2 x(X(rng), Y(rng));
    if (d.polygon().contains(x)) out.push_back(x);
  }
  return out;
}

/// max |v(y_i) - psi_i| and max |u(x) - u**(x)| over sample points.
inline double biconjugation_error(const Solved& s) {
  const LaguerreDiagram d = laguerre_diagram(s.u, s.source);
  const DualPotential v = legendre_dual(s.u, d);
  double err = 0.0;
  std::vector<double> vy(s.u.size());
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    vy[i] = v(s.u.sites()[i]);
    if (!d.cells[i].empty()) err = std::max(err, std::abs(vy[i] - s.u.weights()[i]));
  }
  const MaxAffine uss(s.u.sites(), vy);
  for (const Vec2& x : points_in(s.source, 500, 3)) err = std::max(err, std::abs(uss(x) - s.u(x)));
  return err;
}

/// Pairs and 3-cycles violating cyclical monotonicity of the Brenier map.
inline int monotonicity_violations(const Solved& s, int pairs) {
  const auto x = points_in(s.source, 3 * pairs, 11);
  int bad = 0;
  for (int k = 0; k < pairs; ++k) {
    const Vec2 &a = x[3 * k], &b = x[3 * k + 1], &c = x[3 * k + 2];
    const Vec2 ta = brenier_map(s.u, a), tb = brenier_map(s.u, b), tc = brenier_map(s.u, c);
    if ((ta - tb).dot(a - b) < -1e-12) ++bad;
    if (ta.dot(b - a) + tb.dot(c - b) + tc.dot(a - c) > 1e-12) ++bad;
  }
  return bad;
}

/// Solves the same problem in a rotated frame. Sites carry the same indices
/// in both frames, so equal weights and rotated sites mean equal maps.
inline double rotation_covariance_error(int n, double angle) {
  const Solved a = solve_example(n);
  const Solved b = solve_example(n, angle);
  const Mat2 r = Eigen::Rotation2Dd(angle).toRotationMatrix();
  double err = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    err = std::max(err, (b.u.sites()[i] - r * a.u.sites()[i]).norm());
    err = std::max(err, std::abs(b.u.weights()[i] - a.u.weights()[i]));
  }
  for (const Vec2& x : points_in(a.source, 300, 5)) err = std::max(err, std::abs(b.u(r * x) - a.u(x)));
  return err;
}

inline Json without_timing(Json j) {
  j.erase("wall_time_s");
  return j;
}

/// Runs the scenario twice (and once on two threads) and compares the dumps.
inline bool reports_identical(const Json& scenario) {
  const ScenarioConfig c = load_config(scenario);
  const std::string a = without_timing(run_scenario(c).json).dump();
  const std::string b = without_timing(run_scenario(c).json).dump();
  RunOptions two;
  two.threads = 2;
  const std::string t = without_timing(run_scenario(c, two).json).dump();
  return a == b && a == t;
}

}  // namespace mabvp::props
