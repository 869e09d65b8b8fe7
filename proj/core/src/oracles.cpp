#include "mabvp/oracles.hpp"

#include <cmath>
#include <numbers>

#include "mabvp/error.hpp"
#include "mabvp/quadrature.hpp"

namespace mabvp {

double AffineOracle::sobolev_norm(double p) const {
  return std::pow(4.0 * std::pow(a * a + 1.0 / (a * a), 0.5 * p), 1.0 / p);
}

AffineOracle oracle_affine(double a) {
  if (!(a >= 1.0 && a <= 4.0)) throw Error(ErrorCode::kInvalidSpec, "oracle_affine: a must lie in [1, 4]");
  DomainSpec s;
  s.kind = DomainSpec::Kind::kSquare;
  s.side = 2.0;
  DomainSpec t;
  t.kind = DomainSpec::Kind::kRectangle;
  t.width = 2.0 * a;
  t.height = 2.0 / a;
  return AffineOracle{a, make_domain(s), make_domain(t)};
}

RadialOracle::RadialOracle(DensityField density, ConvexDomain disk)
    : density_(std::move(density)), disk_(std::move(disk)) {}

double RadialOracle::g(double r) const { return density_(Vec2(r, 0.0)); }

double RadialOracle::radius(double r) const {
  if (!(r > 0.0)) return 0.0;
  const double m = adaptive_simpson([this](double s) { return g(s) * s; }, 0.0, r, 1e-13);
  return std::sqrt(2.0 * m);
}

double RadialOracle::radius_derivative(double r) const {
  if (!(r > 0.0)) return std::sqrt(g(0.0));
  return g(r) * r / radius(r);
}

Vec2 RadialOracle::map(const Vec2& x) const {
  const double r = x.norm();
  if (r == 0.0) return Vec2::Zero();
  return x * (radius(r) / r);
}

double RadialOracle::potential(const Vec2& x) const {
  return adaptive_simpson([this](double s) { return radius(s); }, 0.0, x.norm(), 1e-11);
}

Mat2 RadialOracle::hessian(const Vec2& x) const {
  const double r = x.norm();
  if (r == 0.0) return std::sqrt(g(0.0)) * Mat2::Identity();
  const Vec2 e = x / r;
  const double rad = radius_derivative(r), tan = radius(r) / r;
  return rad * e * e.transpose() + tan * (Mat2::Identity() - e * e.transpose());
}

RadialOracle oracle_radial(const DensitySpec& g, int arcs_per_quadrant) {
  if (g.kind != DensitySpec::Kind::kConstant && g.anchor.norm() != 0.0)
    throw Error(ErrorCode::kInvalidConfig, "oracle_radial: density must be centred at the origin");
  DensityField f(g);
  const double mass =
      2.0 * std::numbers::pi * adaptive_simpson([&](double s) { return f(Vec2(s, 0.0)) * s; }, 0.0, 1.0, 1e-13);
  if (!std::isfinite(mass) || std::abs(mass - std::numbers::pi) > 1e-6)
    throw Error(ErrorCode::kInvalidConfig, "oracle_radial: density must have total mass pi on the unit disk");
  DomainSpec d;
  d.kind = DomainSpec::Kind::kDisk;
  d.radius = 1.0;
  d.arcs_per_quadrant = arcs_per_quadrant;
  return RadialOracle(std::move(f), make_domain(d));
}

}  // namespace mabvp
