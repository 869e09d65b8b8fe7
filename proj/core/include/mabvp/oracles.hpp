#pragma once

#include "mabvp/density.hpp"
#include "mabvp/geometry.hpp"

namespace mabvp {

/// [-1,1]^2 onto [-a,a] x [-1/a,1/a] with u(x) = a x1^2/2 + x2^2/(2a).
struct AffineOracle {
  double a = 1.0;
  ConvexDomain source;
  ConvexDomain target;

  double potential(const Vec2& x) const { return 0.5 * a * x.x() * x.x() + 0.5 * x.y() * x.y() / a; }
  Vec2 map(const Vec2& x) const { return Vec2(a * x.x(), x.y() / a); }
  Mat2 hessian() const { return Vec2(a, 1.0 / a).asDiagonal(); }
  /// ||D^2 u||_{L^p(source)} = (4 (a^2 + a^-2)^{p/2})^{1/p}.
  double sobolev_norm(double p) const;
};

/// Requires a in [1, 4].
AffineOracle oracle_affine(double a);

/// Unit disk onto itself for a radial density g centred at the origin with
/// total mass pi; T(x) = R(|x|) x/|x| with R(r)^2 / 2 = int_0^r g(s) s ds.
class RadialOracle {
 public:
  RadialOracle(DensityField density, ConvexDomain disk);

  const DensityField& density() const { return density_; }
  const ConvexDomain& source() const { return disk_; }
  const ConvexDomain& target() const { return disk_; }

  double radius(double r) const;             // R(r)
  double radius_derivative(double r) const;  // R'(r) = g(r) r / R(r)
  Vec2 map(const Vec2& x) const;
  double potential(const Vec2& x) const;     // int_0^|x| R
  /// Eigenvalues (R'(r), R(r)/r) in the radial and tangential directions.
  Mat2 hessian(const Vec2& x) const;

 private:
  double g(double r) const;

  DensityField density_;
  ConvexDomain disk_;
};

/// The density must be radial about the origin (holder, dini or radial_poly
/// with anchor 0, or constant) and integrate to pi over the unit disk within
/// 1e-6; otherwise InvalidConfig.
RadialOracle oracle_radial(const DensitySpec& g, int arcs_per_quadrant = 32);

}  // namespace mabvp
