#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mabvp/geometry.hpp"
#include "mabvp/quadrature.hpp"

namespace mabvp {

/// Source density descriptor. The raw density is
///   constant:    value
///   holder:      1 + amplitude * |x - anchor|^alpha
///   dini:        1 + amplitude * omega(|x - anchor|), omega linear in `table`
///   radial_poly: sum_k coeffs[k] * |x - anchor|^k
/// and is multiplied by a normalization factor so that its integral over the
/// source equals the target area.
struct DensitySpec {
  enum class Kind { kConstant, kHolder, kDini, kRadialPoly };
  Kind kind = Kind::kConstant;
  double value = 1.0;
  double alpha = 0.5;
  double amplitude = 0.5;
  Vec2 anchor = Vec2::Zero();
  std::vector<std::pair<double, double>> table;  // (r, omega(r)), r increasing, omega(0) = 0
  std::vector<double> coeffs;
};

class DensityField {
 public:
  DensityField() = default;
  explicit DensityField(DensitySpec spec);

  const DensitySpec& spec() const { return spec_; }
  double raw(const Vec2& x) const;
  double operator()(const Vec2& x) const { return scale_ * raw(x); }

  /// Rescales so that the integral over `region` equals `target_mass`.
  void normalize(const ConvexPolygon& region, double target_mass);
  double scale() const { return scale_; }

  bool is_constant() const { return spec_.kind == DensitySpec::Kind::kConstant; }
  /// Point where the density is only Hoelder; quadrature refines near it.
  std::optional<Vec2> singular_point() const;

  /// Bounds lambda <= f <= Lambda over a polygon (exact for the radial kinds
  /// up to vertex sampling of the polygon).
  std::pair<double, double> bounds(const ConvexPolygon& region) const;

  /// Modulus of continuity omega_f(r) of the normalized density.
  double modulus(double r) const;
  /// Dini integral of omega_f(t)/t over [0, r].
  double dini_integral(double r) const;

  double integrate(const ConvexPolygon& poly) const;
  double integrate_edge(const Vec2& a, const Vec2& b) const;

  /// Same density after rotating the plane about the origin.
  DensityField rotated(double angle) const;

 private:
  double omega_raw(double r) const;
  // G(R) / R^2 with G(R) = int_0^R raw(r) r dr.
  double radial_moment_ratio(double R) const;

  DensitySpec spec_;
  double scale_ = 1.0;
};

}  // namespace mabvp
