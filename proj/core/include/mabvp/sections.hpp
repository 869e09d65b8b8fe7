#pragma once

#include <optional>
#include <vector>

#include "mabvp/geometry.hpp"
#include "mabvp/max_affine.hpp"

namespace mabvp {

/// Orthonormal frame at a boundary point: e1 is the counter-clockwise
/// tangent, e2 the inner normal.
struct Frame {
  Vec2 origin = Vec2::Zero();
  Vec2 e1 = Vec2::UnitX();
  Vec2 e2 = Vec2::UnitY();

  Vec2 to_local(const Vec2& x) const { return Vec2((x - origin).dot(e1), (x - origin).dot(e2)); }
  Vec2 to_global(const Vec2& t) const { return origin + t.x() * e1 + t.y() * e2; }
};

Frame boundary_frame(const ConvexDomain& domain, double s);

enum class SectionKind { kPlain, kCentred };

/// Sub-level set {F < l + h} of a max-affine function, l(x) = offset + slope . x.
struct Section {
  SectionKind kind = SectionKind::kPlain;
  Vec2 x0 = Vec2::Zero();
  double h = 0.0;
  Vec2 slope = Vec2::Zero();
  double offset = 0.0;
  ConvexPolygon polygon;
  std::optional<JohnResult> john;
  Vec2 centroid = Vec2::Zero();
  int iterations = 0;  // centring steps

  double affine(const Vec2& x) const { return offset + slope.dot(x); }
};

struct SectionOptions {
  /// Plain sections whose diameter exceeds this fraction of diam(region)
  /// raise HeightTooLarge.
  double max_diameter_fraction = 0.75;
  /// Half-width of the box that bounds centred sections; touching it counts
  /// as overshoot.
  double box_radius = 4.0;
  double tau = 0.5;
  int max_iterations = 500;
  double centring_tolerance = 1e-3;  // relative to the section diameter
  bool with_john = true;
};

/// {x in region : F(x) < F(x0) + p . (x - x0) + h}, p the active slope at x0
/// unless given.
Section plain_section(const MaxAffine& f, const ConvexPolygon& region, const Vec2& x0, double h,
                      const SectionOptions& options = {}, std::optional<Vec2> slope = std::nullopt);

/// Section of the global function whose centroid is x0. The slope starts at
/// `initial_slope` (default: the active slope at x0) and moves by a damped
/// step scaled with the section's inverse covariance.
Section centred_section(const MaxAffine& f, const Vec2& x0, double h, const SectionOptions& options = {},
                        std::optional<Vec2> initial_slope = std::nullopt);

/// area(section ∩ region) / area(section).
double density_ratio(const Section& sec, const ConvexPolygon& region);

struct BalanceStats {
  Frame frame;
  double q1 = 0.0;
  double xi1 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double ratio = 0.0;
};

BalanceStats balance_stats(const Section& sec, const Frame& frame);

struct ScalingFit {
  double volume = 0.0;
  double tangential = 0.0;
  double normal = 0.0;
  int count = 0;
};

/// Log-log slopes of area, tangential extent and normal extent against h.
ScalingFit scaling_fit(const std::vector<Section>& sections, const Frame& frame);

struct PairingStats {
  double upper = 0.0;
  double lower = 0.0;
};

/// upper = max |(x - x0).(y - y0)| / h over vertex pairs; lower = min over
/// boundary samples x of secU of max over vertices y of secV.
PairingStats pairing_stats(const Section& sec_u, const Section& sec_v, int samples_per_edge = 4);

struct DecayProfile {
  std::vector<double> t;
  std::vector<double> value;       // inf of the recentred potential on the chord
  std::vector<double> reflected;   // same at -t; NaN when that chord misses
  std::vector<double> derivative;  // (value(2t) - value(t)) / t
  std::vector<double> skipped;     // grid points whose chord missed the region
  /// Fitted on (value + reflected) / 2, which cancels the O(cell) tangential
  /// error of the supporting slope.
  double exponent = 0.0;
  double derivative_exponent = 0.0;
};

DecayProfile decay_profile(const MaxAffine& f, const ConvexPolygon& region, const Frame& frame,
                           const std::vector<double>& t_grid, const std::optional<Vec2>& slope = std::nullopt);

struct DhSet {
  double h = 0.0;
  double a = 0.0;
  ConvexPolygon upper;    // D+ in global coordinates
  ConvexPolygon polygon;  // D_h
  Vec2 center = Vec2::Zero();  // midpoint of the chord on the reflection axis
  double inradius = 0.0;
  double circumradius = 0.0;
};

/// Recentred potential at the frame origin: u_bar = scale * (F - F(x0) - p.(x - x0)).
/// p defaults to the slope active at x0. At a boundary point any p in the
/// subdifferential relative to the region works, e.g. the active slope
/// projected onto the target boundary.
struct Recentred {
  const MaxAffine* f = nullptr;
  Vec2 x0 = Vec2::Zero();
  Vec2 slope = Vec2::Zero();
  double base = 0.0;
  double scale = 1.0;

  double operator()(const Vec2& x) const { return scale * ((*f)(x) - base - slope.dot(x - x0)); }
};

Recentred recentre(const MaxAffine& f, const Vec2& x0, double scale = 1.0,
                    const std::optional<Vec2>& slope = std::nullopt);

DhSet dh_set(const MaxAffine& f, const ConvexPolygon& region, const Frame& frame, double h, double scale = 1.0,
             const std::optional<Vec2>& slope = std::nullopt);

/// Smallest b on a sqrt(2) grid with S^c_{h/b} ∩ region ⊆ S_h ⊆ S^c_{bh} ∩ region,
/// or +inf when no grid value up to 2^10 works.
double sandwich_constant(const MaxAffine& f, const ConvexPolygon& region, const Vec2& x0, double h,
                         const SectionOptions& options = {});

/// h0 * ratio^{-j}, j = 0..levels-1.
std::vector<double> height_ladder(double h0, int levels, double ratio = 4.0);

/// Least-squares slope of log y against log x over positive pairs.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mabvp
