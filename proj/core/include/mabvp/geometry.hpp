#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "mabvp/error.hpp"

namespace mabvp {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }  // rotate +90 degrees

/// Closed half-plane {x : normal . x <= offset}.
struct HalfPlane {
  Vec2 normal;
  double offset = 0.0;

  double signed_distance(const Vec2& x) const { return normal.dot(x) - offset; }
};

/// Edge tag used for edges that come from the clipping domain rather than a
/// neighbouring cell.
inline constexpr int kBoundaryTag = -1;
/// Edge tag for edges of a synthetic bounding box.
inline constexpr int kBoxTag = -2;

/// Convex polygon with counter-clockwise vertices. Edge k runs from vertex k to
/// vertex k+1 and carries an integer tag (neighbour index, kBoundaryTag, ...).
/// A default-constructed polygon is the explicit empty set.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  ConvexPolygon(std::vector<Vec2> vertices, std::vector<int> edge_tags);

  /// Validating factory: checks orientation and convexity (relative to the
  /// diameter) and throws kInvalidSpec otherwise. Clockwise input is reversed.
  static ConvexPolygon from_vertices(std::vector<Vec2> vertices, int tag = kBoundaryTag);
  static ConvexPolygon box(const Vec2& lo, const Vec2& hi, int tag = kBoxTag);

  bool empty() const { return vertices_.size() < 3; }
  std::size_t size() const { return vertices_.size(); }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<int>& edge_tags() const { return tags_; }
  const Vec2& operator[](std::size_t k) const { return vertices_[k]; }

  double area() const;
  Vec2 centroid() const;
  double diameter() const;
  std::pair<Vec2, Vec2> bounds() const;

  /// True if x lies inside or within `tol` of the boundary.
  bool contains(const Vec2& x, double tol = 0.0) const;
  /// Distance from x to the polygon (0 inside).
  double distance(const Vec2& x) const;
  /// Distance from an interior point to the boundary.
  double boundary_distance(const Vec2& x) const;
  /// True if every vertex of `other` lies in this polygon (within tol).
  bool contains(const ConvexPolygon& other, double tol = 0.0) const;

  /// Intersection with a half-plane; the new edge receives `tag`.
  ConvexPolygon clip(const HalfPlane& hp, int tag) const;
  /// Intersection with another convex polygon; new edges keep `other`'s tags.
  ConvexPolygon clip(const ConvexPolygon& other) const;

  ConvexPolygon transformed(const Mat2& linear, const Vec2& translation) const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<int> tags_;
};

/// Free-function form of the two clip overloads; the empty polygon is a value.
ConvexPolygon clip(const ConvexPolygon& a, const ConvexPolygon& b);
ConvexPolygon clip(const ConvexPolygon& a, const HalfPlane& hp);

/// Convex hull (Andrew's monotone chain), returned counter-clockwise.
ConvexPolygon convex_hull(std::vector<Vec2> points);

// ---------------------------------------------------------------------------
// Ellipses and normalizing maps

/// E = {x : (x - c)^T M (x - c) <= 1} with M symmetric positive definite.
struct Ellipse {
  Vec2 center = Vec2::Zero();
  Mat2 shape = Mat2::Identity();

  double area() const;
  bool contains(const Vec2& x, double tol = 0.0) const;
  /// Boundary point at angle t of the unit-circle parameterization.
  Vec2 boundary_point(double t) const;
};

/// Affine map x -> linear * x + translation.
struct NormalizingMap {
  Mat2 linear = Mat2::Identity();
  Vec2 translation = Vec2::Zero();

  Vec2 apply(const Vec2& x) const { return linear * x + translation; }
  NormalizingMap inverse() const;
  /// Base point c with apply(c) = 0.
  Vec2 base_point() const;
};

/// Maximum-area inscribed ellipse and the map sending it to the unit disk.
struct JohnResult {
  Ellipse ellipse;
  NormalizingMap map;
  double duality_gap = 0.0;  // optimality certificate of the barrier solve
  int newton_steps = 0;
};

JohnResult john_normalize(const ConvexPolygon& body, double tolerance = 1e-6);

/// Dual normalization T* = (T')^{-1}. Both maps share the base point:
/// (T x) . (T* y) = (x - c) . (y - c) with c = T.base_point().
NormalizingMap dual_map(const NormalizingMap& map);

// ---------------------------------------------------------------------------
// Convex domains with segment + circular-arc boundaries

struct Segment {
  Vec2 a;
  Vec2 b;
};

/// Counter-clockwise arc: center + radius * (cos t, sin t), t in [start, start + sweep].
struct Arc {
  Vec2 center;
  double radius = 0.0;
  double start = 0.0;
  double sweep = 0.0;
};

using BoundaryPiece = std::variant<Segment, Arc>;

/// Point on a domain boundary identified by its arclength fraction.
struct BoundaryPoint {
  double s = 0.0;
  Vec2 point;
  double distance = 0.0;
};

class AmbiguousNormal : public Error {
 public:
  AmbiguousNormal(const std::string& message, Vec2 first, Vec2 second)
      : Error(ErrorCode::kAmbiguousNormal, message), first_(first), second_(second) {}
  const Vec2& first() const { return first_; }
  const Vec2& second() const { return second_; }

 private:
  Vec2 first_;
  Vec2 second_;
};

/// Convex planar region with a piecewise C^{1,1} boundary. Corner domains
/// (r_min == 0) are admitted and flagged via has_corners().
class ConvexDomain {
 public:
  ConvexDomain(std::vector<BoundaryPiece> pieces, std::string label);

  const std::vector<BoundaryPiece>& pieces() const { return pieces_; }
  const std::string& label() const { return label_; }
  double area() const { return area_; }
  const Vec2& centroid() const { return centroid_; }
  double perimeter() const { return perimeter_; }
  double diameter() const { return diameter_; }
  /// Smallest arc radius; 0 when the boundary has unsmoothed corners.
  double r_min() const { return r_min_; }
  bool has_corners() const { return !corner_params_.empty(); }
  /// Arclength fractions of unsmoothed corners.
  const std::vector<double>& corner_params() const { return corner_params_; }

  /// Inscribed polygonization (arc vertices on the exact boundary).
  const ConvexPolygon& polygon() const { return polygon_; }

  Vec2 point_at(double s) const;
  Vec2 tangent_at(double s) const;
  /// Unit inner normal; throws AmbiguousNormal at an unsmoothed corner.
  Vec2 inner_normal(double s) const;
  /// Nearest boundary point of the exact curve.
  BoundaryPoint project(const Vec2& x) const;
  /// Arclength distance (as a length) from s to the nearest corner, or +inf.
  double corner_distance(double s) const;

  ConvexDomain rotated(double angle) const;

 private:
  void validate();
  std::pair<std::size_t, double> locate(double s) const;

  std::vector<BoundaryPiece> pieces_;
  std::vector<double> cumulative_;  // arclength at the start of each piece
  std::string label_;
  double area_ = 0.0;
  double perimeter_ = 0.0;
  double r_min_ = 0.0;
  double diameter_ = 0.0;
  Vec2 centroid_ = Vec2::Zero();
  std::vector<double> corner_params_;
  ConvexPolygon polygon_;
};

/// Descriptor for make_domain. Mirrors the JSON form {"kind": ..., params}.
struct DomainSpec {
  enum class Kind { kSquare, kRectangle, kDisk, kRoundedPolygon, kSuperellipse };
  Kind kind = Kind::kSquare;
  double side = 2.0;
  double width = 2.0;
  double height = 2.0;
  double radius = 1.0;
  double corner_radius = 0.0;
  double a = 1.0;
  double b = 1.0;
  double power = 4.0;
  int arcs_per_quadrant = 32;
  Vec2 center = Vec2::Zero();
  std::vector<Vec2> vertices;
};

ConvexDomain make_domain(const DomainSpec& spec);

// SVG export for offline plotting.
std::string to_svg(std::span<const ConvexPolygon> polygons, std::span<const Ellipse> ellipses = {});

double polygon_area(std::span<const Vec2> vertices);

}  // namespace mabvp
