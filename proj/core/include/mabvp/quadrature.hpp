#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mabvp/geometry.hpp"

namespace mabvp {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

using ScalarField = std::function<double(const Vec2&)>;

/// Degree-4 symmetric triangle rule (6 points). When `singular` is set the
/// triangle is subdivided recursively near that point, which keeps integrals
/// of Hoelder-type integrands |x - a|^alpha accurate.
double integrate_triangle(const ScalarField& f, const Vec2& a, const Vec2& b, const Vec2& c,
                          const std::optional<Vec2>& singular = std::nullopt, int max_depth = 12);

/// Integral over a convex polygon via a fan triangulation.
double integrate_polygon(const ScalarField& f, const ConvexPolygon& poly,
                         const std::optional<Vec2>& singular = std::nullopt, int subdivisions = 0);

/// Three-point Gauss integral of f along a segment.
double integrate_segment(const ScalarField& f, const Vec2& a, const Vec2& b);

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& g, double a, double b, double tol);

}  // namespace mabvp
