#include "mabvp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace mabvp {

const GaussRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

namespace {

// Dunavant degree-4 rule: barycentric orbits (a, a, 1-2a).
constexpr double kA1 = 0.445948490915965;
constexpr double kW1 = 0.223381589678011;
constexpr double kA2 = 0.091576213509771;
constexpr double kW2 = 0.109951743655322;

double dunavant4(const ScalarField& f, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area = 0.5 * std::abs(cross(b - a, c - a));
  auto at = [&](double l1, double l2) { return f(l1 * a + l2 * b + (1.0 - l1 - l2) * c); };
  const double s1 = at(kA1, kA1) + at(kA1, 1.0 - 2.0 * kA1) + at(1.0 - 2.0 * kA1, kA1);
  const double s2 = at(kA2, kA2) + at(kA2, 1.0 - 2.0 * kA2) + at(1.0 - 2.0 * kA2, kA2);
  return area * (kW1 * s1 + kW2 * s2);
}

double triangle_point_distance(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double d1 = cross(b - a, p - a);
  const double d2 = cross(c - b, p - b);
  const double d3 = cross(a - c, p - c);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  if (!(neg && pos)) return 0.0;
  auto seg = [&](const Vec2& u, const Vec2& v) {
    const Vec2 e = v - u;
    const double t = std::clamp((p - u).dot(e) / std::max(e.squaredNorm(), 1e-300), 0.0, 1.0);
    return (u + t * e - p).norm();
  };
  return std::min({seg(a, b), seg(b, c), seg(c, a)});
}

}  // namespace

double integrate_triangle(const ScalarField& f, const Vec2& a, const Vec2& b, const Vec2& c,
                          const std::optional<Vec2>& singular, int max_depth) {
  if (singular && max_depth > 0) {
    const double size = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    if (triangle_point_distance(*singular, a, b, c) < size) {
      const Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
      return integrate_triangle(f, a, ab, ca, singular, max_depth - 1) +
             integrate_triangle(f, ab, b, bc, singular, max_depth - 1) +
             integrate_triangle(f, ca, bc, c, singular, max_depth - 1) +
             integrate_triangle(f, ab, bc, ca, singular, max_depth - 1);
    }
  }
  return dunavant4(f, a, b, c);
}

namespace {
double integrate_subdivided(const ScalarField& f, const Vec2& a, const Vec2& b, const Vec2& c,
                            const std::optional<Vec2>& singular, int levels) {
  if (levels == 0) return integrate_triangle(f, a, b, c, singular);
  const Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  return integrate_subdivided(f, a, ab, ca, singular, levels - 1) +
         integrate_subdivided(f, ab, b, bc, singular, levels - 1) +
         integrate_subdivided(f, ca, bc, c, singular, levels - 1) +
         integrate_subdivided(f, ab, bc, ca, singular, levels - 1);
}
}  // namespace

double integrate_polygon(const ScalarField& f, const ConvexPolygon& poly, const std::optional<Vec2>& singular,
                         int subdivisions) {
  if (poly.empty()) return 0.0;
  const auto& v = poly.vertices();
  double sum = 0.0;
  for (std::size_t k = 1; k + 1 < v.size(); ++k)
    sum += integrate_subdivided(f, v[0], v[k], v[k + 1], singular, subdivisions);
  return sum;
}

double integrate_segment(const ScalarField& f, const Vec2& a, const Vec2& b) {
  static const double x = std::sqrt(0.6);
  const Vec2 m = 0.5 * (a + b);
  const Vec2 h = 0.5 * (b - a);
  const double len = (b - a).norm();
  return 0.5 * len * (5.0 / 9.0 * f(m - x * h) + 8.0 / 9.0 * f(m) + 5.0 / 9.0 * f(m + x * h));
}

namespace {
double simpson_rec(const std::function<double(double)>& g, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& g, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(g, a, b, fa, fm, fb, whole, tol, 50);
}

}  // namespace mabvp
