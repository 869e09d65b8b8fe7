#include "mabvp/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

namespace mabvp {

DensityField::DensityField(DensitySpec spec) : spec_(std::move(spec)) {
  using K = DensitySpec::Kind;
  switch (spec_.kind) {
    case K::kConstant:
      if (!(spec_.value > 0.0)) throw Error(ErrorCode::kInvalidConfig, "density: constant must be positive");
      break;
    case K::kHolder:
      if (!(spec_.alpha > 0.0 && spec_.alpha <= 1.0) || !(spec_.amplitude >= 0.0))
        throw Error(ErrorCode::kInvalidConfig, "density: holder needs 0 < alpha <= 1, amplitude >= 0");
      break;
    case K::kDini:
      if (spec_.table.size() < 2 || !(spec_.amplitude >= 0.0))
        throw Error(ErrorCode::kInvalidConfig, "density: dini table needs at least two rows");
      for (std::size_t k = 0; k < spec_.table.size(); ++k) {
        if (spec_.table[k].second < 0.0 || (k > 0 && !(spec_.table[k].first > spec_.table[k - 1].first)))
          throw Error(ErrorCode::kInvalidConfig, "density: dini table must be increasing in r and nonnegative");
      }
      break;
    case K::kRadialPoly:
      if (spec_.coeffs.empty()) throw Error(ErrorCode::kInvalidConfig, "density: radial_poly needs coefficients");
      break;
  }
}

double DensityField::omega_raw(double r) const {
  const auto& t = spec_.table;
  if (r <= t.front().first) return t.front().second * (t.front().first > 0 ? r / t.front().first : 1.0);
  if (r >= t.back().first) return t.back().second;
  auto it = std::upper_bound(t.begin(), t.end(), r, [](double v, const auto& row) { return v < row.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (r - lo.first) / (hi.first - lo.first);
  return (1.0 - w) * lo.second + w * hi.second;
}

double DensityField::raw(const Vec2& x) const {
  using K = DensitySpec::Kind;
  switch (spec_.kind) {
    case K::kConstant:
      return spec_.value;
    case K::kHolder:
      return 1.0 + spec_.amplitude * std::pow((x - spec_.anchor).norm(), spec_.alpha);
    case K::kDini:
      return 1.0 + spec_.amplitude * omega_raw((x - spec_.anchor).norm());
    case K::kRadialPoly: {
      const double r = (x - spec_.anchor).norm();
      double v = 0.0;
      for (auto it = spec_.coeffs.rbegin(); it != spec_.coeffs.rend(); ++it) v = v * r + *it;
      return v;
    }
  }
  return spec_.value;
}

std::optional<Vec2> DensityField::singular_point() const {
  if (spec_.kind == DensitySpec::Kind::kHolder || spec_.kind == DensitySpec::Kind::kDini) return spec_.anchor;
  return std::nullopt;
}

void DensityField::normalize(const ConvexPolygon& region, double target_mass) {
  scale_ = 1.0;
  const double total = integrate(region);
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorCode::kInvalidConfig, "density: not normalizable over the source");
  scale_ = target_mass / total;
}

std::pair<double, double> DensityField::bounds(const ConvexPolygon& region) const {
  if (is_constant()) return {(*this)(Vec2::Zero()), (*this)(Vec2::Zero())};
  // Radial profiles are monotone in r for the supported kinds, so the extreme
  // values sit at the nearest and farthest points of the region.
  const double rmin = region.distance(spec_.anchor);
  double rmax = 0.0;
  for (const auto& v : region.vertices()) rmax = std::max(rmax, (v - spec_.anchor).norm());
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int k = 0; k <= 64; ++k) {
    const double r = rmin + (rmax - rmin) * k / 64.0;
    const double v = (*this)(spec_.anchor + Vec2(r, 0.0));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

double DensityField::modulus(double r) const {
  using K = DensitySpec::Kind;
  switch (spec_.kind) {
    case K::kConstant:
      return 0.0;
    case K::kHolder:
      return scale_ * spec_.amplitude * std::pow(r, spec_.alpha);
    case K::kDini:
      return scale_ * spec_.amplitude * omega_raw(r);
    case K::kRadialPoly: {
      // Lipschitz bound on the unit disk.
      double lip = 0.0;
      for (std::size_t k = 1; k < spec_.coeffs.size(); ++k) lip += static_cast<double>(k) * std::abs(spec_.coeffs[k]);
      return scale_ * lip * r;
    }
  }
  return 0.0;
}

double DensityField::dini_integral(double r) const {
  if (!(r > 0.0) || is_constant()) return 0.0;
  if (spec_.kind == DensitySpec::Kind::kHolder) return modulus(r) / spec_.alpha;
  if (spec_.kind == DensitySpec::Kind::kRadialPoly) return modulus(r);
  // t = r e^s turns the integrand into omega(r e^s) ds on (-inf, 0].
  return adaptive_simpson([&](double s) { return modulus(r * std::exp(s)); }, -60.0, 0.0, 1e-10 * (1.0 + modulus(r)));
}

double DensityField::radial_moment_ratio(double R) const {
  using K = DensitySpec::Kind;
  switch (spec_.kind) {
    case K::kConstant:
      return 0.5 * spec_.value;
    case K::kHolder:
      return 0.5 + spec_.amplitude * std::pow(R, spec_.alpha) / (spec_.alpha + 2.0);
    case K::kRadialPoly: {
      double v = 0.0;
      for (std::size_t k = spec_.coeffs.size(); k-- > 0;) v = v * R + spec_.coeffs[k] / (static_cast<double>(k) + 2.0);
      return v;
    }
    case K::kDini: {
      if (!(R > 0.0)) return 0.5;
      // omega is piecewise linear, so int_0^R omega(r) r dr is exact per piece.
      const auto& t = spec_.table;
      double g = 0.0, a = 0.0;
      auto piece = [&](double lo, double hi) {
        const double wl = omega_raw(lo), wh = omega_raw(hi);
        const double c1 = hi > lo ? (wh - wl) / (hi - lo) : 0.0;
        const double c0 = wl - c1 * lo;
        g += 0.5 * c0 * (hi * hi - lo * lo) + c1 * (hi * hi * hi - lo * lo * lo) / 3.0;
      };
      for (const auto& row : t) {
        if (row.first >= R) break;
        piece(a, row.first);
        a = row.first;
      }
      piece(a, R);
      return 0.5 + spec_.amplitude * g / (R * R);
    }
  }
  return 0.5;
}

// For a radial density g(|x - a|) and G(R) = int_0^R g(r) r dr, the integral
// over the signed triangle (a, b, c) is cross(b - a, c - b) times the integral
// of G(R)/R^2 along the edge bc. Summing edges gives the polygon integral
// without any cut through the singular point.
double DensityField::integrate(const ConvexPolygon& poly) const {
  if (is_constant()) return (*this)(Vec2::Zero()) * poly.area();
  if (poly.empty()) return 0.0;
  const Vec2 a = spec_.anchor;
  static const GaussRule& rule = gauss_legendre(8);
  std::vector<double> cuts;
  double sum = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Vec2 b = poly[k], c = poly[(k + 1) % poly.size()];
    const Vec2 e = c - b;
    const double len = e.norm();
    const double w = (b - a).x() * e.y() - (b - a).y() * e.x();
    if (len == 0.0 || w == 0.0) continue;
    const double p = std::abs(w) / len;
    const double t0 = (a - b).dot(e) / (len * len);
    cuts.assign({0.0, 1.0});
    auto add = [&](double t) {
      if (t > 0.0 && t < 1.0) cuts.push_back(t);
    };
    add(t0);
    for (double d = std::max(p, 1e-9 * len) / len; d < 1.0 + std::abs(t0); d *= 2.0) {
      add(t0 - d);
      add(t0 + d);
    }
    if (spec_.kind == DensitySpec::Kind::kDini) {
      for (const auto& row : spec_.table) {
        if (row.first <= p) continue;
        const double d = std::sqrt(row.first * row.first - p * p) / len;
        add(t0 - d);
        add(t0 + d);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    double edge = 0.0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
      const double lo = cuts[j], hi = cuts[j + 1];
      if (hi <= lo) continue;
      const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double t = mid + half * rule.nodes[q];
        edge += half * rule.weights[q] * radial_moment_ratio((b + t * e - a).norm());
      }
    }
    sum += w * edge;
  }
  return scale_ * sum;
}

double DensityField::integrate_edge(const Vec2& a, const Vec2& b) const {
  if (is_constant()) return (*this)(Vec2::Zero()) * (b - a).norm();
  return integrate_segment([this](const Vec2& x) { return (*this)(x); }, a, b);
}

DensityField DensityField::rotated(double angle) const {
  DensityField out = *this;
  out.spec_.anchor = Eigen::Rotation2Dd(angle) * spec_.anchor;
  return out;
}

}  // namespace mabvp
