#include "mabvp/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include "mabvp/parallel.hpp"
#include "mabvp/sections.hpp"

namespace mabvp {

std::vector<Vec2> lattice_samples(const ConvexDomain& source, double spacing, double frame,
                                  double corner_exclusion) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::kInvalidSpec, "lattice_samples: spacing must be positive");
  const ConvexDomain canonical = frame == 0.0 ? source : source.rotated(-frame);
  const ConvexPolygon& poly = canonical.polygon();
  const Vec2 c = canonical.centroid();
  std::vector<Vec2> corners;
  for (double s : canonical.corner_params()) corners.push_back(canonical.point_at(s));
  const int reach = static_cast<int>(std::ceil(canonical.diameter() / spacing)) + 1;
  const Mat2 rot = Eigen::Rotation2Dd(frame).toRotationMatrix();
  std::vector<Vec2> out;
  for (int j = -reach; j <= reach; ++j) {
    for (int i = -reach; i <= reach; ++i) {
      const Vec2 p = c + spacing * Vec2(i + 0.5, j + 0.5);
      if (!poly.contains(p)) continue;
      bool near_corner = false;
      for (const auto& q : corners) near_corner = near_corner || (p - q).norm() < corner_exclusion;
      if (!near_corner) out.push_back(frame == 0.0 ? p : Vec2(rot * p));
    }
  }
  return out;
}

namespace {

struct Fit {
  Mat2 a = Mat2::Zero();
  double residual = 0.0;
  bool ok = false;
};

Fit affine_fit(const std::vector<Vec2>& xs, const std::vector<Vec2>& ys, const std::vector<double>& w,
               const Vec2& origin) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Eigen::Matrix<double, 3, 2> rhs = Eigen::Matrix<double, 3, 2>::Zero();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Eigen::Vector3d row(xs[k].x() - origin.x(), xs[k].y() - origin.y(), 1.0);
    m += w[k] * row * row.transpose();
    rhs += w[k] * row * ys[k].transpose();
  }
  Fit fit;
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(m);
  if (ldlt.info() != Eigen::Success || !(std::abs(m.determinant()) > 0.0)) return fit;
  const Eigen::Matrix<double, 3, 2> coef = ldlt.solve(rhs);
  fit.a = coef.topRows<2>().transpose();
  double err = 0.0, wsum = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Eigen::Vector3d row(xs[k].x() - origin.x(), xs[k].y() - origin.y(), 1.0);
    const Vec2 pred = coef.transpose() * row;
    err += w[k] * (pred - ys[k]).squaredNorm();
    wsum += w[k];
  }
  fit.residual = std::sqrt(err / wsum);
  fit.ok = coef.allFinite();
  return fit;
}

}  // namespace

HessianField hessian_field(const SemiDiscretePotential& u, const LaguerreDiagram& diagram, const ConvexDomain& source,
                           const std::vector<Vec2>& samples, const RadiusPolicy& policy,
                           int threads) {
  const double kappa = policy.kappa > 0.0 ? policy.kappa : 2.0 * source.diameter();
  const double floor_radius = kappa * std::pow(static_cast<double>(u.size()), -0.25);
  const auto neighbours = diagram.neighbours();
  std::vector<Vec2> centroids(diagram.cells.size());
  std::vector<double> areas(diagram.cells.size(), 0.0);
  for (std::size_t i = 0; i < diagram.cells.size(); ++i) {
    if (diagram.cells[i].empty()) continue;
    centroids[i] = diagram.cells[i].centroid();
    areas[i] = diagram.cells[i].area();
  }

  // Sample weights: areas of the samples' Voronoi cells within the source.
  std::vector<double> weights(samples.size(), 0.0);
  if (!samples.empty()) {
    std::vector<double> offs(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) offs[k] = 0.5 * samples[k].squaredNorm();
    const auto vor = laguerre_diagram(MaxAffine(samples, offs), source.polygon(), nullptr, threads);
    for (std::size_t k = 0; k < samples.size(); ++k) weights[k] = vor.cells[k].area();
  }

  std::vector<std::optional<HessianSample>> out(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t k) {
    const Vec2 x = samples[k];
    HessianSample s;
    s.x = x;
    s.weight = weights[k];
    s.boundary_distance = source.project(x).distance;
    double r = std::max(policy.rho * s.boundary_distance, floor_radius);
    const int start = u.cell_of(x);
    for (int widen = 0; widen <= 3; ++widen) {
      // Cells meeting a convex set are connected in the adjacency graph.
      std::vector<int> hit;
      std::vector<char> seen(diagram.cells.size(), 0);
      std::deque<int> queue{start};
      seen[static_cast<std::size_t>(start)] = 1;
      while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        const auto& cell = diagram.cells[static_cast<std::size_t>(i)];
        if (cell.empty() || cell.distance(x) > r) continue;
        hit.push_back(i);
        for (int j : neighbours[static_cast<std::size_t>(i)]) {
          if (!seen[static_cast<std::size_t>(j)]) {
            seen[static_cast<std::size_t>(j)] = 1;
            queue.push_back(j);
          }
        }
      }
      if (hit.size() >= 6) {
        std::sort(hit.begin(), hit.end());
        std::vector<Vec2> xs, ys;
        std::vector<double> w;
        for (int i : hit) {
          xs.push_back(centroids[static_cast<std::size_t>(i)]);
          ys.push_back(u.sites()[static_cast<std::size_t>(i)]);
          w.push_back(areas[static_cast<std::size_t>(i)]);
        }
        const Fit fit = affine_fit(xs, ys, w, x);
        if (fit.ok) {
          s.hessian = 0.5 * (fit.a + fit.a.transpose());
          s.residual = fit.residual;
          s.radius = r;
          s.cells = static_cast<int>(hit.size());
          s.widened = widen > 0;
          out[k] = s;
          return;
        }
      }
      r *= 1.5;
    }
  });

  HessianField field;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (out[k]) field.samples.push_back(*out[k]);
    else field.dropped.push_back(samples[k]);
  }
  return field;
}

Mat2 second_difference_hessian(const SemiDiscretePotential& u, const Vec2& x, double step) {
  const Vec2 e1 = Vec2::UnitX() * step, e2 = Vec2::UnitY() * step;
  const double u0 = u(x);
  Mat2 h;
  h(0, 0) = (u(x + e1) - 2.0 * u0 + u(x - e1)) / (step * step);
  h(1, 1) = (u(x + e2) - 2.0 * u0 + u(x - e2)) / (step * step);
  h(0, 1) = h(1, 0) = (u(x + e1 + e2) - u(x + e1 - e2) - u(x - e1 + e2) + u(x - e1 - e2)) / (4.0 * step * step);
  return h;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ObliquenessProfile obliqueness_profile(const SemiDiscretePotential& u, const ConvexDomain& source,
                                       const ConvexDomain& target, int samples, double corner_exclusion) {
  ObliquenessProfile out;
  const double limit = 5.0 * target.diameter() / std::sqrt(static_cast<double>(u.size()));
  std::vector<double> good;
  for (int k = 0; k < samples; ++k) {
    const double s = static_cast<double>(k) / samples;
    if (source.corner_distance(s) < corner_exclusion) continue;
    ObliquenessSample o;
    o.s = s;
    o.x = source.point_at(s);
    const Vec2 nu = source.inner_normal(s);
    const Vec2 y = brenier_map(u, o.x);
    const BoundaryPoint bp = target.project(y);
    Vec2 nu_star;
    try {
      nu_star = target.inner_normal(bp.s);
    } catch (const AmbiguousNormal& e) {
      nu_star = (e.first() + e.second()).normalized();
    }
    o.value = nu.dot(nu_star);
    o.projection_distance = bp.distance;
    o.reliable = bp.distance <= limit;
    if (o.reliable) good.push_back(o.value);
    else ++out.unreliable;
    out.samples.push_back(o);
  }
  if (!good.empty()) {
    out.min = *std::min_element(good.begin(), good.end());
    out.p5 = percentile(good, 5);
    out.p25 = percentile(good, 25);
    out.p50 = percentile(good, 50);
  }
  return out;
}

std::vector<BandQuotient> holder_seminorm(const HessianField& field, double alpha, double d0, int bands,
                                          const Vec2& center, double radius) {
  std::vector<const HessianSample*> pts;
  for (const auto& s : field.samples)
    if ((s.x - center).norm() <= radius) pts.push_back(&s);
  std::vector<BandQuotient> out(static_cast<std::size_t>(bands));
  for (int k = 0; k < bands; ++k) {
    out[static_cast<std::size_t>(k)].band = k;
    out[static_cast<std::size_t>(k)].hi = std::pow(2.0, -k) * d0;
    out[static_cast<std::size_t>(k)].lo = 0.5 * out[static_cast<std::size_t>(k)].hi;
  }
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double d = (pts[a]->x - pts[b]->x).norm();
      if (!(d > 0.0) || d > d0) continue;
      const int k = static_cast<int>(std::floor(std::log2(d0 / d)));
      if (k < 0 || k >= bands) continue;
      auto& band = out[static_cast<std::size_t>(k)];
      band.max = std::max(band.max, (pts[a]->hessian - pts[b]->hessian).norm() / std::pow(d, alpha));
      ++band.pairs;
    }
  }
  std::erase_if(out, [](const BandQuotient& q) { return q.pairs == 0; });
  return out;
}

double sobolev_norm(const HessianField& field, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::kInvalidSpec, "sobolev_norm: p must be >= 1");
  double sum = 0.0;
  for (const auto& s : field.samples) sum += s.weight * std::pow(s.hessian.norm(), p);
  return std::pow(sum, 1.0 / p);
}

ModulusReport modulus_report(const HessianField& field, const DensityField& f, const std::vector<double>& radii) {
  ModulusReport out;
  out.r = radii;
  std::sort(out.r.begin(), out.r.end());
  out.omega.assign(out.r.size(), 0.0);
  const auto& s = field.samples;
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = a + 1; b < s.size(); ++b) {
      const double d = (s[a].x - s[b].x).norm();
      const double diff = (s[a].hessian - s[b].hessian).norm();
      auto it = std::lower_bound(out.r.begin(), out.r.end(), d);
      for (auto k = static_cast<std::size_t>(it - out.r.begin()); k < out.r.size(); ++k) {
        if (diff <= out.omega[k]) break;  // omega is nondecreasing in r
        out.omega[k] = diff;
      }
    }
  }
  for (double r : out.r) out.dini.push_back(f.dini_integral(r));
  for (std::size_t k = 1; k < out.omega.size(); ++k) out.decreasing = out.decreasing && out.omega[k - 1] <= out.omega[k];
  try {
    out.trend_exponent = loglog_slope(out.r, out.omega);
  } catch (const Error&) {
    out.trend_exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace mabvp
