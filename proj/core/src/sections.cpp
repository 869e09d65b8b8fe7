#include "mabvp/sections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace mabvp {

namespace {

std::optional<JohnResult> try_john(const ConvexPolygon& p) {
  try {
    return john_normalize(p);
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Second-moment matrix of a polygon about its centroid, divided by the area.
Mat2 covariance(const ConvexPolygon& p) {
  const Vec2 c = p.centroid();
  Mat2 m = Mat2::Zero();
  double area = 0.0;
  const auto& v = p.vertices();
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Vec2 a = v[k] - c, b = v[(k + 1) % v.size()] - c;
    const double t = 0.5 * cross(a, b);
    const Vec2 s = a + b;
    m += t / 12.0 * (a * a.transpose() + b * b.transpose() + s * s.transpose());
    area += t;
  }
  return m / area;
}

bool touches_box(const ConvexPolygon& p) {
  return std::any_of(p.edge_tags().begin(), p.edge_tags().end(), [](int t) { return t == kBoxTag; });
}

Section finish(Section s, bool with_john) {
  s.centroid = s.polygon.centroid();
  if (with_john) s.john = try_john(s.polygon);
  return s;
}

}  // namespace

Frame boundary_frame(const ConvexDomain& domain, double s) {
  Frame f;
  f.origin = domain.point_at(s);
  f.e2 = domain.inner_normal(s);
  f.e1 = Vec2(f.e2.y(), -f.e2.x());  // counter-clockwise tangent
  return f;
}

Section plain_section(const MaxAffine& f, const ConvexPolygon& region, const Vec2& x0, double h,
                      const SectionOptions& options, std::optional<Vec2> slope) {
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidSpec, "plain_section: h must be positive");
  Section s;
  s.kind = SectionKind::kPlain;
  s.x0 = x0;
  s.h = h;
  s.slope = slope ? *slope : f.slopes()[static_cast<std::size_t>(f.argmax(x0).index)];
  s.offset = f(x0) - s.slope.dot(x0);
  s.polygon = sublevel_polygon(f, region, s.slope, s.offset, h);
  if (s.polygon.empty()) throw Error(ErrorCode::kDegenerateSection, "plain_section: empty section");
  if (s.polygon.diameter() > options.max_diameter_fraction * region.diameter())
    throw Error(ErrorCode::kHeightTooLarge, "plain_section: section exceeds the size limit");
  return finish(std::move(s), options.with_john);
}

Section centred_section(const MaxAffine& f, const Vec2& x0, double h, const SectionOptions& options,
                        std::optional<Vec2> initial_slope) {
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidSpec, "centred_section: h must be positive");
  const double base = f(x0);
  const Vec2 r = Vec2::Constant(options.box_radius);
  const ConvexPolygon box = ConvexPolygon::box(x0 - r, x0 + r);

  auto evaluate = [&](const Vec2& p) { return sublevel_polygon(f, box, p, base - p.dot(x0), h); };

  Vec2 p = initial_slope ? *initial_slope : f.slopes()[static_cast<std::size_t>(f.argmax(x0).index)];
  ConvexPolygon poly = evaluate(p);
  double tau = options.tau;
  Vec2 accepted_p = p;
  ConvexPolygon accepted = poly;
  double accepted_gap = (poly.centroid() - x0).norm();
  bool accepted_touch = touches_box(poly);
  double gap = accepted_gap;
  for (int it = 0; it < options.max_iterations; ++it) {
    if (!accepted_touch && accepted_gap <= options.centring_tolerance * accepted.diameter()) {
      Section s;
      s.kind = SectionKind::kCentred;
      s.x0 = x0;
      s.h = h;
      s.slope = accepted_p;
      s.offset = base - accepted_p.dot(x0);
      s.polygon = accepted;
      s.iterations = it;
      return finish(std::move(s), options.with_john);
    }
    const Vec2 step = tau * 0.5 * h * covariance(accepted).ldlt().solve(x0 - accepted.centroid());
    p = accepted_p + step;
    poly = evaluate(p);
    const bool touch = touches_box(poly);
    gap = (poly.centroid() - x0).norm();
    const bool overshoot = (touch && !accepted_touch) || (!touch && !accepted_touch && gap > accepted_gap);
    if (overshoot) {
      tau *= 0.5;
      if (tau < 1e-12) break;
      continue;
    }
    accepted_p = p;
    accepted = poly;
    accepted_gap = gap;
    accepted_touch = touch;
  }
  throw Error(ErrorCode::kCentringFailure,
              "centred_section: no convergence, centroid gap " + std::to_string(accepted_gap));
}

double density_ratio(const Section& sec, const ConvexPolygon& region) {
  const double a = sec.polygon.area();
  if (!(a > 0.0)) return 0.0;
  return sec.polygon.clip(region).area() / a;
}

BalanceStats balance_stats(const Section& sec, const Frame& frame) {
  BalanceStats b;
  b.frame = frame;
  double q = -std::numeric_limits<double>::infinity(), xi = std::numeric_limits<double>::infinity();
  double nlo = xi, nhi = q;
  for (const auto& v : sec.polygon.vertices()) {
    const Vec2 t = frame.to_local(v);
    q = std::max(q, t.x());
    xi = std::min(xi, t.x());
    nhi = std::max(nhi, t.y());
    nlo = std::min(nlo, t.y());
  }
  b.q1 = q;
  b.xi1 = xi;
  b.lambda1 = q - xi;
  b.lambda2 = nhi - nlo;
  if (sec.polygon.empty() || !(q > 0.0) || !(xi < 0.0) || !(b.lambda2 > 0.0))
    throw Error(ErrorCode::kDegenerateSection, "balance_stats: section does not straddle the base point");
  b.ratio = q / -xi;
  return b;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw Error(ErrorCode::kInsufficientData, "loglog_slope: fewer than two positive pairs");
  const double d = n * sxx - sx * sx;
  if (!(std::abs(d) > 0.0)) throw Error(ErrorCode::kInsufficientData, "loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / d;
}

ScalingFit scaling_fit(const std::vector<Section>& sections, const Frame& frame) {
  std::vector<double> h, area, tan, nor;
  for (const auto& s : sections) {
    if (s.polygon.empty()) continue;
    double tlo = std::numeric_limits<double>::infinity(), thi = -tlo, nlo = tlo, nhi = -tlo;
    for (const auto& v : s.polygon.vertices()) {
      const Vec2 t = frame.to_local(v);
      tlo = std::min(tlo, t.x());
      thi = std::max(thi, t.x());
      nlo = std::min(nlo, t.y());
      nhi = std::max(nhi, t.y());
    }
    h.push_back(s.h);
    area.push_back(s.polygon.area());
    tan.push_back(thi - tlo);
    nor.push_back(nhi - nlo);
  }
  if (h.size() < 3) throw Error(ErrorCode::kInsufficientData, "scaling_fit: fewer than 3 valid sections");
  ScalingFit fit;
  fit.volume = loglog_slope(h, area);
  fit.tangential = loglog_slope(h, tan);
  fit.normal = loglog_slope(h, nor);
  fit.count = static_cast<int>(h.size());
  return fit;
}

PairingStats pairing_stats(const Section& sec_u, const Section& sec_v, int samples_per_edge) {
  const Vec2 x0 = sec_u.x0, y0 = sec_v.x0;
  const double h = sec_u.h;
  PairingStats out;
  const auto& xs = sec_u.polygon.vertices();
  const auto& ys = sec_v.polygon.vertices();
  for (const auto& x : xs)
    for (const auto& y : ys) out.upper = std::max(out.upper, std::abs((x - x0).dot(y - y0)) / h);
  out.lower = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Vec2 a = xs[k], b = xs[(k + 1) % xs.size()];
    for (int j = 0; j < samples_per_edge; ++j) {
      const Vec2 x = a + (b - a) * (static_cast<double>(j) / samples_per_edge);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& y : ys) best = std::max(best, (x - x0).dot(y - y0) / h);
      out.lower = std::min(out.lower, best);
    }
  }
  return out;
}

Recentred recentre(const MaxAffine& f, const Vec2& x0, double scale, const std::optional<Vec2>& slope) {
  Recentred r;
  r.f = &f;
  r.x0 = x0;
  const auto hit = f.argmax(x0);
  r.slope = slope ? *slope : f.slopes()[static_cast<std::size_t>(hit.index)];
  r.base = hit.value;
  r.scale = scale;
  return r;
}

namespace {

// Parameter interval of {p + s d} inside a convex polygon, or nullopt.
std::optional<std::pair<double, double>> chord(const ConvexPolygon& region, const Vec2& p, const Vec2& d) {
  double lo = -std::numeric_limits<double>::infinity(), hi = -lo;
  const auto& w = region.vertices();
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Vec2 e = w[(k + 1) % w.size()] - w[k];
    const Vec2 n(e.y(), -e.x());
    const double nd = n.dot(d), rhs = n.dot(w[k] - p);
    if (std::abs(nd) < 1e-300) {
      if (rhs < 0.0) return std::nullopt;
      continue;
    }
    if (nd > 0.0) hi = std::min(hi, rhs / nd);
    else lo = std::max(lo, rhs / nd);
  }
  if (!(hi > lo)) return std::nullopt;
  return std::make_pair(lo, hi);
}

template <class F>
double convex_min(const F& g, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = g(x2);
    }
  }
  return std::min({f1, f2, g(a), g(b)});
}

}  // namespace

DecayProfile decay_profile(const MaxAffine& f, const ConvexPolygon& region, const Frame& frame,
                           const std::vector<double>& t_grid, const std::optional<Vec2>& slope) {
  const Recentred u = recentre(f, frame.origin, 1.0, slope);
  auto inf_on_chord = [&](double t) -> std::optional<double> {
    const Vec2 p = frame.origin + t * frame.e1;
    const auto c = chord(region, p, frame.e2);
    if (!c) return std::nullopt;
    return convex_min([&](double s) { return u(p + s * frame.e2); }, c->first, c->second);
  };
  DecayProfile out;
  std::vector<double> td;
  std::vector<double> sym;
  for (double t : t_grid) {
    const auto v = inf_on_chord(t);
    if (!v) {
      out.skipped.push_back(t);
      continue;
    }
    out.t.push_back(t);
    out.value.push_back(*v);
    const auto vr = inf_on_chord(-t);
    out.reflected.push_back(vr ? *vr : std::numeric_limits<double>::quiet_NaN());
    sym.push_back(vr ? 0.5 * (*v + *vr) : *v);
    const auto v2 = inf_on_chord(2.0 * t);
    if (v2) {
      td.push_back(t);
      out.derivative.push_back((*v2 - *v) / t);
    } else {
      out.derivative.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  out.exponent = out.t.size() >= 2 ? loglog_slope(out.t, sym) : std::numeric_limits<double>::quiet_NaN();
  std::vector<double> dv;
  for (double d : out.derivative)
    if (std::isfinite(d)) dv.push_back(d);
  out.derivative_exponent = dv.size() >= 2 ? loglog_slope(td, dv) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

DhSet dh_set(const MaxAffine& f, const ConvexPolygon& region, const Frame& frame, double h, double scale,
             const std::optional<Vec2>& slope) {
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidSpec, "dh_set: h must be positive");
  const Recentred u = recentre(f, frame.origin, scale, slope);
  const double diam = region.diameter();
  const Vec2 r = Vec2::Constant(2.0 * diam);
  const ConvexPolygon box = ConvexPolygon::box(frame.origin - r, frame.origin + r);
  const double level = h / scale;
  const double c0 = u.base - u.slope.dot(u.x0);
  const double tol = 1e-12 * diam;

  auto upper = [&](double a) {
    const ConvexPolygon start = box.clip(HalfPlane{-frame.e2, -(a + frame.e2.dot(frame.origin))}, kBoxTag);
    return sublevel_polygon(f, start, u.slope, c0, level);
  };
  auto inside = [&](const ConvexPolygon& p) { return !p.empty() && region.contains(p, tol); };

  DhSet out;
  out.h = h;
  ConvexPolygon d0 = upper(0.0);
  if (inside(d0)) {
    out.a = 0.0;
    out.upper = d0;
  } else {
    // Bracket by the top of the section in the normal direction.
    double top = 0.0;
    for (const auto& v : d0.vertices()) top = std::max(top, (v - frame.origin).dot(frame.e2));
    double lo = 0.0, hi = top * (1.0 - 1e-6);
    ConvexPolygon dh = upper(hi);
    if (!inside(dh)) throw Error(ErrorCode::kConstructionError, "dh_set: no admissible a below the bracket");
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      ConvexPolygon dm = upper(mid);
      if (inside(dm)) {
        hi = mid;
        dh = std::move(dm);
      } else {
        lo = mid;
      }
    }
    out.a = hi;
    out.upper = dh;
  }
  std::vector<Vec2> pts = out.upper.vertices();
  for (const auto& v : out.upper.vertices()) {
    const double off = (v - frame.origin).dot(frame.e2) - out.a;
    pts.push_back(v - 2.0 * off * frame.e2);
  }
  out.polygon = convex_hull(std::move(pts));
  out.center = frame.origin + out.a * frame.e2;
  if (const auto c = chord(out.polygon, out.center, frame.e1)) out.center += 0.5 * (c->first + c->second) * frame.e1;
  out.inradius = out.polygon.contains(out.center) ? out.polygon.boundary_distance(out.center) : 0.0;
  for (const auto& v : out.polygon.vertices()) out.circumradius = std::max(out.circumradius, (v - out.center).norm());
  return out;
}

double sandwich_constant(const MaxAffine& f, const ConvexPolygon& region, const Vec2& x0, double h,
                         const SectionOptions& options) {
  SectionOptions opt = options;
  opt.with_john = false;
  opt.max_diameter_fraction = std::numeric_limits<double>::infinity();
  const Section plain = plain_section(f, region, x0, h, opt);
  const double tol = 1e-9 * region.diameter();
  std::optional<Vec2> slope_lo, slope_hi;
  for (int k = 0; k <= 20; ++k) {
    const double b = std::pow(2.0, 0.5 * k);
    const Section lo = centred_section(f, x0, h / b, opt, slope_lo);
    const Section hi = centred_section(f, x0, h * b, opt, slope_hi);
    slope_lo = lo.slope;
    slope_hi = hi.slope;
    const ConvexPolygon inner = lo.polygon.clip(region);
    const ConvexPolygon outer = hi.polygon.clip(region);
    if (plain.polygon.contains(inner, tol) && outer.contains(plain.polygon, tol)) return b;
  }
  return std::numeric_limits<double>::infinity();
}

std::vector<double> height_ladder(double h0, int levels, double ratio) {
  std::vector<double> out;
  for (int j = 0; j < levels; ++j) out.push_back(h0 * std::pow(ratio, -j));
  return out;
}

}  // namespace mabvp
