#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "mabvp/geometry.hpp"
#include "mabvp/quadrature.hpp"

namespace mabvp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxArcStep = kTwoPi / 720.0;  // polygonization angular step

double piece_length(const BoundaryPiece& p) {
  if (const auto* s = std::get_if<Segment>(&p)) return (s->b - s->a).norm();
  const auto& a = std::get<Arc>(p);
  return a.radius * a.sweep;
}

Vec2 piece_point(const BoundaryPiece& p, double t) {  // t in [0, 1]
  if (const auto* s = std::get_if<Segment>(&p)) return s->a + t * (s->b - s->a);
  const auto& a = std::get<Arc>(p);
  const double th = a.start + t * a.sweep;
  return a.center + a.radius * Vec2(std::cos(th), std::sin(th));
}

Vec2 piece_tangent(const BoundaryPiece& p, double t) {
  if (const auto* s = std::get_if<Segment>(&p)) return (s->b - s->a).normalized();
  const auto& a = std::get<Arc>(p);
  const double th = a.start + t * a.sweep;
  return Vec2(-std::sin(th), std::cos(th));
}

// Nearest point of one piece to x; returns local parameter in [0, 1].
double piece_project(const BoundaryPiece& p, const Vec2& x) {
  if (const auto* s = std::get_if<Segment>(&p)) {
    const Vec2 e = s->b - s->a;
    return std::clamp((x - s->a).dot(e) / e.squaredNorm(), 0.0, 1.0);
  }
  const auto& a = std::get<Arc>(p);
  const Vec2 d = x - a.center;
  if (d.norm() == 0.0) return 0.0;
  double rel = std::atan2(d.y(), d.x()) - a.start;
  rel = std::fmod(rel, kTwoPi);
  if (rel < 0) rel += kTwoPi;
  if (rel <= a.sweep) return rel / a.sweep;
  // Outside the arc's angular span: pick the closer endpoint.
  return (piece_point(p, 0.0) - x).norm() <= (piece_point(p, 1.0) - x).norm() ? 0.0 : 1.0;
}

}  // namespace

ConvexDomain::ConvexDomain(std::vector<BoundaryPiece> pieces, std::string label)
    : pieces_(std::move(pieces)), label_(std::move(label)) {
  if (pieces_.empty()) throw Error(ErrorCode::kInvalidSpec, "domain has no boundary pieces");
  cumulative_.reserve(pieces_.size());
  perimeter_ = 0.0;
  for (const auto& p : pieces_) {
    cumulative_.push_back(perimeter_);
    perimeter_ += piece_length(p);
  }

  // Polygonization: segment endpoints plus arc subdivisions on the exact curve.
  std::vector<Vec2> verts;
  for (const auto& p : pieces_) {
    if (std::holds_alternative<Segment>(p)) {
      verts.push_back(std::get<Segment>(p).a);
    } else {
      const auto& a = std::get<Arc>(p);
      const int n = std::max(1, static_cast<int>(std::ceil(a.sweep / kMaxArcStep)));
      for (int k = 0; k < n; ++k) verts.push_back(piece_point(p, static_cast<double>(k) / n));
    }
  }
  std::vector<Vec2> uniq;
  const double d0 = [&] {
    double m = 0.0;
    for (const auto& v : verts) m = std::max(m, v.norm());
    return std::max(m, 1.0);
  }();
  for (const auto& v : verts)
    if (uniq.empty() || (v - uniq.back()).norm() > 1e-13 * d0) uniq.push_back(v);
  while (uniq.size() > 1 && (uniq.front() - uniq.back()).norm() <= 1e-13 * d0) uniq.pop_back();
  polygon_ = ConvexPolygon(uniq, std::vector<int>(uniq.size(), kBoundaryTag));
  diameter_ = polygon_.diameter();

  validate();

  // Exact area and centroid by Green's theorem with Gauss quadrature per piece.
  const GaussRule& g = gauss_legendre(12);
  double area = 0.0, mx = 0.0, my = 0.0;
  for (const auto& p : pieces_) {
    const int chunks = std::holds_alternative<Arc>(p) ? 8 : 1;
    for (int c = 0; c < chunks; ++c) {
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        const double t = (c + 0.5 * (g.nodes[q] + 1.0)) / chunks;
        const double w = 0.5 * g.weights[q] / chunks;
        const Vec2 x = piece_point(p, t);
        const Vec2 dx = piece_tangent(p, t) * piece_length(p);
        area += w * 0.5 * cross(x, dx);
        mx += w * 0.5 * x.x() * x.x() * dx.y();
        my -= w * 0.5 * x.y() * x.y() * dx.x();
      }
    }
  }
  area_ = area;
  centroid_ = Vec2(mx / area, my / area);

  r_min_ = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces_)
    if (const auto* a = std::get_if<Arc>(&p)) r_min_ = std::min(r_min_, a->radius);
  if (!corner_params_.empty() || !std::isfinite(r_min_)) r_min_ = 0.0;
}

void ConvexDomain::validate() {
  const double diam = std::max(diameter_, 1e-300);
  const std::size_t n = pieces_.size();
  double turning = 0.0;
  auto& corners = corner_params_;
  corners.clear();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = pieces_[k];
    const auto& q = pieces_[(k + 1) % n];
    if ((piece_point(p, 1.0) - piece_point(q, 0.0)).norm() > 1e-12 * diam)
      throw Error(ErrorCode::kInvalidSpec, "domain boundary is not closed");
    if (const auto* a = std::get_if<Arc>(&p)) {
      if (!(a->radius > 0.0) || !(a->sweep > 0.0))
        throw Error(ErrorCode::kInvalidSpec, "arcs need positive radius and counter-clockwise sweep");
      turning += a->sweep;
    }
    const double jump = std::atan2(cross(piece_tangent(p, 1.0), piece_tangent(q, 0.0)),
                                   piece_tangent(p, 1.0).dot(piece_tangent(q, 0.0)));
    if (jump < -1e-9) throw Error(ErrorCode::kInvalidSpec, "domain boundary is not convex");
    if (jump > 1e-9) corners.push_back(cumulative_[(k + 1) % n] / perimeter_);
    turning += jump;
  }
  if (std::abs(turning - kTwoPi) > 1e-9)
    throw Error(ErrorCode::kInvalidSpec, "domain boundary does not turn exactly once");
  std::sort(corners.begin(), corners.end());
  if (!(polygon_.area() > 0.0)) throw Error(ErrorCode::kInvalidSpec, "domain has zero area");
}

std::pair<std::size_t, double> ConvexDomain::locate(double s) const {
  s -= std::floor(s);
  const double len = s * perimeter_;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), len);
  std::size_t k = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
  const double plen = piece_length(pieces_[k]);
  const double t = plen > 0.0 ? std::clamp((len - cumulative_[k]) / plen, 0.0, 1.0) : 0.0;
  return {k, t};
}

Vec2 ConvexDomain::point_at(double s) const {
  auto [k, t] = locate(s);
  return piece_point(pieces_[k], t);
}

Vec2 ConvexDomain::tangent_at(double s) const {
  auto [k, t] = locate(s);
  return piece_tangent(pieces_[k], t);
}

Vec2 ConvexDomain::inner_normal(double s) const {
  s -= std::floor(s);
  for (double c : corner_params_) {
    double d = std::abs(s - c);
    d = std::min(d, 1.0 - d);
    if (d * perimeter_ <= 1e-12 * diameter()) {
      const auto [k, t] = locate(c);
      const std::size_t prev = (k + pieces_.size() - 1) % pieces_.size();
      throw AmbiguousNormal("inner normal undefined at a corner", perp(piece_tangent(pieces_[prev], 1.0)),
                            perp(piece_tangent(pieces_[k], 0.0)));
    }
  }
  return perp(tangent_at(s));
}

BoundaryPoint ConvexDomain::project(const Vec2& x) const {
  BoundaryPoint best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const double t = piece_project(pieces_[k], x);
    const Vec2 p = piece_point(pieces_[k], t);
    const double d = (p - x).norm();
    if (d < best.distance) {
      best.distance = d;
      best.point = p;
      best.s = (cumulative_[k] + t * piece_length(pieces_[k])) / perimeter_;
    }
  }
  if (best.s >= 1.0) best.s -= 1.0;
  return best;
}

double ConvexDomain::corner_distance(double s) const {
  double best = std::numeric_limits<double>::infinity();
  s -= std::floor(s);
  for (double c : corner_params_) {
    double d = std::abs(s - c);
    d = std::min(d, 1.0 - d);
    best = std::min(best, d * perimeter_);
  }
  return best;
}

ConvexDomain ConvexDomain::rotated(double angle) const {
  const Mat2 r = Eigen::Rotation2Dd(angle).toRotationMatrix();
  std::vector<BoundaryPiece> out;
  out.reserve(pieces_.size());
  for (const auto& p : pieces_) {
    if (const auto* s = std::get_if<Segment>(&p)) {
      out.emplace_back(Segment{r * s->a, r * s->b});
    } else {
      const auto& a = std::get<Arc>(p);
      out.emplace_back(Arc{r * a.center, a.radius, a.start + angle, a.sweep});
    }
  }
  return ConvexDomain(std::move(out), label_);
}

// ---------------------------------------------------------------------------

namespace {

ConvexDomain rounded_polygon(std::vector<Vec2> v, double r, const std::string& label) {
  if (v.size() < 3) throw Error(ErrorCode::kInvalidSpec, "rounded_polygon needs at least 3 vertices");
  if (polygon_area(v) < 0.0) std::reverse(v.begin(), v.end());
  const std::size_t n = v.size();
  std::vector<double> tangent_len(n);
  std::vector<double> turn(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 din = (v[k] - v[(k + n - 1) % n]).normalized();
    const Vec2 dout = (v[(k + 1) % n] - v[k]).normalized();
    turn[k] = std::atan2(cross(din, dout), din.dot(dout));
    if (!(turn[k] > 0.0)) throw Error(ErrorCode::kInvalidSpec, "rounded_polygon: vertex list is not strictly convex");
    tangent_len[k] = r * std::tan(0.5 * turn[k]);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double edge = (v[(k + 1) % n] - v[k]).norm();
    if (tangent_len[k] + tangent_len[(k + 1) % n] > edge * (1.0 + 1e-12))
      throw Error(ErrorCode::kInvalidSpec, "rounded_polygon: corner arcs overlap");
  }
  std::vector<BoundaryPiece> pieces;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k1 = (k + 1) % n;
    const Vec2 d = (v[k1] - v[k]).normalized();
    const Vec2 a = v[k] + tangent_len[k] * d;
    const Vec2 b = v[k1] - tangent_len[k1] * d;
    if (r > 0.0) {
      // Arc at vertex k ends at a.
      const Vec2 din = (v[k] - v[(k + n - 1) % n]).normalized();
      const Vec2 start_pt = v[k] - tangent_len[k] * din;
      const Vec2 center = start_pt + r * perp(din);
      const Vec2 rel = start_pt - center;
      pieces.emplace_back(Arc{center, r, std::atan2(rel.y(), rel.x()), turn[k]});
    }
    if ((b - a).norm() > 1e-14 * (std::abs(v[k].norm()) + 1.0)) pieces.emplace_back(Segment{a, b});
  }
  return ConvexDomain(std::move(pieces), label);
}

// Equal-distance biarc from (p0, t0) to (p1, t1); appends one or two pieces.
void append_biarc(std::vector<BoundaryPiece>& out, const Vec2& p0, const Vec2& t0, const Vec2& p1,
                  const Vec2& t1) {
  auto arc_from = [&](const Vec2& a, const Vec2& ta, const Vec2& b) {
    const Vec2 n = perp(ta);
    const Vec2 w = b - a;
    const double nw = n.dot(w);
    if (std::abs(nw) <= 1e-14 * w.squaredNorm() / std::max(w.norm(), 1e-300)) {
      out.emplace_back(Segment{a, b});
      return;
    }
    const double r = w.squaredNorm() / (2.0 * nw);
    if (r < 0.0) throw Error(ErrorCode::kInvalidSpec, "biarc fit produced a concave arc");
    const Vec2 c = a + r * n;
    const double s = std::atan2((a - c).y(), (a - c).x());
    double e = std::atan2((b - c).y(), (b - c).x());
    double sweep = e - s;
    while (sweep <= 0.0) sweep += kTwoPi;
    out.emplace_back(Arc{c, r, s, sweep});
  };
  const Vec2 v = p1 - p0;
  const Vec2 t = t0 + t1;
  const double denom = 2.0 * (1.0 - t0.dot(t1));
  double d;
  if (denom < 1e-14) {
    if (std::abs(cross(t0, v)) <= 1e-14 * v.norm()) {
      out.emplace_back(Segment{p0, p1});
      return;
    }
    d = v.squaredNorm() / (4.0 * v.dot(t1));
  } else {
    const double vt = v.dot(t);
    d = (-vt + std::sqrt(vt * vt + denom * v.squaredNorm())) / denom;
  }
  const Vec2 q0 = p0 + d * t0;
  const Vec2 q1 = p1 - d * t1;
  const Vec2 pm = 0.5 * (q0 + q1);
  const Vec2 tm = (q1 - q0).normalized();
  arc_from(p0, t0, pm);
  arc_from(pm, tm, p1);
}

ConvexDomain superellipse(double a, double b, double power, int per_quadrant, const std::string& label) {
  if (power < 2.0) throw Error(ErrorCode::kInvalidSpec, "superellipse power must be >= 2 for a C^{1,1} boundary");
  if (per_quadrant < 2) throw Error(ErrorCode::kInvalidSpec, "superellipse needs >= 2 arcs per quadrant");
  const int n = 4 * per_quadrant;
  std::vector<Vec2> pts(n), tan(n);
  for (int k = 0; k < n; ++k) {
    const double th = kTwoPi * k / n;
    const double c = std::cos(th), s = std::sin(th);
    const double x = a * std::copysign(std::pow(std::abs(c), 2.0 / power), c);
    const double y = b * std::copysign(std::pow(std::abs(s), 2.0 / power), s);
    pts[k] = Vec2(x, y);
    const Vec2 grad(std::copysign(std::pow(std::abs(x / a), power - 1.0), x) / a,
                    std::copysign(std::pow(std::abs(y / b), power - 1.0), y) / b);
    tan[k] = perp(grad.normalized());
  }
  std::vector<BoundaryPiece> pieces;
  for (int k = 0; k < n; ++k) append_biarc(pieces, pts[k], tan[k], pts[(k + 1) % n], tan[(k + 1) % n]);
  return ConvexDomain(std::move(pieces), label);
}

}  // namespace

ConvexDomain make_domain(const DomainSpec& spec) {
  auto rect = [&](double w, double h) {
    const Vec2 c = spec.center;
    return std::vector<Vec2>{c + Vec2(-w / 2, -h / 2), c + Vec2(w / 2, -h / 2), c + Vec2(w / 2, h / 2),
                             c + Vec2(-w / 2, h / 2)};
  };
  if (spec.corner_radius < 0.0) throw Error(ErrorCode::kInvalidSpec, "corner radius must be non-negative");
  switch (spec.kind) {
    case DomainSpec::Kind::kSquare:
      if (!(spec.side > 0.0)) throw Error(ErrorCode::kInvalidSpec, "square side must be positive");
      return rounded_polygon(rect(spec.side, spec.side), spec.corner_radius, "square");
    case DomainSpec::Kind::kRectangle:
      if (!(spec.width > 0.0 && spec.height > 0.0))
        throw Error(ErrorCode::kInvalidSpec, "rectangle sides must be positive");
      return rounded_polygon(rect(spec.width, spec.height), spec.corner_radius, "rectangle");
    case DomainSpec::Kind::kDisk: {
      if (!(spec.radius > 0.0)) throw Error(ErrorCode::kInvalidSpec, "disk radius must be positive");
      std::vector<BoundaryPiece> p{Arc{spec.center, spec.radius, 0.0, kTwoPi}};
      return ConvexDomain(std::move(p), "disk");
    }
    case DomainSpec::Kind::kRoundedPolygon: {
      std::vector<Vec2> v;
      for (const auto& q : spec.vertices) v.push_back(q + spec.center);
      return rounded_polygon(v, spec.corner_radius, "rounded_polygon");
    }
    case DomainSpec::Kind::kSuperellipse:
      if (!(spec.a > 0.0 && spec.b > 0.0)) throw Error(ErrorCode::kInvalidSpec, "superellipse axes must be positive");
      {
        ConvexDomain d = superellipse(spec.a, spec.b, spec.power, spec.arcs_per_quadrant, "superellipse");
        if (spec.center.norm() == 0.0) return d;
        std::vector<BoundaryPiece> moved;
        for (const auto& p : d.pieces()) {
          if (const auto* s = std::get_if<Segment>(&p)) moved.emplace_back(Segment{s->a + spec.center, s->b + spec.center});
          else {
            Arc a = std::get<Arc>(p);
            a.center += spec.center;
            moved.emplace_back(a);
          }
        }
        return ConvexDomain(std::move(moved), "superellipse");
      }
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown domain kind");
}

}  // namespace mabvp
