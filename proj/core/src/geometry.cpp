#include "mabvp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace mabvp {

namespace {

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - x).norm();
}

double scale_of(const std::vector<Vec2>& v) {
  double s = 0.0;
  for (const auto& p : v) s = std::max(s, p.cwiseAbs().maxCoeff());
  return std::max(s, 1e-300);
}

// Drops repeated vertices and returns an empty polygon if fewer than three
// distinct vertices remain or the area vanishes.
ConvexPolygon cleaned(std::vector<Vec2> v, std::vector<int> t) {
  if (v.size() < 3) return {};
  const double eps = 1e-14 * scale_of(v);
  std::vector<Vec2> ov;
  std::vector<int> ot;
  ov.reserve(v.size());
  ot.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!ov.empty() && (v[k] - ov.back()).norm() <= eps) {
      ot.back() = t[k];
      continue;
    }
    ov.push_back(v[k]);
    ot.push_back(t[k]);
  }
  while (ov.size() > 1 && (ov.front() - ov.back()).norm() <= eps) {
    ov.pop_back();
    ot.pop_back();
  }
  if (ov.size() < 3) return {};
  if (polygon_area(ov) <= 0.0) return {};
  return ConvexPolygon(std::move(ov), std::move(ot));
}

}  // namespace

double polygon_area(std::span<const Vec2> v) {
  double a = 0.0;
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k) a += cross(v[k], v[(k + 1) % n]);
  return 0.5 * a;
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices, std::vector<int> edge_tags)
    : vertices_(std::move(vertices)), tags_(std::move(edge_tags)) {
  if (tags_.size() != vertices_.size()) tags_.assign(vertices_.size(), kBoundaryTag);
}

ConvexPolygon ConvexPolygon::from_vertices(std::vector<Vec2> vertices, int tag) {
  if (vertices.size() < 3) throw Error(ErrorCode::kInvalidSpec, "polygon needs at least 3 vertices");
  if (polygon_area(vertices) < 0.0) std::reverse(vertices.begin(), vertices.end());
  ConvexPolygon p(vertices, std::vector<int>(vertices.size(), tag));
  const double d = p.diameter();
  const std::size_t n = vertices.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 e0 = vertices[(k + 1) % n] - vertices[k];
    const Vec2 e1 = vertices[(k + 2) % n] - vertices[(k + 1) % n];
    if (cross(e0, e1) < -1e-12 * d * d)
      throw Error(ErrorCode::kInvalidSpec, "polygon is not convex");
  }
  if (!(p.area() > 0.0)) throw Error(ErrorCode::kInvalidSpec, "polygon has zero area");
  return p;
}

ConvexPolygon ConvexPolygon::box(const Vec2& lo, const Vec2& hi, int tag) {
  return ConvexPolygon({lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())},
                       std::vector<int>(4, tag));
}

double ConvexPolygon::area() const { return empty() ? 0.0 : polygon_area(vertices_); }

Vec2 ConvexPolygon::centroid() const {
  if (vertices_.empty()) return Vec2::Zero();
  // Relative to the first vertex for accuracy on small polygons far from 0.
  const Vec2 o = vertices_[0];
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t k = 1; k + 1 < vertices_.size(); ++k) {
    const Vec2 p = vertices_[k] - o;
    const Vec2 q = vertices_[k + 1] - o;
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  if (a == 0.0) {
    Vec2 m = Vec2::Zero();
    for (const auto& v : vertices_) m += v;
    return m / static_cast<double>(vertices_.size());
  }
  return o + c / (3.0 * a);
}

double ConvexPolygon::diameter() const {
  double d2 = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d2 = std::max(d2, (vertices_[i] - vertices_[j]).squaredNorm());
  return std::sqrt(d2);
}

std::pair<Vec2, Vec2> ConvexPolygon::bounds() const {
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

bool ConvexPolygon::contains(const Vec2& x, double tol) const {
  if (empty()) return false;
  const std::size_t n = vertices_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 e = vertices_[(k + 1) % n] - vertices_[k];
    const double len = e.norm();
    if (len == 0.0) continue;
    if (cross(e, x - vertices_[k]) / len < -tol) return false;
  }
  return true;
}

bool ConvexPolygon::contains(const ConvexPolygon& other, double tol) const {
  for (const auto& v : other.vertices()) {
    if (!contains(v, tol)) return false;
  }
  return true;
}

double ConvexPolygon::boundary_distance(const Vec2& x) const {
  double d = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices_.size();
  for (std::size_t k = 0; k < n; ++k) d = std::min(d, segment_distance(x, vertices_[k], vertices_[(k + 1) % n]));
  return d;
}

double ConvexPolygon::distance(const Vec2& x) const {
  if (contains(x)) return 0.0;
  return boundary_distance(x);
}

ConvexPolygon ConvexPolygon::clip(const HalfPlane& hp, int tag) const {
  if (empty()) return {};
  const std::size_t n = vertices_.size();
  const double eps = 1e-13 * (std::abs(hp.offset) + hp.normal.norm() * scale_of(vertices_));
  std::vector<double> d(n);
  bool any_out = false;
  bool any_in = false;
  for (std::size_t k = 0; k < n; ++k) {
    d[k] = hp.signed_distance(vertices_[k]);
    if (std::abs(d[k]) <= eps) d[k] = 0.0;
    if (d[k] > 0.0) any_out = true;
    else any_in = true;
  }
  if (!any_out) return *this;
  if (!any_in) return {};

  std::vector<Vec2> ov;
  std::vector<int> ot;
  ov.reserve(n + 2);
  ot.reserve(n + 2);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k1 = (k + 1) % n;
    const double dc = d[k];
    const double dn = d[k1];
    if (dc <= 0.0) {
      if (dn > 0.0) {
        ov.push_back(vertices_[k]);
        ot.push_back(tags_[k]);
        if (dc < 0.0) {
          const double t = dc / (dc - dn);
          ov.push_back(vertices_[k] + t * (vertices_[k1] - vertices_[k]));
          ot.push_back(tag);
        } else {
          ot.back() = tag;
        }
      } else {
        ov.push_back(vertices_[k]);
        ot.push_back(tags_[k]);
      }
    } else if (dn < 0.0) {
      const double t = dc / (dc - dn);
      ov.push_back(vertices_[k] + t * (vertices_[k1] - vertices_[k]));
      ot.push_back(tags_[k]);
    }
  }
  return cleaned(std::move(ov), std::move(ot));
}

ConvexPolygon ConvexPolygon::clip(const ConvexPolygon& other) const {
  if (empty() || other.empty()) return {};
  ConvexPolygon out = *this;
  const auto& w = other.vertices();
  const std::size_t n = w.size();
  for (std::size_t k = 0; k < n && !out.empty(); ++k) {
    const Vec2 e = w[(k + 1) % n] - w[k];
    // Inside is to the left of e: -perp(e) . x <= -perp(e) . w_k
    const Vec2 normal(e.y(), -e.x());
    out = out.clip(HalfPlane{normal, normal.dot(w[k])}, other.edge_tags()[k]);
  }
  return out;
}

ConvexPolygon ConvexPolygon::transformed(const Mat2& linear, const Vec2& translation) const {
  std::vector<Vec2> v;
  v.reserve(vertices_.size());
  for (const auto& p : vertices_) v.push_back(linear * p + translation);
  std::vector<int> t = tags_;
  if (linear.determinant() < 0.0) {
    // Orientation flips: reverse and shift tags so edge k keeps its tag.
    std::reverse(v.begin(), v.end());
    std::vector<int> rt(t.size());
    const std::size_t n = t.size();
    for (std::size_t k = 0; k < n; ++k) rt[k] = t[(2 * n - k - 2) % n];
    t = std::move(rt);
  }
  return ConvexPolygon(std::move(v), std::move(t));
}

ConvexPolygon clip(const ConvexPolygon& a, const ConvexPolygon& b) { return a.clip(b); }
ConvexPolygon clip(const ConvexPolygon& a, const HalfPlane& hp) { return a.clip(hp, kBoundaryTag); }

ConvexPolygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a == b; }),
            pts.end());
  if (pts.size() < 3) return {};
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return cleaned(std::move(h), std::vector<int>(k - 1, kBoundaryTag));
}

// ---------------------------------------------------------------------------

double Ellipse::area() const { return std::numbers::pi / std::sqrt(shape.determinant()); }

bool Ellipse::contains(const Vec2& x, double tol) const {
  const Vec2 d = x - center;
  return d.dot(shape * d) <= 1.0 + tol;
}

Vec2 Ellipse::boundary_point(double t) const {
  Eigen::SelfAdjointEigenSolver<Mat2> es(shape);
  const Mat2 inv_sqrt =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return center + inv_sqrt * Vec2(std::cos(t), std::sin(t));
}

NormalizingMap NormalizingMap::inverse() const {
  const Mat2 inv = linear.inverse();
  return {inv, -inv * translation};
}

Vec2 NormalizingMap::base_point() const { return -linear.inverse() * translation; }

NormalizingMap dual_map(const NormalizingMap& map) {
  const double det = map.linear.determinant();
  const double scale = map.linear.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > 1e-14 * scale * scale))
    throw Error(ErrorCode::kSingularMap, "dual_map: singular linear part");
  const Vec2 c = map.base_point();
  const Mat2 dual = map.linear.transpose().inverse();
  return {dual, -dual * c};
}

// ---------------------------------------------------------------------------

std::string to_svg(std::span<const ConvexPolygon> polygons, std::span<const Ellipse> ellipses) {
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& p : polygons) {
    if (p.empty()) continue;
    auto [a, b] = p.bounds();
    lo = lo.cwiseMin(a);
    hi = hi.cwiseMax(b);
  }
  for (const auto& e : ellipses) {
    for (int k = 0; k < 64; ++k) {
      const Vec2 q = e.boundary_point(2.0 * std::numbers::pi * k / 64.0);
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
  }
  if (!std::isfinite(lo.x())) {
    lo = Vec2(-1, -1);
    hi = Vec2(1, 1);
  }
  const double pad = 0.05 * (hi - lo).maxCoeff();
  lo.array() -= pad;
  hi.array() += pad;
  const double stroke = 0.002 * (hi - lo).maxCoeff();

  std::ostringstream os;
  os.precision(10);
  // y is flipped so the picture has the usual mathematical orientation.
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << lo.x() << ' ' << -hi.y() << ' '
     << hi.x() - lo.x() << ' ' << hi.y() - lo.y() << "\">\n";
  for (const auto& p : polygons) {
    if (p.empty()) continue;
    os << "  <polygon fill=\"none\" stroke=\"black\" stroke-width=\"" << stroke << "\" points=\"";
    for (const auto& v : p.vertices()) os << v.x() << ',' << -v.y() << ' ';
    os << "\"/>\n";
  }
  for (const auto& e : ellipses) {
    os << "  <polygon fill=\"none\" stroke=\"red\" stroke-width=\"" << stroke << "\" points=\"";
    for (int k = 0; k < 128; ++k) {
      const Vec2 q = e.boundary_point(2.0 * std::numbers::pi * k / 128.0);
      os << q.x() << ',' << -q.y() << ' ';
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mabvp
