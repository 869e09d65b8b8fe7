// Maximum-area inscribed ellipse of a convex polygon.
//
// The ellipse is parameterized as E = {B w + d : |w| <= 1} with B symmetric
// positive definite. Containment in {a_i . x <= b_i} is |B a_i| + a_i . d <= b_i,
// and log det B is concave, so a log-barrier Newton method converges to the
// optimum with duality gap m / t after centering at barrier parameter t.

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "mabvp/geometry.hpp"

namespace mabvp {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Constraint {
  Vec2 a;  // unit outward normal
  double b;
};

class Barrier {
 public:
  explicit Barrier(std::vector<Constraint> cons) : cons_(std::move(cons)) {}

  std::size_t size() const { return cons_.size(); }

  bool feasible(const Vec5& th) const {
    const double det = th[0] * th[2] - th[1] * th[1];
    if (!(th[0] > 0.0) || !(det > 0.0)) return false;
    for (const auto& c : cons_)
      if (!(slack(th, c) > 0.0)) return false;
    return true;
  }

  double value(const Vec5& th, double t) const {
    const double det = th[0] * th[2] - th[1] * th[1];
    double v = -t * std::log(det);
    for (const auto& c : cons_) v -= std::log(slack(th, c));
    return v;
  }

  void derivatives(const Vec5& th, double t, Vec5& grad, Mat5& hess) const {
    grad.setZero();
    hess.setZero();
    const double p = th[0], q = th[1], r = th[2];
    const double det = p * r - q * q;
    const Vec3 gd(r, -2.0 * q, p);
    Mat3 hd;
    hd << 0, 0, 1, 0, -2, 0, 1, 0, 0;
    grad.head<3>() += -t * gd / det;
    hess.topLeftCorner<3, 3>() += t * (-hd / det + gd * gd.transpose() / (det * det));

    for (const auto& c : cons_) {
      const Vec2 w = matrix(th) * c.a;
      const double n = w.norm();
      Eigen::Matrix<double, 2, 3> ma;
      ma << c.a.x(), c.a.y(), 0.0, 0.0, c.a.x(), c.a.y();
      const Vec3 grad_n = ma.transpose() * w / n;
      const Mat3 hess_n = ma.transpose() * (Mat2::Identity() / n - w * w.transpose() / (n * n * n)) * ma;
      Vec5 gg;
      gg << -grad_n, -c.a;
      const double g = c.b - c.a.dot(th.tail<2>()) - n;
      grad += -gg / g;
      hess += gg * gg.transpose() / (g * g);
      hess.topLeftCorner<3, 3>() += hess_n / g;
    }
  }

  static Mat2 matrix(const Vec5& th) {
    Mat2 b;
    b << th[0], th[1], th[1], th[2];
    return b;
  }

 private:
  static double slack(const Vec5& th, const Constraint& c) {
    return c.b - c.a.dot(th.tail<2>()) - (matrix(th) * c.a).norm();
  }

  std::vector<Constraint> cons_;
};

}  // namespace

JohnResult john_normalize(const ConvexPolygon& body, double tolerance) {
  if (body.empty() || !(body.area() > 0.0))
    throw Error(ErrorCode::kNormalizationFailure, "john_normalize: degenerate polygon");
  const Vec2 origin = body.centroid();
  const double scale = body.diameter();
  const auto& v = body.vertices();
  const std::size_t n = v.size();

  std::vector<Constraint> cons;
  cons.reserve(n);
  double min_b = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 p0 = (v[k] - origin) / scale;
    const Vec2 p1 = (v[(k + 1) % n] - origin) / scale;
    const Vec2 e = p1 - p0;
    if (e.norm() < 1e-14) continue;
    const Vec2 a = Vec2(e.y(), -e.x()).normalized();
    cons.push_back({a, a.dot(p0)});
    min_b = std::min(min_b, a.dot(p0));
  }
  if (!(min_b > 0.0)) throw Error(ErrorCode::kNormalizationFailure, "john_normalize: centroid not interior");

  Barrier barrier(std::move(cons));
  Vec5 th;
  th << 0.5 * min_b, 0.0, 0.5 * min_b, 0.0, 0.0;

  const double m = static_cast<double>(barrier.size());
  const double target_gap = std::min(tolerance, 1e-11);
  double t = 1.0;
  int steps = 0;
  double gap = m / t;
  for (int outer = 0; outer < 60; ++outer) {
    // Centering.
    for (int it = 0; it < 100; ++it) {
      Vec5 g;
      Mat5 h;
      barrier.derivatives(th, t, g, h);
      const Vec5 dx = -h.ldlt().solve(g);
      const double decrement = -g.dot(dx);
      if (!std::isfinite(decrement)) break;
      if (decrement < 1e-12) break;
      double alpha = 1.0;
      const double f0 = barrier.value(th, t);
      while (alpha > 1e-16) {
        const Vec5 cand = th + alpha * dx;
        if (barrier.feasible(cand) && barrier.value(cand, t) <= f0 - 0.25 * alpha * decrement) break;
        alpha *= 0.5;
      }
      if (alpha <= 1e-16) break;
      th += alpha * dx;
      ++steps;
    }
    gap = m / t;
    if (gap <= target_gap) break;
    t *= 8.0;
  }
  if (!(gap <= tolerance) || !barrier.feasible(th))
    throw Error(ErrorCode::kNormalizationFailure, "john_normalize: optimality certificate above tolerance");

  const Mat2 b = scale * Barrier::matrix(th);
  const Vec2 center = origin + scale * th.tail<2>();
  JohnResult out;
  out.ellipse.center = center;
  out.ellipse.shape = (b * b).inverse();
  out.ellipse.shape = 0.5 * (out.ellipse.shape + out.ellipse.shape.transpose());
  const Mat2 binv = b.inverse();
  out.map.linear = binv;
  out.map.translation = -binv * center;
  out.duality_gap = gap;
  out.newton_steps = steps;
  return out;
}

}  // namespace mabvp
