#include "mabvp/max_affine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/QR>

namespace mabvp {

namespace {
constexpr int kLeafSize = 8;
}

MaxAffine::MaxAffine(std::vector<Vec2> slopes, std::vector<double> offsets)
    : slopes_(std::move(slopes)), offsets_(std::move(offsets)) {
  if (slopes_.size() != offsets_.size()) throw Error(ErrorCode::kInvalidSpec, "MaxAffine: size mismatch");
  order_.resize(slopes_.size());
  std::iota(order_.begin(), order_.end(), 0);
  leaf_of_.assign(slopes_.size(), -1);
  nodes_.reserve(2 * slopes_.size() / kLeafSize + 2);
  fit_model();
  if (!slopes_.empty()) build(0, static_cast<int>(slopes_.size()), -1);
}

void MaxAffine::fit_model() {
  const std::size_t n = slopes_.size();
  if (n < 6) return;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 5);
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& s = slopes_[i];
    a.row(static_cast<Eigen::Index>(i)) << 0.5 * s.x() * s.x(), 0.5 * s.y() * s.y(), s.x(), s.y(), 1.0;
    b[static_cast<Eigen::Index>(i)] = offsets_[i];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  if (!c.allFinite() || !(c[0] > 0.0) || !(c[1] > 0.0)) return;
  if (std::min(c[0], c[1]) < 1e-3 * std::max(c[0], c[1])) return;
  model_ = true;
  q_ = Vec2(c[0], c[1]);
  a_ = Vec2(c[2], c[3]);
  c_ = c[4];
}

int MaxAffine::build(int begin, int end, int parent) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  double mo = std::numeric_limits<double>::infinity();
  double mw = mo;
  for (int k = begin; k < end; ++k) {
    lo = lo.cwiseMin(slopes_[order_[k]]);
    hi = hi.cwiseMax(slopes_[order_[k]]);
    mo = std::min(mo, offsets_[order_[k]]);
    mw = std::min(mw, weight(order_[k]));
  }
  nodes_[id] = Node{lo, hi, mo, mw, begin, end, -1, -1, parent};
  if (end - begin <= kLeafSize) {
    for (int k = begin; k < end; ++k) leaf_of_[order_[k]] = id;
    return id;
  }
  const int axis = (hi - lo).x() >= (hi - lo).y() ? 0 : 1;
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
    const double va = slopes_[a][axis], vb = slopes_[b][axis];
    return va < vb || (va == vb && a < b);
  });
  const int l = build(begin, mid, id);
  const int r = build(mid, end, id);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

double MaxAffine::bound(const Node& n, const Vec2& x) const {
  const double bx = x.x() >= 0.0 ? x.x() * n.hi.x() : x.x() * n.lo.x();
  const double by = x.y() >= 0.0 ? x.y() * n.hi.y() : x.y() * n.lo.y();
  const double plain = bx + by - n.min_offset;
  if (!model_) return plain;
  const Vec2 xs = x - a_;
  const Vec2 z = xs.cwiseQuotient(q_);
  const Vec2 gap = (n.lo - z).cwiseMax(z - n.hi).cwiseMax(0.0);
  const double model = 0.5 * (xs.dot(z) - q_.dot(gap.cwiseProduct(gap))) - c_ - n.min_weight;
  return std::min(plain, model);
}

MaxAffine::Hit MaxAffine::argmax(const Vec2& x) const {
  Hit best;
  best.value = -std::numeric_limits<double>::infinity();
  if (nodes_.empty()) return best;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (bound(n, x) < best.value) continue;
    if (n.left < 0) {
      for (int k = n.begin; k < n.end; ++k) {
        const int i = order_[k];
        const double v = piece(static_cast<std::size_t>(i), x);
        if (v > best.value || (v == best.value && i < best.index)) {
          best.value = v;
          best.index = i;
        }
      }
      continue;
    }
    const double bl = bound(nodes_[n.left], x);
    const double br = bound(nodes_[n.right], x);
    // Push the less promising child first so the better one is explored next.
    if (bl >= br) {
      stack[top++] = n.right;
      stack[top++] = n.left;
    } else {
      stack[top++] = n.left;
      stack[top++] = n.right;
    }
  }
  return best;
}

void MaxAffine::set_offset(std::size_t i, double offset) {
  offsets_[i] = offset;
  int id = leaf_of_[i];
  while (id >= 0) {
    Node& n = nodes_[id];
    double mo, mw;
    if (n.left < 0) {
      mo = mw = std::numeric_limits<double>::infinity();
      for (int k = n.begin; k < n.end; ++k) {
        mo = std::min(mo, offsets_[order_[k]]);
        mw = std::min(mw, weight(order_[k]));
      }
    } else {
      mo = std::min(nodes_[n.left].min_offset, nodes_[n.right].min_offset);
      mw = std::min(nodes_[n.left].min_weight, nodes_[n.right].min_weight);
    }
    n.min_offset = mo;
    n.min_weight = mw;
    id = n.parent;
  }
}

ConvexPolygon sublevel_polygon(const MaxAffine& f, const ConvexPolygon& start, const Vec2& p, double c0, double h) {
  ConvexPolygon poly = start;
  std::vector<int> violators;
  for (int pass = 0; pass < 10000 && !poly.empty(); ++pass) {
    violators.clear();
    double scale = 0.0;
    for (const auto& v : poly.vertices()) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    for (const auto& v : poly.vertices()) {
      const auto hit = f.argmax(v);
      const auto j = static_cast<std::size_t>(hit.index);
      const Vec2 n = f.slopes()[j] - p;
      const double off = f.offsets()[j] + c0 + h;
      // Same scale as the clip tolerance, so every reported violation cuts.
      if (n.dot(v) - off > 1e-12 * (std::abs(off) + n.norm() * scale)) violators.push_back(hit.index);
    }
    if (violators.empty()) return poly;
    std::sort(violators.begin(), violators.end());
    violators.erase(std::unique(violators.begin(), violators.end()), violators.end());
    for (int j : violators) {
      const auto k = static_cast<std::size_t>(j);
      poly = poly.clip(HalfPlane{f.slopes()[k] - p, f.offsets()[k] + c0 + h}, j);
      if (poly.empty()) break;
    }
  }
  return poly;
}

}  // namespace mabvp
