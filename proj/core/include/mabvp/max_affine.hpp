#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mabvp/geometry.hpp"

namespace mabvp {

/// Convex piecewise-affine function F(x) = max_i (slope_i . x - offset_i).
///
/// Queries use a kd-tree over the slopes with branch-and-bound on the upper
/// bound max_{s in box} s . x - min offset. A diagonal quadratic model
/// offset ~ s'Qs/2 + a.s + c is fitted at construction; writing the residual
/// as a weight w turns the query into a scaled nearest-neighbour search with
/// bound x'Q^{-1}x'/2 - dist_Q(Q^{-1}x', box)^2/2 - c - min w, x' = x - a.
/// Ties resolve to the lowest index.
class MaxAffine {
 public:
  MaxAffine() = default;
  MaxAffine(std::vector<Vec2> slopes, std::vector<double> offsets);

  std::size_t size() const { return slopes_.size(); }
  const std::vector<Vec2>& slopes() const { return slopes_; }
  const std::vector<double>& offsets() const { return offsets_; }

  double piece(std::size_t i, const Vec2& x) const { return slopes_[i].dot(x) - offsets_[i]; }

  struct Hit {
    int index = -1;
    double value = 0.0;
  };
  Hit argmax(const Vec2& x) const;
  double operator()(const Vec2& x) const { return argmax(x).value; }

  /// Changes one offset in O(depth) and keeps the tree bounds valid.
  void set_offset(std::size_t i, double offset);

 private:
  struct Node {
    Vec2 lo = Vec2::Zero(), hi = Vec2::Zero();
    double min_offset = 0.0;
    double min_weight = 0.0;  // min of offset - |slope|^2 / 2
    int begin = 0, end = 0;  // range in order_
    int left = -1, right = -1;
    int parent = -1;
  };
  int build(int begin, int end, int parent);
  double bound(const Node& n, const Vec2& x) const;
  void fit_model();
  double weight(int i) const {
    const Vec2& s = slopes_[i];
    return offsets_[i] - (0.5 * (q_.x() * s.x() * s.x() + q_.y() * s.y() * s.y()) + a_.dot(s) + c_);
  }

  std::vector<Vec2> slopes_;
  std::vector<double> offsets_;
  std::vector<int> order_;
  std::vector<int> leaf_of_;
  std::vector<Node> nodes_;
  bool model_ = false;
  Vec2 q_ = Vec2::Zero();
  Vec2 a_ = Vec2::Zero();
  double c_ = 0.0;
};

/// Sub-level polygon {x in start : F(x) <= c0 + p . x + h}.
///
/// Built by clipping `start` with the violated affine pieces at its vertices
/// until every vertex satisfies the inequality; the result is exact at the
/// function's own resolution. Edge tags carry the active piece index.
ConvexPolygon sublevel_polygon(const MaxAffine& f, const ConvexPolygon& start, const Vec2& p, double c0, double h);

}  // namespace mabvp
