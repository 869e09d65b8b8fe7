#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mabvp/density.hpp"
#include "mabvp/geometry.hpp"
#include "mabvp/max_affine.hpp"

namespace mabvp {

struct TargetSample {
  std::vector<Vec2> sites;
  std::vector<double> masses;
};

/// Halton points with a seeded Cranley-Patterson shift, rejected to the
/// target, then `lloyd_iterations` centroidal Voronoi steps. Equal masses
/// area(target)/n. `frame` rotates the result: sampling happens in the
/// canonical frame of `target.rotated(-frame)` so rotated scenarios see
/// rotated sites rather than a different point set.
TargetSample sample_target(const ConvexDomain& target, int n, std::uint64_t seed, int lloyd_iterations = 30,
                           double frame = 0.0);

/// u(x) = max_i (x . y_i - psi_i). Defined on the whole plane.
class SemiDiscretePotential {
 public:
  SemiDiscretePotential() = default;
  SemiDiscretePotential(std::vector<Vec2> sites, std::vector<double> masses, std::vector<double> weights);

  std::size_t size() const { return sites_.size(); }
  const std::vector<Vec2>& sites() const { return sites_; }
  const std::vector<double>& masses() const { return masses_; }
  const std::vector<double>& weights() const { return weights_; }
  const MaxAffine& function() const { return f_; }

  double operator()(const Vec2& x) const { return f_(x); }
  int cell_of(const Vec2& x) const { return f_.argmax(x).index; }

  /// Index whose weight is pinned to 0.
  int gauge() const { return static_cast<int>(sites_.size()) - 1; }
  double residual = 0.0;  // max relative cell-mass error at the last solve
  int iterations = 0;

 private:
  std::vector<Vec2> sites_;
  std::vector<double> masses_;
  std::vector<double> weights_;
  MaxAffine f_;
};

struct Adjacency {
  int i = 0;
  int j = 0;
  double length = 0.0;
};

struct LaguerreDiagram {
  std::vector<ConvexPolygon> cells;  // cells[i] belongs to site i; may be empty
  std::vector<Adjacency> adjacency;  // i < j, sorted
  /// Neighbour lists per cell, usable as construction hints.
  std::vector<std::vector<int>> neighbours() const;
};

/// Cell of piece i within `box`, built by clipping with the pieces that win
/// at its vertices until none does.
ConvexPolygon laguerre_cell(const MaxAffine& f, std::size_t i, const ConvexPolygon& box,
                            const std::vector<int>* hint = nullptr);

/// Cells of u restricted to `region`. Optional per-cell neighbour hints speed
/// up construction; the result is exact either way.
LaguerreDiagram laguerre_diagram(const MaxAffine& f, const ConvexPolygon& region,
                                 const std::vector<std::vector<int>>* hints = nullptr, int threads = 1);
LaguerreDiagram laguerre_diagram(const SemiDiscretePotential& u, const ConvexDomain& source, int threads = 1);

struct SolveOptions {
  double tol = 1e-7;
  int max_iterations = 200;
  double damping_fraction = 0.3;
  int threads = 1;
  /// Called once per accepted Newton step with (iteration, residual, step).
  std::function<void(int, double, double)> progress;
};

/// Damped Newton for the weights so each cell carries f-mass m_i.
SemiDiscretePotential solve_potential(const ConvexDomain& source, const DensityField& f, const std::vector<Vec2>& sites,
                                      const std::vector<double>& masses, const SolveOptions& options = {});

/// Gradient of u at x; the site of the active piece (lowest index on ties).
Vec2 brenier_map(const SemiDiscretePotential& u, const Vec2& x);

/// Legendre dual v(y) = max_k (x_k . y - u(x_k)) over the vertices of the
/// diagram and of the source polygon. It is itself max-affine with slopes in
/// the source, and v(y_i) = psi_i for every site with a nonempty cell.
class DualPotential {
 public:
  DualPotential() = default;
  DualPotential(std::vector<Vec2> points, std::vector<double> values);

  double operator()(const Vec2& y) const { return f_(y); }
  Vec2 gradient(const Vec2& y) const { return f_.slopes()[static_cast<std::size_t>(f_.argmax(y).index)]; }
  const MaxAffine& function() const { return f_; }

 private:
  MaxAffine f_;
};

DualPotential legendre_dual(const SemiDiscretePotential& u, const ConvexDomain& source);
DualPotential legendre_dual(const SemiDiscretePotential& u, const LaguerreDiagram& diagram);

}  // namespace mabvp
