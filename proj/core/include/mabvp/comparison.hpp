#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mabvp/density.hpp"
#include "mabvp/geometry.hpp"
#include "mabvp/max_affine.hpp"
#include "mabvp/sections.hpp"

namespace mabvp {

struct DirichletOptions {
  double tol = 1e-5;        // max relative measure residual
  int max_iterations = 100;  // Newton steps
  Vec2 lattice_origin = Vec2::Zero();
  double lattice_angle = 0.0;
};

/// Discrete Alexandrov solution of det D^2 w = rhs, w = g on the boundary.
/// Interior nodes sit on a square lattice; boundary nodes are placed along
/// the polygon at spacing at most dx/2.
struct DirichletSolution {
  std::vector<Vec2> nodes;
  std::vector<double> values;
  std::vector<Vec2> boundary_nodes;
  std::vector<double> boundary_values;
  std::vector<double> measures;  // area of each node's gradient cell
  std::vector<double> targets;   // rhs * dual cell area
  std::vector<double> history;   // residual per Newton step
  double rhs = 1.0;
  double dx = 0.0;
  double residual = 0.0;
  int iterations = 0;
  MaxAffine envelope;  // lower convex envelope of all node data

  double operator()(const Vec2& x) const { return envelope(x); }
};

DirichletSolution solve_dirichlet(const ConvexPolygon& domain, const std::function<double(const Vec2&)>& boundary,
                                  double rhs, double dx, const DirichletOptions& options = {});

/// Hessian of a quadratic least-squares fit to the node values within
/// `radius` of p (widened until at least 12 nodes take part).
Mat2 quadratic_fit_hessian(const DirichletSolution& w, const Vec2& p, double radius);

struct ComparisonOptions {
  int nodes_across = 24;  // dx = diam(D_h) / nodes_across
  double tol = 1e-8;
  std::optional<Vec2> slope;  // supporting slope at x0, see recentre
};

struct GapLevel {
  double h = 0.0;
  double a = 0.0;
  double sup_inside = 0.0;  // over nodes in D_h intersected with the region
  double sup_all = 0.0;     // over all nodes, u evenly extended across x_2 = a
  int nodes = 0;
  bool ok = false;
  std::string error;
};

struct ComparisonGap {
  std::vector<GapLevel> levels;
  double exponent = 0.0;
  double exponent_all = 0.0;
  bool fitted = false;  // at least three levels solved
};

/// u is recentred at frame.origin and scaled by 1/sqrt(f_x0) so its density
/// is 1 there; w solves det D^2 w = 1 in D_h with w = h on the boundary.
ComparisonGap comparison_gap(const MaxAffine& u, const ConvexPolygon& region, const Frame& frame,
                             const std::vector<double>& heights, double f_x0, const ComparisonOptions& options = {});

struct CascadeLevel {
  int k = 0;
  double h = 0.0;
  double f_inf = 0.0;
  double omega = 0.0;
  Vec2 center = Vec2::Zero();
  Mat2 hessian_next = Mat2::Zero();  // D^2 u_k at the centre of D_{k+1}
  Mat2 hessian_self = Mat2::Zero();  // D^2 u_k at its own centre
  double gap = 0.0;                  // |D^2 u_k - D^2 u_{k+1}| at the centre of D_{k+1}
  int nodes = 0;
  double residual = 0.0;
};

struct CascadeReport {
  std::vector<CascadeLevel> levels;
  double constant = 0.0;      // max gap_k / omega_k
  double ratio_spread = 0.0;  // max / min of gap_k / omega_k
  double gap_sum = 0.0;
  double omega_sum = 0.0;
  bool truncated = false;
  std::string error;
};

CascadeReport cascade_report(const MaxAffine& u, const ConvexPolygon& region, const Frame& frame,
                             const DensityField& f, double h0, int K, const ComparisonOptions& options = {});

}  // namespace mabvp
