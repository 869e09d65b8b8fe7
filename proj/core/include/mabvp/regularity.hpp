#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mabvp/density.hpp"
#include "mabvp/geometry.hpp"
#include "mabvp/transport.hpp"

namespace mabvp {

struct HessianSample {
  Vec2 x = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
  double radius = 0.0;
  double residual = 0.0;           // weighted RMS of the affine fit
  double boundary_distance = 0.0;
  double weight = 0.0;             // area of the sample's Voronoi cell in the source
  int cells = 0;
  bool widened = false;
};

struct HessianField {
  std::vector<HessianSample> samples;
  std::vector<Vec2> dropped;  // fewer than 6 cells after three widenings
};

/// r(x) = max(rho * dist(x, boundary), kappa * N^{-1/4}).
struct RadiusPolicy {
  double rho = 0.5;
  double kappa = 0.0;  // 0 selects 2 * diam(source)
};

/// Square lattice of the given spacing inside the source, generated in the
/// frame rotated by -frame and rotated back. Points within `corner_exclusion`
/// of an unsmoothed corner are skipped.
std::vector<Vec2> lattice_samples(const ConvexDomain& source, double spacing, double frame = 0.0,
                                  double corner_exclusion = 0.0);

/// D^2u at each sample as the symmetrized slope of a cell-mass weighted
/// least-squares affine fit of centroid -> site over cells meeting B_r(x).
HessianField hessian_field(const SemiDiscretePotential& u, const LaguerreDiagram& diagram, const ConvexDomain& source,
                           const std::vector<Vec2>& samples, const RadiusPolicy& policy = {},
                           int threads = 1);

/// Central second differences of u at step `step`.
Mat2 second_difference_hessian(const SemiDiscretePotential& u, const Vec2& x, double step);

struct ObliquenessSample {
  double s = 0.0;
  Vec2 x = Vec2::Zero();
  double value = 0.0;
  double projection_distance = 0.0;
  bool reliable = true;
};

struct ObliquenessProfile {
  std::vector<ObliquenessSample> samples;
  double min = 0.0;
  double p5 = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  int unreliable = 0;
};

ObliquenessProfile obliqueness_profile(const SemiDiscretePotential& u, const ConvexDomain& source,
                                       const ConvexDomain& target, int samples, double corner_exclusion = 0.0);

struct BandQuotient {
  int band = 0;
  double lo = 0.0;
  double hi = 0.0;
  double max = 0.0;
  int pairs = 0;
};

/// Per dyadic distance band [2^{-k-1}, 2^{-k}] d0 the max of
/// |H(x) - H(z)|_F / |x - z|^alpha over sample pairs, optionally restricted to
/// samples within `radius` of `center`. Empty bands are omitted.
std::vector<BandQuotient> holder_seminorm(const HessianField& field, double alpha, double d0, int bands,
                                          const Vec2& center = Vec2::Zero(),
                                          double radius = std::numeric_limits<double>::infinity());

/// (sum_x weight(x) |H(x)|_F^p)^{1/p}.
double sobolev_norm(const HessianField& field, double p);

struct ModulusReport {
  std::vector<double> r;
  std::vector<double> omega;  // max |H(x) - H(z)|_F over |x - z| <= r
  std::vector<double> dini;   // integral of omega_f(t)/t over [0, r]
  double trend_exponent = 0.0;
  bool decreasing = true;
};

ModulusReport modulus_report(const HessianField& field, const DensityField& f, const std::vector<double>& radii);

/// Linear-interpolated percentile of an unsorted list, q in [0, 100].
double percentile(std::vector<double> values, double q);

}  // namespace mabvp
