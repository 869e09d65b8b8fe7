#include "mabvp/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "mabvp/parallel.hpp"

namespace mabvp {

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

TargetSample sample_target(const ConvexDomain& target, int n, std::uint64_t seed, int lloyd_iterations,
                           double frame) {
  if (n < 1) throw Error(ErrorCode::kInvalidSpec, "sample_target: n must be positive");
  const ConvexDomain canonical = frame == 0.0 ? target : target.rotated(-frame);
  const ConvexPolygon& poly = canonical.polygon();
  auto [lo, hi] = poly.bounds();
  std::mt19937_64 rng(seed);
  const double s1 = unit_double(rng), s2 = unit_double(rng);

  TargetSample out;
  out.sites.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t i = 1; out.sites.size() < static_cast<std::size_t>(n); ++i) {
    double a = radical_inverse(i, 2) + s1, b = radical_inverse(i, 3) + s2;
    a -= std::floor(a);
    b -= std::floor(b);
    const Vec2 p(lo.x() + a * (hi.x() - lo.x()), lo.y() + b * (hi.y() - lo.y()));
    if (poly.contains(p)) out.sites.push_back(p);
  }

  std::vector<std::vector<int>> hints;
  for (int it = 0; it < lloyd_iterations; ++it) {
    std::vector<double> offsets(out.sites.size());
    for (std::size_t i = 0; i < offsets.size(); ++i) offsets[i] = 0.5 * out.sites[i].squaredNorm();
    const MaxAffine f(out.sites, offsets);
    const auto diagram = laguerre_diagram(f, poly, hints.empty() ? nullptr : &hints);
    for (std::size_t i = 0; i < out.sites.size(); ++i)
      if (!diagram.cells[i].empty()) out.sites[i] = diagram.cells[i].centroid();
    hints = diagram.neighbours();
  }
  if (frame != 0.0) {
    const Mat2 r = Eigen::Rotation2Dd(frame).toRotationMatrix();
    for (auto& s : out.sites) s = r * s;
  }
  out.masses.assign(out.sites.size(), target.area() / n);
  return out;
}

SemiDiscretePotential::SemiDiscretePotential(std::vector<Vec2> sites, std::vector<double> masses,
                                             std::vector<double> weights)
    : sites_(std::move(sites)), masses_(std::move(masses)), weights_(std::move(weights)), f_(sites_, weights_) {
  if (masses_.size() != sites_.size()) throw Error(ErrorCode::kInvalidSpec, "potential: masses/sites mismatch");
}

Vec2 brenier_map(const SemiDiscretePotential& u, const Vec2& x) {
  return u.sites()[static_cast<std::size_t>(u.cell_of(x))];
}

namespace {

struct Evaluation {
  LaguerreDiagram diagram;
  Eigen::VectorXd mass;
};

Evaluation evaluate(const std::vector<Vec2>& sites, const Eigen::VectorXd& psi, const ConvexPolygon& region,
                    const DensityField& f, const std::vector<std::vector<int>>* hints, int threads) {
  const MaxAffine fn(sites, std::vector<double>(psi.data(), psi.data() + psi.size()));
  Evaluation e;
  e.diagram = laguerre_diagram(fn, region, hints, threads);
  e.mass.resize(psi.size());
  parallel_for(sites.size(), threads,
               [&](std::size_t i) { e.mass[static_cast<Eigen::Index>(i)] = f.integrate(e.diagram.cells[i]); });
  return e;
}

// Graph Laplacian of the diagram; off-diagonals are the f-weighted shared edge
// length over the site distance.
Eigen::SparseMatrix<double> laplacian(const LaguerreDiagram& d, const std::vector<Vec2>& sites,
                                      const DensityField& f, int pinned) {
  std::vector<Eigen::Triplet<double>> trips;
  const int n = static_cast<int>(sites.size());
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const auto& c = d.cells[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < c.size(); ++k) {
      const int j = c.edge_tags()[k];
      if (j <= i) continue;
      const double w = f.integrate_edge(c[k], c[(k + 1) % c.size()]) /
                       (sites[static_cast<std::size_t>(i)] - sites[static_cast<std::size_t>(j)]).norm();
      if (!(w > 0.0)) continue;
      diag[i] += w;
      diag[j] += w;
      if (i != pinned && j != pinned) {
        const int a = i < pinned ? i : i - 1;
        const int b = j < pinned ? j : j - 1;
        trips.emplace_back(a, b, -w);
        trips.emplace_back(b, a, -w);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (i == pinned) continue;
    const int a = i < pinned ? i : i - 1;
    trips.emplace_back(a, a, diag[i]);
  }
  Eigen::SparseMatrix<double> l(n - 1, n - 1);
  l.setFromTriplets(trips.begin(), trips.end());
  return l;
}

double max_relative_error(const Eigen::VectorXd& g, const Eigen::VectorXd& m) {
  return ((g - m).array().abs() / m.array()).maxCoeff();
}

}  // namespace

SemiDiscretePotential solve_potential(const ConvexDomain& source, const DensityField& f, const std::vector<Vec2>& sites,
                                      const std::vector<double>& masses, const SolveOptions& options) {
  const std::size_t n = sites.size();
  if (n == 0 || masses.size() != n) throw Error(ErrorCode::kInvalidSpec, "solve_potential: bad site/mass lists");
  const ConvexPolygon& region = source.polygon();
  const Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(masses.data(), static_cast<Eigen::Index>(n));
  const double total = f.integrate(region);
  if (std::abs(m.sum() - total) > 1e-6 * total)
    throw Error(ErrorCode::kInvalidSpec, "solve_potential: masses do not balance the source density");

  if (n == 1) {
    SemiDiscretePotential u(sites, masses, {0.0});
    u.residual = std::abs(total - m[0]) / m[0];
    return u;
  }

  // Weights that make the cells the Voronoi cells of c y_i + b, which sit
  // inside the source; halve c if that still leaves an empty cell.
  Vec2 ybar = Vec2::Zero();
  for (const auto& y : sites) ybar += y;
  ybar /= static_cast<double>(n);
  double spread = 0.0;
  for (const auto& y : sites) spread = std::max(spread, (y - ybar).norm());
  const Vec2 xbar = region.centroid();
  const double inradius = region.boundary_distance(xbar);
  double c = spread > 0.0 ? 0.5 * inradius / spread : 1.0;

  const int pinned = static_cast<int>(n) - 1;
  Eigen::VectorXd psi(static_cast<Eigen::Index>(n));
  Evaluation cur;
  bool ok = false;
  for (int attempt = 0; attempt <= 10 && !ok; ++attempt, c *= 0.5) {
    const Vec2 b = xbar - c * ybar;
    for (std::size_t i = 0; i < n; ++i)
      psi[static_cast<Eigen::Index>(i)] = (c * sites[i] + b).squaredNorm() / (2.0 * c);
    psi.array() -= psi[pinned];
    cur = evaluate(sites, psi, region, f, nullptr, options.threads);
    ok = cur.mass.minCoeff() > 0.0;
  }
  if (!ok) throw Error(ErrorCode::kDegenerateConfiguration, "solve_potential: empty cell at initialization");

  const double floor = options.damping_fraction * std::min(cur.mass.minCoeff(), m.minCoeff());
  std::vector<double> history;
  int it = 0;
  double res = max_relative_error(cur.mass, m);
  history.push_back(res);
  while (res > options.tol) {
    if (it >= options.max_iterations)
      throw NonConvergence("solve_potential: iteration cap reached", history);
    const auto l = laplacian(cur.diagram, sites, f, pinned);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n - 1));
    for (int i = 0, a = 0; i < static_cast<int>(n); ++i)
      if (i != pinned) rhs[a++] = cur.mass[i] - m[i];
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(static_cast<Eigen::Index>(10 * n));
    cg.compute(l);
    const Eigen::VectorXd red = cg.solve(rhs);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (int i = 0, a = 0; i < static_cast<int>(n); ++i)
      if (i != pinned) d[i] = red[a++];

    const double err0 = (cur.mass - m).cwiseAbs().maxCoeff();
    const auto hints = cur.diagram.neighbours();
    double alpha = 1.0;
    for (;;) {
      const Eigen::VectorXd trial = psi + alpha * d;
      Evaluation next = evaluate(sites, trial, region, f, &hints, options.threads);
      const double err = (next.mass - m).cwiseAbs().maxCoeff();
      if (next.mass.minCoeff() >= floor && err <= (1.0 - 0.5 * alpha) * err0) {
        psi = trial;
        cur = std::move(next);
        break;
      }
      alpha *= 0.5;
      if (alpha < 0x1.0p-30) throw NonConvergence("solve_potential: damping underflow", history);
    }
    ++it;
    res = max_relative_error(cur.mass, m);
    history.push_back(res);
    if (options.progress) options.progress(it, res, alpha);
  }

  SemiDiscretePotential u(sites, masses, std::vector<double>(psi.data(), psi.data() + psi.size()));
  u.residual = res;
  u.iterations = it;
  return u;
}

DualPotential::DualPotential(std::vector<Vec2> points, std::vector<double> values)
    : f_(std::move(points), std::move(values)) {}

DualPotential legendre_dual(const SemiDiscretePotential& u, const LaguerreDiagram& diagram) {
  std::vector<Vec2> pts;
  for (const auto& c : diagram.cells) pts.insert(pts.end(), c.vertices().begin(), c.vertices().end());
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y(); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> vals(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) vals[k] = u(pts[k]);
  return DualPotential(std::move(pts), std::move(vals));
}

DualPotential legendre_dual(const SemiDiscretePotential& u, const ConvexDomain& source) {
  return legendre_dual(u, laguerre_diagram(u, source));
}

}  // namespace mabvp
