#include "mabvp/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "mabvp/error.hpp"
#include "mabvp/transport.hpp"

namespace mabvp {

namespace {

std::vector<Vec2> boundary_points(const ConvexPolygon& poly, double dx) {
  std::vector<Vec2> out;
  const std::size_t n = poly.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 a = poly[k];
    const Vec2 b = poly[(k + 1) % n];
    const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / (0.5 * dx))));
    for (int i = 0; i < m; ++i) out.push_back(a + (b - a) * (static_cast<double>(i) / m));
  }
  return out;
}

std::vector<Vec2> lattice_points(const ConvexPolygon& poly, double dx, const Vec2& origin, double angle) {
  const Mat2 r = Eigen::Rotation2Dd(angle).toRotationMatrix();
  const ConvexPolygon local = poly.transformed(r.transpose(), -r.transpose() * origin);
  const auto [lo, hi] = local.bounds();
  const int i0 = static_cast<int>(std::floor(lo.x() / dx)), i1 = static_cast<int>(std::ceil(hi.x() / dx));
  const int j0 = static_cast<int>(std::floor(lo.y() / dx)), j1 = static_cast<int>(std::ceil(hi.y() / dx));
  std::vector<Vec2> out;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Vec2 x = origin + r * Vec2(i * dx, j * dx);
      if (poly.contains(x) && poly.boundary_distance(x) > 0.25 * dx) out.push_back(x);
    }
  }
  return out;
}

// Gradient cells of the interior nodes: cells of F(p) = max_j (x_j . p - w_j).
struct Measures {
  std::vector<double> area;
  std::vector<std::vector<std::pair<int, double>>> edges;  // (neighbour, length)
  std::vector<std::vector<int>> hints;
  bool touches_box = false;
};

Measures gradient_cells(const std::vector<Vec2>& nodes, const std::vector<double>& values, std::size_t interior,
                        double box_radius, const std::vector<std::vector<int>>& hints) {
  const MaxAffine f(nodes, values);
  const ConvexPolygon box = ConvexPolygon::box(Vec2::Constant(-box_radius), Vec2::Constant(box_radius));
  Measures m;
  m.area.assign(interior, 0.0);
  m.edges.resize(interior);
  m.hints.resize(interior);
  for (std::size_t i = 0; i < interior; ++i) {
    const ConvexPolygon cell = laguerre_cell(f, i, box, hints.empty() ? nullptr : &hints[i]);
    if (cell.empty()) continue;
    m.area[i] = cell.area();
    for (std::size_t k = 0; k < cell.size(); ++k) {
      const int j = cell.edge_tags()[k];
      if (j == kBoxTag) {
        m.touches_box = true;
        continue;
      }
      if (j < 0) continue;
      const double len = (cell[(k + 1) % cell.size()] - cell[k]).norm();
      m.hints[i].push_back(j);
      if (len > 0.0) m.edges[i].emplace_back(j, len);
    }
  }
  return m;
}

double relative_residual(const std::vector<double>& g, const std::vector<double>& t) {
  double r = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) r = std::max(r, std::abs(g[i] - t[i]) / t[i]);
  return r;
}

}  // namespace

DirichletSolution solve_dirichlet(const ConvexPolygon& domain, const std::function<double(const Vec2&)>& boundary,
                                  double rhs, double dx, const DirichletOptions& options) {
  if (domain.empty()) throw Error(ErrorCode::kInvalidSpec, "solve_dirichlet: empty domain");
  if (!(rhs > 0.0)) throw Error(ErrorCode::kInvalidSpec, "solve_dirichlet: rhs must be positive");
  if (!(dx > 0.0) || domain.diameter() / dx < 10.0)
    throw Error(ErrorCode::kInvalidSpec, "solve_dirichlet: dx must resolve the domain (10 nodes across)");

  DirichletSolution out;
  out.rhs = rhs;
  out.dx = dx;
  out.nodes = lattice_points(domain, dx, options.lattice_origin, options.lattice_angle);
  out.boundary_nodes = boundary_points(domain, dx);
  for (const auto& b : out.boundary_nodes) out.boundary_values.push_back(boundary(b));
  const std::size_t n = out.nodes.size();
  if (n == 0) throw Error(ErrorCode::kInvalidSpec, "solve_dirichlet: no interior nodes");

  std::vector<Vec2> all = out.nodes;
  all.insert(all.end(), out.boundary_nodes.begin(), out.boundary_nodes.end());

  // Dual areas: Voronoi cells of all nodes clipped to the domain.
  {
    std::vector<double> half(all.size());
    for (std::size_t j = 0; j < all.size(); ++j) half[j] = 0.5 * all[j].squaredNorm();
    const LaguerreDiagram vor = laguerre_diagram(MaxAffine(all, half), domain);
    out.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.targets[i] = rhs * vor.cells[i].area();
  }

  // Start from a paraboloid with the right determinant lying below the data.
  const double c = std::sqrt(rhs);
  const Vec2 xc = domain.centroid();
  double m0 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < out.boundary_nodes.size(); ++j)
    m0 = std::min(m0, out.boundary_values[j] - 0.5 * c * (out.boundary_nodes[j] - xc).squaredNorm());
  std::vector<double> values(all.size());
  for (std::size_t i = 0; i < n; ++i) values[i] = m0 + 0.5 * c * (out.nodes[i] - xc).squaredNorm();
  for (std::size_t j = 0; j < out.boundary_nodes.size(); ++j) values[n + j] = out.boundary_values[j];

  auto box_radius = [&](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return 8.0 * (*hi - *lo) / dx + 4.0 * c * domain.diameter() + 1.0;
  };
  double radius = box_radius(values);
  std::vector<std::vector<int>> hints;
  auto measure = [&](const std::vector<double>& v) {
    for (int grow = 0; grow < 8; ++grow) {
      Measures m = gradient_cells(all, v, n, radius, hints);
      if (!m.touches_box) return m;
      radius *= 4.0;
    }
    throw Error(ErrorCode::kConstructionError, "solve_dirichlet: unbounded gradient cell");
  };

  Measures cur = measure(values);
  hints = cur.hints;
  double res = relative_residual(cur.area, out.targets);
  out.history.push_back(res);
  const double floor = 0.3 * std::min(*std::min_element(cur.area.begin(), cur.area.end()),
                                      *std::min_element(out.targets.begin(), out.targets.end()));
  int it = 0;
  for (; it < options.max_iterations && res > options.tol; ++it) {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs_vec(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      rhs_vec[static_cast<Eigen::Index>(i)] = cur.area[i] - out.targets[i];
      for (const auto& [j, len] : cur.edges[i]) {
        const double w = 0.5 * len / (all[i] - all[static_cast<std::size_t>(j)]).norm();
        trips.emplace_back(static_cast<int>(i), static_cast<int>(i), w);
        trips.emplace_back(static_cast<int>(i), static_cast<int>(i), w);
        if (static_cast<std::size_t>(j) < n) {
          trips.emplace_back(static_cast<int>(i), j, -w);
          trips.emplace_back(j, static_cast<int>(i), -w);
        }
      }
    }
    Eigen::SparseMatrix<double> lap(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    lap.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::kSingularMap, "solve_dirichlet: singular Laplacian");
    const Eigen::VectorXd d = solver.solve(rhs_vec);

    const double abs_res = [&] {
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(cur.area[i] - out.targets[i]));
      return r;
    }();
    bool accepted = false;
    for (double alpha = 1.0; alpha >= std::ldexp(1.0, -30); alpha *= 0.5) {
      std::vector<double> trial = values;
      for (std::size_t i = 0; i < n; ++i) trial[i] += alpha * d[static_cast<Eigen::Index>(i)];
      Measures m = measure(trial);
      double trial_abs = 0.0;
      for (std::size_t i = 0; i < n; ++i) trial_abs = std::max(trial_abs, std::abs(m.area[i] - out.targets[i]));
      if (*std::min_element(m.area.begin(), m.area.end()) >= floor && trial_abs <= (1.0 - 0.5 * alpha) * abs_res) {
        values = std::move(trial);
        cur = std::move(m);
        hints = cur.hints;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NonConvergence("solve_dirichlet: damping exhausted", out.history);
    res = relative_residual(cur.area, out.targets);
    out.history.push_back(res);
  }
  if (res > options.tol) throw NonConvergence("solve_dirichlet: iteration cap reached", out.history);

  out.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n));
  out.measures = cur.area;
  out.residual = res;
  out.iterations = it;

  // Every vertex of every gradient cell is a supporting plane of the envelope.
  {
    const MaxAffine f(all, values);
    const ConvexPolygon box = ConvexPolygon::box(Vec2::Constant(-radius), Vec2::Constant(radius));
    std::vector<Vec2> slopes;
    std::vector<double> offsets;
    for (std::size_t j = 0; j < all.size(); ++j) {
      const ConvexPolygon cell = laguerre_cell(f, j, box, j < n ? &hints[j] : nullptr);
      for (const auto& p : cell.vertices()) {
        slopes.push_back(p);
        offsets.push_back(p.dot(all[j]) - values[j]);
      }
    }
    out.envelope = MaxAffine(std::move(slopes), std::move(offsets));
  }
  return out;
}

Mat2 quadratic_fit_hessian(const DirichletSolution& w, const Vec2& p, double radius) {
  std::vector<Vec2> xs;
  std::vector<double> vs;
  double r = radius;
  for (int grow = 0; grow < 20; ++grow, r *= 1.5) {
    xs.clear();
    vs.clear();
    for (std::size_t i = 0; i < w.nodes.size(); ++i) {
      if ((w.nodes[i] - p).norm() <= r) {
        xs.push_back(w.nodes[i]);
        vs.push_back(w.values[i]);
      }
    }
    if (xs.size() >= 12) break;
  }
  if (xs.size() < 6) throw Error(ErrorCode::kInsufficientData, "quadratic_fit_hessian: too few nodes");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(xs.size()), 6);
  Eigen::VectorXd b(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Vec2 d = (xs[k] - p) / r;
    a.row(static_cast<Eigen::Index>(k)) << 1.0, d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
    b[static_cast<Eigen::Index>(k)] = vs[k];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  Mat2 h;
  h << c[3], c[4], c[4], c[5];
  return h / (r * r);
}

namespace {

DirichletOptions lattice_for(const DhSet& d, const Frame& frame, double tol) {
  DirichletOptions o;
  o.tol = tol;
  o.lattice_origin = d.center;
  o.lattice_angle = std::atan2(frame.e1.y(), frame.e1.x());
  return o;
}

}  // namespace

ComparisonGap comparison_gap(const MaxAffine& u, const ConvexPolygon& region, const Frame& frame,
                             const std::vector<double>& heights, double f_x0, const ComparisonOptions& options) {
  if (!(f_x0 > 0.0)) throw Error(ErrorCode::kInvalidSpec, "comparison_gap: density must be positive at x0");
  const double scale = 1.0 / std::sqrt(f_x0);
  const Recentred ub = recentre(u, frame.origin, scale, options.slope);
  ComparisonGap out;
  std::vector<double> hs, ins, alls;
  for (double h : heights) {
    GapLevel g;
    g.h = h;
    try {
      const DhSet d = dh_set(u, region, frame, h, scale, options.slope);
      g.a = d.a;
      const double dx = d.polygon.diameter() / options.nodes_across;
      const DirichletSolution w =
          solve_dirichlet(d.polygon, [h](const Vec2&) { return h; }, 1.0, dx, lattice_for(d, frame, options.tol));
      for (std::size_t i = 0; i < w.nodes.size(); ++i) {
        const Vec2& x = w.nodes[i];
        const double depth = (x - frame.origin).dot(frame.e2) - d.a;
        const Vec2 mirrored = depth < 0.0 ? Vec2(x - 2.0 * depth * frame.e2) : x;
        g.sup_all = std::max(g.sup_all, std::abs(ub(mirrored) - w.values[i]));
        if (region.contains(x)) g.sup_inside = std::max(g.sup_inside, std::abs(ub(x) - w.values[i]));
      }
      g.nodes = static_cast<int>(w.nodes.size());
      g.ok = true;
      hs.push_back(h);
      ins.push_back(g.sup_inside);
      alls.push_back(g.sup_all);
    } catch (const Error& e) {
      g.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    out.levels.push_back(g);
  }
  if (hs.size() >= 3) {
    out.fitted = true;
    out.exponent = loglog_slope(hs, ins);
    out.exponent_all = loglog_slope(hs, alls);
  }
  return out;
}

CascadeReport cascade_report(const MaxAffine& u, const ConvexPolygon& region, const Frame& frame,
                             const DensityField& f, double h0, int K, const ComparisonOptions& options) {
  if (K < 1 || K > 6) throw Error(ErrorCode::kInvalidSpec, "cascade_report: K must be in 1..6");
  const double fx0 = f(frame.origin);
  if (!(fx0 > 0.0)) throw Error(ErrorCode::kInvalidSpec, "cascade_report: density must be positive at x0");
  const double scale = 1.0 / std::sqrt(fx0);
  CascadeReport out;
  std::vector<DhSet> domains;
  std::vector<DirichletSolution> sols;
  for (int k = 0; k <= K; ++k) {
    CascadeLevel lv;
    lv.k = k;
    lv.h = h0 * std::pow(4.0, -k);
    try {
      DhSet d = dh_set(u, region, frame, lv.h, scale, options.slope);
      const auto [lo, hi] = f.bounds(d.polygon.clip(region));
      lv.f_inf = lo / fx0;
      lv.omega = (hi - lo) / fx0;
      lv.center = d.center;
      const double dx = d.polygon.diameter() / options.nodes_across;
      const double h = lv.h;
      DirichletSolution w =
          solve_dirichlet(d.polygon, [h](const Vec2&) { return h; }, lv.f_inf, dx, lattice_for(d, frame, options.tol));
      lv.nodes = static_cast<int>(w.nodes.size());
      lv.residual = w.residual;
      lv.hessian_self = quadratic_fit_hessian(w, d.center, 0.5 * d.inradius);
      domains.push_back(std::move(d));
      sols.push_back(std::move(w));
    } catch (const Error& e) {
      out.truncated = true;
      out.error = "level " + std::to_string(k) + ": " + to_string(e.code()) + ": " + e.what();
      break;
    }
    out.levels.push_back(lv);
  }
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (std::size_t k = 0; k + 1 < out.levels.size(); ++k) {
    auto& lv = out.levels[k];
    const DhSet& next = domains[k + 1];
    lv.hessian_next = quadratic_fit_hessian(sols[k], next.center, 0.5 * next.inradius);
    lv.gap = (lv.hessian_next - out.levels[k + 1].hessian_self).norm();
    out.gap_sum += lv.gap;
    out.omega_sum += lv.omega;
    if (lv.omega > 0.0) {
      const double q = lv.gap / lv.omega;
      rmin = std::min(rmin, q);
      rmax = std::max(rmax, q);
    }
  }
  if (rmax > 0.0) {
    out.constant = rmax;
    out.ratio_spread = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace mabvp
