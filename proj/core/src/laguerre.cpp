#include <algorithm>
#include <cmath>

#include "mabvp/parallel.hpp"
#include "mabvp/transport.hpp"

namespace mabvp {

namespace {

double vertex_scale(const ConvexPolygon& p) {
  double s = 0.0;
  for (const auto& v : p.vertices()) s = std::max(s, v.cwiseAbs().maxCoeff());
  return s;
}

// {x : piece_i(x) >= piece_j(x)} written as a half-plane.
HalfPlane separator(const MaxAffine& f, std::size_t i, std::size_t j) {
  return HalfPlane{f.slopes()[j] - f.slopes()[i], f.offsets()[j] - f.offsets()[i]};
}

}  // namespace

ConvexPolygon laguerre_cell(const MaxAffine& f, std::size_t i, const ConvexPolygon& box, const std::vector<int>* hint) {
  ConvexPolygon cell = box;
  if (hint) {
    for (int j : *hint) {
      if (static_cast<std::size_t>(j) == i) continue;
      cell = cell.clip(separator(f, i, static_cast<std::size_t>(j)), j);
      if (cell.empty()) return {};
    }
  }
  // Clip by the pieces that beat piece i at some vertex until none does.
  std::vector<int> violators;
  for (int pass = 0; pass < 10000; ++pass) {
    violators.clear();
    const double scale = vertex_scale(cell);
    for (const auto& v : cell.vertices()) {
      const auto hit = f.argmax(v);
      if (static_cast<std::size_t>(hit.index) == i) continue;
      const HalfPlane hp = separator(f, i, static_cast<std::size_t>(hit.index));
      if (hp.signed_distance(v) > 1e-12 * (std::abs(hp.offset) + hp.normal.norm() * scale))
        violators.push_back(hit.index);
    }
    if (violators.empty()) break;
    std::sort(violators.begin(), violators.end());
    violators.erase(std::unique(violators.begin(), violators.end()), violators.end());
    for (int j : violators) {
      cell = cell.clip(separator(f, i, static_cast<std::size_t>(j)), j);
      if (cell.empty()) return {};
    }
  }
  return cell;
}

namespace {

ConvexPolygon build_cell(const MaxAffine& f, std::size_t i, const ConvexPolygon& box, const ConvexPolygon& region,
                         const std::vector<int>* hint) {
  ConvexPolygon cell = laguerre_cell(f, i, box, hint);
  // Restrict to the region using only the edges that cut.
  const auto& w = region.vertices();
  const std::size_t n = w.size();
  for (std::size_t k = 0; k < n && !cell.empty(); ++k) {
    const Vec2 e = w[(k + 1) % n] - w[k];
    const HalfPlane hp{Vec2(e.y(), -e.x()), Vec2(e.y(), -e.x()).dot(w[k])};
    bool cuts = false;
    for (const auto& v : cell.vertices()) {
      if (hp.signed_distance(v) > 0.0) {
        cuts = true;
        break;
      }
    }
    if (cuts) cell = cell.clip(hp, region.edge_tags()[k]);
  }
  return cell;
}

}  // namespace

std::vector<std::vector<int>> LaguerreDiagram::neighbours() const {
  std::vector<std::vector<int>> out(cells.size());
  for (const auto& a : adjacency) {
    out[static_cast<std::size_t>(a.i)].push_back(a.j);
    out[static_cast<std::size_t>(a.j)].push_back(a.i);
  }
  return out;
}

LaguerreDiagram laguerre_diagram(const MaxAffine& f, const ConvexPolygon& region,
                                 const std::vector<std::vector<int>>* hints, int threads) {
  LaguerreDiagram out;
  const std::size_t n = f.size();
  out.cells.resize(n);
  if (n == 0 || region.empty()) return out;
  auto [lo, hi] = region.bounds();
  const double pad = 0.01 * (hi - lo).norm() + 1e-9;
  const ConvexPolygon box = ConvexPolygon::box(lo - Vec2::Constant(pad), hi + Vec2::Constant(pad));

  parallel_for(n, threads, [&](std::size_t i) {
    const std::vector<int>* hint = hints && i < hints->size() ? &(*hints)[i] : nullptr;
    out.cells[i] = build_cell(f, i, box, region, hint);
  });

  const double min_len = 1e-14 * region.diameter();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = out.cells[i];
    for (std::size_t k = 0; k < c.size(); ++k) {
      const int j = c.edge_tags()[k];
      if (j <= static_cast<int>(i)) continue;
      const double len = (c[(k + 1) % c.size()] - c[k]).norm();
      if (len > min_len) out.adjacency.push_back({static_cast<int>(i), j, len});
    }
  }
  std::sort(out.adjacency.begin(), out.adjacency.end(),
            [](const Adjacency& a, const Adjacency& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  return out;
}

LaguerreDiagram laguerre_diagram(const SemiDiscretePotential& u, const ConvexDomain& source, int threads) {
  return laguerre_diagram(u.function(), source.polygon(), nullptr, threads);
}

}  // namespace mabvp
