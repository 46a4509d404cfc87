#include "arbor/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "arbor/tree.hpp"  // for Error

namespace arbor {

FiniteCompactum::FiniteCompactum(std::size_t n, std::vector<double> dist)
    : n_(n), d_(std::move(dist)) {
  if (d_.size() != n_ * n_) throw Error("distance matrix size mismatch");
}

FiniteCompactum FiniteCompactum::from_points_2d(
    const std::vector<std::pair<double, double>>& pts) {
  std::size_t n = pts.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = pts[i].first - pts[j].first, dy = pts[i].second - pts[j].second;
      d[i * n + j] = d[j * n + i] = std::sqrt(dx * dx + dy * dy);
    }
  FiniteCompactum m(n, std::move(d));
  m.coords = pts;
  return m;
}

double FiniteCompactum::diameter() const {
  if (diam_cache_ >= 0) return diam_cache_;
  double mx = 0;
  for (double v : d_) mx = std::max(mx, v);
  diam_cache_ = mx;
  return mx;
}

double FiniteCompactum::diameter_of(const std::vector<std::size_t>& subset) const {
  double mx = 0;
  for (std::size_t a = 0; a < subset.size(); ++a)
    for (std::size_t b = a + 1; b < subset.size(); ++b)
      mx = std::max(mx, dist(subset[a], subset[b]));
  return mx;
}

FiniteCompactum FiniteCompactum::restrict_to(std::vector<std::size_t> subset) const {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  std::size_t k = subset.size();
  std::vector<double> d(k * k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) d[a * k + b] = dist(subset[a], subset[b]);
  FiniteCompactum out(k, std::move(d));
  out.resolution = resolution;
  if (!coords.empty())
    for (std::size_t i : subset) out.coords.push_back(coords[i]);
  return out;
}

MetricReport validate_metric(const FiniteCompactum& m, double tolerance,
                             std::uint64_t max_triples) {
  MetricReport rep;
  std::size_t n = m.size();
  double tol = tolerance * std::max(1.0, m.diameter());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(m.dist(i, i)) > tol) rep.violations.push_back({"diagonal", i, i, 0, m.dist(i, i)});
    for (std::size_t j = i + 1; j < n; ++j) {
      double dij = m.dist(i, j), dji = m.dist(j, i);
      if (std::abs(dij - dji) > tol) rep.violations.push_back({"symmetry", i, j, 0, dij - dji});
      if (dij <= tol) rep.violations.push_back({"positivity", i, j, 0, dij});
    }
  }
  std::uint64_t total = std::uint64_t(n) * n * n;
  std::uint64_t stride = 1;
  if (total > max_triples && n > 0) {
    stride = (total + max_triples - 1) / max_triples;
    rep.sampled = true;
  }
  std::uint64_t idx = 0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (stride > 1 && (idx++ % stride)) continue;
        double slack = m.dist(i, j) - m.dist(i, k) - m.dist(k, j);
        if (slack > tol) {
          rep.violations.push_back({"triangle", i, j, k, slack});
          if (rep.violations.size() > 100) return rep;
        }
      }
  return rep;
}

double hausdorff(const FiniteCompactum& m, const PointSet& a, const PointSet& b) {
  if (a.empty() || b.empty()) throw Error("hausdorff of an empty subset");
  auto directed = [&](const PointSet& p, const PointSet& q) {
    double worst = 0;
    for (std::size_t i : p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j : q) best = std::min(best, m.dist(i, j));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

std::vector<double> default_ladder(double diam, int levels) {
  std::vector<double> out;
  double base = diam > 0 ? diam : 1.0;
  for (int k = 0; k < levels; ++k) out.push_back(base * std::ldexp(1.0, -k));
  return out;
}

NullityProfile nullity_profile(const FiniteCompactum& m, const std::vector<PointSet>& family,
                               std::vector<double> ladder) {
  if (ladder.empty()) ladder = default_ladder(m.diameter());
  std::vector<double> diams;
  diams.reserve(family.size());
  for (const auto& s : family) diams.push_back(m.diameter_of(s));
  NullityProfile prof;
  prof.ladder = std::move(ladder);
  for (double eps : prof.ladder) {
    std::size_t c = 0;
    for (double d : diams)
      if (d > eps) ++c;
    prof.counts.push_back(c);
  }
  return prof;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Quotient quotient_metric(const FiniteCompactum& m,
                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::size_t n = m.size();
  UnionFind uf(n);
  for (auto [a, b] : pairs) {
    if (a >= n || b >= n) throw Error("identification pair out of range");
    uf.unite(a, b);
  }
  // Classes in order of smallest member.
  Quotient q;
  q.class_of.assign(n, std::size_t(-1));
  std::vector<std::size_t> rep_to_class(n, std::size_t(-1));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = uf.find(i);
    if (rep_to_class[r] == std::size_t(-1)) {
      rep_to_class[r] = q.classes.size();
      q.classes.push_back({});
    }
    q.class_of[i] = rep_to_class[r];
    q.classes[q.class_of[i]].push_back(i);
  }
  std::size_t c = q.classes.size();
  // Base class-to-class costs: min over member pairs.
  std::vector<double> base(c * c, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < c; ++i) base[i * c + i] = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t ci = q.class_of[i], cj = q.class_of[j];
      if (ci != cj) base[ci * c + cj] = std::min(base[ci * c + cj], m.dist(i, j));
    }
  // Metric closure by dense single-source Dijkstra per class.
  std::vector<double> out(c * c, 0.0);
  std::vector<double> dist(c);
  std::vector<char> done(c);
  for (std::size_t s = 0; s < c; ++s) {
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < c; ++i) dist[i] = base[s * c + i];
    for (std::size_t iter = 0; iter < c; ++iter) {
      std::size_t u = c;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < c; ++i)
        if (!done[i] && dist[i] < best) {
          best = dist[i];
          u = i;
        }
      if (u == c) break;
      done[u] = 1;
      const double* row = &base[u * c];
      for (std::size_t v = 0; v < c; ++v)
        if (!done[v] && dist[u] + row[v] < dist[v]) dist[v] = dist[u] + row[v];
    }
    for (std::size_t i = 0; i < c; ++i) out[s * c + i] = dist[i];
  }
  // Symmetrize exactly (runs are symmetric up to fp association order).
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = i + 1; j < c; ++j) {
      double v = std::min(out[i * c + j], out[j * c + i]);
      out[i * c + j] = out[j * c + i] = v;
    }
  q.space = FiniteCompactum(c, std::move(out));
  q.space.resolution = m.resolution;
  if (!m.coords.empty()) {
    for (const auto& cls : q.classes) q.space.coords.push_back(m.coords[cls.front()]);
  }
  double tol = kMetricTolerance * std::max(1.0, m.diameter());
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = i + 1; j < c; ++j)
      if (q.space.dist(i, j) <= tol)
        throw Error("degenerate quotient: classes " + std::to_string(i) + " and " +
                    std::to_string(j) + " at distance ~0");
  return q;
}

bool is_surjective(const Correspondence& r, std::size_t nx, std::size_t ny) {
  std::vector<char> sx(nx, 0), sy(ny, 0);
  for (auto [i, j] : r.pairs) {
    if (i >= nx || j >= ny) return false;
    sx[i] = 1;
    sy[j] = 1;
  }
  return std::all_of(sx.begin(), sx.end(), [](char v) { return v; }) &&
         std::all_of(sy.begin(), sy.end(), [](char v) { return v; });
}

double gh_upper(const FiniteCompactum& x, const FiniteCompactum& y, const Correspondence& r) {
  if (!is_surjective(r, x.size(), y.size())) throw Error("correspondence is not surjective");
  double distortion = 0;
  for (std::size_t a = 0; a < r.pairs.size(); ++a)
    for (std::size_t b = a; b < r.pairs.size(); ++b) {
      auto [i, j] = r.pairs[a];
      auto [k, l] = r.pairs[b];
      distortion = std::max(distortion, std::abs(x.dist(i, k) - y.dist(j, l)));
    }
  return distortion / 2.0;
}

namespace {

// Farthest-point ordering starting at index 0; deterministic tie-break on index.
std::vector<std::size_t> fps_order(const FiniteCompactum& m) {
  std::size_t n = m.size();
  std::vector<std::size_t> order;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<char> used(n, 0);
  std::size_t cur = 0;
  for (std::size_t step = 0; step < n; ++step) {
    order.push_back(cur);
    used[cur] = 1;
    for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], m.dist(cur, i));
    std::size_t nxt = n;
    double far = -1;
    for (std::size_t i = 0; i < n; ++i)
      if (!used[i] && best[i] > far) {
        far = best[i];
        nxt = i;
      }
    if (nxt == n) break;
    cur = nxt;
  }
  return order;
}

}  // namespace

Correspondence greedy_correspondence(const FiniteCompactum& x, const FiniteCompactum& y) {
  Correspondence r;
  std::size_t nx = x.size(), ny = y.size();
  if (nx == 0 || ny == 0) throw Error("correspondence with an empty space");
  if (!x.coords.empty() && !y.coords.empty()) {
    auto nearest = [](const std::pair<double, double>& p,
                      const std::vector<std::pair<double, double>>& qs) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < qs.size(); ++j) {
        double dx = p.first - qs[j].first, dy = p.second - qs[j].second;
        double d = dx * dx + dy * dy;
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      return best;
    };
    for (std::size_t i = 0; i < nx; ++i) r.pairs.push_back({i, nearest(x.coords[i], y.coords)});
    for (std::size_t j = 0; j < ny; ++j) r.pairs.push_back({nearest(y.coords[j], x.coords), j});
  } else {
    auto ox = fps_order(x);
    auto oy = fps_order(y);
    std::size_t m = std::max(nx, ny);
    for (std::size_t k = 0; k < m; ++k)
      r.pairs.push_back({ox[k * nx / m], oy[k * ny / m]});
  }
  std::sort(r.pairs.begin(), r.pairs.end());
  r.pairs.erase(std::unique(r.pairs.begin(), r.pairs.end()), r.pairs.end());
  return r;
}

}  // namespace arbor
