#include "arbor/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace arbor {

namespace {

constexpr double kTau = 2 * M_PI;

double frac(double x) { return x - std::floor(x); }

// Sorted angle sample: grid over [lo, hi] plus forced angles, minus the open
// arcs' interiors; forced angles (arc endpoints) are always kept, and grid
// points too close to them are dropped so the metric stays cleanly positive.
std::vector<double> angle_sample(double lo, double hi, int grid,
                                 const std::vector<std::pair<double, double>>& arcs) {
  std::vector<double> angles;
  double guard = (hi - lo) * 1e-4;
  for (int i = 0; i < grid; ++i) {
    double a = lo + (hi - lo) * (grid == 1 ? 0.0 : double(i) / (grid - 1));
    bool skip = false;
    for (auto [s, e] : arcs)
      skip |= (a > s - guard && a < e + guard);
    if (!skip) angles.push_back(a);
  }
  for (auto [s, e] : arcs) {
    angles.push_back(s);
    angles.push_back(e);
  }
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               angles.end());
  return angles;
}

std::size_t index_of(const std::vector<double>& sorted, double value) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), value - 1e-12);
  if (it == sorted.end() || std::abs(*it - value) > 1e-9)
    throw Error("gallery: sample point not on grid");
  return static_cast<std::size_t>(it - sorted.begin());
}

FiniteCompactum chord_metric(const std::vector<double>& angles, double rho,
                             const std::vector<double>& global_angles) {
  std::size_t n = angles.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double delta = std::abs(angles[i] - angles[j]);
      delta = std::min(delta, kTau - delta);
      d[i * n + j] = d[j * n + i] = 2 * rho * std::sin(delta / 2);
    }
  FiniteCompactum m(n, std::move(d));
  for (double g : global_angles) m.coords.push_back({std::cos(g), std::sin(g)});
  return m;
}

}  // namespace

FiniteCompactum unit_circle_sample(std::size_t n) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < n; ++i) {
    double a = kTau * double(i) / double(n);
    pts.push_back({std::cos(a), std::sin(a)});
  }
  return FiniteCompactum::from_points_2d(pts);
}

CircleResult gen_punctured_circle(int depth, const CircleParams& params) {
  if (depth < 1) throw Error("gen_punctured_circle: depth >= 1 required");
  double span = kTau - params.parent_arc;  // kept span of non-root constituents
  if (span <= 0.2) throw Error("gen_punctured_circle: parent arc too wide");
  // Self-similar tail ratio of the non-root geometry, used for the declared
  // sigma bounds: (largest child diameter) / (own diameter).
  auto arcs_at = [&](int level) {
    return params.arcs_per_level[std::min<std::size_t>(level, params.arcs_per_level.size() - 1)];
  };
  auto grid_at = [&](int level) {
    return params.grid_per_level[std::min<std::size_t>(level, params.grid_per_level.size() - 1)];
  };
  double mu = std::sin(span * params.arc_frac / 2) / std::sin(span / 2);

  struct Node {
    int level;
    double rho;
    double lo, hi;  // kept span in own angles (root: 0..tau)
    std::vector<std::pair<double, double>> child_arcs;  // own angles
    std::vector<double> angles;                          // sample, sorted
    std::vector<double> globals;                         // matching global angles
    double ga, gb;                                       // global interval
  };

  CircleResult out;
  TruncatedTreeSystem& sys = out.system;
  std::map<VertexId, Node> nodes;

  double rot = kTau * frac(double(params.seed % 10007) * 0.6180339887498949) * 0.2;

  // Root node.
  {
    Node root;
    root.level = 0;
    root.rho = 1.0;
    root.lo = 0;
    root.hi = kTau;
    root.ga = 0;
    root.gb = kTau;
    int a = arcs_at(0);
    for (int i = 0; i < a; ++i) {
      double c = kTau * (i + 0.5) / a + rot / a;
      double w = kTau * params.arc_frac * std::pow(params.arc_decay, i);
      root.child_arcs.push_back({c - w / 2, c + w / 2});
    }
    root.angles = angle_sample(0, kTau * (1 - 1.0 / grid_at(0)), grid_at(0), root.child_arcs);
    for (double a2 : root.angles) root.globals.push_back(a2);
    nodes[0] = std::move(root);
  }

  sys.tree.add_vertex(0);
  struct Pending {
    VertexId parent;
    std::size_t arc;  // index into child_arcs
    int level;        // child's level
  };
  std::deque<Pending> queue;
  for (std::size_t i = 0; i < nodes[0].child_arcs.size(); ++i)
    queue.push_back({0, i, 1});

  int next_vertex = 1;
  int next_edge = 0;
  int ghost = 1000000;
  while (!queue.empty()) {
    Pending p = queue.front();
    queue.pop_front();
    const Node parent = nodes.at(p.parent);
    auto [alo, ahi] = parent.child_arcs[p.arc];
    double g_chord = 2 * parent.rho * std::sin((ahi - alo) / 2);
    EdgeId e_out = next_edge, e_in = next_edge + 1;
    next_edge += 2;
    if (p.level >= depth) {
      // Truncate: stub with the declared ray-sum tail bound.
      sys.tree.add_stub_with_ids(p.parent, ghost++, e_out, e_in);
      sys.tails[e_out] = g_chord / (1 - mu);
      sys.peripherals[e_out] = {index_of(parent.angles, alo), index_of(parent.angles, ahi)};
      continue;
    }
    VertexId v = next_vertex++;
    sys.tree.add_vertex(v);
    sys.tree.add_edge_with_ids(p.parent, v, e_out, e_in);

    Node node;
    node.level = p.level;
    node.rho = g_chord / (2 * std::sin(params.parent_arc / 2));
    node.lo = params.parent_arc;
    node.hi = kTau;
    // Global interval of the parent arc.
    auto to_global = [&](const Node& n, double own) {
      if (n.level == 0) return own;
      return n.ga + (own - n.lo) / (n.hi - n.lo) * (n.gb - n.ga);
    };
    node.ga = to_global(parent, alo);
    node.gb = to_global(parent, ahi);
    int a = arcs_at(p.level);
    double s = node.hi - node.lo;
    for (int i = 1; i < a; ++i) {
      double c = node.lo + s * (i - 0.5) / (a - 1);
      double w = s * params.arc_frac * std::pow(params.arc_decay, i - 1);
      node.child_arcs.push_back({c - w / 2, c + w / 2});
    }
    std::vector<std::pair<double, double>> all_arcs = node.child_arcs;
    node.angles = angle_sample(node.lo, node.hi, grid_at(p.level), all_arcs);
    for (double own : node.angles) node.globals.push_back(to_global(node, own));
    nodes[v] = node;

    sys.peripherals[e_out] = {index_of(parent.angles, alo), index_of(parent.angles, ahi)};
    sys.peripherals[e_in] = {index_of(node.angles, node.lo), index_of(node.angles, node.hi)};
    Connector conn{{index_of(parent.angles, alo), index_of(node.angles, node.lo)},
                   {index_of(parent.angles, ahi), index_of(node.angles, node.hi)}};
    std::sort(conn.begin(), conn.end());
    sys.connectors[e_out] = conn;
    Connector inv;
    for (auto [x, y] : conn) inv.push_back({y, x});
    std::sort(inv.begin(), inv.end());
    sys.connectors[e_in] = inv;

    for (std::size_t i = 0; i < node.child_arcs.size(); ++i)
      queue.push_back({v, i, p.level + 1});
  }

  // Constituent metrics and the declared density resolution.
  double density = 0;
  for (auto& [v, node] : nodes)
    sys.constituents[v] = chord_metric(node.angles, node.rho, node.globals);
  for (VertexId v : sys.tree.vertices()) {
    const auto& k = sys.constituent(v);
    PointSet peri;
    for (EdgeId e : sys.tree.out_edges(v))
      for (std::size_t q : sys.peripherals.at(e)) peri.push_back(q);
    // include the parent-facing pair
    for (EdgeId e : sys.tree.oriented_edges())
      if (!sys.tree.is_stub(e) && sys.tree.omega(e) == v)
        for (std::size_t q : sys.peripherals.at(sys.tree.bar(e))) peri.push_back(q);
    for (std::size_t p = 0; p < k.size(); ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t q : peri) best = std::min(best, k.dist(p, q));
      density = std::max(density, best);
    }
    out.weights[v] = 1.0;
  }
  sys.declared_density_resolution = density;

  // Standard family of extended spaces: the deleted arcs themselves.
  out.standard.kind = ExtendedFamily::Kind::Standard;
  auto arc_extension = [&](const Node& owner, double alo, double ahi, std::size_t lo_idx,
                           std::size_t hi_idx) {
    // Sample the deleted arc: endpoints plus interior fill.
    std::vector<double> fill{alo, ahi};
    int m = 3;
    for (int i = 1; i <= m; ++i) fill.push_back(alo + (ahi - alo) * i / (m + 1));
    std::sort(fill.begin(), fill.end());
    ExtendedFamily::Extension x;
    std::vector<double> globals;
    for (double own : fill)
      globals.push_back(owner.level == 0
                            ? own
                            : owner.ga + (own - owner.lo) / (owner.hi - owner.lo) *
                                             (owner.gb - owner.ga));
    x.delta = chord_metric(fill, owner.rho, globals);
    x.base = {index_of(fill, alo), index_of(fill, ahi)};
    x.attach = {{index_of(fill, alo), lo_idx}, {index_of(fill, ahi), hi_idx}};
    return x;
  };
  for (EdgeId e : sys.tree.oriented_edges()) {
    VertexId t = sys.tree.alpha(e);
    const Node& node = nodes.at(t);
    PointSet sigma = sys.peripherals.at(e);
    std::sort(sigma.begin(), sigma.end());
    double alo = node.angles[sigma.front()];
    double ahi = node.angles[sigma.back()];
    // The parent-facing deletion of a non-root constituent is the arc
    // (0, parent_arc); its low endpoint (angle 0) is the kept point at 2 pi.
    if (node.level > 0 && std::abs(alo - node.lo) < 1e-9 && std::abs(ahi - node.hi) < 1e-9) {
      out.standard.ext[e] =
          arc_extension(node, 0.0, node.lo, index_of(node.angles, node.hi), sigma.front());
      continue;
    }
    out.standard.ext[e] = arc_extension(node, alo, ahi, sigma.front(), sigma.back());
  }
  return out;
}

// ---------------------------------------------------------------------------

IntervalResult gen_punctured_interval(int depth, const IntervalParams& params) {
  if (depth < 1) throw Error("gen_punctured_interval: depth >= 1 required");
  IntervalResult out;
  TruncatedTreeSystem& sys = out.system;

  struct Node {
    double length;
    std::vector<std::pair<double, double>> child_gaps;
    std::pair<double, double> parent_gap{-1, -1};  // within own coords, or -1 for root
    std::vector<double> xs;                        // sample, sorted
  };
  std::map<VertexId, Node> nodes;
  auto grid_at = [&](int level) {
    return params.grid_per_level[std::min<std::size_t>(level, params.grid_per_level.size() - 1)];
  };

  auto sample = [&](Node& n, int grid) {
    std::vector<std::pair<double, double>> gaps = n.child_gaps;
    if (n.parent_gap.first >= 0) gaps.push_back(n.parent_gap);
    std::vector<double> xs;
    double guard = n.length * 1e-4;
    for (int i = 0; i < grid; ++i) {
      double x = n.length * double(i) / (grid - 1);
      bool skip = false;
      for (auto [s, e] : gaps) skip |= x > s - guard && x < e + guard;
      if (!skip) xs.push_back(x);
    }
    for (auto [s, e] : gaps) {
      xs.push_back(s);
      xs.push_back(e);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(),
                         [&](double a, double b) { return std::abs(a - b) < 1e-15 * n.length; }),
             xs.end());
    n.xs = xs;
  };

  double jitter = 0.02 * frac(double(params.seed % 7919) * 0.6180339887498949);

  Node root;
  root.length = 1.0;
  for (int i = 0; i < params.gaps; ++i) {
    double c = 0.12 + jitter + 0.76 * (i + 0.5) / params.gaps;
    double w = params.gap_frac * std::pow(params.gap_decay, i);
    root.child_gaps.push_back({c - w / 2, c + w / 2});
  }
  sample(root, grid_at(0));
  nodes[0] = root;
  sys.tree.add_vertex(0);

  struct Pending {
    VertexId parent;
    std::size_t gap;
    int level;
  };
  std::deque<Pending> queue;
  for (std::size_t i = 0; i < root.child_gaps.size(); ++i) queue.push_back({0, i, 1});
  int next_vertex = 1, next_edge = 0, ghost = 1000000;

  while (!queue.empty()) {
    Pending p = queue.front();
    queue.pop_front();
    const Node parent = nodes.at(p.parent);
    auto [glo, ghi] = parent.child_gaps[p.gap];
    double g = ghi - glo;
    EdgeId e_out = next_edge, e_in = next_edge + 1;
    next_edge += 2;
    PointSet par_sigma{index_of(parent.xs, glo), index_of(parent.xs, ghi)};
    if (p.level >= depth) {
      sys.tree.add_stub_with_ids(p.parent, ghost++, e_out, e_in);
      sys.tails[e_out] = 3 * g / (1 - params.gap_frac);
      sys.peripherals[e_out] = par_sigma;
      continue;
    }
    VertexId v = next_vertex++;
    sys.tree.add_vertex(v);
    sys.tree.add_edge_with_ids(p.parent, v, e_out, e_in);

    Node node;
    node.length = 3 * g;
    node.parent_gap = {g, 2 * g};
    // One child gap inside each kept segment.
    double w0 = node.length * params.gap_frac;
    node.child_gaps.push_back({0.5 * g - w0 / 2, 0.5 * g + w0 / 2});
    node.child_gaps.push_back(
        {2.5 * g - w0 * params.gap_decay / 2, 2.5 * g + w0 * params.gap_decay / 2});
    sample(node, grid_at(p.level));
    nodes[v] = node;

    PointSet child_sigma{index_of(node.xs, g), index_of(node.xs, 2 * g)};
    sys.peripherals[e_out] = par_sigma;
    sys.peripherals[e_in] = child_sigma;
    Connector conn{{index_of(parent.xs, glo), index_of(node.xs, g)},
                   {index_of(parent.xs, ghi), index_of(node.xs, 2 * g)}};
    std::sort(conn.begin(), conn.end());
    sys.connectors[e_out] = conn;
    Connector inv;
    for (auto [x, y] : conn) inv.push_back({y, x});
    std::sort(inv.begin(), inv.end());
    sys.connectors[e_in] = inv;
    for (std::size_t i = 0; i < node.child_gaps.size(); ++i)
      queue.push_back({v, i, p.level + 1});
  }

  double density = 0;
  for (auto& [v, node] : nodes) {
    std::size_t n = node.xs.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        d[i * n + j] = d[j * n + i] = std::abs(node.xs[i] - node.xs[j]);
    FiniteCompactum m(n, std::move(d));
    for (double x : node.xs) m.coords.push_back({x, 0.0});
    sys.constituents[v] = std::move(m);
    out.weights[v] = 1.0;
  }
  for (VertexId v : sys.tree.vertices()) {
    const auto& node = nodes.at(v);
    const auto& k = sys.constituent(v);
    PointSet peri;
    std::vector<std::pair<double, double>> gaps = node.child_gaps;
    if (node.parent_gap.first >= 0) gaps.push_back(node.parent_gap);
    for (auto [s, e] : gaps) {
      peri.push_back(index_of(node.xs, s));
      peri.push_back(index_of(node.xs, e));
    }
    for (std::size_t p = 0; p < k.size(); ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t q : peri) best = std::min(best, k.dist(p, q));
      density = std::max(density, best);
    }
  }
  sys.declared_density_resolution = density;

  // Collapse-then-project retractions: everything at or below the gap's low
  // endpoint projects there, everything above to the high endpoint.
  for (EdgeId e : sys.tree.oriented_edges()) {
    VertexId t = sys.tree.alpha(e);
    const Node& node = nodes.at(t);
    PointSet sigma = sys.peripherals.at(e);
    std::sort(sigma.begin(), sigma.end());
    double lo = node.xs[sigma.front()], hi = node.xs[sigma.back()];
    (void)hi;
    std::vector<std::size_t> r(node.xs.size());
    for (std::size_t i = 0; i < node.xs.size(); ++i)
      r[i] = node.xs[i] <= lo + 1e-15 ? sigma.front() : sigma.back();
    out.retractions[e] = std::move(r);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using cd = std::complex<double>;

struct MobCircle {
  cd c;
  double r;
};

MobCircle generator_circle(int k, double arc_margin, int j) {
  double theta = kTau * j / k;
  double beta = arc_margin * M_PI / k;
  return {std::polar(1.0 / std::cos(beta), theta), std::tan(beta)};
}

cd reflect(const MobCircle& w, cd z) { return w.c + w.r * w.r / std::conj(z - w.c); }

MobCircle circle_through(cd z1, cd z2, cd z3) {
  // circumcircle of three points
  double ax = z1.real(), ay = z1.imag(), bx = z2.real(), by = z2.imag(), cx = z3.real(),
         cy = z3.imag();
  double d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  if (std::abs(d) < 1e-14) throw Error("degenerate wall circle");
  double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) +
               (cx * cx + cy * cy) * (ay - by)) /
              d;
  double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) +
               (cx * cx + cy * cy) * (bx - ax)) /
              d;
  cd c{ux, uy};
  return {c, std::abs(z1 - c)};
}

}  // namespace

std::complex<double> reflection_apply(int k, double arc_margin, const std::vector<int>& word,
                                      std::complex<double> z) {
  for (auto it = word.rbegin(); it != word.rend(); ++it)
    z = reflect(generator_circle(k, arc_margin, *it), z);
  return z;
}

ReflectionResult gen_reflection_disk(int depth, int k, const ReflectionParams& params) {
  if (k < 2 || depth < 1) throw Error("gen_reflection_disk: need k >= 2, depth >= 1");
  ReflectionResult out;

  // Base wall samples: points along each geodesic wall, ideal ends included.
  std::vector<std::vector<cd>> wall_base(k);
  for (int j = 0; j < k; ++j) {
    MobCircle w = generator_circle(k, params.arc_margin, j);
    double beta = params.arc_margin * M_PI / k;
    double theta = kTau * j / k;
    cd u = std::polar(1.0, theta - beta), v = std::polar(1.0, theta + beta);
    double pu = std::arg(u - w.c), pv = std::arg(v - w.c), pm = std::arg(-w.c);
    // sweep from pu to pv passing through pm
    auto wrap = [](double x) { return std::atan2(std::sin(x), std::cos(x)); };
    double d1 = wrap(pv - pu);
    double mid1 = wrap(pu + d1 / 2 - pm);
    double delta = std::abs(mid1) < M_PI / 2 ? d1 : d1 - std::copysign(kTau, d1);
    for (int s = 0; s < params.wall_samples; ++s) {
      double t = params.wall_samples == 1 ? 0.5 : double(s) / (params.wall_samples - 1);
      wall_base[j].push_back(w.c + std::polar(w.r, pu + delta * t));
    }
  }
  // Fundamental-domain fill.
  std::vector<cd> fill;
  for (double y = -1; y <= 1; y += params.grid_step)
    for (double x = -1; x <= 1; x += params.grid_step) {
      cd z{x, y};
      if (std::abs(z) > 0.995) continue;
      bool ok = true;
      for (int j = 0; j < k; ++j) {
        MobCircle w = generator_circle(k, params.arc_margin, j);
        if (std::abs(z - w.c) < w.r + 0.02) ok = false;
      }
      if (ok) fill.push_back(z);
    }
  out.base_points = fill;
  for (int j = 0; j < k; ++j)
    for (cd z : wall_base[j]) out.base_points.push_back(z);
  out.base_size = out.base_points.size();

  // Reduced words, BFS order.
  out.words.push_back({});
  for (std::size_t head = 0; head < out.words.size(); ++head) {
    if (out.words[head].size() >= static_cast<std::size_t>(depth)) continue;
    auto w = out.words[head];
    for (int j = 0; j < k; ++j) {
      if (!w.empty() && w.back() == j) continue;
      auto w2 = w;
      w2.push_back(j);
      out.words.push_back(w2);
    }
  }
  std::map<std::vector<int>, std::size_t> word_index;
  for (std::size_t i = 0; i < out.words.size(); ++i) word_index[out.words[i]] = i;

  // Cloud: orbit of the fill plus each wall once.
  std::vector<cd> cloud;
  for (std::size_t wi = 0; wi < out.words.size(); ++wi)
    for (std::size_t fi = 0; fi < fill.size(); ++fi) {
      cloud.push_back(reflection_apply(k, params.arc_margin, out.words[wi], fill[fi]));
      out.provenance.push_back({wi, fi});
    }
  struct WallRec {
    std::size_t word;
    int gen;
    std::size_t first_index;  // cloud index of the first sample
  };
  std::vector<WallRec> walls;
  for (std::size_t wi = 0; wi < out.words.size(); ++wi) {
    if (out.words[wi].size() > static_cast<std::size_t>(depth - 1)) continue;
    for (int j = 0; j < k; ++j) {
      if (!out.words[wi].empty() && out.words[wi].back() == j) continue;
      WallRec rec{wi, j, cloud.size()};
      for (std::size_t s = 0; s < wall_base[j].size(); ++s) {
        cloud.push_back(reflection_apply(k, params.arc_margin, out.words[wi], wall_base[j][s]));
        out.provenance.push_back({wi, fill.size() + std::size_t(j) * wall_base[j].size() + s});
      }
      walls.push_back(rec);
    }
  }
  std::vector<std::pair<double, double>> pts;
  for (cd z : cloud) pts.push_back({z.real(), z.imag()});
  out.cloud = FiniteCompactum::from_points_2d(pts);

  // Splittings: classify every cloud point against each wall circle.
  for (const auto& rec : walls) {
    std::size_t m = wall_base[rec.gen].size();
    MobCircle w = circle_through(cloud[rec.first_index], cloud[rec.first_index + m / 2],
                                 cloud[rec.first_index + m - 1]);
    // orthogonality residual of the image circle
    double resid = std::abs(std::norm(w.c) - 1.0 - w.r * w.r);
    if (resid > 1e-10) throw Error("gen_reflection_disk: wall lost orthogonality");
    Splitting s;
    for (std::size_t p = 0; p < cloud.size(); ++p) {
      double d = std::abs(cloud[p] - w.c) - w.r;
      if (std::abs(d) <= 1e-9) {
        s.a.push_back(p);
        s.y.push_back(p);
        s.z.push_back(p);
      } else if (d < 0) {
        s.y.push_back(p);
      } else {
        s.z.push_back(p);
      }
    }
    if (s.a.size() != m) throw Error("gen_reflection_disk: stray point on a wall");
    out.decomposition.push_back(s);
  }

  // Associated system, restricted to the interior words.
  auto assoc = associated_system(out.cloud, out.decomposition);
  std::map<VertexId, std::size_t> domain_word;
  std::vector<VertexId> interior;
  for (std::size_t v = 0; v < assoc.dual.domains.size(); ++v) {
    std::set<std::size_t> words_here;
    for (std::size_t p : assoc.dual.domains[v].points)
      if (out.provenance[p].second < fill.size()) words_here.insert(out.provenance[p].first);
    if (words_here.size() == 1 &&
        out.words[*words_here.begin()].size() <= static_cast<std::size_t>(depth - 1)) {
      domain_word[static_cast<VertexId>(v)] = *words_here.begin();
      interior.push_back(static_cast<VertexId>(v));
    }
  }
  out.interior_system = restrict_system(assoc.system, SubtreeRef(assoc.system.tree, interior));

  // Template: the boundary tree of disks over the same word tree.
  FiniteCompactum base;
  {
    std::vector<std::pair<double, double>> bp;
    for (cd z : out.base_points) bp.push_back({z.real(), z.imag()});
    base = FiniteCompactum::from_points_2d(bp);
  }
  std::map<std::size_t, VertexId> word_vertex;  // interior word index -> template vertex
  int tv = 0;
  for (std::size_t wi = 0; wi < out.words.size(); ++wi)
    if (out.words[wi].size() <= static_cast<std::size_t>(depth - 1))
      word_vertex[wi] = tv++;
  auto block = [&](int j) {
    PointSet b;
    std::size_t m = wall_base[j].size();
    for (std::size_t s = 0; s < m; ++s) b.push_back(fill.size() + std::size_t(j) * m + s);
    return b;
  };
  TruncatedTreeSystem& tpl = out.template_system;
  for (auto [wi, v] : word_vertex) {
    (void)wi;
    tpl.tree.add_vertex(v);
    tpl.constituents[v] = base;
  }
  int tedge = 0, tghost = 1000000;
  std::map<std::pair<VertexId, int>, EdgeId> tpl_edge;  // (vertex, gen) -> outgoing edge
  for (auto [wi, v] : word_vertex) {
    for (int j = 0; j < k; ++j) {
      if (!out.words[wi].empty() && out.words[wi].back() == j) continue;
      auto child = out.words[wi];
      child.push_back(j);
      std::size_t ci = word_index.at(child);
      EdgeId e_out = tedge, e_in = tedge + 1;
      tedge += 2;
      if (word_vertex.count(ci)) {
        tpl.tree.add_edge_with_ids(v, word_vertex[ci], e_out, e_in);
        tpl.peripherals[e_out] = block(j);
        tpl.peripherals[e_in] = block(j);
        Connector conn;
        for (std::size_t p : block(j)) conn.push_back({p, p});
        tpl.connectors[e_out] = conn;
        tpl.connectors[e_in] = conn;
        tpl_edge[{v, j}] = e_out;
        tpl_edge[{word_vertex[ci], j}] = e_in;
      } else {
        tpl.tree.add_stub_with_ids(v, tghost++, e_out, e_in);
        tpl.peripherals[e_out] = block(j);
        tpl.tails[e_out] = 0;
        tpl_edge[{v, j}] = e_out;
      }
    }
  }

  // Candidate isomorphism: domains are group translates of the base sample.
  for (VertexId v : interior) {
    out.template_iso.vertex_map[v] = word_vertex.at(domain_word.at(v));
    const auto& pts2 = assoc.provenance.at(v);
    std::vector<std::size_t> f(pts2.size());
    for (std::size_t i = 0; i < pts2.size(); ++i) f[i] = out.provenance[pts2[i]].second;
    out.template_iso.point_maps[v] = f;
  }
  for (EdgeId e : out.interior_system.tree.oriented_edges()) {
    auto [spl, half] = assoc.dual.edge.at(e);
    (void)half;
    int gen = walls[spl].gen;
    VertexId tv1 = out.template_iso.vertex_map.at(out.interior_system.tree.alpha(e));
    out.template_iso.edge_map[e] = tpl_edge.at({tv1, gen});
  }
  // Copy matching tail bounds onto the template stubs.
  for (EdgeId e : out.interior_system.tree.stub_edges())
    tpl.tails[out.template_iso.edge_map.at(e)] = out.interior_system.tails.at(e);
  return out;
}

// ---------------------------------------------------------------------------

TruncatedTreeSystem gen_labeled(const LabeledSpec& spec) {
  if (spec.alphabet.empty()) throw Error("gen_labeled: empty alphabet");
  TruncatedTreeSystem sys;
  sys.orientation_all_oriented = spec.oriented;
  for (auto [v, label] : spec.vertex_labels) {
    sys.tree.add_vertex(v);
    if (std::find(spec.alphabet.begin(), spec.alphabet.end(), label) == spec.alphabet.end())
      throw Error("gen_labeled: vertex label outside the alphabet");
    sys.labels[v] = label;
  }
  for (auto [u, v] : spec.edges) sys.tree.add_edge(u, v);
  int ghost = 1000000;
  for (const auto& st : spec.stubs) {
    EdgeId e = sys.tree.add_stub(st.anchor, ghost++);
    StubPromise promise;
    promise.child_label = st.child_label;
    promise.labels_beyond = st.labels_beyond;
    std::sort(promise.labels_beyond.begin(), promise.labels_beyond.end());
    sys.stub_promises[e] = promise;
    sys.tails[e] = 1.0;
  }
  // Unit-metric constituents: one point per outgoing edge plus interior pads.
  for (VertexId v : sys.tree.vertices()) {
    auto edges = sys.tree.out_edges(v);
    std::size_t n = edges.size() + spec.interior_points;
    std::vector<double> d(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
    sys.constituents[v] = FiniteCompactum(n, std::move(d));
    for (std::size_t i = 0; i < edges.size(); ++i) sys.peripherals[edges[i]] = {i};
  }
  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e) || e > sys.tree.bar(e)) continue;
    std::size_t p = sys.peripherals.at(e).front();
    std::size_t q = sys.peripherals.at(sys.tree.bar(e)).front();
    sys.connectors[e] = {{p, q}};
    sys.connectors[sys.tree.bar(e)] = {{q, p}};
  }
  sys.declared_density_resolution = 1.0;
  return sys;
}

WJSequence weak_jakobsche_from_labeled(const TruncatedTreeSystem& sys, VertexId root,
                                       std::size_t levels, double ratio) {
  if (!sys.labeled()) throw Error("weak_jakobsche_from_labeled: unlabeled system");
  WJSequence seq;
  std::set<int> alpha;
  for (const auto& [v, l] : sys.labels) alpha.insert(l);
  for (const auto& [e, pr] : sys.stub_promises) {
    (void)e;
    if (pr.child_label >= 0) alpha.insert(pr.child_label);
  }
  seq.alphabet.assign(alpha.begin(), alpha.end());
  seq.oriented = sys.orientation_all_oriented;

  std::map<VertexId, int> depth;
  depth[root] = 0;
  std::deque<VertexId> bfs{root};
  while (!bfs.empty()) {
    VertexId v = bfs.front();
    bfs.pop_front();
    for (EdgeId e : sys.tree.out_edges(v)) {
      if (sys.tree.is_stub(e)) continue;
      VertexId w = sys.tree.omega(e);
      if (!depth.count(w)) {
        depth[w] = depth[v] + 1;
        bfs.push_back(w);
      }
    }
  }
  WeightMap w;
  for (auto [v, d] : depth) w[v] = std::pow(ratio, d);

  struct LevelData {
    std::vector<VertexId> verts;
    GluedSpace glued;
    std::vector<EdgeId> frontier;  // edges with caps, sorted
  };
  std::vector<LevelData> data;
  for (std::size_t i = 0; i < levels; ++i) {
    LevelData ld;
    for (auto [v, d] : depth)
      if (d <= static_cast<int>(i)) ld.verts.push_back(v);
    std::sort(ld.verts.begin(), ld.verts.end());
    SubtreeRef f(sys.tree, ld.verts);
    ld.glued = partial_union(sys, f, &w);
    ld.frontier = n_set(sys.tree, f);
    data.push_back(std::move(ld));
  }

  for (std::size_t i = 0; i < levels; ++i) {
    const auto& ld = data[i];
    std::size_t ng = ld.glued.space.size();
    std::size_t n = ng + ld.frontier.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t a = 0; a < ng; ++a)
      for (std::size_t b = 0; b < ng; ++b) d[a * n + b] = ld.glued.space.dist(a, b);
    for (std::size_t fi = 0; fi < ld.frontier.size(); ++fi) {
      EdgeId e = ld.frontier[fi];
      VertexId t = sys.tree.alpha(e);
      std::size_t sigma = ld.glued.at(t, sys.peripheral(e).front());
      double h = std::pow(ratio, depth.at(t) + 1) / 2;
      std::size_t cap = ng + fi;
      for (std::size_t b = 0; b < ng; ++b)
        d[cap * n + b] = d[b * n + cap] = ld.glued.space.dist(sigma, b) + h;
      for (std::size_t fj = 0; fj < fi; ++fj) {
        EdgeId e2 = ld.frontier[fj];
        std::size_t sigma2 = ld.glued.at(sys.tree.alpha(e2), sys.peripheral(e2).front());
        double h2 = std::pow(ratio, depth.at(sys.tree.alpha(e2)) + 1) / 2;
        double val = ld.glued.space.dist(sigma, sigma2) + h + h2;
        d[cap * n + (ng + fj)] = d[(ng + fj) * n + cap] = val;
      }
    }
    WJLevel lvl;
    lvl.space = FiniteCompactum(n, std::move(d));
    lvl.space_label = sys.labels.at(root);
    // A direction's connecting disk belongs to the level where its surgery
    // happens: the first level with its alpha on the frontier. A stub stays
    // on the frontier forever but contributes no further disks (its cap is
    // just a collapsed point afterwards).
    for (std::size_t fi = 0; fi < ld.frontier.size(); ++fi) {
      EdgeId e = ld.frontier[fi];
      if (depth.at(sys.tree.alpha(e)) != static_cast<int>(i)) continue;
      WJDisk disk;
      disk.label = sys.tree.is_stub(e) ? sys.stub_promises.at(e).child_label
                                       : sys.labels.at(sys.tree.omega(e));
      std::size_t sigma = ld.glued.at(sys.tree.alpha(e), sys.peripheral(e).front());
      disk.disk = {sigma, ng + fi};
      disk.boundary = {sigma};
      lvl.disks.push_back(disk);
    }
    seq.levels.push_back(std::move(lvl));
  }

  // Maps and patches.
  for (std::size_t i = 0; i + 1 < levels; ++i) {
    const auto& lo = data[i];
    const auto& hi = data[i + 1];
    std::set<VertexId> lo_verts(lo.verts.begin(), lo.verts.end());
    auto cap_of = [&](EdgeId e) {
      auto it = std::lower_bound(lo.frontier.begin(), lo.frontier.end(), e);
      if (it == lo.frontier.end() || *it != e) throw Error("wj export: unknown frontier edge");
      return lo.glued.space.size() + std::size_t(it - lo.frontier.begin());
    };
    // Entry edge on the level-i frontier for a deeper vertex.
    auto entry = [&](VertexId t) -> EdgeId {
      for (EdgeId e : sys.tree.path(root, t))
        if (lo_verts.count(sys.tree.alpha(e)) && !lo_verts.count(sys.tree.omega(e))) return e;
      throw Error("wj export: lost entry edge");
    };
    std::vector<std::size_t> pi(seq.levels[i + 1].space.size());
    for (std::size_t cls = 0; cls < hi.glued.members.size(); ++cls) {
      std::size_t target = std::size_t(-1);
      for (auto [t, p] : hi.glued.members[cls])
        if (lo_verts.count(t)) {
          target = lo.glued.at(t, p);
          break;
        }
      if (target == std::size_t(-1)) {
        auto [t, p] = hi.glued.members[cls].front();
        (void)p;
        target = cap_of(entry(t));
      }
      pi[cls] = target;
    }
    for (std::size_t fi = 0; fi < hi.frontier.size(); ++fi) {
      EdgeId e = hi.frontier[fi];
      VertexId t = sys.tree.alpha(e);
      EdgeId anchor = lo_verts.count(t) ? e : entry(t);
      pi[hi.glued.space.size() + fi] = cap_of(anchor);
    }
    seq.maps.push_back(pi);
    // Patches for level-i disks: the full preimage minus the boundary point.
    for (std::size_t di = 0; di < seq.levels[i].disks.size(); ++di) {
      auto& disk = seq.levels[i].disks[di];
      PointSet pre;
      for (std::size_t p = 0; p < pi.size(); ++p) {
        if (pi[p] != disk.disk[0] && pi[p] != disk.disk[1]) continue;
        // boundary keeps itself, everything else is the patch
        bool is_boundary = pi[p] == disk.boundary[0] &&
                           p < seq.levels[i + 1].space.size() &&
                           [&] {
                             // the unique off-disk preimage of the boundary
                             if (p >= hi.glued.members.size()) return false;
                             for (auto [t, q] : hi.glued.members[p])
                               if (lo_verts.count(t) &&
                                   lo.glued.at(t, q) == disk.boundary[0])
                                 return true;
                             return false;
                           }();
        if (!is_boundary) pre.push_back(p);
      }
      disk.patch = pre;
    }
  }

  // Declared density: the worst distance from any point to its nearest
  // same-label disk image, computed over all levels.
  double res = 0;
  for (std::size_t i = 0; i < levels; ++i) {
    const auto& lo = seq.levels[i].space;
    for (int m : seq.alphabet) {
      std::set<std::size_t> u;
      for (std::size_t j = i; j < levels; ++j)
        for (const auto& dj : seq.levels[j].disks) {
          if (dj.label != m) continue;
          PointSet img = dj.disk;
          for (std::size_t lvl = j; lvl > i; --lvl)
            for (auto& p : img) p = seq.maps[lvl - 1][p];
          for (std::size_t p : img) u.insert(p);
        }
      for (std::size_t p = 0; p < lo.size(); ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t q : u) best = std::min(best, lo.dist(p, q));
        res = std::max(res, best);
      }
    }
  }
  seq.density_resolution = res;
  return seq;
}

}  // namespace arbor
