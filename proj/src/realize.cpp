#include "arbor/realize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>

namespace arbor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void floyd_warshall(std::vector<double>& m, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double* rk = &m[k * n];
    for (std::size_t i = 0; i < n; ++i) {
      double dik = m[i * n + k];
      if (dik == kInf) continue;
      double* ri = &m[i * n];
      for (std::size_t j = 0; j < n; ++j) {
        double v = dik + rk[j];
        if (v < ri[j]) ri[j] = v;
      }
    }
  }
}

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

struct Indexer {
  std::vector<VertexId> verts;
  std::map<VertexId, std::size_t> offset;
  std::size_t total = 0;

  Indexer(const TruncatedTreeSystem& sys, const std::vector<VertexId>& vs) : verts(vs) {
    for (VertexId v : verts) {
      offset[v] = total;
      total += sys.constituent(v).size();
    }
  }
  std::size_t flat(VertexId t, std::size_t i) const { return offset.at(t) + i; }
};

GluedSpace make_skeleton(const TruncatedTreeSystem& sys, const Indexer& ix,
                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                         std::vector<std::size_t>& class_of_flat) {
  UnionFind uf(ix.total);
  for (auto [a, b] : pairs) uf.unite(a, b);
  class_of_flat.assign(ix.total, std::size_t(-1));
  GluedSpace out;
  std::vector<std::size_t> rep_to_class(ix.total, std::size_t(-1));
  for (std::size_t i = 0; i < ix.total; ++i) {
    std::size_t r = uf.find(i);
    if (rep_to_class[r] == std::size_t(-1)) {
      rep_to_class[r] = out.members.size();
      out.members.push_back({});
    }
    class_of_flat[i] = rep_to_class[r];
  }
  for (VertexId v : ix.verts) {
    std::size_t n = sys.constituent(v).size();
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t cls = class_of_flat[ix.flat(v, i)];
      out.index[{v, i}] = cls;
      out.members[cls].push_back({v, i});
    }
  }
  return out;
}

void carry_coords(const TruncatedTreeSystem& sys, GluedSpace& g) {
  for (const auto& cls : g.members) {
    auto [v, i] = cls.front();
    (void)i;
    if (sys.constituent(v).coords.empty()) return;
  }
  g.space.coords.clear();
  for (const auto& cls : g.members) {
    auto [v, i] = cls.front();
    g.space.coords.push_back(sys.constituent(v).coords[i]);
  }
}

// Per-ordered-vertex-pair data for the cross-vertex case formula: first and
// last oriented edge on the path, and the middle base-chain sum.
struct PathTables {
  std::map<std::pair<VertexId, VertexId>, std::tuple<EdgeId, EdgeId, double>> table;

  PathTables(const TruncatedTreeSystem& sys, const BasePointing& bp, const WeightMap& w,
             const std::vector<VertexId>& verts) {
    std::set<VertexId> in(verts.begin(), verts.end());
    for (VertexId a : verts) {
      struct Item {
        VertexId at;
        EdgeId via;
        EdgeId first;
        double mid;
      };
      std::deque<Item> stack;
      for (EdgeId e : sys.tree.out_edges(a)) {
        if (sys.tree.is_stub(e) || !in.count(sys.tree.omega(e))) continue;
        stack.push_back({sys.tree.omega(e), e, e, 0.0});
      }
      while (!stack.empty()) {
        Item it = stack.front();
        stack.pop_front();
        table[{a, it.at}] = {it.first, it.via, it.mid};
        const auto& k = sys.constituent(it.at);
        double wt = w.at(it.at);
        for (EdgeId f : sys.tree.out_edges(it.at)) {
          if (sys.tree.is_stub(f) || f == sys.tree.bar(it.via) || !in.count(sys.tree.omega(f)))
            continue;
          double mid2 = it.mid + wt * k.dist(bp.at(sys.tree.bar(it.via)), bp.at(f));
          stack.push_back({sys.tree.omega(f), f, it.first, mid2});
        }
      }
    }
  }
};

GluedSpace build_star(const TruncatedTreeSystem& sys, const BasePointing& bp, const WeightMap& w,
                      const std::vector<VertexId>& verts) {
  Indexer ix(sys, verts);
  std::set<VertexId> in(verts.begin(), verts.end());
  std::vector<std::pair<std::size_t, std::size_t>> base_pairs;
  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e) || !in.count(sys.tree.alpha(e)) || !in.count(sys.tree.omega(e)))
      continue;
    if (e > sys.tree.bar(e)) continue;
    base_pairs.push_back({ix.flat(sys.tree.alpha(e), bp.at(e)),
                          ix.flat(sys.tree.omega(e), bp.at(sys.tree.bar(e)))});
  }
  std::vector<std::size_t> class_of;
  GluedSpace g = make_skeleton(sys, ix, base_pairs, class_of);
  PathTables paths(sys, bp, w, verts);

  std::size_t c = g.members.size();
  std::vector<double> d(c * c, 0.0);
  for (std::size_t ci = 0; ci < c; ++ci) {
    auto [t, i] = g.members[ci].front();
    const auto& kt = sys.constituent(t);
    double wt = w.at(t);
    for (std::size_t cj = ci + 1; cj < c; ++cj) {
      auto [s, j] = g.members[cj].front();
      double val;
      if (t == s) {
        val = wt * kt.dist(i, j);
      } else {
        auto [first, last, mid] = paths.table.at({t, s});
        val = wt * kt.dist(i, bp.at(first)) + mid +
              w.at(s) * sys.constituent(s).dist(bp.at(sys.tree.bar(last)), j);
      }
      d[ci * c + cj] = d[cj * c + ci] = val;
    }
  }
  g.space = FiniteCompactum(c, std::move(d));
  carry_coords(sys, g);
  return g;
}

}  // namespace

BasePointing choose_basepoints(const TruncatedTreeSystem& sys, BasepointRule rule,
                               std::uint64_t seed) {
  BasePointing bp;
  auto pick = [&](EdgeId e) -> std::size_t {
    PointSet sigma = sys.peripheral(e);
    std::sort(sigma.begin(), sigma.end());
    if (rule == BasepointRule::LowestId) return sigma.front();
    return sigma[splitmix64(seed ^ std::uint64_t(e) * 0x9e3779b9ULL) % sigma.size()];
  };
  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e)) {
      bp[e] = pick(e);
    } else if (e < sys.tree.bar(e)) {
      std::size_t b = pick(e);
      bp[e] = b;
      bp[sys.tree.bar(e)] = sys.phi(e, b);
    }
  }
  return bp;
}

GluedSpace realize_star(const TruncatedTreeSystem& sys, const BasePointing& bp,
                        const WeightMap& weights) {
  return build_star(sys, bp, weights, sys.tree.vertices());
}

// ---------------------------------------------------------------------------
// realize_limit: the chain quotient computed by a two-pass tree solver.
//
// The quotient graph has one clique per weighted constituent plus zero-cost
// jumps at every identified peripheral pair, so shortest chains cross
// between constituents only at "portals" (the connector pairs of an edge).
// Side[e], for an oriented edge e, is the portal-to-portal metric using only
// the omega(e) side of the tree; an upward and a downward pass make these
// exact, after which each constituent's full matrix and all cross blocks
// follow by local Floyd-Warshall and portal-vector propagation.

namespace {

struct Solver {
  const TruncatedTreeSystem& sys;
  const WeightMap& w;
  Indexer ix;
  std::vector<VertexId> order;
  std::map<VertexId, EdgeId> parent_edge;
  std::map<VertexId, std::vector<EdgeId>> children;
  std::map<EdgeId, std::vector<double>> side;   // keyed by directed edge
  std::map<VertexId, std::vector<double>> full;
  std::map<VertexId, std::size_t> nsize;
  std::map<VertexId, std::vector<double>> local;

  explicit Solver(const TruncatedTreeSystem& s, const WeightMap& weights)
      : sys(s), w(weights), ix(s, s.tree.vertices()) {
    for (VertexId v : ix.verts) {
      const auto& k = sys.constituent(v);
      double wv = w.at(v);
      std::size_t n = k.size();
      nsize[v] = n;
      std::vector<double> m(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i * n + j] = wv * k.dist(i, j);
      local[v] = std::move(m);
    }
    VertexId root = ix.verts.front();
    std::deque<VertexId> queue{root};
    std::set<VertexId> seen{root};
    while (!queue.empty()) {
      VertexId v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (EdgeId e : sys.tree.out_edges(v)) {
        if (sys.tree.is_stub(e)) continue;
        VertexId s2 = sys.tree.omega(e);
        if (!seen.count(s2)) {
          seen.insert(s2);
          parent_edge[s2] = e;
          children[v].push_back(e);
          queue.push_back(s2);
        }
      }
    }
  }

  // Canonical portal list of the geometric edge of e, as pairs
  // (point in alpha(c), point in omega(c)) for c = min(e, bar e).
  const Connector& cportals(EdgeId e) const {
    EdgeId c = std::min(e, sys.tree.bar(e));
    return sys.connectors.at(c);
  }
  // Selects the member of a canonical portal pair living at vertex v.
  std::size_t portal_at(EdgeId e, std::size_t a, VertexId v) const {
    EdgeId c = std::min(e, sys.tree.bar(e));
    const auto& conn = sys.connectors.at(c);
    return sys.tree.alpha(c) == v ? conn[a].first : conn[a].second;
  }

  // Local matrix of v augmented with Side overlays of the incident edges
  // (children always, parent only when requested), skipping `skip`.
  std::vector<double> augmented(VertexId v, EdgeId skip, bool with_parent) const {
    std::size_t n = nsize.at(v);
    std::vector<double> m = local.at(v);
    auto overlay = [&](EdgeId e) {
      auto it = side.find(e);
      if (it == side.end()) return;
      const auto& sm = it->second;
      std::size_t k = cportals(e).size();
      for (std::size_t a = 0; a < k; ++a) {
        std::size_t pa = portal_at(e, a, v);
        for (std::size_t b = 0; b < k; ++b) {
          std::size_t pb = portal_at(e, b, v);
          if (sm[a * k + b] < m[pa * n + pb]) m[pa * n + pb] = sm[a * k + b];
        }
      }
    };
    auto cit = children.find(v);
    if (cit != children.end())
      for (EdgeId e : cit->second)
        if (e != skip) overlay(e);
    if (with_parent && parent_edge.count(v)) overlay(sys.tree.bar(parent_edge.at(v)));
    floyd_warshall(m, n);
    return m;
  }

  void run() {
    // Upward: Side[e] for parent->child edges, from the child's subtree.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      VertexId v = *it;
      if (!parent_edge.count(v)) continue;
      EdgeId e = parent_edge.at(v);
      auto m = augmented(v, -1, false);
      std::size_t k = cportals(e).size(), n = nsize.at(v);
      std::vector<double> sm(k * k);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
          sm[a * k + b] = m[portal_at(e, a, v) * n + portal_at(e, b, v)];
      side[e] = std::move(sm);
    }
    // Downward: Side[bar e] (the parent side) for every child edge.
    for (VertexId v : order) {
      auto cit = children.find(v);
      if (cit == children.end()) continue;
      for (EdgeId e : cit->second) {
        auto m = augmented(v, e, true);
        std::size_t k = cportals(e).size(), n = nsize.at(v);
        std::vector<double> sm(k * k);
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = 0; b < k; ++b)
            sm[a * k + b] = m[portal_at(e, a, v) * n + portal_at(e, b, v)];
        side[sys.tree.bar(e)] = std::move(sm);
      }
    }
    for (VertexId v : ix.verts) full[v] = augmented(v, -1, true);
  }
};

}  // namespace

Realization realize_limit(const TruncatedTreeSystem& sys, const BasePointing& bp,
                          const WeightMap& weights) {
  Solver solver(sys, weights);
  solver.run();
  const Indexer& ix = solver.ix;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e) || e > sys.tree.bar(e)) continue;
    VertexId t = sys.tree.alpha(e), s = sys.tree.omega(e);
    for (auto [p, q] : sys.connectors.at(e)) pairs.push_back({ix.flat(t, p), ix.flat(s, q)});
  }
  std::vector<std::size_t> class_of;
  GluedSpace g = make_skeleton(sys, ix, pairs, class_of);

  std::size_t c = g.members.size();
  std::vector<double> out(c * c, kInf);
  for (std::size_t i = 0; i < c; ++i) out[i * c + i] = 0.0;
  for (VertexId v : ix.verts) {
    std::size_t n = solver.nsize.at(v);
    const auto& m = solver.full.at(v);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t ci = class_of[ix.flat(v, i)];
      for (std::size_t j = 0; j < n; ++j) {
        std::size_t cj = class_of[ix.flat(v, j)];
        if (m[i * n + j] < out[ci * c + cj]) out[ci * c + cj] = m[i * n + j];
      }
    }
  }
  // Cross blocks: propagate portal-distance vectors away from each source.
  for (VertexId t : ix.verts) {
    std::size_t nt = solver.nsize.at(t);
    const auto& mt = solver.full.at(t);
    struct Front {
      EdgeId e;
      std::vector<double> v;  // nt x k distances to the canonical portals of e
    };
    std::deque<Front> queue;
    for (EdgeId e : sys.tree.out_edges(t)) {
      if (sys.tree.is_stub(e)) continue;
      std::size_t k = solver.cportals(e).size();
      std::vector<double> v0(nt * k);
      for (std::size_t x = 0; x < nt; ++x)
        for (std::size_t a = 0; a < k; ++a)
          v0[x * k + a] = mt[x * nt + solver.portal_at(e, a, t)];
      queue.push_back({e, std::move(v0)});
    }
    while (!queue.empty()) {
      Front fr = std::move(queue.front());
      queue.pop_front();
      VertexId s = sys.tree.omega(fr.e);
      std::size_t k = solver.cportals(fr.e).size();
      std::size_t ns = solver.nsize.at(s);
      const auto& ms = solver.full.at(s);
      std::vector<std::size_t> pa(k);
      for (std::size_t a = 0; a < k; ++a) pa[a] = solver.portal_at(fr.e, a, s);
      for (std::size_t x = 0; x < nt; ++x) {
        std::size_t cx = class_of[ix.flat(t, x)];
        const double* vx = &fr.v[x * k];
        for (std::size_t y = 0; y < ns; ++y) {
          double best = kInf;
          for (std::size_t a = 0; a < k; ++a) {
            double v = vx[a] + ms[pa[a] * ns + y];
            if (v < best) best = v;
          }
          std::size_t cy = class_of[ix.flat(s, y)];
          if (best < out[cx * c + cy]) out[cx * c + cy] = best;
        }
      }
      for (EdgeId f : sys.tree.out_edges(s)) {
        if (sys.tree.is_stub(f) || f == sys.tree.bar(fr.e)) continue;
        std::size_t kf = solver.cportals(f).size();
        std::vector<std::size_t> pb(kf);
        for (std::size_t b = 0; b < kf; ++b) pb[b] = solver.portal_at(f, b, s);
        std::vector<double> vf(nt * kf);
        for (std::size_t x = 0; x < nt; ++x) {
          const double* vx = &fr.v[x * k];
          for (std::size_t b = 0; b < kf; ++b) {
            double best = kInf;
            for (std::size_t a = 0; a < k; ++a) {
              double v = vx[a] + ms[pa[a] * ns + pb[b]];
              if (v < best) best = v;
            }
            vf[x * kf + b] = best;
          }
        }
        queue.push_back({f, std::move(vf)});
      }
    }
  }
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = i + 1; j < c; ++j) {
      double v = std::min(out[i * c + j], out[j * c + i]);
      out[i * c + j] = out[j * c + i] = v;
    }
  g.space = FiniteCompactum(c, std::move(out));
  carry_coords(sys, g);

  double scale = std::max(1.0, g.space.diameter());
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = i + 1; j < c; ++j)
      if (g.space.dist(i, j) <= kMetricTolerance * scale)
        throw Error("degenerate quotient: realization classes at distance ~0");

  Realization r;
  r.glued = std::move(g);
  r.weights = weights;
  r.basepoints = bp;
  for (EdgeId e : sys.tree.stub_edges()) {
    r.end_markers[e] = r.glued.at(sys.tree.alpha(e), bp.at(e));
    r.error = std::max(r.error, sys.tails.at(e));
  }
  return r;
}

Realization realize_limit(const TruncatedTreeSystem& sys) {
  return realize_limit(sys, choose_basepoints(sys), unit_weights(sys));
}

PointSet g_set(const TruncatedTreeSystem& sys, const SubtreeRef& f, const GluedSpace& k_f,
               const PointSet& u, const Realization& realization) {
  if (!is_saturated(sys, f, k_f, u)) throw Error("g_set: U is not saturated with respect to A_F");
  std::set<std::size_t> out;
  std::set<std::size_t> uset(u.begin(), u.end());
  for (std::size_t cls : u)
    for (auto [t, i] : k_f.members[cls]) out.insert(realization.glued.at(t, i));
  for (EdgeId e : n_set(sys.tree, f)) {
    if (!sys.peripherals.count(e)) continue;
    auto img = k_f.image(sys.tree.alpha(e), sys.peripheral(e));
    bool inside = !img.empty() && uset.count(img.front()) > 0;
    if (!inside) continue;
    if (sys.tree.is_stub(e)) continue;  // the end marker class is already in U's image
    auto side = half_tree(sys.tree, e);
    for (VertexId v : side.vertices()) {
      std::size_t n = sys.constituent(v).size();
      for (std::size_t i = 0; i < n; ++i) out.insert(realization.glued.at(v, i));
    }
  }
  return PointSet(out.begin(), out.end());
}

RefineComparison refine_and_compare(const TruncatedTreeSystem& shallow,
                                    const TruncatedTreeSystem& deep, const WeightMap& w_shallow,
                                    const WeightMap& w_deep) {
  Realization rs = realize_limit(shallow, choose_basepoints(shallow), w_shallow);
  Realization rd = realize_limit(deep, choose_basepoints(deep), w_deep);
  std::set<VertexId> sverts(shallow.tree.vertices().begin(), shallow.tree.vertices().end());
  VertexId anchor = shallow.tree.vertices().front();

  auto entry_stub = [&](VertexId t) -> EdgeId {
    for (EdgeId e : deep.tree.path(anchor, t))
      if (sverts.count(deep.tree.alpha(e)) && !sverts.count(deep.tree.omega(e))) return e;
    throw Error("refine_and_compare: deep vertex not beyond the shallow frontier");
  };

  Correspondence r;
  for (std::size_t cls = 0; cls < rd.glued.members.size(); ++cls) {
    std::size_t target = std::size_t(-1);
    for (auto [t, i] : rd.glued.members[cls]) {
      if (sverts.count(t)) {
        target = rs.glued.at(t, i);
        break;
      }
    }
    if (target == std::size_t(-1)) {
      auto [t, i] = rd.glued.members[cls].front();
      (void)i;
      EdgeId e = entry_stub(t);
      if (!shallow.tree.is_stub(e))
        throw Error("refine_and_compare: frontier edge is not a stub of the shallow system");
      target = rs.end_markers.at(e);
    }
    r.pairs.push_back({cls, target});
  }
  RefineComparison out;
  out.gh_bound = gh_upper(rd.space(), rs.space(), r);
  for (const auto& [e, sigma] : shallow.tails) {
    (void)e;
    out.max_tail_shallow = std::max(out.max_tail_shallow, sigma);
  }
  return out;
}

std::vector<SubtreeRef> bfs_chain(const Tree& tree, VertexId root) {
  std::vector<SubtreeRef> chain;
  std::vector<VertexId> acc{root};
  std::set<VertexId> seen{root};
  chain.emplace_back(tree, acc);
  std::vector<VertexId> frontier{root};
  while (true) {
    std::vector<VertexId> next;
    for (VertexId v : frontier)
      for (EdgeId e : tree.out_edges(v)) {
        if (tree.is_stub(e)) continue;
        VertexId s = tree.omega(e);
        if (!seen.count(s)) {
          seen.insert(s);
          next.push_back(s);
        }
      }
    if (next.empty()) break;
    std::sort(next.begin(), next.end());
    for (VertexId v : next) {
      acc.push_back(v);
      chain.emplace_back(tree, acc);
    }
    frontier = next;
  }
  return chain;
}

std::vector<std::size_t> StarSystem::project(std::size_t j, std::size_t i) const {
  if (i > j) throw Error("project: levels out of order");
  std::vector<std::size_t> id(spaces[j].members.size());
  std::iota(id.begin(), id.end(), 0);
  for (std::size_t lvl = j; lvl > i; --lvl) {
    std::vector<std::size_t> next(id.size());
    for (std::size_t x = 0; x < id.size(); ++x) next[x] = projections[lvl - 1][id[x]];
    id = std::move(next);
  }
  return id;
}

StarSystem star_inverse_system(const TruncatedTreeSystem& sys, const BasePointing& bp,
                               const WeightMap& weights, const std::vector<SubtreeRef>& chain) {
  for (std::size_t i = 1; i < chain.size(); ++i) {
    for (VertexId v : chain[i - 1].vertices())
      if (!chain[i].contains(v)) throw Error("star_inverse_system: chain is not increasing");
  }
  StarSystem out;
  out.chain = chain;
  for (const auto& f : chain) out.spaces.push_back(build_star(sys, bp, weights, f.vertices()));
  for (std::size_t lvl = 0; lvl + 1 < chain.size(); ++lvl) {
    const auto& big = out.spaces[lvl + 1];
    const auto& small = out.spaces[lvl];
    const auto& fs = chain[lvl];
    std::vector<std::size_t> proj(big.members.size());
    for (std::size_t cls = 0; cls < big.members.size(); ++cls) {
      std::size_t target = std::size_t(-1);
      for (auto [t, i] : big.members[cls])
        if (fs.contains(t)) {
          target = small.at(t, i);
          break;
        }
      if (target == std::size_t(-1)) {
        auto [t, i] = big.members[cls].front();
        (void)i;
        EdgeId first = -1;
        for (EdgeId e : sys.tree.path(fs.vertices().front(), t))
          if (fs.contains(sys.tree.alpha(e)) && !fs.contains(sys.tree.omega(e))) {
            first = e;
            break;
          }
        if (first < 0) throw Error("star_inverse_system: lost path to outer vertex");
        target = small.at(sys.tree.alpha(first), bp.at(first));
      }
      proj[cls] = target;
    }
    out.projections.push_back(std::move(proj));
  }
  return out;
}

}  // namespace arbor
