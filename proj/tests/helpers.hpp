#pragma once

// Shared generators and independent oracles for the test suites. Oracles are
// deliberately written as brute-force/reference routines, disjoint from the
// library's implementation paths.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "arbor/metric.hpp"
#include "arbor/system.hpp"
#include "arbor/tree.hpp"

namespace testutil {

using namespace arbor;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Random tree on n vertices (ids 0..n-1): each vertex v>0 attaches to a
/// uniformly random earlier vertex.
inline Tree random_tree(std::size_t n, std::mt19937_64& gen) {
  Tree t;
  for (std::size_t v = 0; v < n; ++v) t.add_vertex(static_cast<VertexId>(v));
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> pick(0, v - 1);
    t.add_edge(static_cast<VertexId>(pick(gen)), static_cast<VertexId>(v));
  }
  return t;
}

/// Random points in the unit square with the Euclidean metric.
inline FiniteCompactum random_euclidean(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({u(gen), u(gen)});
  return FiniteCompactum::from_points_2d(pts);
}

// --- Oracles -----------------------------------------------------------

/// BFS path oracle returning the vertex sequence from a to b.
inline std::vector<VertexId> bfs_path_oracle(const Tree& t, VertexId a, VertexId b) {
  std::vector<VertexId> frontier{a};
  std::map<VertexId, VertexId> prev;
  prev[a] = a;
  while (!frontier.empty()) {
    std::vector<VertexId> next;
    for (VertexId v : frontier)
      for (EdgeId e : t.out_edges(v)) {
        if (t.is_stub(e)) continue;
        VertexId w = t.omega(e);
        if (!prev.count(w)) {
          prev[w] = v;
          next.push_back(w);
        }
      }
    frontier = next;
  }
  std::vector<VertexId> out;
  for (VertexId v = b;; v = prev.at(v)) {
    out.push_back(v);
    if (v == a) break;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

/// Exhaustive filter oracle for N_S.
inline std::vector<EdgeId> n_set_oracle(const Tree& t, const SubtreeRef& s) {
  std::vector<EdgeId> out;
  for (EdgeId e : t.oriented_edges()) {
    bool ain = s.contains(t.alpha(e));
    bool oin = !t.is_stub(e) && s.contains(t.omega(e));
    if (ain && !oin) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Flood-fill oracle for the half tree of e.
inline std::set<VertexId> half_tree_oracle(const Tree& t, EdgeId e) {
  std::set<VertexId> seen{t.omega(e)};
  bool grew = true;
  while (grew) {
    grew = false;
    for (EdgeId f : t.oriented_edges()) {
      if (t.is_stub(f) || f == e || f == t.bar(e)) continue;
      if (seen.count(t.alpha(f)) && !seen.count(t.omega(f))) {
        seen.insert(t.omega(f));
        grew = true;
      }
    }
  }
  return seen;
}

/// Floyd-Warshall oracle for the chain quotient: contracts identified points
/// to class representatives, then closes the metric over all triples.
/// Returns the class-of map and the quotient matrix over class reps.
struct QuotientOracle {
  std::vector<std::size_t> class_of;
  std::vector<std::size_t> reps;
  std::vector<double> dist;  // reps.size() x reps.size()
  double at(std::size_t p, std::size_t q) const {
    auto ip = std::find(reps.begin(), reps.end(), class_of[p]) - reps.begin();
    auto iq = std::find(reps.begin(), reps.end(), class_of[q]) - reps.begin();
    return dist[ip * reps.size() + iq];
  }
};

inline QuotientOracle quotient_oracle(const FiniteCompactum& m,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& ids) {
  std::size_t n = m.size();
  QuotientOracle o;
  o.class_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) o.class_of[i] = i;
  bool changed = true;  // naive closure of the identification relation
  std::vector<std::pair<std::size_t, std::size_t>> pairs = ids;
  while (changed) {
    changed = false;
    for (auto [a, b] : pairs) {
      std::size_t ra = o.class_of[a], rb = o.class_of[b];
      if (ra != rb) {
        std::size_t lo = std::min(ra, rb), hi = std::max(ra, rb);
        for (auto& c : o.class_of)
          if (c == hi) c = lo;
        changed = true;
      }
    }
  }
  std::set<std::size_t> repset(o.class_of.begin(), o.class_of.end());
  o.reps.assign(repset.begin(), repset.end());
  std::size_t c = o.reps.size();
  std::map<std::size_t, std::size_t> pos;
  for (std::size_t i = 0; i < c; ++i) pos[o.reps[i]] = i;
  o.dist.assign(c * c, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < c; ++i) o.dist[i * c + i] = 0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      std::size_t a = pos[o.class_of[p]], b = pos[o.class_of[q]];
      if (a != b) o.dist[a * c + b] = std::min(o.dist[a * c + b], m.dist(p, q));
    }
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j)
        o.dist[i * c + j] = std::min(o.dist[i * c + j], o.dist[i * c + k] + o.dist[k * c + j]);
  return o;
}

// --- Seeded random tree systems ----------------------------------------

struct RandomSystemConfig {
  std::size_t vertices = 5;
  std::size_t points_min = 8;
  std::size_t points_max = 16;
  std::size_t peripheral_size = 2;
};

/// Builds a valid random tree system: Euclidean constituents, disjoint
/// random peripherals, random connector bijections.
inline TruncatedTreeSystem random_system(std::uint64_t seed, RandomSystemConfig cfg = {}) {
  auto gen = rng(seed);
  TruncatedTreeSystem sys;
  sys.tree = random_tree(cfg.vertices, gen);
  std::uniform_int_distribution<std::size_t> np(cfg.points_min, cfg.points_max);
  for (VertexId v : sys.tree.vertices()) {
    std::size_t need = cfg.peripheral_size * sys.tree.degree(v) + 2;
    sys.constituents[v] = random_euclidean(std::max(np(gen), need), gen);
  }
  // Disjoint peripherals: shuffle indices, carve consecutive chunks.
  for (VertexId v : sys.tree.vertices()) {
    const auto& k = sys.constituent(v);
    std::vector<std::size_t> idx(k.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), gen);
    std::size_t cursor = 0;
    for (EdgeId e : sys.tree.out_edges(v)) {
      PointSet sigma(idx.begin() + cursor, idx.begin() + cursor + cfg.peripheral_size);
      std::sort(sigma.begin(), sigma.end());
      sys.peripherals[e] = sigma;
      cursor += cfg.peripheral_size;
    }
  }
  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e) || e > sys.tree.bar(e)) continue;
    PointSet src = sys.peripherals[e];
    PointSet dst = sys.peripherals[sys.tree.bar(e)];
    std::shuffle(dst.begin(), dst.end(), gen);
    Connector conn, inv;
    for (std::size_t i = 0; i < src.size(); ++i) {
      conn.push_back({src[i], dst[i]});
      inv.push_back({dst[i], src[i]});
    }
    std::sort(conn.begin(), conn.end());
    std::sort(inv.begin(), inv.end());
    sys.connectors[e] = conn;
    sys.connectors[sys.tree.bar(e)] = inv;
  }
  return sys;
}

}  // namespace testutil
