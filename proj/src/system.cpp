#include "arbor/system.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace arbor {

const FiniteCompactum& TruncatedTreeSystem::constituent(VertexId t) const {
  auto it = constituents.find(t);
  if (it == constituents.end()) throw Error("no constituent at vertex " + std::to_string(t));
  return it->second;
}

const PointSet& TruncatedTreeSystem::peripheral(EdgeId e) const {
  auto it = peripherals.find(e);
  if (it == peripherals.end()) throw Error("no peripheral at edge " + std::to_string(e));
  return it->second;
}

std::size_t TruncatedTreeSystem::phi(EdgeId e, std::size_t point) const {
  auto it = connectors.find(e);
  if (it == connectors.end()) throw Error("no connector at edge " + std::to_string(e));
  for (auto [a, b] : it->second)
    if (a == point) return b;
  throw Error("point not in peripheral of edge " + std::to_string(e));
}

double TruncatedTreeSystem::connector_distortion(const WeightMap* weights) const {
  double worst = 0;
  for (const auto& [e, conn] : connectors) {
    if (tree.is_ghost(e)) continue;
    VertexId t = tree.alpha(e), s = tree.omega(e);
    double wt = weights ? weights->at(t) : 1.0;
    double ws = weights ? weights->at(s) : 1.0;
    const auto& kt = constituent(t);
    const auto& ks = constituent(s);
    for (std::size_t a = 0; a < conn.size(); ++a)
      for (std::size_t b = a + 1; b < conn.size(); ++b) {
        double src = wt * kt.dist(conn[a].first, conn[b].first);
        double dst = ws * ks.dist(conn[a].second, conn[b].second);
        worst = std::max(worst, std::abs(src - dst));
      }
  }
  return worst;
}

Report validate_system(const TruncatedTreeSystem& sys) {
  Report rep;
  for (const auto& msg : sys.tree.validate()) rep.fail("TS1-tree", msg);

  for (VertexId t : sys.tree.vertices()) {
    if (!sys.constituents.count(t)) {
      rep.fail("TS2-constituent", "vertex " + std::to_string(t) + " has no constituent");
      continue;
    }
    auto mrep = validate_metric(sys.constituent(t));
    if (!mrep.ok())
      rep.fail("TS2-metric", "constituent at vertex " + std::to_string(t) + " has " +
                                 std::to_string(mrep.violations.size()) + " metric violation(s)");
  }
  if (!rep.ok() && rep.has("TS2-constituent")) return rep;  // nothing below makes sense

  for (EdgeId e : sys.tree.oriented_edges()) {
    auto it = sys.peripherals.find(e);
    if (it == sys.peripherals.end()) {
      rep.fail("TS3-missing", "edge " + std::to_string(e) + " has no peripheral subset");
      continue;
    }
    const auto& sigma = it->second;
    if (sigma.empty()) rep.fail("TS3-empty", "peripheral of edge " + std::to_string(e) + " empty");
    std::size_t n = sys.constituent(sys.tree.alpha(e)).size();
    for (std::size_t p : sigma)
      if (p >= n)
        rep.fail("TS3-range", "peripheral point out of range at edge " + std::to_string(e));
  }

  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e)) {
      if (!sys.tails.count(e))
        rep.fail("stub-tail", "stub edge " + std::to_string(e) + " has no tail bound");
      else if (sys.tails.at(e) < 0)
        rep.fail("stub-tail", "stub edge " + std::to_string(e) + " has negative tail bound");
      if (sys.connectors.count(e))
        rep.fail("stub-connector", "stub edge " + std::to_string(e) + " carries a connector");
      continue;
    }
    if (!sys.peripherals.count(e) || !sys.peripherals.count(sys.tree.bar(e))) continue;
    auto it = sys.connectors.find(e);
    if (it == sys.connectors.end()) {
      rep.fail("TS3-bijection", "edge " + std::to_string(e) + " has no connector");
      continue;
    }
    const auto& conn = it->second;
    const auto& src = sys.peripheral(e);
    const auto& dst = sys.peripheral(sys.tree.bar(e));
    PointSet seen_src, seen_dst;
    for (auto [a, b] : conn) {
      seen_src.push_back(a);
      seen_dst.push_back(b);
    }
    std::sort(seen_src.begin(), seen_src.end());
    std::sort(seen_dst.begin(), seen_dst.end());
    PointSet want_src = src, want_dst = dst;
    std::sort(want_src.begin(), want_src.end());
    std::sort(want_dst.begin(), want_dst.end());
    if (seen_src != want_src || seen_dst != want_dst ||
        std::adjacent_find(seen_dst.begin(), seen_dst.end()) != seen_dst.end())
      rep.fail("TS3-bijection",
               "connector of edge " + std::to_string(e) + " is not a peripheral bijection");
    // phi_bar must be the exact inverse.
    auto jt = sys.connectors.find(sys.tree.bar(e));
    if (jt == sys.connectors.end()) continue;
    for (auto [a, b] : conn) {
      bool found = false;
      for (auto [b2, a2] : jt->second)
        if (b2 == b && a2 == a) found = true;
      if (!found) {
        rep.fail("TS3-involution",
                 "connectors of edge " + std::to_string(e) + " and its reverse are not inverse");
        break;
      }
    }
  }

  // (TS4) pairwise disjointness and nullity profile per vertex.
  for (VertexId t : sys.tree.vertices()) {
    auto edges = sys.tree.out_edges(t);
    std::map<std::size_t, EdgeId> taken;
    std::vector<PointSet> family;
    for (EdgeId e : edges) {
      if (!sys.peripherals.count(e)) continue;
      family.push_back(sys.peripheral(e));
      for (std::size_t p : sys.peripheral(e)) {
        auto [it, fresh] = taken.insert({p, e});
        if (!fresh)
          rep.fail("TS4-overlap", "peripherals of edges " + std::to_string(it->second) + " and " +
                                      std::to_string(e) + " share point " + std::to_string(p) +
                                      " at vertex " + std::to_string(t));
      }
    }
    if (!family.empty() && sys.constituents.count(t)) {
      auto prof = nullity_profile(sys.constituent(t), family);
      rep.stats["nullity-v" + std::to_string(t) + "-max"] =
          static_cast<double>(prof.counts.front());
    }
  }

  if (sys.labeled()) {
    for (VertexId t : sys.tree.vertices())
      if (!sys.labels.count(t))
        rep.fail("label-missing", "vertex " + std::to_string(t) + " unlabeled");
  }

  if (sys.declared_density_resolution) {
    double eps = *sys.declared_density_resolution;
    for (VertexId t : sys.tree.vertices()) {
      const auto& k = sys.constituent(t);
      PointSet peri;
      for (EdgeId e : sys.tree.out_edges(t)) {
        if (!sys.peripherals.count(e)) continue;
        const auto& s = sys.peripheral(e);
        peri.insert(peri.end(), s.begin(), s.end());
      }
      if (peri.empty()) {
        rep.fail("density", "vertex " + std::to_string(t) + " has no peripheral points");
        continue;
      }
      for (std::size_t p = 0; p < k.size(); ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t q : peri) best = std::min(best, k.dist(p, q));
        if (best > eps * (1 + 1e-12)) {
          rep.fail("density", "vertex " + std::to_string(t) + " point " + std::to_string(p) +
                                  " is " + std::to_string(best) + " from every peripheral point");
          break;
        }
      }
    }
  }

  double tail_max = 0;
  for (const auto& [e, s] : sys.tails) tail_max = std::max(tail_max, s);
  rep.stats["max-tail"] = tail_max;
  rep.stats["max-connector-distortion"] = rep.ok() ? sys.connector_distortion() : -1.0;
  return rep;
}

TruncatedTreeSystem restrict_system(const TruncatedTreeSystem& sys, const SubtreeRef& f) {
  TruncatedTreeSystem out;
  for (VertexId v : f.vertices()) out.tree.add_vertex(v);
  for (EdgeId e : f.internal_edges(sys.tree))
    if (e < sys.tree.bar(e))
      out.tree.add_edge_with_ids(sys.tree.alpha(e), sys.tree.omega(e), e, sys.tree.bar(e));
  for (EdgeId e : n_set(sys.tree, f)) {
    out.tree.add_stub_with_ids(sys.tree.alpha(e), sys.tree.omega(e), e, sys.tree.bar(e));
    if (sys.tree.is_stub(e)) {
      out.tails[e] = sys.tails.at(e);
    } else {
      // Sum of pruned constituent diameters plus prior tails through e.
      double sigma = 0;
      auto side = half_tree(sys.tree, e);
      for (VertexId v : side.vertices()) {
        sigma += sys.constituent(v).diameter();
        for (EdgeId g : sys.tree.out_edges(v))
          if (sys.tree.is_stub(g)) sigma += sys.tails.at(g);
      }
      out.tails[e] = sigma;
    }
  }
  for (VertexId v : f.vertices()) out.constituents[v] = sys.constituent(v);
  for (EdgeId e : out.tree.oriented_edges()) {
    out.peripherals[e] = sys.peripheral(e);
    if (!out.tree.is_stub(e)) out.connectors[e] = sys.connectors.at(e);
    if (out.tree.is_stub(e) && sys.stub_promises.count(e))
      out.stub_promises[e] = sys.stub_promises.at(e);
  }
  for (VertexId v : f.vertices())
    if (sys.labels.count(v)) out.labels[v] = sys.labels.at(v);
  out.orientation_all_oriented = sys.orientation_all_oriented;
  out.declared_density_resolution = sys.declared_density_resolution;
  // Promises for freshly pruned labeled subtrees.
  if (sys.labeled()) {
    for (EdgeId e : out.tree.stub_edges()) {
      if (out.stub_promises.count(e) || sys.tree.is_stub(e)) continue;
      StubPromise promise;
      promise.child_label = sys.labels.count(sys.tree.omega(e)) ? sys.labels.at(sys.tree.omega(e)) : -1;
      std::set<int> beyond;
      auto pruned = half_tree(sys.tree, e);
      for (VertexId v : pruned.vertices()) {
        if (sys.labels.count(v)) beyond.insert(sys.labels.at(v));
        for (EdgeId g : sys.tree.out_edges(v))
          if (sys.tree.is_stub(g) && sys.stub_promises.count(g))
            for (int l : sys.stub_promises.at(g).labels_beyond) beyond.insert(l);
      }
      promise.labels_beyond.assign(beyond.begin(), beyond.end());
      out.stub_promises[e] = promise;
    }
  }
  return out;
}

std::size_t GluedSpace::at(VertexId t, std::size_t p) const {
  auto it = index.find({t, p});
  if (it == index.end()) throw Error("point not present in glued space");
  return it->second;
}

PointSet GluedSpace::image(VertexId t, const PointSet& pts) const {
  PointSet out;
  for (std::size_t p : pts) out.push_back(at(t, p));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GluedSpace partial_union(const TruncatedTreeSystem& sys, const SubtreeRef& f,
                         const WeightMap* weights) {
  // Disjoint union with an inert large cross-distance, then chain quotient
  // over the internal peripheral identifications. The cross filler never
  // lies on a shortest chain, so the result is the true glued metric.
  std::vector<VertexId> verts(f.vertices());
  std::size_t total = 0;
  std::map<VertexId, std::size_t> offset;
  double weighted_diam_sum = 0;
  for (VertexId v : verts) {
    offset[v] = total;
    total += sys.constituent(v).size();
    double w = weights ? weights->at(v) : 1.0;
    weighted_diam_sum += w * sys.constituent(v).diameter();
  }
  double filler = 2 * weighted_diam_sum + 1.0;
  std::vector<double> d(total * total, filler);
  for (VertexId v : verts) {
    double w = weights ? weights->at(v) : 1.0;
    const auto& k = sys.constituent(v);
    for (std::size_t i = 0; i < k.size(); ++i)
      for (std::size_t j = 0; j < k.size(); ++j)
        d[(offset[v] + i) * total + (offset[v] + j)] = w * k.dist(i, j);
  }
  FiniteCompactum big(total, std::move(d));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (EdgeId e : f.internal_edges(sys.tree)) {
    VertexId a = sys.tree.alpha(e), o = sys.tree.omega(e);
    for (auto [p, q] : sys.connectors.at(e)) pairs.push_back({offset[a] + p, offset[o] + q});
  }
  Quotient q = quotient_metric(big, pairs);
  GluedSpace out;
  out.space = std::move(q.space);
  out.members.resize(q.classes.size());
  for (VertexId v : verts) {
    const auto& k = sys.constituent(v);
    for (std::size_t i = 0; i < k.size(); ++i) {
      std::size_t cls = q.class_of[offset[v] + i];
      out.index[{v, i}] = cls;
      out.members[cls].push_back({v, i});
    }
  }
  // Carry coordinates when every piece has them.
  bool all_coords = true;
  for (VertexId v : verts) all_coords = all_coords && !sys.constituent(v).coords.empty();
  if (all_coords) {
    out.space.coords.clear();
    for (const auto& cls : out.members) {
      auto [v, i] = cls.front();
      out.space.coords.push_back(sys.constituent(v).coords[i]);
    }
  }
  return out;
}

bool is_saturated(const TruncatedTreeSystem& sys, const SubtreeRef& f, const GluedSpace& glued,
                  const PointSet& u) {
  std::set<std::size_t> uset(u.begin(), u.end());
  for (EdgeId e : n_set(sys.tree, f)) {
    if (!sys.peripherals.count(e)) continue;
    auto img = glued.image(sys.tree.alpha(e), sys.peripheral(e));
    std::size_t inside = 0;
    for (std::size_t c : img) inside += uset.count(c);
    if (inside != 0 && inside != img.size()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Isomorphism checking and search.

Report check_isomorphism(const TruncatedTreeSystem& a, const TruncatedTreeSystem& b,
                         const SystemIsomorphism& cand) {
  Report rep;
  // (I1) lambda is a tree isomorphism compatible with bar/stubs.
  if (cand.vertex_map.size() != a.tree.vertex_count() ||
      b.tree.vertex_count() != a.tree.vertex_count())
    rep.fail("I1", "vertex map is not a bijection onto the target tree");
  std::set<VertexId> image;
  for (const auto& [s, t] : cand.vertex_map) {
    if (!a.tree.has_vertex(s) || !b.tree.has_vertex(t)) rep.fail("I1", "vertex map out of range");
    image.insert(t);
  }
  if (image.size() != cand.vertex_map.size()) rep.fail("I1", "vertex map not injective");
  for (EdgeId e : a.tree.oriented_edges()) {
    auto it = cand.edge_map.find(e);
    if (it == cand.edge_map.end()) {
      rep.fail("I1", "edge " + std::to_string(e) + " unmapped");
      continue;
    }
    EdgeId e2 = it->second;
    if (a.tree.is_stub(e) != b.tree.is_stub(e2))
      rep.fail("I1", "stub/non-stub mismatch at edge " + std::to_string(e));
    if (cand.vertex_map.at(a.tree.alpha(e)) != b.tree.alpha(e2))
      rep.fail("I1", "alpha mismatch at edge " + std::to_string(e));
    if (!a.tree.is_stub(e)) {
      if (cand.vertex_map.at(a.tree.omega(e)) != b.tree.omega(e2))
        rep.fail("I1", "omega mismatch at edge " + std::to_string(e));
      if (!cand.edge_map.count(a.tree.bar(e)) || cand.edge_map.at(a.tree.bar(e)) != b.tree.bar(e2))
        rep.fail("I1", "bar mismatch at edge " + std::to_string(e));
    }
  }
  if (!rep.ok()) return rep;

  if (a.labeled() || b.labeled()) {
    for (const auto& [s, t] : cand.vertex_map) {
      int la = a.labels.count(s) ? a.labels.at(s) : -1;
      int lb = b.labels.count(t) ? b.labels.at(t) : -1;
      if (la != lb) rep.fail("label", "label mismatch at vertex " + std::to_string(s));
    }
  }

  // Point maps: bijections.
  double distortion = 0;
  for (const auto& [s, t] : cand.vertex_map) {
    auto it = cand.point_maps.find(s);
    if (it == cand.point_maps.end()) {
      rep.fail("I2", "missing point map at vertex " + std::to_string(s));
      continue;
    }
    const auto& f = it->second;
    const auto& ka = a.constituent(s);
    const auto& kb = b.constituent(t);
    if (f.size() != ka.size() || kb.size() != ka.size()) {
      rep.fail("I2", "point map size mismatch at vertex " + std::to_string(s));
      continue;
    }
    std::vector<char> hit(kb.size(), 0);
    for (std::size_t img : f) {
      if (img >= kb.size()) {
        rep.fail("I2", "point map out of range at vertex " + std::to_string(s));
        break;
      }
      hit[img] = 1;
    }
    if (!std::all_of(hit.begin(), hit.end(), [](char c) { return c; }))
      rep.fail("I2", "point map not bijective at vertex " + std::to_string(s));
    for (std::size_t i = 0; i < ka.size() && rep.ok(); ++i)
      for (std::size_t j = i + 1; j < ka.size(); ++j)
        distortion = std::max(distortion, std::abs(ka.dist(i, j) - kb.dist(f[i], f[j])));
  }
  if (!rep.ok()) return rep;
  rep.stats["distortion"] = distortion;

  // (I3) peripherals onto peripherals, (I4) commutation.
  for (EdgeId e : a.tree.oriented_edges()) {
    EdgeId e2 = cand.edge_map.at(e);
    VertexId s = a.tree.alpha(e);
    const auto& f = cand.point_maps.at(s);
    PointSet img;
    for (std::size_t p : a.peripheral(e)) img.push_back(f[p]);
    std::sort(img.begin(), img.end());
    PointSet want = b.peripheral(e2);
    std::sort(want.begin(), want.end());
    if (img != want) {
      rep.fail("I3", "peripheral image mismatch at edge " + std::to_string(e));
      continue;
    }
    if (a.tree.is_stub(e)) continue;
    const auto& fw = cand.point_maps.at(a.tree.omega(e));
    for (std::size_t p : a.peripheral(e)) {
      if (fw[a.phi(e, p)] != b.phi(e2, f[p])) {
        rep.fail("I4", "connector square fails at edge " + std::to_string(e) + " point " +
                           std::to_string(p));
        break;
      }
    }
  }
  return rep;
}

namespace {

// Canonical rooted-shape string used to prune the tree search.
std::string shape_key(const TruncatedTreeSystem& sys, VertexId v, EdgeId from,
                      std::map<std::pair<VertexId, EdgeId>, std::string>& memo) {
  auto key = std::make_pair(v, from);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  std::ostringstream os;
  int label = sys.labels.count(v) ? sys.labels.at(v) : -1;
  os << "(v l" << label << " n" << sys.constituent(v).size();
  std::vector<std::string> kids;
  for (EdgeId e : sys.tree.out_edges(v)) {
    if (from >= 0 && e == sys.tree.bar(from)) continue;
    std::ostringstream eo;
    eo << "[p" << (sys.peripherals.count(e) ? sys.peripheral(e).size() : 0);
    if (sys.tree.is_stub(e)) {
      eo << " stub";
      if (sys.stub_promises.count(e)) {
        const auto& pr = sys.stub_promises.at(e);
        eo << " c" << pr.child_label << " b";
        for (int l : pr.labels_beyond) eo << l << ",";
      }
      eo << "]";
    } else {
      eo << "]" << shape_key(sys, sys.tree.omega(e), e, memo);
    }
    kids.push_back(eo.str());
  }
  std::sort(kids.begin(), kids.end());
  for (const auto& k : kids) os << k;
  os << ")";
  memo[key] = os.str();
  return memo[key];
}

struct Finder {
  const TruncatedTreeSystem& a;
  const TruncatedTreeSystem& b;
  double tol;
  std::map<std::pair<VertexId, EdgeId>, std::string> memo_a, memo_b;
  SystemIsomorphism iso;

  // Sorted full-distance profile of one point.
  static std::vector<double> profile(const FiniteCompactum& k, std::size_t p) {
    std::vector<double> out;
    out.reserve(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) out.push_back(k.dist(p, j));
    std::sort(out.begin(), out.end());
    return out;
  }

  // Deterministic bijection src -> dst inside (ka, kb) by profile order.
  static void match_by_profile(const FiniteCompactum& ka, const FiniteCompactum& kb,
                               const PointSet& src, const PointSet& dst,
                               std::vector<std::size_t>& f) {
    auto rank = [](const FiniteCompactum& k, const PointSet& pts) {
      std::vector<std::pair<std::vector<double>, std::size_t>> r;
      for (std::size_t p : pts) r.push_back({profile(k, p), p});
      std::sort(r.begin(), r.end());
      return r;
    };
    auto ra = rank(ka, src), rb = rank(kb, dst);
    for (std::size_t i = 0; i < ra.size(); ++i) f[ra[i].second] = rb[i].second;
  }

  bool match(VertexId va, EdgeId froma, VertexId vb, EdgeId fromb,
             const std::map<std::size_t, std::size_t>& forced) {
    if (shape_key(a, va, froma, memo_a) != shape_key(b, vb, fromb, memo_b)) return false;
    const auto& ka = a.constituent(va);
    const auto& kb = b.constituent(vb);
    if (ka.size() != kb.size()) return false;

    iso.vertex_map[va] = vb;
    std::vector<std::size_t> f(ka.size(), std::size_t(-1));
    for (auto [p, q] : forced) f[p] = q;

    // Pair up the child edges: group by shape, then try assignments.
    std::vector<EdgeId> ea, eb;
    for (EdgeId e : a.tree.out_edges(va))
      if (froma < 0 || e != a.tree.bar(froma)) ea.push_back(e);
    for (EdgeId e : b.tree.out_edges(vb))
      if (fromb < 0 || e != b.tree.bar(fromb)) eb.push_back(e);
    if (ea.size() != eb.size()) return false;

    auto edge_key = [&](const TruncatedTreeSystem& sys, EdgeId e, bool is_a) -> std::string {
      std::ostringstream os;
      os << "p" << sys.peripheral(e).size();
      if (sys.tree.is_stub(e))
        os << " stub";
      else
        os << shape_key(sys, sys.tree.omega(e), e, is_a ? memo_a : memo_b);
      return os.str();
    };

    // Backtracking over compatible edge pairings.
    std::vector<int> assign(ea.size(), -1);
    std::vector<char> used(eb.size(), 0);
    std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
      if (i == ea.size()) {
        // All edges paired; fix the point map and recurse into children.
        auto f_local = f;
        for (std::size_t k = 0; k < ea.size(); ++k) {
          const auto& src = a.peripheral(ea[k]);
          const auto& dst = b.peripheral(eb[assign[k]]);
          PointSet src_free, dst_free;
          std::set<std::size_t> taken;
          for (std::size_t p : src)
            if (f_local[p] != std::size_t(-1)) taken.insert(f_local[p]);
          for (std::size_t p : src)
            if (f_local[p] == std::size_t(-1)) src_free.push_back(p);
          for (std::size_t q : dst)
            if (!taken.count(q)) dst_free.push_back(q);
          if (src_free.size() != dst_free.size()) return false;
          match_by_profile(ka, kb, src_free, dst_free, f_local);
        }
        // Remaining interior points by profile.
        PointSet rest_a, rest_b;
        std::set<std::size_t> taken;
        for (std::size_t p = 0; p < ka.size(); ++p)
          if (f_local[p] != std::size_t(-1)) taken.insert(f_local[p]);
        for (std::size_t p = 0; p < ka.size(); ++p)
          if (f_local[p] == std::size_t(-1)) rest_a.push_back(p);
        for (std::size_t q = 0; q < kb.size(); ++q)
          if (!taken.count(q)) rest_b.push_back(q);
        if (rest_a.size() != rest_b.size()) return false;
        match_by_profile(ka, kb, rest_a, rest_b, f_local);
        iso.point_maps[va] = f_local;

        for (std::size_t k = 0; k < ea.size(); ++k) {
          iso.edge_map[ea[k]] = eb[assign[k]];
          if (!a.tree.is_stub(ea[k])) iso.edge_map[a.tree.bar(ea[k])] = b.tree.bar(eb[assign[k]]);
        }
        if (froma >= 0) {
          iso.edge_map[a.tree.bar(froma)] = b.tree.bar(iso.edge_map.at(froma));
        }
        for (std::size_t k = 0; k < ea.size(); ++k) {
          if (a.tree.is_stub(ea[k])) continue;
          // Force the child-side map on the glued peripheral via (I4).
          std::map<std::size_t, std::size_t> child_forced;
          for (std::size_t p : a.peripheral(ea[k]))
            child_forced[a.phi(ea[k], p)] = b.phi(eb[assign[k]], f_local[p]);
          iso.edge_map[ea[k]] = eb[assign[k]];
          if (!match(a.tree.omega(ea[k]), ea[k], b.tree.omega(eb[assign[k]]), eb[assign[k]],
                     child_forced))
            return false;
        }
        return true;
      }
      std::string want = edge_key(a, ea[i], true);
      for (std::size_t j = 0; j < eb.size(); ++j) {
        if (used[j] || edge_key(b, eb[j], false) != want) continue;
        used[j] = 1;
        assign[i] = static_cast<int>(j);
        if (go(i + 1)) return true;
        used[j] = 0;
      }
      return false;
    };
    return go(0);
  }
};

}  // namespace

std::optional<SystemIsomorphism> find_isomorphism(const TruncatedTreeSystem& a,
                                                  const TruncatedTreeSystem& b, double tolerance) {
  if (a.tree.vertex_count() != b.tree.vertex_count()) return std::nullopt;
  if (a.tree.vertex_count() == 0) return SystemIsomorphism{};
  VertexId root_a = a.tree.vertices().front();
  for (VertexId root_b : b.tree.vertices()) {
    Finder fd{a, b, tolerance, {}, {}, {}};
    if (!fd.match(root_a, -1, root_b, -1, {})) continue;
    Report rep = check_isomorphism(a, b, fd.iso);
    if (rep.ok() && rep.stats.at("distortion") <= tolerance) return fd.iso;
  }
  return std::nullopt;
}

double compute_density_resolution(const TruncatedTreeSystem& sys) {
  double worst = 0;
  for (VertexId t : sys.tree.vertices()) {
    const auto& k = sys.constituent(t);
    PointSet peri;
    for (EdgeId e : sys.tree.out_edges(t))
      if (sys.peripherals.count(e))
        for (std::size_t q : sys.peripheral(e)) peri.push_back(q);
    for (EdgeId e : sys.tree.oriented_edges())
      if (!sys.tree.is_stub(e) && sys.tree.omega(e) == t)
        for (std::size_t q : sys.peripheral(sys.tree.bar(e))) peri.push_back(q);
    if (peri.empty()) {
      worst = std::max(worst, k.diameter());
      continue;
    }
    for (std::size_t p = 0; p < k.size(); ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t q : peri) best = std::min(best, k.dist(p, q));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

WeightMap geometric_weights(const TruncatedTreeSystem& sys, VertexId root, double ratio) {
  WeightMap w;
  std::deque<std::pair<VertexId, int>> queue{{root, 0}};
  std::set<VertexId> seen{root};
  while (!queue.empty()) {
    auto [v, depth] = queue.front();
    queue.pop_front();
    double diam = sys.constituent(v).diameter();
    w[v] = std::pow(ratio, depth) / (diam > 0 ? diam : 1.0);
    for (EdgeId e : sys.tree.out_edges(v)) {
      if (sys.tree.is_stub(e)) continue;
      VertexId s = sys.tree.omega(e);
      if (!seen.count(s)) {
        seen.insert(s);
        queue.push_back({s, depth + 1});
      }
    }
  }
  return w;
}

WeightMap unit_weights(const TruncatedTreeSystem& sys) {
  WeightMap w;
  for (VertexId v : sys.tree.vertices()) w[v] = 1.0;
  return w;
}

}  // namespace arbor
