#include "arbor/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace arbor {

namespace {

bool subset_of(const PointSet& a, const PointSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool disjoint(const PointSet& a, const PointSet& b) {
  PointSet tmp;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(tmp));
  return tmp.empty();
}

PointSet intersect(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PointSet unite(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PointSet diff(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PointSet sorted(PointSet v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Halfspace of splitting s containing the (disjoint-from-A_s) set x.
Half side_containing(const Splitting& s, const PointSet& x) {
  if (subset_of(x, s.y)) return Half::Y;
  if (subset_of(x, s.z)) return Half::Z;
  throw Error("set straddles a splitting it should not cross");
}

}  // namespace

const PointSet& halfspace(const Splitting& s, Half h) { return h == Half::Y ? s.y : s.z; }
Half other(Half h) { return h == Half::Y ? Half::Z : Half::Y; }

Splitting make_splitting(std::size_t ambient_size, PointSet a, PointSet y) {
  Splitting s;
  s.a = sorted(std::move(a));
  s.y = sorted(std::move(y));
  PointSet all(ambient_size);
  std::iota(all.begin(), all.end(), 0);
  s.z = unite(diff(all, s.y), s.a);
  return s;
}

Report validate_splitting(const FiniteCompactum& m, const Splitting& s) {
  Report rep;
  PointSet all(m.size());
  std::iota(all.begin(), all.end(), 0);
  if (unite(s.y, s.z) != all) rep.fail("cover", "Y u Z is not the whole space");
  if (intersect(s.y, s.z) != s.a) rep.fail("separator", "Y n Z != A");
  if (s.a.empty()) rep.fail("empty", "separator is empty");
  if (s.a == s.y || s.a == s.z) rep.fail("proper", "A is not proper in a halfspace");
  // Open-halfspace separation margin (positive whenever both sides are
  // nonempty, since the sets are disjoint in a metric space).
  PointSet oy = diff(s.y, s.a), oz = diff(s.z, s.a);
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t p : oy)
    for (std::size_t q : oz) sep = std::min(sep, m.dist(p, q));
  rep.stats["open-separation"] = oy.empty() || oz.empty() ? 0.0 : sep;
  return rep;
}

bool noncross(const Splitting& s1, const Splitting& s2) {
  for (Half h1 : {Half::Y, Half::Z})
    for (Half h2 : {Half::Y, Half::Z})
      if (disjoint(halfspace(s1, h1), halfspace(s2, h2))) return true;
  return false;
}

bool separates(const Decomposition& c, std::size_t i1, std::size_t i2, std::size_t i3) {
  const auto& mid = c[i2];
  for (Half h : {Half::Y, Half::Z}) {
    PointSet open_h = diff(halfspace(mid, h), mid.a);
    PointSet open_c = diff(halfspace(mid, other(h)), mid.a);
    if (subset_of(c[i1].a, open_h) && subset_of(c[i3].a, open_c)) return true;
  }
  return false;
}

Report is_discrete(const Decomposition& c) {
  Report rep;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      std::size_t count = 0;
      for (std::size_t k = 0; k < c.size(); ++k)
        if (k != i && k != j && separates(c, i, k, j)) ++count;
      worst = std::max(worst, count);
    }
  rep.stats["max-separating-count"] = static_cast<double>(worst);
  return rep;
}

Report is_fine(const FiniteCompactum& m, const Decomposition& c) {
  Report rep;
  auto ladder = default_ladder(m.diameter());
  for (std::size_t li = 0; li < ladder.size(); ++li) {
    std::size_t n = 0;
    for (const auto& s : c)
      if (std::min(m.diameter_of(s.y), m.diameter_of(s.z)) > ladder[li]) ++n;
    rep.stats["count-at-2^-" + std::to_string(li)] = static_cast<double>(n);
  }
  return rep;
}

Domain domain(const FiniteCompactum& m, const Decomposition& c, std::size_t idx, Half h) {
  (void)m;
  Domain out;
  out.splitting = idx;
  out.half = h;
  PointSet omega = halfspace(c[idx], h);
  std::vector<std::size_t> lambda;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k == idx) continue;
    Half hk = side_containing(c[k], c[idx].a);
    if (subset_of(halfspace(c[idx], h), halfspace(c[k], hk))) continue;
    bool shielded = false;
    for (std::size_t mid = 0; mid < c.size(); ++mid)
      if (mid != idx && mid != k && separates(c, idx, mid, k)) shielded = true;
    if (!shielded) lambda.push_back(k);
  }
  for (std::size_t k : lambda) {
    Half hk = side_containing(c[k], c[idx].a);
    omega = intersect(omega, halfspace(c[k], hk));
  }
  out.points = omega;
  out.adjacent.push_back(idx);
  for (std::size_t k : lambda) out.adjacent.push_back(k);
  std::sort(out.adjacent.begin(), out.adjacent.end());
  return out;
}

DualTree dual_tree(const FiniteCompactum& m, const Decomposition& c) {
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (!noncross(c[i], c[j]))
        throw Error("dual_tree: splittings " + std::to_string(i) + " and " + std::to_string(j) +
                    " cross");
  DualTree out;
  if (c.empty()) {
    out.tree.add_vertex(0);
    Domain whole;
    whole.points.resize(m.size());
    std::iota(whole.points.begin(), whole.points.end(), 0);
    out.domains.push_back(whole);
    return out;
  }
  std::map<PointSet, VertexId> seen;
  auto vertex_of = [&](const Domain& d) -> VertexId {
    auto it = seen.find(d.points);
    if (it != seen.end()) return it->second;
    VertexId v = static_cast<VertexId>(out.domains.size());
    seen[d.points] = v;
    out.domains.push_back(d);
    out.tree.add_vertex(v);
    return v;
  };
  for (std::size_t k = 0; k < c.size(); ++k) {
    Domain dy = domain(m, c, k, Half::Y);
    Domain dz = domain(m, c, k, Half::Z);
    VertexId vy = vertex_of(dy), vz = vertex_of(dz);
    if (vy == vz) throw Error("dual_tree: splitting " + std::to_string(k) + " has equal domains");
    // Oriented edge 2k terminates at the Y-side domain.
    out.tree.add_edge_with_ids(vz, vy, static_cast<EdgeId>(2 * k), static_cast<EdgeId>(2 * k + 1));
    out.edge[static_cast<EdgeId>(2 * k)] = {k, Half::Y};
    out.edge[static_cast<EdgeId>(2 * k + 1)] = {k, Half::Z};
    out.edge_of_splitting[k] = static_cast<EdgeId>(2 * k);
  }
  auto msgs = out.tree.validate();
  if (!msgs.empty()) throw Error("dual_tree: " + msgs.front());
  return out;
}

AssociatedSystem associated_system(const FiniteCompactum& m, const Decomposition& c) {
  AssociatedSystem out;
  out.dual = dual_tree(m, c);
  out.system.tree = out.dual.tree;
  for (std::size_t v = 0; v < out.dual.domains.size(); ++v) {
    const auto& pts = out.dual.domains[v].points;
    out.system.constituents[static_cast<VertexId>(v)] = m.restrict_to(pts);
    out.provenance[static_cast<VertexId>(v)] = pts;
  }
  auto local = [&](VertexId v, std::size_t ambient) {
    const auto& pts = out.provenance.at(v);
    auto it = std::lower_bound(pts.begin(), pts.end(), ambient);
    if (it == pts.end() || *it != ambient) throw Error("associated_system: point not in domain");
    return static_cast<std::size_t>(it - pts.begin());
  };
  for (const auto& [e, sh] : out.dual.edge) {
    auto [k, h] = sh;
    (void)h;
    VertexId a = out.dual.tree.alpha(e);
    PointSet sigma;
    for (std::size_t p : c[k].a) sigma.push_back(local(a, p));
    out.system.peripherals[e] = sorted(sigma);
    VertexId o = out.dual.tree.omega(e);
    Connector conn;
    for (std::size_t p : c[k].a) conn.push_back({local(a, p), local(o, p)});
    std::sort(conn.begin(), conn.end());
    out.system.connectors[e] = conn;
  }
  return out;
}

Report reconstruct_check(const FiniteCompactum& m, const Decomposition& c) {
  Report rep;
  auto assoc = associated_system(m, c);
  auto val = validate_system(assoc.system);
  if (!val.ok()) {
    rep.fail("associated-system", val.summary());
    return rep;
  }
  auto real = realize_limit(assoc.system);
  // beta: realization class -> ambient point, via provenance agreement.
  std::vector<std::size_t> beta(real.space().size(), std::size_t(-1));
  for (std::size_t cls = 0; cls < real.glued.members.size(); ++cls) {
    std::size_t target = std::size_t(-1);
    for (auto [v, i] : real.glued.members[cls]) {
      std::size_t amb = assoc.provenance.at(v)[i];
      if (target == std::size_t(-1)) target = amb;
      if (target != amb) rep.fail("beta-ill-defined", "class members disagree on ambient point");
    }
    beta[cls] = target;
  }
  std::vector<std::size_t> hits(m.size(), 0);
  for (std::size_t b : beta)
    if (b < m.size()) ++hits[b];
  for (std::size_t p = 0; p < m.size(); ++p)
    if (hits[p] != 1) {
      rep.fail("beta-not-bijective",
               "ambient point " + std::to_string(p) + " hit " + std::to_string(hits[p]) + " times");
      break;
    }
  double distortion = 0;
  if (rep.ok()) {
    for (std::size_t i = 0; i < beta.size(); ++i)
      for (std::size_t j = i + 1; j < beta.size(); ++j)
        distortion =
            std::max(distortion, std::abs(real.space().dist(i, j) - m.dist(beta[i], beta[j])));
  }
  rep.stats["beta-distortion"] = distortion;
  rep.stats["classes"] = static_cast<double>(real.space().size());
  return rep;
}

Report compatible(const Decomposition& c_t, const TruncatedTreeSystem& sys, VertexId t) {
  Report rep;
  auto edges = sys.tree.out_edges(t);
  for (std::size_t k = 0; k < c_t.size(); ++k) {
    for (EdgeId e : edges) {
      PointSet s = sys.peripheral(e);
      std::sort(s.begin(), s.end());
      bool in_y = subset_of(s, diff(c_t[k].y, c_t[k].a));
      bool in_z = subset_of(s, diff(c_t[k].z, c_t[k].a));
      if (!in_y && !in_z)
        rep.fail("crosses", "separator " + std::to_string(k) + " crosses peripheral of edge " +
                                std::to_string(e));
    }
  }
  // Discrete at e: each peripheral lies inside a single domain.
  if (rep.ok() && !c_t.empty()) {
    const auto& m = sys.constituent(t);
    std::vector<PointSet> doms;
    for (std::size_t k = 0; k < c_t.size(); ++k)
      for (Half h : {Half::Y, Half::Z}) doms.push_back(domain(m, c_t, k, h).points);
    std::size_t witnesses = 0;
    for (EdgeId e : edges) {
      PointSet s = sys.peripheral(e);
      std::sort(s.begin(), s.end());
      bool found = false;
      for (const auto& d : doms) found |= subset_of(s, d);
      if (!found)
        rep.fail("not-discrete-at",
                 "peripheral of edge " + std::to_string(e) + " lies in no single domain");
      else
        ++witnesses;
    }
    rep.stats["discrete-at"] = static_cast<double>(witnesses);
  }
  return rep;
}

NestedFamilyResult nested_family(const TruncatedTreeSystem& sys, VertexId t, std::size_t x0,
                                 const std::vector<Splitting>& shells, double resolution) {
  NestedFamilyResult out;
  const auto& m = sys.constituent(t);
  auto edges = sys.tree.out_edges(t);
  for (std::size_t k = 0; k < shells.size(); ++k) {
    const auto& s = shells[k];
    auto v = validate_splitting(m, s);
    if (!v.ok()) out.report.fail("splitting", "shell " + std::to_string(k) + ": " + v.summary());
    for (EdgeId e : edges) {
      PointSet sigma = sys.peripheral(e);
      std::sort(sigma.begin(), sigma.end());
      if (!disjoint(sigma, s.a))
        out.report.fail("saturation", "shell " + std::to_string(k) + " separator meets edge " +
                                          std::to_string(e));
      if (!subset_of(sigma, s.y) && !disjoint(sigma, s.y))
        out.report.fail("saturation", "shell " + std::to_string(k) + " halfspace cuts a peripheral");
    }
    if (k + 1 < shells.size() && !subset_of(shells[k + 1].y, diff(s.y, s.a)))
      out.report.fail("nesting", "H_" + std::to_string(k + 2) + " is not inside the open H_" +
                                     std::to_string(k + 1));
    if (!std::binary_search(s.y.begin(), s.y.end(), x0))
      out.report.fail("center", "x0 is outside shell " + std::to_string(k));
  }
  if (!shells.empty()) {
    double final_diam = m.diameter_of(shells.back().y);
    out.report.stats["final-diameter"] = final_diam;
    if (final_diam > resolution)
      out.report.fail("intersection", "innermost halfspace exceeds the stated resolution");
  }
  out.decomposition = shells;
  return out;
}

CLimResult c_lim(const TruncatedTreeSystem& sys, const std::map<VertexId, Decomposition>& c,
                 const Realization& realization) {
  CLimResult out;
  for (const auto& [t, dec] : c) {
    auto rep = compatible(dec, sys, t);
    if (!rep.ok())
      throw Error("c_lim: decomposition at vertex " + std::to_string(t) +
                  " is incompatible: " + rep.summary());
  }

  // Identity glued view of a single constituent, for g_set.
  auto identity_glued = [&](VertexId t) {
    GluedSpace g;
    g.space = sys.constituent(t);
    std::size_t n = g.space.size();
    for (std::size_t i = 0; i < n; ++i) {
      g.index[{t, i}] = i;
      g.members.push_back({{t, i}});
    }
    return g;
  };

  // Halfspaces of C(Theta): classes carried by the half tree of e.
  std::map<EdgeId, PointSet> edge_half;
  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e)) continue;
    std::set<std::size_t> acc;
    auto side = half_tree(sys.tree, e);
    for (VertexId v : side.vertices())
      for (std::size_t i = 0; i < sys.constituent(v).size(); ++i)
        acc.insert(realization.glued.at(v, i));
    edge_half[e] = PointSet(acc.begin(), acc.end());
  }

  for (const auto& [t, dec] : c) {
    auto f = SubtreeRef(sys.tree, {t});
    auto k_f = identity_glued(t);
    for (std::size_t k = 0; k < dec.size(); ++k) {
      const auto& s = dec[k];
      PointSet gy = g_set(sys, f, k_f, diff(s.y, s.a), realization);
      PointSet gz = g_set(sys, f, k_f, diff(s.z, s.a), realization);
      PointSet a_img;
      for (std::size_t p : s.a) a_img.push_back(realization.glued.at(t, p));
      std::sort(a_img.begin(), a_img.end());
      Splitting ind;
      ind.a = a_img;
      ind.y = unite(gy, a_img);
      ind.z = unite(gz, a_img);
      out.splittings.push_back(ind);
      out.origins.push_back({false, t, k, -1});

      // Claim-2 inequality: diam G(H) <= diam H + 2 max diam H'.
      for (Half h : {Half::Y, Half::Z}) {
        const auto& half_local = halfspace(s, h);
        PointSet img;
        for (std::size_t p : half_local) img.push_back(realization.glued.at(t, p));
        std::sort(img.begin(), img.end());
        double diam_h = realization.space().diameter_of(img);
        double max_sub = 0;
        for (EdgeId e : sys.tree.out_edges(t)) {
          if (sys.tree.is_stub(e)) continue;
          PointSet sigma = sys.peripheral(e);
          std::sort(sigma.begin(), sigma.end());
          if (subset_of(sigma, half_local))
            max_sub = std::max(max_sub, realization.space().diameter_of(edge_half.at(e)));
        }
        const auto& g = h == Half::Y ? ind.y : ind.z;
        double diam_g = realization.space().diameter_of(g);
        double bound = diam_h + 2 * max_sub;
        if (diam_g > bound + 1e-9 * std::max(1.0, realization.space().diameter()))
          out.report.fail("claim2", "diam G(H) exceeds diam H + 2 max diam H'");
        double margin = bound - diam_g;
        auto it = out.report.stats.find("claim2-margin-min");
        if (it == out.report.stats.end() || margin < it->second)
          out.report.stats["claim2-margin-min"] = margin;
      }
    }
  }

  // The edge splittings of C(Theta).
  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e) || e > sys.tree.bar(e)) continue;
    Splitting s;
    s.y = edge_half.at(e);
    s.z = edge_half.at(sys.tree.bar(e));
    s.a = intersect(s.y, s.z);
    if (s.a == s.y || s.a == s.z || s.a.empty())
      throw Error("c_lim: system is not essential at edge " + std::to_string(e));
    out.splittings.push_back(s);
    out.origins.push_back({true, -1, 0, e});
  }

  for (std::size_t i = 0; i < out.splittings.size(); ++i)
    for (std::size_t j = i + 1; j < out.splittings.size(); ++j)
      if (!noncross(out.splittings[i], out.splittings[j]))
        out.report.fail("crossing", "induced splittings " + std::to_string(i) + " and " +
                                        std::to_string(j) + " cross");
  out.report.stats["splittings"] = static_cast<double>(out.splittings.size());
  return out;
}

}  // namespace arbor
