#include "arbor/rewrite.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace arbor {

namespace {

PointSet sorted_copy(PointSet v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

ConsolidationResult consolidate(const TruncatedTreeSystem& sys, const TreePartition& partition,
                                const WeightMap* weights) {
  auto viol = validate_partition(sys.tree, partition);
  if (!viol.empty()) throw Error("consolidate: invalid partition: " + viol.front().detail);
  ConsolidationResult out;
  out.partition = partition;
  for (std::size_t s = 0; s < partition.cells.size(); ++s) {
    VertexId cell = static_cast<VertexId>(s);
    out.system.tree.add_vertex(cell);
    for (VertexId v : partition.cells[s].vertices()) out.cell_of_vertex[v] = cell;
    out.cell_spaces.push_back(partial_union(sys, partition.cells[s], weights));
    out.system.constituents[cell] = out.cell_spaces.back().space;
  }
  // Surviving edges: original ids, endpoints mapped to cells.
  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e)) {
      VertexId cell = out.cell_of_vertex.at(sys.tree.alpha(e));
      out.system.tree.add_stub_with_ids(cell, 1000000 + e, e, sys.tree.bar(e));
      out.system.tails[e] = sys.tails.at(e);
      if (sys.stub_promises.count(e)) out.system.stub_promises[e] = sys.stub_promises.at(e);
      continue;
    }
    if (e > sys.tree.bar(e)) continue;
    VertexId ca = out.cell_of_vertex.at(sys.tree.alpha(e));
    VertexId co = out.cell_of_vertex.at(sys.tree.omega(e));
    if (ca == co) continue;  // merged away
    out.system.tree.add_edge_with_ids(ca, co, e, sys.tree.bar(e));
  }
  for (EdgeId e : out.system.tree.oriented_edges()) {
    VertexId t0 = sys.tree.alpha(e);
    VertexId cell = out.cell_of_vertex.at(t0);
    const auto& glued = out.cell_spaces[cell];
    PointSet sigma;
    for (std::size_t p : sys.peripheral(e)) sigma.push_back(glued.at(t0, p));
    out.system.peripherals[e] = sorted_copy(sigma);
    if (out.system.tree.is_stub(e)) continue;
    VertexId s0 = sys.tree.omega(e);
    const auto& glued2 = out.cell_spaces[out.cell_of_vertex.at(s0)];
    Connector conn;
    for (auto [p, q] : sys.connectors.at(e)) conn.push_back({glued.at(t0, p), glued2.at(s0, q)});
    std::sort(conn.begin(), conn.end());
    out.system.connectors[e] = conn;
  }
  out.system.orientation_all_oriented = sys.orientation_all_oriented;
  if (sys.declared_density_resolution)
    out.system.declared_density_resolution = compute_density_resolution(out.system);
  return out;
}

BasePointing inherit_basepoints(const ConsolidationResult& cons, const TruncatedTreeSystem& orig,
                                const BasePointing& bp) {
  BasePointing out;
  for (EdgeId e : cons.system.tree.oriented_edges()) {
    VertexId t0 = orig.tree.alpha(e);
    out[e] = cons.cell_spaces[cons.cell_of_vertex.at(t0)].at(t0, bp.at(e));
  }
  return out;
}

CanonicalMap canonical_consolidation_map(const TruncatedTreeSystem& orig,
                                         const ConsolidationResult& cons,
                                         const Realization& r_orig, const Realization& r_cons) {
  (void)orig;
  CanonicalMap out;
  std::size_t n = r_orig.space().size();
  out.map.assign(n, std::size_t(-1));
  for (std::size_t cls = 0; cls < n; ++cls) {
    auto [t, i] = r_orig.glued.members[cls].front();
    VertexId cell = cons.cell_of_vertex.at(t);
    std::size_t local = cons.cell_spaces[cell].at(t, i);
    out.map[cls] = r_cons.glued.at(cell, local);
  }
  std::vector<char> hit(r_cons.space().size(), 0);
  for (std::size_t m : out.map) hit[m] = 1;
  if (r_cons.space().size() != n ||
      !std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; }))
    throw Error("canonical consolidation map is not a bijection");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      out.distortion = std::max(
          out.distortion, std::abs(r_orig.space().dist(a, b) -
                                   r_cons.space().dist(out.map[a], out.map[b])));
  return out;
}

// ---------------------------------------------------------------------------

SubdivisionResult subdivide(const TruncatedTreeSystem& sys,
                            const std::map<VertexId, Decomposition>& c, const WeightMap* weights) {
  SubdivisionResult out;
  WeightMap w = weights ? *weights : unit_weights(sys);
  out.realization = realize_limit(sys, choose_basepoints(sys), w);
  out.clim = c_lim(sys, c, out.realization);
  if (!out.clim.report.ok())
    throw Error("subdivide: induced decomposition failed: " + out.clim.report.summary());
  auto assoc = associated_system(out.realization.space(), out.clim.splittings);
  out.system = assoc.system;
  out.provenance = assoc.provenance;

  // Origin vertex per domain: the common constituent of its classes.
  for (const auto& [v, classes] : out.provenance) {
    std::set<VertexId> common;
    bool first = true;
    for (std::size_t cls : classes) {
      std::set<VertexId> here;
      for (auto [t, i] : out.realization.glued.members[cls]) {
        (void)i;
        here.insert(t);
      }
      if (first) {
        common = here;
        first = false;
      } else {
        std::set<VertexId> inter;
        std::set_intersection(common.begin(), common.end(), here.begin(), here.end(),
                              std::inserter(inter, inter.begin()));
        common = inter;
      }
    }
    if (common.empty()) throw Error("subdivide: domain has no common origin vertex");
    out.origin[v] = *common.begin();
  }

  // Carry the original stubs: each attaches to the domain containing its
  // peripheral image.
  EdgeId next_edge = static_cast<EdgeId>(2 * out.clim.splittings.size());
  int ghost = 1000000;
  for (EdgeId e : sys.tree.stub_edges()) {
    PointSet img;
    for (std::size_t p : sys.peripheral(e))
      img.push_back(out.realization.glued.at(sys.tree.alpha(e), p));
    img = sorted_copy(img);
    VertexId host = -1;
    for (const auto& [v, classes] : out.provenance)
      if (std::includes(classes.begin(), classes.end(), img.begin(), img.end())) {
        host = v;
        break;
      }
    if (host < 0) throw Error("subdivide: stub peripheral is split across domains");
    out.system.tree.add_stub_with_ids(host, ghost++, next_edge, next_edge + 1);
    PointSet local;
    const auto& pts = out.provenance.at(host);
    for (std::size_t cls : img)
      local.push_back(std::lower_bound(pts.begin(), pts.end(), cls) - pts.begin());
    out.system.peripherals[next_edge] = sorted_copy(local);
    out.system.tails[next_edge] = sys.tails.at(e);
    if (sys.stub_promises.count(e)) out.system.stub_promises[next_edge] = sys.stub_promises.at(e);
    next_edge += 2;
  }
  out.system.orientation_all_oriented = sys.orientation_all_oriented;
  if (sys.declared_density_resolution)
    out.system.declared_density_resolution = compute_density_resolution(out.system);
  return out;
}

Report roundtrip_check(const TruncatedTreeSystem& sys, const std::map<VertexId, Decomposition>& c,
                       double tolerance) {
  Report rep;
  auto sub = subdivide(sys, c);
  // Canonical partition: domains grouped by origin vertex.
  std::map<VertexId, std::vector<VertexId>> groups;
  for (const auto& [v, t] : sub.origin) groups[t].push_back(v);
  TreePartition pi;
  for (const auto& [t, cellverts] : groups) {
    (void)t;
    pi.cells.emplace_back(sub.system.tree, cellverts);
  }
  auto cons = consolidate(sub.system, pi);
  auto iso = find_isomorphism(cons.system, sys, tolerance);
  if (!iso) {
    rep.fail("no-isomorphism", "consolidated subdivision is not isomorphic to the input");
    return rep;
  }
  auto check = check_isomorphism(cons.system, sys, *iso);
  rep.stats["iso-distortion"] = check.stats.at("distortion");

  // Compare realizations through the canonical identification.
  auto r_orig = realize_limit(sys);
  auto r_cons = realize_limit(cons.system);
  double worst = 0;
  // Map: original class -> (original vertex t, point) -> subdivision domain
  // class -> consolidated cell point -> consolidated class.
  for (std::size_t a = 0; a < r_orig.space().size(); ++a) {
    for (std::size_t b = a + 1; b < r_orig.space().size(); ++b) {
      auto locate = [&](std::size_t cls) {
        auto [t, i] = r_orig.glued.members[cls].front();
        std::size_t rcls = sub.realization.glued.at(t, i);
        // find the domain vertex containing rcls
        for (const auto& [v, pts] : sub.provenance) {
          auto it = std::lower_bound(pts.begin(), pts.end(), rcls);
          if (it != pts.end() && *it == rcls) {
            std::size_t local = it - pts.begin();
            VertexId cell = cons.cell_of_vertex.at(v);
            return r_cons.glued.at(cell, cons.cell_spaces[cell].at(v, local));
          }
        }
        throw Error("roundtrip: lost a realization class");
      };
      worst = std::max(worst,
                       std::abs(r_orig.space().dist(a, b) -
                                r_cons.space().dist(locate(a), locate(b))));
    }
  }
  rep.stats["realization-distortion"] = worst;
  if (worst > tolerance) rep.fail("realization", "realizations differ beyond tolerance");
  return rep;
}

// ---------------------------------------------------------------------------

ConnectedSumWord sum_normalize(const ConnectedSumWord& w) {
  if (w.multiplicities.empty()) throw Error("sum_normalize: empty word");
  ConnectedSumWord out;
  out.oriented = w.oriented;
  for (const auto& [label, count] : w.multiplicities) {
    if (count <= 0) throw Error("sum_normalize: nonpositive multiplicity");
    out.multiplicities[label] = 1;
  }
  return out;
}

bool spaces_equal(const ConnectedSumWord& a, const ConnectedSumWord& b) {
  auto na = sum_normalize(a), nb = sum_normalize(b);
  return na.oriented == nb.oriented && na.multiplicities == nb.multiplicities;
}

std::vector<int> label_alphabet(const TruncatedTreeSystem& sys) {
  std::set<int> out;
  for (const auto& [v, l] : sys.labels) {
    (void)v;
    out.insert(l);
  }
  for (const auto& [e, pr] : sys.stub_promises) {
    (void)e;
    if (pr.child_label >= 0) out.insert(pr.child_label);
    for (int l : pr.labels_beyond) out.insert(l);
  }
  return std::vector<int>(out.begin(), out.end());
}

int child_label(const TruncatedTreeSystem& sys, EdgeId e) {
  if (sys.tree.is_stub(e)) {
    auto it = sys.stub_promises.find(e);
    if (it == sys.stub_promises.end()) throw Error("stub without a label promise");
    return it->second.child_label;
  }
  return sys.labels.at(sys.tree.omega(e));
}

bool is_2_saturated(const TruncatedTreeSystem& sys) {
  auto alphabet = label_alphabet(sys);
  for (VertexId t : sys.tree.vertices()) {
    std::map<int, int> counts;
    for (EdgeId e : sys.tree.out_edges(t)) ++counts[child_label(sys, e)];
    for (int j : alphabet)
      if (counts[j] < 2) return false;
  }
  return true;
}

bool is_weakly_saturated(const TruncatedTreeSystem& sys) {
  auto alphabet = label_alphabet(sys);
  auto side_labels = [&](EdgeId e) {
    std::set<int> out;
    if (sys.tree.is_stub(e)) {
      auto it = sys.stub_promises.find(e);
      if (it == sys.stub_promises.end()) throw Error("stub without a label promise");
      for (int l : it->second.labels_beyond) out.insert(l);
      return out;
    }
    auto side = half_tree(sys.tree, e);
    for (VertexId v : side.vertices()) {
      out.insert(sys.labels.at(v));
      for (EdgeId g : sys.tree.out_edges(v))
        if (sys.tree.is_stub(g))
          for (int l : sys.stub_promises.at(g).labels_beyond) out.insert(l);
    }
    return out;
  };
  for (EdgeId e : sys.tree.oriented_edges()) {
    auto labels = side_labels(e);
    for (int j : alphabet)
      if (!labels.count(j)) return false;
  }
  return true;
}

SaturationResult saturate(const TruncatedTreeSystem& sys) {
  SaturationResult out;
  out.system = sys;
  if (is_2_saturated(sys)) return out;
  if (!is_weakly_saturated(sys)) throw Error("saturate: system is not weakly saturated");
  auto alphabet = label_alphabet(sys);

  auto& labels = out.system.labels;
  auto& promises = out.system.stub_promises;
  std::set<VertexId> covered;
  std::set<EdgeId> used;

  // Reachable region beyond an edge, avoiding covered vertices.
  auto reach = [&](EdgeId e) {
    std::vector<VertexId> verts;
    std::set<int> promised;
    if (sys.tree.is_stub(e)) return std::make_pair(verts, promised);
    std::deque<VertexId> queue{sys.tree.omega(e)};
    std::set<VertexId> seen{sys.tree.omega(e)};
    while (!queue.empty()) {
      VertexId v = queue.front();
      queue.pop_front();
      if (covered.count(v)) continue;
      verts.push_back(v);
      for (EdgeId f : sys.tree.out_edges(v)) {
        if (sys.tree.is_stub(f)) {
          for (int l : promises.at(f).labels_beyond) promised.insert(l);
          continue;
        }
        if (f == sys.tree.bar(e) || seen.count(sys.tree.omega(f))) continue;
        seen.insert(sys.tree.omega(f));
        queue.push_back(sys.tree.omega(f));
      }
    }
    return std::make_pair(verts, promised);
  };

  struct Cell {
    std::vector<VertexId> verts;
  };
  std::deque<std::size_t> queue;

  // Creates a cell rooted at r (entered via `entry`), relabelling its root
  // to `want` by swapping with the nearest vertex of that label.
  auto create_cell = [&](VertexId r, EdgeId entry, int want) {
    std::vector<VertexId> cell{r};
    if (want >= 0 && labels.at(r) != want) {
      // BFS to the nearest available vertex labeled `want`.
      std::deque<VertexId> bfs{r};
      std::map<VertexId, EdgeId> via;
      via[r] = entry;
      VertexId found = -1;
      while (!bfs.empty() && found < 0) {
        VertexId v = bfs.front();
        bfs.pop_front();
        for (EdgeId f : sys.tree.out_edges(v)) {
          if (sys.tree.is_stub(f) || (entry >= 0 && f == sys.tree.bar(entry))) continue;
          VertexId s = sys.tree.omega(f);
          if (via.count(s) || covered.count(s)) continue;
          via[s] = f;
          if (labels.at(s) == want) {
            found = s;
            break;
          }
          bfs.push_back(s);
        }
      }
      if (found < 0) throw Error("saturate: no vertex of the required label is reachable");
      for (VertexId v = found; v != r; v = sys.tree.alpha(via.at(v))) cell.push_back(v);
      std::swap(labels.at(r), labels.at(found));
      std::ostringstream os;
      os << "cell root " << r << " <- label " << want << " from vertex " << found;
      out.log.push_back({"axiom: peripheral-relabel", os.str(), true});
    }
    std::sort(cell.begin(), cell.end());
    for (VertexId v : cell) covered.insert(v);
    out.cells.push_back(cell);
    queue.push_back(out.cells.size() - 1);
  };

  create_cell(sys.tree.vertices().front(), -1, -1);
  while (!queue.empty()) {
    std::size_t ci = queue.front();
    queue.pop_front();
    auto cellverts = out.cells[ci];
    std::set<VertexId> in_cell(cellverts.begin(), cellverts.end());
    for (VertexId v : cellverts) {
      // Two child edges per alphabet label.
      for (int j : alphabet) {
        int have = 0;
        for (EdgeId e : sys.tree.out_edges(v)) {
          if (have >= 2) break;
          if (used.count(e)) continue;
          if (!sys.tree.is_stub(e) &&
              (in_cell.count(sys.tree.omega(e)) || covered.count(sys.tree.omega(e))))
            continue;
          if (sys.tree.is_stub(e)) {
            const auto& pr = promises.at(e);
            bool can = pr.child_label == j ||
                       std::binary_search(pr.labels_beyond.begin(), pr.labels_beyond.end(), j);
            if (!can) continue;
            used.insert(e);
            if (promises.at(e).child_label != j) {
              promises.at(e).child_label = j;
              std::ostringstream os;
              os << "stub " << e << " promised root label " << j;
              out.log.push_back({"axiom: promise-refine", os.str(), true});
            }
            ++have;
          } else {
            auto [verts, promised] = reach(e);
            bool can = promised.count(j) > 0;
            for (VertexId s : verts) can |= labels.at(s) == j;
            if (!can) continue;
            bool real_label = false;
            for (VertexId s : verts) real_label |= labels.at(s) == j;
            if (!real_label) continue;  // only promise-deep; prefer real cells
            used.insert(e);
            std::ostringstream os;
            os << "cell via edge " << e << " rooted with label " << j;
            out.log.push_back({"consolidate-cell", os.str(), false});
            create_cell(sys.tree.omega(e), e, j);
            ++have;
          }
        }
        if (have < 2) {
          // Retry allowing promise-only stubs already consumed above; if we
          // still cannot find two witnesses the truncation is too poor.
          throw Error("saturate: vertex " + std::to_string(v) +
                      " cannot host two children of label " + std::to_string(j));
        }
      }
      // Spawn singleton cells for the remaining unused edges so the scheme
      // partitions the whole tree.
      for (EdgeId e : sys.tree.out_edges(v)) {
        if (used.count(e) || sys.tree.is_stub(e)) continue;
        VertexId s = sys.tree.omega(e);
        if (in_cell.count(s) || covered.count(s)) continue;
        used.insert(e);
        create_cell(s, e, -1);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

PunctureResult puncture_to_end(const TruncatedTreeSystem& sys, VertexId t_star, std::size_t x,
                               const std::vector<Splitting>& shells) {
  PunctureResult out;
  if (!sys.labeled()) throw Error("puncture_to_end: labeled system required");
  for (EdgeId e : sys.tree.out_edges(t_star)) {
    const auto& sigma = sys.peripheral(e);
    if (std::find(sigma.begin(), sigma.end(), x) != sigma.end())
      throw Error("puncture_to_end: x lies on a peripheral; use absorb_peripheral first");
  }
  double resolution = sys.declared_density_resolution.value_or(
      sys.constituent(t_star).diameter());
  auto nf = nested_family(sys, t_star, x, shells, resolution);
  if (!nf.report.ok())
    throw Error("puncture_to_end: invalid nested family: " + nf.report.summary());
  out.log.push_back({"nested-family", "depth " + std::to_string(shells.size()), false});

  std::map<VertexId, Decomposition> c{{t_star, nf.decomposition}};
  auto sub = subdivide(sys, c);
  out.log.push_back({"subdivide", "expand vertex " + std::to_string(t_star), false});

  // Locate the ray: domains originating from t_star, innermost holding x.
  std::size_t x_class = sub.realization.glued.at(t_star, x);
  VertexId innermost = -1;
  std::vector<VertexId> star_domains;
  for (const auto& [v, t] : sub.origin) {
    if (t != t_star) continue;
    star_domains.push_back(v);
    const auto& pts = sub.provenance.at(v);
    if (std::binary_search(pts.begin(), pts.end(), x_class)) innermost = v;
  }
  if (innermost < 0) throw Error("puncture_to_end: lost track of x");
  if (star_domains.size() != shells.size() + 1)
    throw Error("puncture_to_end: unexpected domain count from the nested family");

  // Truncate the innermost piece.
  std::vector<VertexId> keep;
  for (VertexId v : sub.system.tree.vertices())
    if (v != innermost) keep.push_back(v);
  EdgeId ray_stub = -1;
  for (EdgeId e : sub.system.tree.oriented_edges())
    if (!sub.system.tree.is_stub(e) && sub.system.tree.omega(e) == innermost)
      ray_stub = e;
  if (ray_stub < 0) throw Error("puncture_to_end: innermost piece is not a leaf");
  auto truncated = restrict_system(sub.system, SubtreeRef(sub.system.tree, keep));
  out.log.push_back({"truncate", "x carried to the stub of edge " + std::to_string(ray_stub), false});

  // Ray from the outer star domain to the stub.
  VertexId outer = -1;
  for (VertexId v : star_domains)
    if (truncated.tree.has_vertex(v) &&
        std::none_of(star_domains.begin(), star_domains.end(), [&](VertexId w) {
          return w != v && truncated.tree.has_vertex(w) &&
                 truncated.tree.path(v, w).size() == 0;
        }))
      outer = v;
  // The star domains form a path; order them by distance to the stub anchor.
  VertexId anchor = truncated.tree.alpha(ray_stub);
  std::vector<std::pair<std::size_t, VertexId>> by_dist;
  for (VertexId v : star_domains)
    if (truncated.tree.has_vertex(v))
      by_dist.push_back({truncated.tree.path(v, anchor).size(), v});
  std::sort(by_dist.begin(), by_dist.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<VertexId> ray;
  for (auto [d, v] : by_dist) {
    (void)d;
    ray.push_back(v);
  }
  outer = ray.front();

  // Choose a neighbor s_i off the ray for each intermediate piece.
  std::set<VertexId> on_ray(ray.begin(), ray.end());
  std::map<VertexId, VertexId> partner;
  for (std::size_t i = 1; i < ray.size(); ++i) {
    VertexId vi = ray[i];
    VertexId chosen = -1;
    for (EdgeId e : truncated.tree.out_edges(vi)) {
      if (truncated.tree.is_stub(e)) continue;
      VertexId s = truncated.tree.omega(e);
      if (!on_ray.count(s) && sub.origin.at(s) != t_star) {
        chosen = s;
        break;
      }
    }
    if (chosen < 0)
      throw Error("puncture_to_end: no neighbor available to absorb piece " + std::to_string(vi));
    partner[vi] = chosen;
    out.log.push_back({"consolidate-pair",
                       "piece " + std::to_string(vi) + " with neighbor " + std::to_string(chosen),
                       false});
  }

  // Consolidate pairs (ray piece, chosen neighbor); everything else single.
  TreePartition pi;
  std::map<VertexId, std::size_t> cell_index;
  std::set<VertexId> taken;
  for (const auto& [vi, s] : partner) {
    pi.cells.emplace_back(truncated.tree, std::vector<VertexId>{vi, s});
    taken.insert(vi);
    taken.insert(s);
  }
  for (VertexId v : truncated.tree.vertices())
    if (!taken.count(v)) pi.cells.emplace_back(truncated.tree, std::vector<VertexId>{v});
  auto cons = consolidate(truncated, pi);
  out.system = cons.system;
  out.x_stub = ray_stub;

  // Labels: pairs take the absorbed neighbor's label (sphere pieces are
  // neutral for the connected sum), singletons keep their origin label.
  for (std::size_t s = 0; s < pi.cells.size(); ++s) {
    VertexId cell = static_cast<VertexId>(s);
    const auto& verts = pi.cells[s].vertices();
    VertexId rep = verts.front();
    if (verts.size() == 2) {
      VertexId nb = partner.count(verts[0]) ? verts[1] : verts[0];
      out.system.labels[cell] = sys.labels.at(sub.origin.at(nb));
    } else if (rep == outer) {
      out.system.labels[cell] = sys.labels.at(t_star);
    } else if (sub.origin.at(rep) == t_star) {
      throw Error("puncture_to_end: unabsorbed sphere piece");
    } else {
      out.system.labels[cell] = sys.labels.at(sub.origin.at(rep));
    }
  }
  out.log.push_back(
      {"axiom: peripheral-relabel", "sphere pieces absorbed into neighbor labels", true});

  // Promise for the new end: the construction continues densely with the
  // full alphabet beyond the truncation.
  StubPromise pr;
  pr.child_label = label_alphabet(sys).front();
  pr.labels_beyond = label_alphabet(sys);
  out.system.stub_promises[out.x_stub] = pr;

  // Structural checks.
  auto val = validate_system(out.system);
  if (!val.ok()) out.checks.fail("validate", val.summary());
  for (VertexId v : out.system.tree.vertices())
    if (!out.system.labels.count(v)) out.checks.fail("labels", "consolidated cell unlabeled");
  auto alpha_in = label_alphabet(sys);
  auto alpha_out = label_alphabet(out.system);
  if (alpha_out != alpha_in) out.checks.fail("alphabet", "alphabet changed across the rewrite");
  if (!out.system.tree.is_stub(out.x_stub)) out.checks.fail("stub", "x is not at a stub");
  // Ray labels match the absorbed neighbors.
  std::vector<int> ray_labels;
  for (std::size_t i = 1; i < ray.size(); ++i)
    ray_labels.push_back(sys.labels.at(sub.origin.at(partner.at(ray[i]))));
  out.checks.stats["ray-length"] = static_cast<double>(ray.size());
  for (std::size_t i = 1; i < ray.size(); ++i) {
    VertexId cell = cons.cell_of_vertex.at(ray[i]);
    if (out.system.labels.at(cell) != ray_labels[i - 1])
      out.checks.fail("ray-labels", "absorbed label mismatch along the ray");
  }
  return out;
}

AbsorbResult absorb_peripheral(const TruncatedTreeSystem& sys, EdgeId e_star, std::size_t x,
                               const Splitting& q) {
  AbsorbResult out;
  const auto& sigma = sys.peripheral(e_star);
  if (std::find(sigma.begin(), sigma.end(), x) == sigma.end())
    throw Error("absorb_peripheral: x is not on the peripheral of e_star");
  if (sys.tree.is_stub(e_star)) throw Error("absorb_peripheral: e_star is a stub");
  VertexId t = sys.tree.alpha(e_star);
  PointSet s = sigma;
  std::sort(s.begin(), s.end());
  PointSet open_y;
  std::set_difference(q.y.begin(), q.y.end(), q.a.begin(), q.a.end(),
                      std::back_inserter(open_y));
  if (!std::includes(open_y.begin(), open_y.end(), s.begin(), s.end()))
    throw Error("absorb_peripheral: Q does not enclose the peripheral of e_star");

  std::map<VertexId, Decomposition> c{{t, {q}}};
  auto sub = subdivide(sys, c);
  out.log.push_back({"subdivide", "single splitting around edge " + std::to_string(e_star), false});
  // Locate the domain holding Sigma_{e_star} and the neighbor across e_star.
  std::size_t x_class = sub.realization.glued.at(t, x);
  VertexId hull = -1;
  for (const auto& [v, pts] : sub.provenance)
    if (sub.origin.at(v) == t && std::binary_search(pts.begin(), pts.end(), x_class)) hull = v;
  if (hull < 0) throw Error("absorb_peripheral: lost the enclosing domain");
  VertexId across = -1;
  for (EdgeId e : sub.system.tree.out_edges(hull)) {
    if (sub.system.tree.is_stub(e)) continue;
    VertexId sv = sub.system.tree.omega(e);
    if (sub.origin.at(sv) == sys.tree.omega(e_star)) across = sv;
  }
  if (across < 0) throw Error("absorb_peripheral: neighbor across e_star not adjacent");

  TreePartition pi;
  pi.cells.emplace_back(sub.system.tree, std::vector<VertexId>{hull, across});
  std::set<VertexId> taken{hull, across};
  for (VertexId v : sub.system.tree.vertices())
    if (!taken.count(v)) pi.cells.emplace_back(sub.system.tree, std::vector<VertexId>{v});
  auto cons = consolidate(sub.system, pi);
  out.system = cons.system;
  out.log.push_back({"consolidate-pair", "absorb across edge " + std::to_string(e_star), false});

  // Labels: the merged cell keeps the absorbed manifold's label.
  for (std::size_t si = 0; si < pi.cells.size(); ++si) {
    VertexId cell = static_cast<VertexId>(si);
    VertexId rep = pi.cells[si].vertices().front();
    if (pi.cells[si].size() == 2)
      out.system.labels[cell] = sys.labels.at(sys.tree.omega(e_star));
    else
      out.system.labels[cell] = sys.labels.at(sub.origin.at(rep));
  }
  out.vertex = cons.cell_of_vertex.at(hull);
  // x's position inside the merged cell.
  const auto& pts = sub.provenance.at(hull);
  std::size_t local = std::lower_bound(pts.begin(), pts.end(), x_class) - pts.begin();
  out.point = cons.cell_spaces[out.vertex].at(hull, local);
  out.log.push_back({"axiom: peripheral-relabel", "merged cell relabeled by the absorbed manifold",
                     true});
  return out;
}

}  // namespace arbor
