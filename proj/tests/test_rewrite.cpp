#include "arbor/rewrite.hpp"

#include "arbor/gallery.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace arbor;
using namespace testutil;

namespace {

// Tree system with line-sample constituents and singleton peripherals, so
// separators sit on geodesics and all rewrites are metrically exact.
TruncatedTreeSystem line_system(std::uint64_t seed, std::size_t vertices, std::size_t points) {
  auto gen = rng(seed);
  TruncatedTreeSystem sys;
  sys.tree = random_tree(vertices, gen);
  std::uniform_real_distribution<double> jit(0.8, 1.2);
  for (VertexId v : sys.tree.vertices()) {
    std::vector<std::pair<double, double>> pts;
    double x = 0;
    for (std::size_t i = 0; i < points; ++i) {
      pts.push_back({x, 0.0});
      x += jit(gen) / double(points);
    }
    sys.constituents[v] = FiniteCompactum::from_points_2d(pts);
  }
  // Singleton peripherals at distinct interior points.
  for (VertexId v : sys.tree.vertices()) {
    auto edges = sys.tree.out_edges(v);
    std::size_t step = std::max<std::size_t>(1, (points - 2) / std::max<std::size_t>(1, edges.size()));
    std::size_t at = 1;
    for (EdgeId e : edges) {
      sys.peripherals[e] = {at};
      at += step;
    }
  }
  for (EdgeId e : sys.tree.oriented_edges()) {
    if (sys.tree.is_stub(e) || e > sys.tree.bar(e)) continue;
    std::size_t p = sys.peripherals[e].front(), q = sys.peripherals[sys.tree.bar(e)].front();
    sys.connectors[e] = {{p, q}};
    sys.connectors[sys.tree.bar(e)] = {{q, p}};
  }
  return sys;
}

LabeledSpec rich_labeled_spec() {
  // Path 0-1-2 alternating labels; every stub child is labeled 1 but
  // promises both labels beyond, so the system is weakly saturated without
  // being 2-saturated.
  LabeledSpec spec;
  spec.alphabet = {1, 2};
  spec.vertex_labels = {{0, 1}, {1, 2}, {2, 1}};
  spec.edges = {{0, 1}, {1, 2}};
  for (VertexId v : {0, 1, 2})
    for (int copy = 0; copy < 5; ++copy)
      spec.stubs.push_back({v, 1, {1, 2}});
  spec.interior_points = 6;
  return spec;
}

}  // namespace

TEST_CASE("consolidate: all-singleton partition reproduces the system") {
  auto sys = line_system(1, 5, 9);
  TreePartition pi;
  for (VertexId v : sys.tree.vertices()) pi.cells.emplace_back(sys.tree, std::vector<VertexId>{v});
  auto cons = consolidate(sys, pi);
  CHECK(cons.system.tree.vertex_count() == sys.tree.vertex_count());
  auto iso = find_isomorphism(cons.system, sys, 1e-9);
  CHECK(iso.has_value());
}

TEST_CASE("consolidate: 2-vertex cell equals the partial union") {
  auto sys = line_system(2, 4, 9);
  EdgeId e = -1;
  for (EdgeId cand : sys.tree.out_edges(0))
    if (!sys.tree.is_stub(cand)) e = cand;
  REQUIRE(e >= 0);
  VertexId s = sys.tree.omega(e);
  TreePartition pi;
  pi.cells.emplace_back(sys.tree, std::vector<VertexId>{0, s});
  for (VertexId v : sys.tree.vertices())
    if (v != 0 && v != s) pi.cells.emplace_back(sys.tree, std::vector<VertexId>{v});
  auto cons = consolidate(sys, pi);
  auto glued = partial_union(sys, SubtreeRef(sys.tree, {0, s}));
  const auto& cell = cons.system.constituent(0);
  REQUIRE(cell.size() == glued.space.size());
  for (std::size_t i = 0; i < cell.size(); ++i)
    for (std::size_t j = 0; j < cell.size(); ++j)
      CHECK(cell.dist(i, j) == doctest::Approx(glued.space.dist(i, j)));
}

TEST_CASE("consolidation invariance: canonical bijection has tiny distortion") {
  for (std::uint64_t seed : {11u, 12u}) {
    auto sys = random_system(seed, {6, 8, 12, 2});
    auto gen = rng(seed * 7 + 1);
    // Random partition: greedy cells of size <= 3.
    TreePartition pi;
    std::set<VertexId> used;
    for (VertexId v : sys.tree.vertices()) {
      if (used.count(v)) continue;
      std::vector<VertexId> cell{v};
      used.insert(v);
      for (EdgeId e : sys.tree.out_edges(v)) {
        if (sys.tree.is_stub(e)) continue;
        VertexId w = sys.tree.omega(e);
        if (!used.count(w) && cell.size() < 3 && (gen() & 1)) {
          cell.push_back(w);
          used.insert(w);
        }
      }
      pi.cells.emplace_back(sys.tree, cell);
    }
    auto bp = choose_basepoints(sys);
    auto w = geometric_weights(sys, 0, 0.5);
    auto cons = consolidate(sys, pi, &w);
    auto r_orig = realize_limit(sys, bp, w);
    auto bp_cons = inherit_basepoints(cons, sys, bp);
    auto r_cons = realize_limit(cons.system, bp_cons, unit_weights(cons.system));
    auto cmap = canonical_consolidation_map(sys, cons, r_orig, r_cons);
    INFO("distortion ", cmap.distortion);
    CHECK(cmap.distortion <= 1e-9);
  }
}

TEST_CASE("subdivide: empty decompositions reproduce the system up to isomorphism") {
  auto sys = line_system(3, 4, 11);
  auto sub = subdivide(sys, {});
  auto iso = find_isomorphism(sub.system, sys, 1e-9);
  CHECK(iso.has_value());
}

TEST_CASE("subdivide: a nested family expands the vertex into a path") {
  auto sys = line_system(4, 3, 13);
  // Shells around point 12 (the far end) of vertex 0, avoiding peripherals.
  std::size_t n = sys.constituent(0).size();
  std::vector<Splitting> shells;
  for (std::size_t cut : {9u, 11u}) {
    PointSet h;
    for (std::size_t i = cut; i < n; ++i) h.push_back(i);
    shells.push_back(make_splitting(n, {cut}, h));
  }
  auto nf = nested_family(sys, 0, n - 1, shells, sys.constituent(0).diameter());
  REQUIRE(nf.report.ok());
  auto sub = subdivide(sys, {{0, nf.decomposition}});
  CHECK(sub.system.tree.vertex_count() == sys.tree.vertex_count() + 2);
  // The expansion is a path: domains from vertex 0 form a chain.
  std::vector<VertexId> star;
  for (const auto& [v, t] : sub.origin)
    if (t == 0) star.push_back(v);
  CHECK(star.size() == 3);
  auto rep = validate_system(sub.system);
  INFO(rep.summary());
  CHECK(rep.ok());
}

TEST_CASE("roundtrip: subdivision then canonical consolidation is the identity") {
  auto sys = line_system(5, 4, 13);
  SUBCASE("empty decomposition") {
    auto rep = roundtrip_check(sys, {});
    INFO(rep.summary());
    CHECK(rep.ok());
    CHECK(rep.stats.at("realization-distortion") <= 1e-9);
  }
  SUBCASE("one nested family") {
    std::size_t n = sys.constituent(0).size();
    std::vector<Splitting> shells;
    PointSet h;
    for (std::size_t i = 10; i < n; ++i) h.push_back(i);
    shells.push_back(make_splitting(n, {10}, h));
    auto nf = nested_family(sys, 0, n - 1, shells, sys.constituent(0).diameter());
    REQUIRE(nf.report.ok());
    auto rep = roundtrip_check(sys, {{0, nf.decomposition}});
    INFO(rep.summary());
    CHECK(rep.ok());
  }
  SUBCASE("two vertices subdivided simultaneously") {
    std::map<VertexId, Decomposition> c;
    for (VertexId t : {0, 1}) {
      std::size_t n = sys.constituent(t).size();
      PointSet h;
      for (std::size_t i = 10; i < n; ++i) h.push_back(i);
      Splitting s = make_splitting(n, {10}, h);
      auto nf = nested_family(sys, t, n - 1, {s}, sys.constituent(t).diameter());
      if (!nf.report.ok()) continue;  // skip vertices whose far end is peripheral
      c[t] = nf.decomposition;
    }
    REQUIRE(!c.empty());
    auto rep = roundtrip_check(sys, c);
    INFO(rep.summary());
    CHECK(rep.ok());
  }
}

TEST_CASE("sum_normalize and spaces_equal follow the connected-sum algebra") {
  ConnectedSumWord w1{{{1, 1}, {2, 1}}, true};
  ConnectedSumWord w2{{{1, 2}, {2, 3}}, true};
  CHECK(spaces_equal(w1, w2));
  ConnectedSumWord w3{{{1, 1}}, true};
  ConnectedSumWord w4{{{2, 1}}, true};
  CHECK(!spaces_equal(w3, w4));
  auto n1 = sum_normalize(w2);
  CHECK(sum_normalize(n1).multiplicities == n1.multiplicities);
  ConnectedSumWord nonor{{{1, 4}}, false};
  CHECK(!spaces_equal(w3, nonor));
  CHECK_THROWS_AS(sum_normalize(ConnectedSumWord{}), Error);
}

TEST_CASE("saturation predicates on labeled systems") {
  // Complete: every vertex has >= 2 stub children of each label.
  LabeledSpec good;
  good.alphabet = {1, 2};
  good.vertex_labels = {{0, 1}, {1, 2}};
  good.edges = {{0, 1}};
  for (VertexId v : {0, 1})
    for (int label : {1, 1, 2, 2})
      good.stubs.push_back({v, label, {1, 2}});
  auto sys = gen_labeled(good);
  CHECK(is_2_saturated(sys));
  CHECK(is_weakly_saturated(sys));

  // Alternating path: weakly saturated but not 2-saturated.
  LabeledSpec alt = rich_labeled_spec();
  auto sys2 = gen_labeled(alt);
  CHECK(is_weakly_saturated(sys2));
  CHECK(!is_2_saturated(sys2));

  // One label missing beyond a stub: weak saturation fails.
  LabeledSpec missing = rich_labeled_spec();
  for (auto& st : missing.stubs) st.labels_beyond = {1};
  auto sys3 = gen_labeled(missing);
  CHECK(!is_weakly_saturated(sys3));
}

TEST_CASE("saturate rewrites a weakly saturated system into a 2-saturated one") {
  auto sys = gen_labeled(rich_labeled_spec());
  REQUIRE(is_weakly_saturated(sys));
  REQUIRE(!is_2_saturated(sys));
  auto res = saturate(sys);
  CHECK(is_2_saturated(res.system));
  CHECK(!res.log.empty());
  // Label content is preserved per cell (and hence globally).
  ConnectedSumWord before, after;
  before.oriented = after.oriented = true;
  for (const auto& [v, l] : sys.labels) ++before.multiplicities[l];
  for (const auto& [v, l] : res.system.labels) ++after.multiplicities[l];
  CHECK(spaces_equal(before, after));
  for (const auto& cell : res.cells) {
    ConnectedSumWord wa, wb;
    for (VertexId v : cell) {
      ++wa.multiplicities[sys.labels.at(v)];
      ++wb.multiplicities[res.system.labels.at(v)];
    }
    CHECK(wa.multiplicities == wb.multiplicities);
  }
  // Already-saturated input passes through with an empty log.
  auto again = saturate(res.system);
  CHECK(again.log.empty());
  CHECK(is_2_saturated(again.system));
}

TEST_CASE("puncture_to_end carries an interior point to a stub") {
  LabeledSpec spec = rich_labeled_spec();
  spec.interior_points = 8;
  // Real leaf children of vertex 1: the intermediate shell piece will be
  // absorbed into one of them.
  spec.vertex_labels.push_back({3, 2});
  spec.vertex_labels.push_back({4, 1});
  spec.edges.push_back({1, 3});
  spec.edges.push_back({1, 4});
  auto sys = gen_labeled(spec);
  // Interior points of vertex 1 start after its peripherals.
  std::size_t deg = sys.tree.degree(1);
  std::size_t n = sys.constituent(1).size();
  std::size_t x = n - 1;
  std::size_t a1 = deg + 0, a2 = deg + 1;
  // The leaf edges' peripherals sit inside the first shell so the leaves
  // are adjacent to the intermediate piece.
  PointSet inner_peri;
  for (EdgeId e : sys.tree.out_edges(1)) {
    if (sys.tree.is_stub(e)) continue;
    VertexId w = sys.tree.omega(e);
    if (w == 3 || w == 4) inner_peri.push_back(sys.peripheral(e).front());
  }
  REQUIRE(inner_peri.size() == 2);
  PointSet h1 = {a1, a2, x, inner_peri[0], inner_peri[1]};
  PointSet h2 = {a2, x};
  std::vector<Splitting> shells{make_splitting(n, {a1}, h1), make_splitting(n, {a2}, h2)};
  auto res = puncture_to_end(sys, 1, x, shells);
  INFO(res.checks.summary());
  CHECK(res.checks.ok());
  CHECK(res.system.tree.is_stub(res.x_stub));
  CHECK(res.system.labeled());
  CHECK(label_alphabet(res.system) == label_alphabet(sys));
  auto rep = validate_system(res.system);
  INFO(rep.summary());
  CHECK(rep.ok());
  bool has_axiom = false;
  for (const auto& step : res.log) has_axiom |= step.axiom;
  CHECK(has_axiom);
}

TEST_CASE("puncture_to_end rejects pieces with no neighbor to absorb them") {
  // Shell contents are stub directions only: the intermediate piece has no
  // real neighbor to consolidate with.
  LabeledSpec spec = rich_labeled_spec();
  spec.interior_points = 8;
  auto sys = gen_labeled(spec);
  std::size_t deg = sys.tree.degree(1);
  std::size_t n = sys.constituent(1).size();
  std::size_t x = n - 1;
  std::size_t a1 = deg + 0, a2 = deg + 1;
  PointSet inner_peri;
  for (EdgeId e : sys.tree.out_edges(1))
    if (sys.tree.is_stub(e) && inner_peri.size() < 2)
      inner_peri.push_back(sys.peripheral(e).front());
  REQUIRE(inner_peri.size() == 2);
  PointSet h1 = {a1, a2, x, inner_peri[0], inner_peri[1]};
  PointSet h2 = {a2, x};
  std::vector<Splitting> shells{make_splitting(n, {a1}, h1), make_splitting(n, {a2}, h2)};
  CHECK_THROWS_AS(puncture_to_end(sys, 1, x, shells), Error);
}

TEST_CASE("absorb_peripheral moves a peripheral point into a cell interior") {
  LabeledSpec spec = rich_labeled_spec();
  spec.interior_points = 8;
  auto sys = gen_labeled(spec);
  EdgeId e_star = -1;
  for (EdgeId e : sys.tree.out_edges(0))
    if (!sys.tree.is_stub(e)) e_star = e;
  REQUIRE(e_star >= 0);
  std::size_t x = sys.peripheral(e_star).front();
  std::size_t n = sys.constituent(0).size();
  std::size_t deg = sys.tree.degree(0);
  // Q: halfspace holding Sigma_{e_star} and one interior point, cut at
  // another interior point.
  PointSet h{x, deg, deg + 1};
  Splitting q = make_splitting(n, {deg + 1}, h);
  auto nf_ok = compatible({q}, sys, 0);
  // q's separator must avoid peripherals: interior points only.
  REQUIRE(nf_ok.ok());
  auto res = absorb_peripheral(sys, e_star, x, q);
  CHECK(res.system.labeled());
  auto rep = validate_system(res.system);
  INFO(rep.summary());
  CHECK(rep.ok());
  // x now sits in the merged cell, off its peripherals.
  for (EdgeId e : res.system.tree.out_edges(res.vertex)) {
    const auto& sigma = res.system.peripheral(e);
    CHECK(std::find(sigma.begin(), sigma.end(), res.point) == sigma.end());
  }
}
