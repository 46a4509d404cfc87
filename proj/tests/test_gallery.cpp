#include "arbor/gallery.hpp"

#include "arbor/rewrite.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace arbor;
using namespace testutil;

TEST_CASE("punctured circle: depth 1 is a single constituent with stubbed arcs") {
  auto res = gen_punctured_circle(1);
  CHECK(res.system.tree.vertex_count() == 1);
  CHECK(res.system.tree.stub_edges().size() == 5);
  auto rep = validate_system(res.system);
  INFO(rep.summary());
  CHECK(rep.ok());
  // Peripheral family nullity follows the decaying arc schedule.
  std::vector<PointSet> fam;
  for (EdgeId e : res.system.tree.stub_edges()) fam.push_back(res.system.peripheral(e));
  auto prof = nullity_profile(res.system.constituent(0), fam);
  for (std::size_t i = 0; i + 1 < prof.counts.size(); ++i)
    CHECK(prof.counts[i] <= prof.counts[i + 1]);
  CHECK(prof.counts.back() == fam.size());
}

TEST_CASE("punctured circle validates at depth 3 with zero connector distortion") {
  auto res = gen_punctured_circle(3);
  auto rep = validate_system(res.system);
  INFO(rep.summary());
  CHECK(rep.ok());
  CHECK(res.system.connector_distortion() <= 1e-12);
  CHECK(res.system.declared_density_resolution.has_value());
}

TEST_CASE("punctured circle realization embeds constituents isometrically") {
  auto res = gen_punctured_circle(2);
  auto real = realize_limit(res.system, choose_basepoints(res.system), res.weights);
  for (VertexId t : res.system.tree.vertices()) {
    const auto& k = res.system.constituent(t);
    for (std::size_t i = 0; i < k.size(); i += 2)
      for (std::size_t j = 0; j < k.size(); j += 2)
        CHECK(real.space().dist(real.glued.at(t, i), real.glued.at(t, j)) ==
              doctest::Approx(k.dist(i, j)).epsilon(1e-12));
  }
}

TEST_CASE("punctured circle approaches the unit circle at depth 3 (smoke)") {
  auto res = gen_punctured_circle(3);
  auto real = realize_limit(res.system, choose_basepoints(res.system), res.weights);
  auto target = unit_circle_sample(128);
  auto corr = greedy_correspondence(real.space(), target);
  double bound = gh_upper(real.space(), target, corr);
  INFO("gh bound ", bound, " diameter ", real.space().diameter());
  CHECK(bound <= 0.2 * real.space().diameter());
}

TEST_CASE("refine_and_compare: zero-tail generator gives bound 0") {
  // Depth-representation trick: compare a system against itself (deep copy
  // shares all vertices, no region collapses).
  auto res = gen_punctured_circle(2);
  auto cmp = refine_and_compare(res.system, res.system, res.weights, res.weights);
  CHECK(cmp.gh_bound == doctest::Approx(0.0));
}

TEST_CASE("refine_and_compare: successive circle truncations contract") {
  auto d2 = gen_punctured_circle(2);
  auto d3 = gen_punctured_circle(3);
  auto cmp = refine_and_compare(d2.system, d3.system, d2.weights, d3.weights);
  CHECK(cmp.gh_bound <= cmp.max_tail_shallow + 1e-12);
  CHECK(cmp.gh_bound > 0.0);
}

TEST_CASE("standard extended family fills the deleted arcs") {
  auto res = gen_punctured_circle(2);
  CHECK(res.standard.kind == ExtendedFamily::Kind::Standard);
  for (EdgeId e : res.system.tree.oriented_edges()) {
    REQUIRE(res.standard.ext.count(e));
    const auto& x = res.standard.ext.at(e);
    CHECK(x.base.size() == 2);
    CHECK(x.delta.size() > 2);  // interior fill present
    CHECK(validate_metric(x.delta).ok());
    // The base attaches exactly onto the peripheral pair.
    PointSet attach_targets;
    for (auto [b, q] : x.attach) attach_targets.push_back(q);
    std::sort(attach_targets.begin(), attach_targets.end());
    PointSet sigma = res.system.peripheral(e);
    std::sort(sigma.begin(), sigma.end());
    CHECK(attach_targets == sigma);
  }
  // Extended constituents are full circle samples: the kept sample plus the
  // arc fills leave no angular gap wider than twice the base spacing.
  VertexId root = 0;
  const auto& k = res.system.constituent(root);
  std::vector<double> angles;
  for (auto [xc, yc] : k.coords) angles.push_back(std::atan2(yc, xc));
  for (EdgeId e : res.system.tree.out_edges(root)) {
    const auto& x = res.standard.ext.at(e);
    for (auto [xc, yc] : x.delta.coords) angles.push_back(std::atan2(yc, xc));
  }
  std::sort(angles.begin(), angles.end());
  double worst = 2 * M_PI + angles.front() - angles.back();
  for (std::size_t i = 0; i + 1 < angles.size(); ++i)
    worst = std::max(worst, angles[i + 1] - angles[i]);
  CHECK(worst <= 0.25);
}

TEST_CASE("punctured interval: retraction hypotheses hold with c = 0") {
  auto res = gen_punctured_interval(2);
  auto rep = validate_system(res.system);
  INFO(rep.summary());
  CHECK(rep.ok());
  auto dim = validate_dim_hypotheses(res.system, res.retractions);
  INFO(dim.summary());
  CHECK(dim.ok());
  CHECK(dim.stats.at("c") == doctest::Approx(0.0));

  // Boundary points never belong to peripherals.
  for (VertexId t : res.system.tree.vertices()) {
    const auto& k = res.system.constituent(t);
    double length = 0;
    for (auto [x, y] : k.coords) (void)y;
    for (std::size_t i = 0; i < k.size(); ++i) length = std::max(length, k.dist(0, i));
    for (EdgeId e : res.system.tree.out_edges(t)) {
      for (std::size_t p : res.system.peripheral(e)) {
        CHECK(k.dist(0, p) > 1e-9);           // not the left end
        CHECK(k.dist(p, 0) < length - 1e-9);  // not the right end
      }
    }
  }
}

TEST_CASE("reflection disk: depth 1 with k = 3 gives a 3-edge star") {
  auto res = gen_reflection_disk(1, 3);
  CHECK(res.decomposition.size() == 3);
  auto dual = dual_tree(res.cloud, res.decomposition);
  CHECK(dual.tree.vertex_count() == 4);
  std::size_t maxdeg = 0;
  for (VertexId v : dual.tree.vertices()) maxdeg = std::max(maxdeg, dual.tree.degree(v));
  CHECK(maxdeg == 3);
}

TEST_CASE("reflection disk: splittings pairwise noncross; counts match the free product") {
  auto res = gen_reflection_disk(2, 3);
  for (std::size_t i = 0; i < res.decomposition.size(); ++i)
    for (std::size_t j = i + 1; j < res.decomposition.size(); ++j)
      CHECK(noncross(res.decomposition[i], res.decomposition[j]));
  // Walls up to generation depth-1: k + k(k-1) = 3 + 6 = 9; domains 10.
  CHECK(res.decomposition.size() == 9);
  auto dual = dual_tree(res.cloud, res.decomposition);
  CHECK(dual.tree.vertex_count() == 10);
  CHECK(res.words.size() == 10);  // words of length <= 2
}

TEST_CASE("reflection disk: domains are group translates of the base sample") {
  auto res = gen_reflection_disk(2, 3);
  auto assoc = associated_system(res.cloud, res.decomposition);
  for (std::size_t v = 0; v < assoc.dual.domains.size(); ++v) {
    // Interior domains carry exactly one word.
    std::set<std::size_t> words_here;
    for (std::size_t p : assoc.dual.domains[v].points)
      if (res.provenance[p].second < res.base_size - 3 * 7)  // fill points only
        words_here.insert(res.provenance[p].first);
    if (words_here.size() != 1) continue;  // frontier
    std::size_t wi = *words_here.begin();
    double worst = 0;
    for (std::size_t p : assoc.dual.domains[v].points) {
      auto [pw, base_idx] = res.provenance[p];
      (void)pw;
      auto img = reflection_apply(3, 0.3, res.words[wi], res.base_points[base_idx]);
      double dx = img.real() - res.cloud.coords[p].first;
      double dy = img.imag() - res.cloud.coords[p].second;
      worst = std::max(worst, std::sqrt(dx * dx + dy * dy));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("reflection disk: associated system matches the boundary-tree template") {
  auto res = gen_reflection_disk(2, 3);
  auto repA = validate_system(res.interior_system);
  INFO(repA.summary());
  CHECK(repA.ok());
  auto repB = validate_system(res.template_system);
  INFO(repB.summary());
  CHECK(repB.ok());
  auto rep = check_isomorphism(res.interior_system, res.template_system, res.template_iso);
  INFO(rep.summary());
  CHECK(rep.ok());
}

TEST_CASE("reflection disk: reconstruct_check is bijective") {
  auto res = gen_reflection_disk(2, 3);
  auto rep = reconstruct_check(res.cloud, res.decomposition);
  INFO(rep.summary());
  CHECK(rep.ok());
}

TEST_CASE("labeled systems: validity, alphabet guard, weak-Jakobsche export") {
  LabeledSpec spec;
  spec.alphabet = {1, 2};
  // Alternating path 0-1-2 with stub branches promising both labels.
  spec.vertex_labels = {{0, 1}, {1, 2}, {2, 1}};
  spec.edges = {{0, 1}, {1, 2}};
  for (VertexId v : {0, 1, 2})
    for (int copy = 0; copy < 2; ++copy)
      spec.stubs.push_back({v, copy + 1, {1, 2}});
  auto sys = gen_labeled(spec);
  auto rep = validate_system(sys);
  INFO(rep.summary());
  CHECK(rep.ok());

  auto wj = weak_jakobsche_from_labeled(sys, 0, 3);
  auto wjrep = validate_weak_jakobsche(wj);
  INFO(wjrep.summary());
  CHECK(wjrep.ok());

  LabeledSpec empty;
  CHECK_THROWS_AS(gen_labeled(empty), Error);
}
