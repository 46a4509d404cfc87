#include "arbor/tree.hpp"

#include <set>

#include "doctest.h"
#include "helpers.hpp"

using namespace arbor;
using namespace testutil;

namespace {

Tree chain3() {
  // a--b--c as 0--1--2
  Tree t;
  t.add_vertex(0);
  t.add_vertex(1);
  t.add_vertex(2);
  t.add_edge(0, 1);
  t.add_edge(1, 2);
  return t;
}

}  // namespace

TEST_CASE("path identity and forced chain") {
  Tree t = chain3();
  CHECK(t.path(1, 1).empty());
  auto p = t.path(0, 2);
  REQUIRE(p.size() == 2);
  CHECK(t.alpha(p[0]) == 0);
  CHECK(t.omega(p[0]) == 1);
  CHECK(t.alpha(p[1]) == 1);
  CHECK(t.omega(p[1]) == 2);
  CHECK_THROWS_AS(t.path(0, 99), Error);
}

TEST_CASE("path agrees with BFS oracle on a random 50-vertex tree") {
  auto gen = rng(7);
  Tree t = random_tree(50, gen);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 49}, {13, 31}, {5, 5}, {42, 17}}) {
    auto edges = t.path(a, b);
    auto verts = bfs_path_oracle(t, a, b);
    REQUIRE(edges.size() + 1 == verts.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
      CHECK(t.alpha(edges[i]) == verts[i]);
      CHECK(t.omega(edges[i]) == verts[i + 1]);
    }
  }
}

TEST_CASE("path reversed edge-by-edge equals the reverse path") {
  auto gen = rng(8);
  Tree t = random_tree(30, gen);
  auto fwd = t.path(3, 27);
  auto bwd = t.path(27, 3);
  REQUIRE(fwd.size() == bwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) CHECK(t.bar(fwd[i]) == bwd[bwd.size() - 1 - i]);
}

TEST_CASE("n_set on a star and on the whole truncated tree") {
  Tree star;
  star.add_vertex(0);
  for (int leaf = 1; leaf <= 4; ++leaf) {
    star.add_vertex(leaf);
    star.add_edge(0, leaf);
  }
  auto center = SubtreeRef(star, {0});
  CHECK(n_set(star, center).size() == 4);
  for (EdgeId e : n_set(star, center)) CHECK(star.alpha(e) == 0);

  Tree t = chain3();
  t.add_stub(2, 100);
  auto whole = SubtreeRef(t, {0, 1, 2});
  auto ns = n_set(t, whole);
  REQUIRE(ns.size() == 1);
  CHECK(t.is_stub(ns[0]));
}

TEST_CASE("n_set equals exhaustive filter oracle on random subtrees") {
  auto gen = rng(11);
  Tree t = random_tree(40, gen);
  // Grow a random subtree from vertex 0.
  std::vector<VertexId> verts{0};
  std::set<VertexId> in{0};
  for (int step = 0; step < 15; ++step) {
    std::vector<VertexId> cand;
    for (VertexId v : verts)
      for (EdgeId e : t.out_edges(v))
        if (!in.count(t.omega(e))) cand.push_back(t.omega(e));
    if (cand.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, cand.size() - 1);
    VertexId w = cand[pick(gen)];
    if (in.insert(w).second) verts.push_back(w);
  }
  SubtreeRef s(t, verts);
  CHECK(n_set(t, s) == n_set_oracle(t, s));
}

TEST_CASE("half_tree basics and complement partition") {
  Tree t = chain3();
  EdgeId e01 = t.path(0, 1)[0];
  auto side = half_tree(t, e01);
  CHECK(side.vertices() == std::vector<VertexId>{1, 2});

  auto other = half_tree(t, t.bar(e01));
  std::set<VertexId> all;
  for (VertexId v : side.vertices()) all.insert(v);
  for (VertexId v : other.vertices()) {
    CHECK(!side.contains(v));
    all.insert(v);
  }
  CHECK(all.size() == t.vertex_count());
}

TEST_CASE("half_tree equals flood-fill oracle on a random tree") {
  auto gen = rng(13);
  Tree t = random_tree(35, gen);
  for (VertexId v : {1, 7, 20}) {
    EdgeId e = t.path(0, v).back();
    auto got = half_tree(t, e);
    auto want = half_tree_oracle(t, e);
    CHECK(std::set<VertexId>(got.vertices().begin(), got.vertices().end()) == want);
  }
}

TEST_CASE("half_tree rejects stub edges") {
  Tree t = chain3();
  EdgeId s = t.add_stub(2, 100);
  CHECK_THROWS_AS(half_tree(t, s), Error);
}

TEST_CASE("partition validation") {
  Tree t = chain3();
  TreePartition singletons{{SubtreeRef(t, {0}), SubtreeRef(t, {1}), SubtreeRef(t, {2})}};
  CHECK(validate_partition(t, singletons).empty());

  TreePartition whole{{SubtreeRef(t, {0, 1, 2})}};
  CHECK(validate_partition(t, whole).empty());

  TreePartition overlap{{SubtreeRef(t, {0, 1}), SubtreeRef(t, {1, 2})}};
  auto viol = validate_partition(t, overlap);
  REQUIRE(!viol.empty());
  CHECK(viol[0].kind == "overlap");

  TreePartition gap{{SubtreeRef(t, {0, 1})}};
  bool noncover = false;
  for (const auto& v : validate_partition(t, gap)) noncover |= v.kind == "non-cover";
  CHECK(noncover);

  CHECK_THROWS_AS(SubtreeRef(t, {0, 2}), Error);  // disconnected
}

TEST_CASE("every edge is internal to one cell or joins exactly two cells") {
  auto gen = rng(17);
  Tree t = random_tree(24, gen);
  TreePartition p;
  // Cells: rooted chunks grown greedily.
  std::set<VertexId> used;
  for (VertexId v : t.vertices()) {
    if (used.count(v)) continue;
    std::vector<VertexId> cell{v};
    used.insert(v);
    for (EdgeId e : t.out_edges(v)) {
      VertexId w = t.omega(e);
      if (!used.count(w) && cell.size() < 3) {
        cell.push_back(w);
        used.insert(w);
      }
    }
    p.cells.emplace_back(t, cell);
  }
  REQUIRE(validate_partition(t, p).empty());
  for (EdgeId e : t.oriented_edges()) {
    if (t.is_stub(e)) continue;
    auto ca = cell_of(p, t.alpha(e));
    auto co = cell_of(p, t.omega(e));
    bool internal = ca == co;
    CHECK((internal || ca != co));
  }
}

TEST_CASE("tree validate catches broken invariants") {
  Tree ok = chain3();
  CHECK(ok.validate().empty());
  Tree t = chain3();
  t.add_stub(0, 50);
  CHECK(t.validate().empty());
}

TEST_CASE("DOT export marks stubs dashed") {
  Tree t = chain3();
  t.add_stub(2, 100);
  auto dot = to_dot(t);
  CHECK(dot.find("style=dashed") != std::string::npos);
  CHECK(dot.find("v0 -- v1") != std::string::npos);
}
