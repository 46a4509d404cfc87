#pragma once

#include <cstdint>
#include <map>

#include "arbor/system.hpp"

namespace arbor {

/// Base point choice: oriented edge -> point index in its peripheral, with
/// phi_e(b_e) = b_{bar e} for every non-stub edge.
using BasePointing = std::map<EdgeId, std::size_t>;

enum class BasepointRule { LowestId, Seeded };

BasePointing choose_basepoints(const TruncatedTreeSystem& sys,
                               BasepointRule rule = BasepointRule::LowestId,
                               std::uint64_t seed = 0);

/// The auxiliary space: disjoint union of weighted constituents with base
/// point pairs merged, metric given by the within/cross-vertex case formulas.
GluedSpace realize_star(const TruncatedTreeSystem& sys, const BasePointing& bp,
                        const WeightMap& weights);

/// Finite approximation of the limit: the chain quotient of the auxiliary
/// space by all peripheral identifications, with end markers at stub base
/// points and the certified error bound max over stubs of sigma.
struct Realization {
  GluedSpace glued;
  std::map<EdgeId, std::size_t> end_markers;  // stub edge -> class
  double error = 0.0;
  WeightMap weights;
  BasePointing basepoints;

  const FiniteCompactum& space() const { return glued.space; }
};

Realization realize_limit(const TruncatedTreeSystem& sys, const BasePointing& bp,
                          const WeightMap& weights);

/// Convenience: default base points and unit weights.
Realization realize_limit(const TruncatedTreeSystem& sys);

/// G(U): the basis set determined by a saturated subset U of the partial
/// union over F, returned as realization classes. Throws if U is not
/// saturated with respect to A_F.
PointSet g_set(const TruncatedTreeSystem& sys, const SubtreeRef& f, const GluedSpace& k_f,
               const PointSet& u, const Realization& realization);

/// GH comparison of two truncations of one generator family. The deeper
/// system must contain the shallower one (same vertex ids, point indices);
/// regions beyond a stub of the shallow system collapse to its end marker.
struct RefineComparison {
  double gh_bound = 0.0;        // half distortion of the canonical correspondence
  double max_tail_shallow = 0;  // max sigma over the shallow system's stubs
};

RefineComparison refine_and_compare(const TruncatedTreeSystem& shallow,
                                    const TruncatedTreeSystem& deep, const WeightMap& w_shallow,
                                    const WeightMap& w_deep);

/// The inverse system of partial star spaces F(Theta*) over an increasing
/// chain of finite subtrees, with projections collapsing out-of-F points to
/// the base point of the first path edge.
struct StarSystem {
  std::vector<SubtreeRef> chain;
  std::vector<GluedSpace> spaces;
  /// projections[i]: space i+1 -> space i (class index map).
  std::vector<std::vector<std::size_t>> projections;

  /// Composite projection from level j to level i <= j.
  std::vector<std::size_t> project(std::size_t j, std::size_t i) const;
};

StarSystem star_inverse_system(const TruncatedTreeSystem& sys, const BasePointing& bp,
                               const WeightMap& weights, const std::vector<SubtreeRef>& chain);

/// Increasing BFS chain of subtrees from `root` covering the whole tree.
std::vector<SubtreeRef> bfs_chain(const Tree& tree, VertexId root);

}  // namespace arbor
