#pragma once

#include <complex>
#include <cstdint>

#include "arbor/decomp.hpp"
#include "arbor/inverse.hpp"
#include "arbor/system.hpp"

namespace arbor {

// ---------------------------------------------------------------------------
// Punctured circle: the tree system of circles minus null dense arc families.

struct CircleParams {
  /// Deleted arcs per constituent by level (root uses arcs_per_level[0]; a
  /// non-root constituent at level l has arcs_per_level[l] arcs, one of which
  /// faces its parent). Levels beyond the vector reuse the last entry.
  std::vector<int> arcs_per_level{5, 5, 4, 3};
  std::vector<int> grid_per_level{64, 48, 24, 20, 10};
  double arc_frac = 0.05;    // largest arc width as a fraction of the own span
  double arc_decay = 0.6;    // geometric decay of successive arc widths
  double parent_arc = 5.0;   // width of the parent-facing arc (radians)
  std::uint64_t seed = 0;    // rotates arc placement deterministically
};

struct CircleResult {
  TruncatedTreeSystem system;
  WeightMap weights;  // identity: scales are baked into the samples
  /// Standard family of extended spaces: each Delta_e is the deleted arc
  /// sample, so every extended constituent is a full circle sample.
  ExtendedFamily standard;
};

CircleResult gen_punctured_circle(int depth, const CircleParams& params = {});

/// Reference target for convergence checks: n-point unit circle sample.
FiniteCompactum unit_circle_sample(std::size_t n);

// ---------------------------------------------------------------------------
// Internally punctured intervals (manifolds with boundary, n = 1).

struct IntervalParams {
  int gaps = 3;  // deleted subintervals per constituent (one faces the parent)
  std::vector<int> grid_per_level{32, 16, 10};
  double gap_frac = 0.08;
  double gap_decay = 0.6;
  std::uint64_t seed = 0;
};

struct IntervalResult {
  TruncatedTreeSystem system;
  WeightMap weights;
  /// Collapse-then-project retractions r_e : K_alpha(e) -> Sigma_e.
  std::map<EdgeId, std::vector<std::size_t>> retractions;
};

IntervalResult gen_punctured_interval(int depth, const IntervalParams& params = {});

// ---------------------------------------------------------------------------
// Reflection-group tree decomposition of the disk.

struct ReflectionParams {
  int wall_samples = 7;     // points per geodesic wall (ideal endpoints included)
  double grid_step = 0.17;  // fundamental-domain fill grid
  double arc_margin = 0.3;  // boundary arc half-width = arc_margin * pi / k
};

struct ReflectionResult {
  FiniteCompactum cloud;       // point cloud of the disk
  Decomposition decomposition;  // one splitting per reflection wall
  /// Reduced group words in generation order; domains of the dual tree
  /// correspond to words (frontier halfspaces to words of maximal length).
  std::vector<std::vector<int>> words;
  /// Interior part of the associated system (frontier domains pruned to
  /// stubs) and the matching boundary-tree-of-disks template with the
  /// explicit group-theoretic isomorphism candidate.
  TruncatedTreeSystem interior_system;
  TruncatedTreeSystem template_system;
  SystemIsomorphism template_iso;
  /// Provenance: cloud index -> (word index, base point index) where base
  /// points enumerate the closed fundamental domain sample.
  std::vector<std::pair<std::size_t, std::size_t>> provenance;
  std::size_t base_size = 0;  // points in the closed fundamental domain sample
  /// Apply the group word to a point (for the orbit-match check).
  std::vector<std::complex<double>> base_points;
};

ReflectionResult gen_reflection_disk(int depth, int k, const ReflectionParams& params = {});

/// Applies the reduced word (composition of the base reflections) to z.
std::complex<double> reflection_apply(int k, double arc_margin, const std::vector<int>& word,
                                      std::complex<double> z);

// ---------------------------------------------------------------------------
// Labeled combinatorial systems (unit-metric constituents).

struct LabeledSpec {
  std::vector<std::pair<VertexId, int>> vertex_labels;
  std::vector<std::pair<VertexId, VertexId>> edges;
  struct Stub {
    VertexId anchor;
    int child_label;
    std::vector<int> labels_beyond;
  };
  std::vector<Stub> stubs;
  std::vector<int> alphabet;
  bool oriented = true;
  int interior_points = 4;
};

TruncatedTreeSystem gen_labeled(const LabeledSpec& spec);

/// Exports a labeled system as a weak Jakobsche inverse sequence: levels are
/// partial unions over balls around `root` with one cap point per frontier
/// edge, disks are (peripheral point, cap) pairs labeled by the child.
WJSequence weak_jakobsche_from_labeled(const TruncatedTreeSystem& sys, VertexId root,
                                       std::size_t levels, double ratio = 0.5);

}  // namespace arbor
