#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "arbor/metric.hpp"
#include "arbor/report.hpp"
#include "arbor/tree.hpp"

namespace arbor {

using WeightMap = std::map<VertexId, double>;

/// Connector: explicit point bijection between two peripheral subsets,
/// stored as (index in K_alpha, index in K_omega) pairs sorted by source.
using Connector = std::vector<std::pair<std::size_t, std::size_t>>;

/// Per-stub label promise for truncated labeled systems: the label of the
/// pruned child plus the set of labels occurring somewhere beyond the stub.
struct StubPromise {
  int child_label = -1;
  std::vector<int> labels_beyond;  // sorted
};

/// Finite truncation of a tree system of metric compacta.
///
/// Each vertex carries a constituent space, each oriented edge (with real
/// alpha) a nonempty peripheral subset of its alpha constituent, each
/// non-stub edge a gluing bijection onto the opposite peripheral, and each
/// stub edge a tail bound sigma for the pruned region.
struct TruncatedTreeSystem {
  Tree tree;
  std::map<VertexId, FiniteCompactum> constituents;
  std::map<EdgeId, PointSet> peripherals;
  std::map<EdgeId, Connector> connectors;
  std::map<EdgeId, double> tails;

  /// Optional labeling over a finite manifold alphabet (rewrite module).
  std::map<VertexId, int> labels;
  bool orientation_all_oriented = true;  // else: nonorientable-present
  std::map<EdgeId, StubPromise> stub_promises;

  /// Declared density of peripheral families, checked at this resolution.
  std::optional<double> declared_density_resolution;

  const FiniteCompactum& constituent(VertexId t) const;
  const PointSet& peripheral(EdgeId e) const;
  /// Applies phi_e to a point of Sigma_e; throws if not in the peripheral.
  std::size_t phi(EdgeId e, std::size_t point) const;
  bool labeled() const { return !labels.empty(); }

  /// Max over non-stub edges of the connector's metric distortion
  /// |d_alpha(x,y) - d_omega(phi x, phi y)|, with per-vertex weights applied.
  double connector_distortion(const WeightMap* weights = nullptr) const;
};

/// TS1-TS4 validation. Violation codes: TS1-tree, TS2-constituent,
/// TS2-metric, TS3-empty, TS3-missing, TS3-bijection, TS3-involution,
/// TS4-overlap, stub-tail, stub-connector, density.
Report validate_system(const TruncatedTreeSystem& sys);

/// Restriction to a finite subtree: edges leaving F become stubs whose tail
/// bound sums the pruned constituents' diameters plus prior tails.
TruncatedTreeSystem restrict_system(const TruncatedTreeSystem& sys, const SubtreeRef& f);

/// A glued finite space together with the embeddings of its pieces.
struct GluedSpace {
  FiniteCompactum space;
  /// (vertex, point index) -> glued class index.
  std::map<std::pair<VertexId, std::size_t>, std::size_t> index;
  /// class -> members as (vertex, point) pairs.
  std::vector<std::vector<std::pair<VertexId, std::size_t>>> members;

  std::size_t at(VertexId t, std::size_t p) const;
  /// Image of a point subset of one constituent, sorted unique classes.
  PointSet image(VertexId t, const PointSet& pts) const;
};

/// Partial union over a finite subtree: disjoint union of the (weighted)
/// constituents chain-quotiented by all peripheral identifications internal
/// to F. Throws on degenerate quotients.
GluedSpace partial_union(const TruncatedTreeSystem& sys, const SubtreeRef& f,
                         const WeightMap* weights = nullptr);

/// Checks that U (a subset of the partial union over F) is saturated with
/// respect to the family A_F = { Sigma_e : e in N_F }.
bool is_saturated(const TruncatedTreeSystem& sys, const SubtreeRef& f, const GluedSpace& glued,
                  const PointSet& u);

/// Isomorphism candidate between two systems.
struct SystemIsomorphism {
  std::map<VertexId, VertexId> vertex_map;
  std::map<EdgeId, EdgeId> edge_map;
  /// Per-vertex point bijection: f[t][i] = image index in K'_{vertex_map[t]}.
  std::map<VertexId, std::vector<std::size_t>> point_maps;
};

/// Verifies (I1), (I3), (I4) pointwise plus bijectivity, and records the
/// worst metric distortion of the point maps in stats["distortion"].
Report check_isomorphism(const TruncatedTreeSystem& a, const TruncatedTreeSystem& b,
                         const SystemIsomorphism& cand);

/// Backtracking search over label/degree/size-compatible tree maps; point
/// maps are built from exact distance profiles. Returns nullopt when no
/// candidate passes check_isomorphism with distortion <= tolerance.
std::optional<SystemIsomorphism> find_isomorphism(const TruncatedTreeSystem& a,
                                                  const TruncatedTreeSystem& b,
                                                  double tolerance = 1e-6);

/// Worst distance from any constituent point to its nearest peripheral
/// point; the honest density declaration for a system.
double compute_density_resolution(const TruncatedTreeSystem& sys);

/// Deterministic weight map: r^depth(t) / diam(K_t), depths from `root`.
WeightMap geometric_weights(const TruncatedTreeSystem& sys, VertexId root, double ratio = 0.5);
WeightMap unit_weights(const TruncatedTreeSystem& sys);

}  // namespace arbor
