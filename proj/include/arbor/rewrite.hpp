#pragma once

#include "arbor/decomp.hpp"
#include "arbor/realize.hpp"
#include "arbor/system.hpp"

namespace arbor {

/// One step of a rewrite pipeline; axiom steps stand in for homeomorphisms
/// that exist by the manifold-rearrangement lemmas but are not computed.
struct RewriteStep {
  std::string op;
  std::string params;
  bool axiom = false;
};
using RewriteLog = std::vector<RewriteStep>;

// ---------------------------------------------------------------------------
// Consolidation.

struct ConsolidationResult {
  TruncatedTreeSystem system;           // cells are vertices 0..#cells-1
  std::vector<GluedSpace> cell_spaces;  // per cell, with (vertex, point) index maps
  TreePartition partition;
  /// Original stub/surviving-edge ids are preserved; this maps original
  /// vertices to their cell.
  std::map<VertexId, VertexId> cell_of_vertex;
};

/// Merges constituents over the partition cells; weights are baked into the
/// cell spaces (realize the result with unit weights and inherited base
/// points to stay on the same scale).
ConsolidationResult consolidate(const TruncatedTreeSystem& sys, const TreePartition& partition,
                                const WeightMap* weights = nullptr);

/// Base points of the consolidated system inherited from the original ones.
BasePointing inherit_basepoints(const ConsolidationResult& cons, const TruncatedTreeSystem& orig,
                                const BasePointing& bp);

/// The canonical bijection between the original and consolidated
/// realizations, with its metric distortion.
struct CanonicalMap {
  std::vector<std::size_t> map;  // original class -> consolidated class
  double distortion = 0.0;
};

CanonicalMap canonical_consolidation_map(const TruncatedTreeSystem& orig,
                                         const ConsolidationResult& cons,
                                         const Realization& r_orig, const Realization& r_cons);

// ---------------------------------------------------------------------------
// Subdivision and the round trip.

struct SubdivisionResult {
  TruncatedTreeSystem system;
  Realization realization;              // of the original system
  CLimResult clim;
  std::map<VertexId, PointSet> provenance;  // new vertex -> realization classes
  std::map<VertexId, VertexId> origin;      // new vertex -> original vertex
};

SubdivisionResult subdivide(const TruncatedTreeSystem& sys,
                            const std::map<VertexId, Decomposition>& c,
                            const WeightMap* weights = nullptr);

/// Subdivides, consolidates along the canonical partition (cells = domains
/// grouped by original vertex), and compares against the input via
/// find_isomorphism; stats carry the isomorphism and realization distortions.
Report roundtrip_check(const TruncatedTreeSystem& sys, const std::map<VertexId, Decomposition>& c,
                       double tolerance = 1e-9);

// ---------------------------------------------------------------------------
// Label algebra.

struct ConnectedSumWord {
  std::map<int, int> multiplicities;  // label -> count, all positive
  bool oriented = true;
};

ConnectedSumWord sum_normalize(const ConnectedSumWord& w);
bool spaces_equal(const ConnectedSumWord& a, const ConnectedSumWord& b);

/// Alphabet of a labeled system: vertex labels plus promised stub labels.
std::vector<int> label_alphabet(const TruncatedTreeSystem& sys);

/// Child label across an outgoing edge (vertex label or stub promise).
int child_label(const TruncatedTreeSystem& sys, EdgeId e);

/// Every vertex has at least two outgoing edges per alphabet label.
bool is_2_saturated(const TruncatedTreeSystem& sys);
/// Every half-tree (stub sides through their promises) carries every label.
/// Throws when a stub lacks a promise.
bool is_weakly_saturated(const TruncatedTreeSystem& sys);

/// The saturation rewrite: relabels along a cell scheme (consolidation
/// followed by a Torunczyk-justified peripheral relabel per cell, recorded
/// as axiom steps) so that the result is 2-saturated. Pure label-level:
/// the tree and constituents are unchanged, labels and promises move.
struct SaturationResult {
  TruncatedTreeSystem system;
  RewriteLog log;
  std::vector<std::vector<VertexId>> cells;
};

SaturationResult saturate(const TruncatedTreeSystem& sys);

// ---------------------------------------------------------------------------
// Homogeneity pipeline: carry an interior point to a truncation end.

struct PunctureResult {
  TruncatedTreeSystem system;  // labeled, same alphabet
  EdgeId x_stub = -1;          // the stub whose end marker carries x
  RewriteLog log;
  Report checks;
};

/// Expands t_star along the nested shells around x, truncates the innermost
/// piece to a stub, and consolidates each intermediate piece with a chosen
/// neighbor so the result is again a labeled system over the same alphabet.
PunctureResult puncture_to_end(const TruncatedTreeSystem& sys, VertexId t_star, std::size_t x,
                               const std::vector<Splitting>& shells);

/// The variant entry point for x on a peripheral sphere: absorbs the
/// peripheral of e_star into a merged constituent using the enclosing
/// halfspace splitting q; returns the transformed system and x's position.
struct AbsorbResult {
  TruncatedTreeSystem system;
  VertexId vertex = -1;   // merged cell holding x
  std::size_t point = 0;  // x's index there
  RewriteLog log;
};

AbsorbResult absorb_peripheral(const TruncatedTreeSystem& sys, EdgeId e_star, std::size_t x,
                               const Splitting& q);

}  // namespace arbor
