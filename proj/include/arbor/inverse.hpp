#pragma once

#include "arbor/realize.hpp"
#include "arbor/system.hpp"

namespace arbor {

/// A point of an extended space K^_F: either a constituent point or a point
/// of a frontier extension Delta_e (never a base point; those canonicalize
/// to the attached peripheral point).
struct ExtPoint {
  bool ext = false;
  VertexId vertex = -1;    // core: which constituent
  EdgeId edge = -1;        // ext: which Delta
  std::size_t index = 0;   // point index within the constituent / Delta

  auto operator<=>(const ExtPoint&) const = default;
};

/// Family of extended spaces and maps for a tree system.
///
/// Per oriented edge with real alpha: the extension space Delta_e, its base
/// subset S_e, and the attachment bijection onto Sigma_e. Per non-stub edge:
/// the map delta_e from K^_{omega(e)} minus the open opposite extension into
/// Delta_e, stored as its action on constituent points and as one collapse
/// target per foreign extension.
struct ExtendedFamily {
  enum class Kind { Trivial, Conical, Standard, Custom };

  struct Extension {
    FiniteCompactum delta;
    PointSet base;                                     // local indices of S_e
    std::vector<std::pair<std::size_t, std::size_t>> attach;  // (base local, point of K_alpha)
  };
  struct DeltaMap {
    std::vector<std::size_t> on_core;          // K_omega(e) point -> Delta_e local
    std::map<EdgeId, std::size_t> on_foreign;  // e' in N_omega \ {bar e} -> Delta_e local
  };

  Kind kind = Kind::Trivial;
  int cone_levels = 4;
  std::map<EdgeId, Extension> ext;
  std::map<EdgeId, DeltaMap> delta;

  /// Base local index whose attachment is peripheral point p of K_alpha(e).
  std::size_t base_of(EdgeId e, std::size_t p) const;
  std::size_t attach_of(EdgeId e, std::size_t base_local) const;
};

/// Builds the trivial (Delta = Sigma, no maps) or conical (metric cones,
/// maps filled by build_delta_conical) family. Standard/Custom extensions
/// are supplied by generators or callers.
ExtendedFamily build_extended(const TruncatedTreeSystem& sys, ExtendedFamily::Kind kind,
                              int cone_levels = 4);

/// Fills delta maps for a conical family: peripheral points go to the cone
/// base through phi, other constituent points to cone levels by normalized
/// distance to the peripheral, foreign extensions collapse to single points.
void build_delta_conical(const TruncatedTreeSystem& sys, ExtendedFamily& fam);

/// Wraps retractions r_e : K_alpha(e) -> Sigma_e into delta maps over the
/// trivial family (delta_e = phi_bar(e) o r_bar(e)).
void build_delta_from_retractions(const TruncatedTreeSystem& sys, ExtendedFamily& fam,
                                  const std::map<EdgeId, std::vector<std::size_t>>& retractions);

/// Checks the retraction hypotheses: identity on Sigma_e, and the worst
/// Lipschitz constant of r_e restricted to each other peripheral.
/// stats: "c" (max contraction constant), "C" (max constituent diameter).
Report validate_dim_hypotheses(const TruncatedTreeSystem& sys,
                               const std::map<EdgeId, std::vector<std::size_t>>& retractions);

/// Composite map along a non-backtracking path [e_1..e_m], m >= 2: image of
/// the whole Delta_{e_m} inside Delta_{e_1}, with its diameter there.
struct DeltaImage {
  PointSet points;  // local indices in Delta_{e_1}
  double diameter = 0.0;
};

DeltaImage delta_gamma(const TruncatedTreeSystem& sys, const ExtendedFamily& fam,
                       const std::vector<EdgeId>& path);

/// Fineness certificate: per start edge and path length, the maximal image
/// diameter of delta_gamma over all paths up to the depth bound.
struct FineCertificate {
  std::map<EdgeId, std::vector<double>> max_diameter;  // index = path length - 2
  double overall_max = 0.0;
  bool zero_contracting = true;  // every length>=2 image was a singleton
};

FineCertificate check_fine(const TruncatedTreeSystem& sys, const ExtendedFamily& fam,
                           std::size_t depth_bound);

/// Smallest Lipschitz constant of the delta maps on foreign extensions and
/// the diameter bound of the extended constituents; nullopt when c >= 1.
std::optional<std::pair<double, double>> check_contracting(const TruncatedTreeSystem& sys,
                                                           const ExtendedFamily& fam);

/// The associated inverse system over an increasing chain of subtrees.
struct InverseBundle {
  std::vector<SubtreeRef> chain;
  /// Points of each level space K^_F (canonical representatives).
  std::vector<std::vector<ExtPoint>> points;
  std::vector<std::map<ExtPoint, std::size_t>> index;
  /// bonding[i]: level i+1 -> level i.
  std::vector<std::vector<std::size_t>> bonding;

  std::vector<std::size_t> compose(std::size_t from, std::size_t to) const;
};

InverseBundle build_bundle(const TruncatedTreeSystem& sys, const ExtendedFamily& fam,
                           const std::vector<SubtreeRef>& chain);

/// Threads of the bundle evaluated against a realization: one thread per
/// realization class, with the stabilization and bijection checks of the
/// inverse-limit comparison.
struct ThreadEvaluation {
  std::vector<std::vector<std::size_t>> threads;  // class -> per-level point index
  std::map<std::size_t, EdgeId> end_tags;          // end-marker classes -> stub
  Report report;  // stabilization, distinctness, bijectivity onto core points
};

ThreadEvaluation evaluate_threads(const TruncatedTreeSystem& sys, const ExtendedFamily& fam,
                                  const InverseBundle& bundle, const Realization& realization);

// ---------------------------------------------------------------------------
// Weak Jakobsche inverse sequences (label-level data model).

struct WJDisk {
  int label = 0;       // which manifold of the alphabet the patch carries
  PointSet disk;       // subset of the level space
  PointSet boundary;   // subset of `disk`
  PointSet patch;      // declared next-level patch (empty at the last level)
};

struct WJLevel {
  FiniteCompactum space;
  int space_label = 0;  // label of X_1 checked at level 0 only
  std::vector<WJDisk> disks;
};

struct WJSequence {
  std::vector<WJLevel> levels;
  /// maps[i]: level i+1 point -> level i point.
  std::vector<std::vector<std::size_t>> maps;
  std::vector<int> alphabet;
  bool oriented = true;
  double density_resolution = 1.0;
};

/// Checks conditions (1)-(6); violation codes "wj1".."wj6".
Report validate_weak_jakobsche(const WJSequence& seq);

}  // namespace arbor
