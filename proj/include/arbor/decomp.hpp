#pragma once

#include "arbor/realize.hpp"
#include "arbor/system.hpp"

namespace arbor {

/// Elementary splitting of a finite ambient space: Y u Z = everything,
/// Y n Z = A, with A nonempty and proper in both halfspaces.
struct Splitting {
  PointSet a, y, z;  // sorted
};

/// A family of pairwise noncrossing splittings of one ambient space.
using Decomposition = std::vector<Splitting>;

enum class Half { Y, Z };
const PointSet& halfspace(const Splitting& s, Half h);
Half other(Half h);

Splitting make_splitting(std::size_t ambient_size, PointSet a, PointSet y);

Report validate_splitting(const FiniteCompactum& m, const Splitting& s);

/// True iff the two splittings do not cross (some pair of halfspaces is
/// disjoint).
bool noncross(const Splitting& s1, const Splitting& s2);

/// True iff separator i2 separates i1 from i3 (some halfspace H of i2 has
/// A_{i1} inside the open H and A_{i3} inside the open complement).
bool separates(const Decomposition& c, std::size_t i1, std::size_t i2, std::size_t i3);

/// Discreteness report: max over separator pairs of the separating count.
Report is_discrete(const Decomposition& c);

/// Fineness profile: eps -> number of splittings whose smaller halfspace
/// diameter exceeds eps.
Report is_fine(const FiniteCompactum& m, const Decomposition& c);

/// Domain induced by (separator index, halfspace).
struct Domain {
  std::size_t splitting = 0;
  Half half = Half::Y;
  PointSet points;                    // Omega_{A,H}
  std::vector<std::size_t> adjacent;  // splitting indices adjacent to Omega
};

Domain domain(const FiniteCompactum& m, const Decomposition& c, std::size_t idx, Half h);

/// Dual tree: one vertex per distinct domain, one geometric edge per
/// splitting; the oriented edge of (A,H) terminates at Omega_{A,H}.
struct DualTree {
  Tree tree;
  std::vector<Domain> domains;                          // vertex id -> domain
  std::map<EdgeId, std::pair<std::size_t, Half>> edge;  // oriented edge -> (splitting, half)
  std::map<std::size_t, EdgeId> edge_of_splitting;      // splitting -> its Y-side edge
};

/// Throws on crossing pairs; an empty decomposition yields the single-vertex
/// tree by convention.
DualTree dual_tree(const FiniteCompactum& m, const Decomposition& c);

/// The tree system associated to a fine tree decomposition: constituents are
/// domains, peripherals are separators, connectors are the identity on A.
struct AssociatedSystem {
  TruncatedTreeSystem system;
  DualTree dual;
  /// vertex -> sorted ambient indices of the domain (local index i of the
  /// constituent is provenance[t][i]).
  std::map<VertexId, PointSet> provenance;
};

AssociatedSystem associated_system(const FiniteCompactum& m, const Decomposition& c);

/// Realizes the associated system (unit weights) and checks that the
/// canonical map beta back to the ambient space is a bijection; records the
/// metric distortion of beta in stats["beta-distortion"].
Report reconstruct_check(const FiniteCompactum& m, const Decomposition& c);

/// Compatibility of a decomposition of the constituent K_t with the system:
/// no separator crosses a peripheral, and each peripheral lies in a single
/// domain. stats["discrete-at"] counts the peripheral-in-domain witnesses.
Report compatible(const Decomposition& c_t, const TruncatedTreeSystem& sys, VertexId t);

/// Builds the nested-family decomposition around an interior point from a
/// strictly nested halfspace chain; checks saturation, nesting and the
/// terminal diameter against the stated resolution.
struct NestedFamilyResult {
  Decomposition decomposition;
  Report report;
};

NestedFamilyResult nested_family(const TruncatedTreeSystem& sys, VertexId t, std::size_t x0,
                                 const std::vector<Splitting>& shells, double resolution);

/// The induced decomposition of the realization: G-set images of every
/// splitting of every C_t plus the edge splittings of C(Theta).
struct CLimOrigin {
  bool from_edge = false;
  VertexId vertex = -1;      // when from a C_t splitting
  std::size_t index = 0;     // index into C_t
  EdgeId edge = -1;          // when from C(Theta)
};

struct CLimResult {
  Decomposition splittings;       // over realization classes
  std::vector<CLimOrigin> origins;
  Report report;                  // noncrossing + Claim-2 inequality checks
};

CLimResult c_lim(const TruncatedTreeSystem& sys, const std::map<VertexId, Decomposition>& c,
                 const Realization& realization);

}  // namespace arbor
