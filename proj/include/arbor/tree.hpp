#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace arbor {

/// Error type for precondition violations across the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

using VertexId = int;
using EdgeId = int;

/// One oriented edge. `bar` is the id of the same geometric edge with the
/// opposite orientation; it is always present, also for stub edges (whose
/// reversal has its alpha outside the vertex set).
struct OrientedEdge {
  EdgeId id = -1;
  VertexId alpha = -1;
  VertexId omega = -1;
  EdgeId bar = -1;
};

/// Finite tree with oriented edges and optional truncation bookkeeping.
///
/// A stub edge leaves the truncated region: its alpha is a real vertex, its
/// omega is a phantom id absent from the vertex set. The reversal of a stub
/// (alpha phantom) is kept so that bar stays a total involution, but it never
/// shows up in n_set/paths since its alpha is not a vertex.
class Tree {
public:
  Tree() = default;

  void add_vertex(VertexId v);
  /// Adds the geometric edge {u,v} as two oriented edges and returns the id
  /// of the u->v orientation. Ids are chosen as the next free even/odd pair
  /// unless given explicitly.
  EdgeId add_edge(VertexId u, VertexId v);
  EdgeId add_edge_with_ids(VertexId u, VertexId v, EdgeId uv, EdgeId vu);
  /// Adds a stub at u pointing to phantom vertex `ghost` (must not be a
  /// vertex). Returns the outward oriented edge id.
  EdgeId add_stub(VertexId u, VertexId ghost);
  EdgeId add_stub_with_ids(VertexId u, VertexId ghost, EdgeId out, EdgeId in);

  bool has_vertex(VertexId v) const { return vertex_set_.count(v) > 0; }
  bool has_edge(EdgeId e) const { return edges_.count(e) > 0; }
  bool is_stub(EdgeId e) const { return stubs_.count(e) > 0; }
  /// True for reversals of stub edges (alpha is a phantom vertex).
  bool is_ghost(EdgeId e) const { return !has_vertex(edge(e).alpha); }

  VertexId alpha(EdgeId e) const { return edge(e).alpha; }
  VertexId omega(EdgeId e) const { return edge(e).omega; }
  EdgeId bar(EdgeId e) const { return edge(e).bar; }
  const OrientedEdge& edge(EdgeId e) const;

  /// Sorted vertex ids.
  const std::vector<VertexId>& vertices() const { return vertex_order_; }
  /// Sorted ids of all oriented edges whose alpha is a real vertex
  /// (i.e. everything except ghost reversals of stubs).
  std::vector<EdgeId> oriented_edges() const;
  /// Sorted stub edge ids.
  std::vector<EdgeId> stub_edges() const;
  /// N_t: oriented edges with alpha == t (stubs included), sorted.
  std::vector<EdgeId> out_edges(VertexId t) const;
  /// Degree counting both tree edges and stubs.
  std::size_t degree(VertexId t) const { return out_edges(t).size(); }

  std::size_t vertex_count() const { return vertex_order_.size(); }

  /// Unique embedded path from t to s as oriented edge ids; empty for t == s.
  std::vector<EdgeId> path(VertexId t, VertexId s) const;

  /// Whole-tree invariant check; returns a list of violation messages
  /// (empty means the tree is valid).
  std::vector<std::string> validate() const;

private:
  friend class SubtreeRef;
  std::map<EdgeId, OrientedEdge> edges_;
  std::set<VertexId> vertex_set_;
  std::vector<VertexId> vertex_order_;
  std::set<EdgeId> stubs_;
  std::map<VertexId, std::vector<EdgeId>> adjacency_;  // alpha -> edges, sorted
  EdgeId next_edge_id_ = 0;
};

/// A connected subtree designated by its vertex subset.
class SubtreeRef {
public:
  SubtreeRef() = default;
  /// Throws unless `verts` induces a connected subgraph of `t`.
  SubtreeRef(const Tree& t, std::vector<VertexId> verts);

  const std::vector<VertexId>& vertices() const { return vertices_; }
  bool contains(VertexId v) const;
  /// Oriented edges with both ends inside the subtree, sorted.
  std::vector<EdgeId> internal_edges(const Tree& t) const;
  std::size_t size() const { return vertices_.size(); }

private:
  std::vector<VertexId> vertices_;  // sorted
};

/// N_S: oriented edges leaving the subtree (alpha inside, omega outside);
/// stub edges with alpha inside are included.
std::vector<EdgeId> n_set(const Tree& t, const SubtreeRef& s);

/// Component of omega(e) after removing the geometric edge of e.
/// Throws for stub edges.
SubtreeRef half_tree(const Tree& t, EdgeId e);

/// Partition of the tree into subtrees.
struct TreePartition {
  std::vector<SubtreeRef> cells;
};

struct PartitionViolation {
  std::string kind;  // "overlap" | "non-cover" | "disconnected"
  std::string detail;
};

std::vector<PartitionViolation> validate_partition(const Tree& t, const TreePartition& p);

/// Index of the cell containing v; throws if the partition does not cover v.
std::size_t cell_of(const TreePartition& p, VertexId v);

/// GraphViz export of the undirected tree; stub edges dashed.
std::string to_dot(const Tree& t);

}  // namespace arbor
