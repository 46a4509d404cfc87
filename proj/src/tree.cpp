#include "arbor/tree.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace arbor {

void Tree::add_vertex(VertexId v) {
  if (vertex_set_.count(v)) throw Error("duplicate vertex id " + std::to_string(v));
  vertex_set_.insert(v);
  vertex_order_.insert(std::lower_bound(vertex_order_.begin(), vertex_order_.end(), v), v);
}

EdgeId Tree::add_edge(VertexId u, VertexId v) {
  EdgeId a = next_edge_id_;
  return add_edge_with_ids(u, v, a, a + 1);
}

EdgeId Tree::add_edge_with_ids(VertexId u, VertexId v, EdgeId uv, EdgeId vu) {
  if (!has_vertex(u) || !has_vertex(v)) throw Error("edge endpoint is not a vertex");
  if (uv == vu || edges_.count(uv) || edges_.count(vu)) throw Error("bad edge id pair");
  edges_[uv] = OrientedEdge{uv, u, v, vu};
  edges_[vu] = OrientedEdge{vu, v, u, uv};
  auto ins = [&](VertexId w, EdgeId e) {
    auto& lst = adjacency_[w];
    lst.insert(std::lower_bound(lst.begin(), lst.end(), e), e);
  };
  ins(u, uv);
  ins(v, vu);
  next_edge_id_ = std::max(next_edge_id_, std::max(uv, vu) + 1);
  return uv;
}

EdgeId Tree::add_stub(VertexId u, VertexId ghost) {
  EdgeId a = next_edge_id_;
  return add_stub_with_ids(u, ghost, a, a + 1);
}

EdgeId Tree::add_stub_with_ids(VertexId u, VertexId ghost, EdgeId out, EdgeId in) {
  if (!has_vertex(u)) throw Error("stub anchor is not a vertex");
  if (has_vertex(ghost)) throw Error("stub target must be a phantom vertex");
  if (out == in || edges_.count(out) || edges_.count(in)) throw Error("bad edge id pair");
  edges_[out] = OrientedEdge{out, u, ghost, in};
  edges_[in] = OrientedEdge{in, ghost, u, out};
  auto& lst = adjacency_[u];
  lst.insert(std::lower_bound(lst.begin(), lst.end(), out), out);
  stubs_.insert(out);
  next_edge_id_ = std::max(next_edge_id_, std::max(out, in) + 1);
  return out;
}

const OrientedEdge& Tree::edge(EdgeId e) const {
  auto it = edges_.find(e);
  if (it == edges_.end()) throw Error("unknown edge id " + std::to_string(e));
  return it->second;
}

std::vector<EdgeId> Tree::oriented_edges() const {
  std::vector<EdgeId> out;
  for (const auto& [id, ed] : edges_)
    if (vertex_set_.count(ed.alpha)) out.push_back(id);
  return out;
}

std::vector<EdgeId> Tree::stub_edges() const {
  return std::vector<EdgeId>(stubs_.begin(), stubs_.end());
}

std::vector<EdgeId> Tree::out_edges(VertexId t) const {
  auto it = adjacency_.find(t);
  if (it == adjacency_.end()) {
    if (!has_vertex(t)) throw Error("unknown vertex id " + std::to_string(t));
    return {};
  }
  return it->second;
}

std::vector<EdgeId> Tree::path(VertexId t, VertexId s) const {
  if (!has_vertex(t) || !has_vertex(s)) throw Error("path endpoint is not a vertex");
  if (t == s) return {};
  // Parent pointers from a DFS rooted at t, restricted to non-stub edges.
  std::map<VertexId, EdgeId> via;
  std::deque<VertexId> queue{t};
  via[t] = -1;
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    if (v == s) break;
    for (EdgeId e : out_edges(v)) {
      if (is_stub(e)) continue;
      VertexId w = omega(e);
      if (via.count(w)) continue;
      via[w] = e;
      queue.push_back(w);
    }
  }
  if (!via.count(s)) throw Error("vertices are not connected");
  std::vector<EdgeId> rev;
  for (VertexId v = s; v != t;) {
    EdgeId e = via[v];
    rev.push_back(e);
    v = alpha(e);
  }
  return std::vector<EdgeId>(rev.rbegin(), rev.rend());
}

std::vector<std::string> Tree::validate() const {
  std::vector<std::string> out;
  for (const auto& [id, ed] : edges_) {
    if (!edges_.count(ed.bar)) {
      out.push_back("edge " + std::to_string(id) + " has missing bar partner");
      continue;
    }
    const auto& b = edges_.at(ed.bar);
    if (b.bar != id || ed.bar == id)
      out.push_back("bar is not a fixed-point-free involution at edge " + std::to_string(id));
    if (b.alpha != ed.omega || b.omega != ed.alpha)
      out.push_back("alpha(bar(e)) != omega(e) at edge " + std::to_string(id));
  }
  for (EdgeId e : stubs_) {
    const auto& ed = edges_.at(e);
    if (vertex_set_.count(ed.omega))
      out.push_back("stub edge " + std::to_string(e) + " has a real omega vertex");
    if (!vertex_set_.count(ed.alpha))
      out.push_back("stub edge " + std::to_string(e) + " has phantom alpha");
  }
  for (const auto& [id, ed] : edges_) {
    bool a = vertex_set_.count(ed.alpha) > 0, o = vertex_set_.count(ed.omega) > 0;
    if (a && !o && !stubs_.count(id))
      out.push_back("edge " + std::to_string(id) + " leaves the vertex set but is not a stub");
    if (!a && !o) out.push_back("edge " + std::to_string(id) + " touches no vertex");
  }
  // Connectivity and acyclicity of the underlying undirected graph.
  if (!vertex_order_.empty()) {
    std::set<VertexId> seen{vertex_order_.front()};
    std::deque<VertexId> queue{vertex_order_.front()};
    std::size_t geom_edges = 0;
    while (!queue.empty()) {
      VertexId v = queue.front();
      queue.pop_front();
      for (EdgeId e : out_edges(v)) {
        if (is_stub(e)) continue;
        ++geom_edges;
        VertexId w = omega(e);
        if (!seen.count(w)) {
          seen.insert(w);
          queue.push_back(w);
        }
      }
    }
    if (seen.size() != vertex_order_.size()) out.push_back("tree is not connected");
    // Each geometric edge was counted once from each side.
    if (seen.size() == vertex_order_.size() && geom_edges != 2 * (vertex_order_.size() - 1))
      out.push_back("tree has a cycle");
  }
  return out;
}

SubtreeRef::SubtreeRef(const Tree& t, std::vector<VertexId> verts) {
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  if (verts.empty()) throw Error("subtree must be nonempty");
  for (VertexId v : verts)
    if (!t.has_vertex(v)) throw Error("subtree vertex " + std::to_string(v) + " not in tree");
  // Connectivity of the induced subgraph.
  std::set<VertexId> want(verts.begin(), verts.end());
  std::set<VertexId> seen{verts.front()};
  std::deque<VertexId> queue{verts.front()};
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (EdgeId e : t.out_edges(v)) {
      if (t.is_stub(e)) continue;
      VertexId w = t.omega(e);
      if (want.count(w) && !seen.count(w)) {
        seen.insert(w);
        queue.push_back(w);
      }
    }
  }
  if (seen.size() != want.size()) throw Error("subtree vertex set is not connected");
  vertices_ = std::move(verts);
}

bool SubtreeRef::contains(VertexId v) const {
  return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

std::vector<EdgeId> SubtreeRef::internal_edges(const Tree& t) const {
  std::vector<EdgeId> out;
  for (VertexId v : vertices_)
    for (EdgeId e : t.out_edges(v))
      if (!t.is_stub(e) && contains(t.omega(e))) out.push_back(e);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EdgeId> n_set(const Tree& t, const SubtreeRef& s) {
  std::vector<EdgeId> out;
  for (VertexId v : s.vertices())
    for (EdgeId e : t.out_edges(v))
      if (t.is_stub(e) || !s.contains(t.omega(e))) out.push_back(e);
  std::sort(out.begin(), out.end());
  return out;
}

SubtreeRef half_tree(const Tree& t, EdgeId e) {
  if (t.is_stub(e)) throw Error("half_tree of a stub edge");
  if (t.is_ghost(e)) throw Error("half_tree of a ghost edge");
  // Flood from omega(e) without crossing the geometric edge of e.
  std::set<VertexId> seen{t.omega(e)};
  std::deque<VertexId> queue{t.omega(e)};
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (EdgeId f : t.out_edges(v)) {
      if (t.is_stub(f) || f == e || f == t.bar(e)) continue;
      VertexId w = t.omega(f);
      if (!seen.count(w)) {
        seen.insert(w);
        queue.push_back(w);
      }
    }
  }
  return SubtreeRef(t, std::vector<VertexId>(seen.begin(), seen.end()));
}

std::vector<PartitionViolation> validate_partition(const Tree& t, const TreePartition& p) {
  std::vector<PartitionViolation> out;
  std::map<VertexId, int> owner;
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    for (VertexId v : p.cells[i].vertices()) {
      if (owner.count(v))
        out.push_back({"overlap", "vertex " + std::to_string(v) + " in cells " +
                                      std::to_string(owner[v]) + " and " + std::to_string(i)});
      else
        owner[v] = static_cast<int>(i);
    }
  }
  for (VertexId v : t.vertices())
    if (!owner.count(v))
      out.push_back({"non-cover", "vertex " + std::to_string(v) + " is in no cell"});
  // Cell connectivity is enforced by SubtreeRef construction; re-check the
  // vertices still exist in this tree.
  for (std::size_t i = 0; i < p.cells.size(); ++i)
    for (VertexId v : p.cells[i].vertices())
      if (!t.has_vertex(v))
        out.push_back({"disconnected", "cell " + std::to_string(i) + " references unknown vertex"});
  return out;
}

std::size_t cell_of(const TreePartition& p, VertexId v) {
  for (std::size_t i = 0; i < p.cells.size(); ++i)
    if (p.cells[i].contains(v)) return i;
  throw Error("partition does not cover vertex " + std::to_string(v));
}

std::string to_dot(const Tree& t) {
  std::ostringstream os;
  os << "graph tree {\n";
  for (VertexId v : t.vertices()) os << "  v" << v << ";\n";
  for (EdgeId e : t.oriented_edges()) {
    if (t.is_stub(e)) {
      os << "  v" << t.alpha(e) << " -- ghost" << t.omega(e) << " [style=dashed];\n";
    } else if (e < t.bar(e)) {
      os << "  v" << t.alpha(e) << " -- v" << t.omega(e) << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace arbor
