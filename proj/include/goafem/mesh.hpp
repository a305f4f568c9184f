#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "goafem/geometry.hpp"

namespace goafem {

// Sorted, duplicate-free set of element indices.
struct MarkedSet {
  std::vector<std::int32_t> idx;

  MarkedSet() = default;
  static MarkedSet of(std::vector<std::int32_t> v);

  std::size_t size() const { return idx.size(); }
  bool empty() const { return idx.empty(); }
  bool contains(std::int32_t i) const;
};

// Position of an element in the bisection tree of its root element. Bits are
// packed so that numeric order of (hi, lo) equals depth-first (left-first)
// order of the tree: the bit chosen at depth k sits at position 127 - k.
struct TreePath {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  std::int32_t depth = 0;

  TreePath child(int bit) const;
  bool bit_at(int k) const;
  // True when *this is a strict ancestor of other.
  bool ancestor_of(const TreePath& other) const;

  friend bool operator==(const TreePath&, const TreePath&) = default;
};

// Total order: depth-first tree order, ancestors before descendants.
bool path_less(const TreePath& a, const TreePath& b);

struct Triangle {
  // Vertex ids, ccw; the refinement edge is (v[0], v[1]) and v[2] is the peak.
  std::array<std::int32_t, 3> v{};
  std::int32_t root = 0;  // index of the ancestor element in the initial mesh
  std::int32_t gen = 0;   // number of bisections from the root element
  TreePath path;
};

// Conforming triangular mesh refined from a fixed initial mesh by
// newest-vertex bisection. Storage is canonical: triangles sorted by
// (root, tree position); vertices are the initial vertices followed by edge
// midpoints in creation order of that traversal. Two refinements of the same
// initial mesh with equal leaf sets are therefore bitwise identical.
class Mesh2 {
 public:
  struct RootData {
    std::vector<Vec2> vertices;
    std::vector<std::array<std::int32_t, 3>> triangles;  // canonicalized triples
    // Boundary labels for root boundary edges, keyed by (min vid, max vid).
    std::vector<std::array<std::int32_t, 3>> boundary_edges;  // {a, b, label}
  };

  // Builds an initial mesh. Triangles must be positively oriented; the
  // refinement edge of each is its longest edge, ties broken by the lowest
  // global index of the opposite vertex. Boundary edges (edges with exactly
  // one adjacent triangle) receive labels 0..k-1 in discovery order unless
  // explicit {a, b, label} triples are given.
  static Mesh2 from_root(std::vector<Vec2> vertices,
                         std::vector<std::array<std::int32_t, 3>> triangles,
                         std::vector<std::array<std::int32_t, 3>> boundary_labels = {});

  std::int64_t num_vertices() const { return static_cast<std::int64_t>(verts_.size()); }
  std::int64_t num_triangles() const { return static_cast<std::int64_t>(tris_.size()); }
  const Vec2& vertex(std::int32_t i) const { return verts_[i]; }
  const Triangle& tri(std::int32_t i) const { return tris_[i]; }
  const std::vector<Triangle>& triangles() const { return tris_; }

  double area(std::int32_t t) const;
  Vec2 centroid(std::int32_t t) const;

  // Edge connectivity. Edges are stored once with a <= b vertex order.
  std::int64_t num_edges() const { return static_cast<std::int64_t>(edges_.size()); }
  const std::array<std::int32_t, 2>& edge(std::int32_t e) const { return edges_[e]; }
  const std::array<std::int32_t, 3>& tri_edges(std::int32_t t) const { return tri_edges_[t]; }
  // Adjacent triangles of an edge; second entry is -1 for boundary edges.
  const std::array<std::int32_t, 2>& edge_tris(std::int32_t e) const { return edge_tris_[e]; }
  bool edge_on_boundary(std::int32_t e) const { return edge_tris_[e][1] < 0; }
  // Label of a boundary edge (-1 for interior edges).
  std::int32_t edge_label(std::int32_t e) const { return edge_label_[e]; }

  const std::shared_ptr<const RootData>& root_data() const { return root_; }
  bool same_root(const Mesh2& other) const;

  // Writes "vertices N triangles M", N x "x y", M x "v0 v1 v2 refedge gen".
  // The refedge column is the local index of the refinement edge, always 0
  // in canonical storage.
  std::string dump() const;

  // Structural soundness check: positive areas, two-manifold edge use, Euler
  // characteristic of a simply connected domain, total area preservation,
  // and absence of hanging midpoints. Throws std::logic_error on violation.
  void audit() const;

 private:
  friend Mesh2 replay_leaves(const std::shared_ptr<const Mesh2::RootData>& root,
                             const std::vector<std::vector<TreePath>>& leaves);
  void build_connectivity();

  std::vector<Vec2> verts_;
  std::vector<Triangle> tris_;
  std::vector<std::array<std::int32_t, 2>> edges_;
  std::vector<std::array<std::int32_t, 3>> tri_edges_;
  std::vector<std::array<std::int32_t, 2>> edge_tris_;
  std::vector<std::int32_t> edge_label_;
  std::shared_ptr<const RootData> root_;
};

// h_T := area(T)^{1/2} for every element.
std::vector<double> element_size(const Mesh2& mesh);

// Newest-vertex bisection with mesh closure. Every marked element is
// bisected at least once; the returned mesh is conforming. The refinement
// edge of (a, b, c) is (a, b); its children are (c, a, m) and (b, c, m) with
// m the midpoint of (a, b). Enforces #(old \ new) + #old <= #new.
Mesh2 nvb_refine(const Mesh2& mesh, const MarkedSet& marked);

// Smallest common conforming refinement of two meshes refined from the same
// initial mesh. Enforces #overlay <= #a + #b - #initial.
Mesh2 overlay(const Mesh2& a, const Mesh2& b);

// ---------------------------------------------------------------------------
// One-dimensional boundary mesh (closed polygonal curve).

struct Panel {
  std::int32_t a = 0;  // first node (curve order)
  std::int32_t b = 0;  // second node
  std::int32_t root = 0;
  std::int32_t gen = 0;
  std::int64_t uid = 0;  // persistent across refinements; children get new uids
  double h = 0.0;        // arclength
  double s0 = 0.0;       // arclength of node a from the curve origin
};

class BoundaryMesh {
 public:
  // Closed ccw polygon; each edge is split into equal panels of length at
  // most max_h. Corners always remain nodes.
  static BoundaryMesh polygon(const std::vector<Vec2>& corners, double max_h);

  std::int64_t num_panels() const { return static_cast<std::int64_t>(panels_.size()); }
  std::int64_t num_nodes() const { return static_cast<std::int64_t>(nodes_.size()); }
  const Panel& panel(std::int32_t i) const { return panels_[i]; }
  const Vec2& node(std::int32_t i) const { return nodes_[i]; }
  double node_s(std::int32_t i) const { return node_s_[i]; }
  double total_length() const { return total_length_; }
  // Vertices of the generating polygon (preserved across refinement).
  const std::vector<Vec2>& corners() const { return corners_; }

  Vec2 point(std::int32_t p, double t) const;  // t in [0,1] along panel p
  Vec2 tangent(std::int32_t p) const;          // unit, curve direction
  Vec2 normal(std::int32_t p) const;           // unit, outward (ccw curve)
  Vec2 midpoint(std::int32_t p) const { return point(p, 0.5); }

  std::int32_t prev_panel(std::int32_t p) const;
  std::int32_t next_panel(std::int32_t p) const;

  // Checks the closed-chain structure, positive lengths, consistent
  // arclengths, and the neighbor length-ratio <= 2 invariant.
  void audit() const;

 private:
  friend BoundaryMesh bisect_1d(const BoundaryMesh&, const MarkedSet&);

  std::vector<Vec2> nodes_;
  std::vector<double> node_s_;
  std::vector<Panel> panels_;  // curve order; panels_[i].b == panels_[i+1].a
  std::vector<Vec2> corners_;
  double total_length_ = 0.0;
  std::int64_t next_uid_ = 0;
};

// Arclength h for every panel.
std::vector<double> element_size(const BoundaryMesh& mesh);

// Halves every marked panel at its arclength midpoint, after enlarging the
// marked set by the closure rule: a marked panel marks any strictly longer
// neighbor; iterate to a fixpoint. Keeps the neighbor ratio <= 2.
BoundaryMesh bisect_1d(const BoundaryMesh& mesh, const MarkedSet& marked);

}  // namespace goafem
