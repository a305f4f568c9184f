#include "goafem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace goafem {

namespace {

std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::uint64_t coord_key(const Vec2& p) {
  std::uint64_t bx, by;
  std::memcpy(&bx, &p.x, 8);
  std::memcpy(&by, &p.y, 8);
  return bx * 0x9e3779b97f4a7c15ull ^ (by + 0x7f4a7c159e3779b9ull + (bx << 6) + (bx >> 2));
}

}  // namespace

// ---------------------------------------------------------------------------
// MarkedSet

MarkedSet MarkedSet::of(std::vector<std::int32_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  MarkedSet m;
  m.idx = std::move(v);
  return m;
}

bool MarkedSet::contains(std::int32_t i) const {
  return std::binary_search(idx.begin(), idx.end(), i);
}

// ---------------------------------------------------------------------------
// TreePath

TreePath TreePath::child(int bit) const {
  if (depth >= 128) throw std::logic_error("TreePath: refinement depth exceeds 128");
  TreePath c = *this;
  c.depth = depth + 1;
  if (bit) {
    int pos = 127 - depth;
    if (pos >= 64)
      c.hi |= (1ull << (pos - 64));
    else
      c.lo |= (1ull << pos);
  }
  return c;
}

bool TreePath::bit_at(int k) const {
  int pos = 127 - k;
  if (pos >= 64) return (hi >> (pos - 64)) & 1ull;
  return (lo >> pos) & 1ull;
}

bool TreePath::ancestor_of(const TreePath& other) const {
  if (depth >= other.depth) return false;
  int k = depth;
  std::uint64_t mh, ml;
  if (k == 0) {
    mh = 0;
    ml = 0;
  } else if (k <= 64) {
    mh = (k == 64) ? ~0ull : (~0ull << (64 - k));
    ml = 0;
  } else {
    mh = ~0ull;
    ml = ~0ull << (128 - k);
  }
  return (other.hi & mh) == hi && (other.lo & ml) == lo;
}

bool path_less(const TreePath& a, const TreePath& b) {
  if (a.hi != b.hi) return a.hi < b.hi;
  if (a.lo != b.lo) return a.lo < b.lo;
  return a.depth < b.depth;
}

// ---------------------------------------------------------------------------
// Replay: build a canonical mesh from per-root leaf path sets.

namespace {

struct ReplayState {
  std::vector<Vec2> verts;
  std::vector<Triangle> tris;
  std::unordered_map<std::uint64_t, std::int32_t> midpoint;  // edge key -> vertex id
  std::unordered_map<std::uint64_t, std::int32_t> label;     // edge key -> boundary label

  std::int32_t get_midpoint(std::int32_t a, std::int32_t b) {
    std::uint64_t key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 m = (verts[a] + verts[b]) * 0.5;
    std::int32_t id = static_cast<std::int32_t>(verts.size());
    verts.push_back(m);
    midpoint.emplace(key, id);
    auto lit = label.find(key);
    if (lit != label.end()) {
      label.emplace(edge_key(a, id), lit->second);
      label.emplace(edge_key(id, b), lit->second);
    }
    return id;
  }
};

void descend(ReplayState& st, std::int32_t root, const std::array<std::int32_t, 3>& tri,
             const TreePath& path, const TreePath* first, const TreePath* last) {
  if (first == last) throw std::logic_error("replay: subtree without leaves");
  if (last - first == 1 && *first == path) {
    st.tris.push_back(Triangle{tri, root, path.depth, path});
    return;
  }
  if (*first == path)
    throw std::logic_error("replay: leaf set contains an ancestor of another leaf");
  std::int32_t m = st.get_midpoint(tri[0], tri[1]);
  const TreePath* split = std::partition_point(
      first, last, [&](const TreePath& p) { return !p.bit_at(path.depth); });
  descend(st, root, {tri[2], tri[0], m}, path.child(0), first, split);
  descend(st, root, {tri[1], tri[2], m}, path.child(1), split, last);
}

}  // namespace

Mesh2 replay_leaves(const std::shared_ptr<const Mesh2::RootData>& root,
                    const std::vector<std::vector<TreePath>>& leaves) {
  ReplayState st;
  st.verts = root->vertices;
  for (const auto& be : root->boundary_edges) st.label.emplace(edge_key(be[0], be[1]), be[2]);
  for (std::size_t r = 0; r < root->triangles.size(); ++r) {
    const auto& lv = leaves[r];
    descend(st, static_cast<std::int32_t>(r), root->triangles[r], TreePath{}, lv.data(),
            lv.data() + lv.size());
  }
  Mesh2 mesh;
  mesh.verts_ = std::move(st.verts);
  mesh.tris_ = std::move(st.tris);
  mesh.root_ = root;
  // Hand the propagated boundary labels to the connectivity build.
  std::unordered_map<std::uint64_t, std::int32_t> labels = std::move(st.label);
  mesh.build_connectivity();
  for (std::int64_t e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.edge_on_boundary(static_cast<std::int32_t>(e))) continue;
    auto it = labels.find(edge_key(mesh.edges_[e][0], mesh.edges_[e][1]));
    if (it == labels.end())
      throw std::logic_error("mesh: boundary edge without inherited label");
    mesh.edge_label_[e] = it->second;
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// Mesh2

void Mesh2::build_connectivity() {
  edges_.clear();
  tri_edges_.assign(tris_.size(), {-1, -1, -1});
  edge_tris_.clear();
  std::unordered_map<std::uint64_t, std::int32_t> edge_id;
  edge_id.reserve(tris_.size() * 2);
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    const auto& v = tris_[t].v;
    for (int k = 0; k < 3; ++k) {
      std::int32_t a = v[k], b = v[(k + 1) % 3];
      std::uint64_t key = edge_key(a, b);
      auto it = edge_id.find(key);
      std::int32_t e;
      if (it == edge_id.end()) {
        e = static_cast<std::int32_t>(edges_.size());
        edge_id.emplace(key, e);
        edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_tris_.push_back({static_cast<std::int32_t>(t), -1});
      } else {
        e = it->second;
        if (edge_tris_[e][1] != -1)
          throw std::logic_error("mesh: edge adjacent to more than two triangles");
        edge_tris_[e][1] = static_cast<std::int32_t>(t);
      }
      tri_edges_[t][k] = e;
    }
  }
  edge_label_.assign(edges_.size(), -1);
}

Mesh2 Mesh2::from_root(std::vector<Vec2> vertices,
                       std::vector<std::array<std::int32_t, 3>> triangles,
                       std::vector<std::array<std::int32_t, 3>> boundary_labels) {
  auto root = std::make_shared<RootData>();
  root->vertices = std::move(vertices);
  root->triangles.resize(triangles.size());
  const auto& vs = root->vertices;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    auto tri = triangles[t];
    for (int k = 0; k < 3; ++k)
      if (tri[k] < 0 || tri[k] >= static_cast<std::int32_t>(vs.size()))
        throw std::invalid_argument("from_root: vertex index out of range");
    if (!(signed_area(vs[tri[0]], vs[tri[1]], vs[tri[2]]) > 0.0))
      throw std::invalid_argument("from_root: triangle not positively oriented");
    // Rotate so the refinement edge (longest; ties by lowest opposite vertex
    // index) comes first.
    double len2[3];
    for (int k = 0; k < 3; ++k) len2[k] = norm2(vs[tri[(k + 1) % 3]] - vs[tri[k]]);
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (len2[k] > len2[best] ||
          (len2[k] == len2[best] && tri[(k + 2) % 3] < tri[(best + 2) % 3]))
        best = k;
    }
    root->triangles[t] = {tri[best], tri[(best + 1) % 3], tri[(best + 2) % 3]};
  }

  // Boundary labels: explicit if given, otherwise enumerate boundary edges in
  // canonical traversal order.
  if (!boundary_labels.empty()) {
    root->boundary_edges = std::move(boundary_labels);
  } else {
    std::unordered_map<std::uint64_t, int> use_count;
    for (const auto& tri : root->triangles)
      for (int k = 0; k < 3; ++k) ++use_count[edge_key(tri[k], tri[(k + 1) % 3])];
    std::int32_t next_label = 0;
    std::unordered_map<std::uint64_t, bool> seen;
    for (const auto& tri : root->triangles) {
      for (int k = 0; k < 3; ++k) {
        std::int32_t a = tri[k], b = tri[(k + 1) % 3];
        std::uint64_t key = edge_key(a, b);
        if (use_count[key] == 1 && !seen[key]) {
          seen[key] = true;
          root->boundary_edges.push_back({a, b, next_label++});
        }
      }
    }
  }

  std::vector<std::vector<TreePath>> leaves(root->triangles.size(), {TreePath{}});
  return replay_leaves(std::static_pointer_cast<const RootData>(root), leaves);
}

double Mesh2::area(std::int32_t t) const {
  const auto& v = tris_[t].v;
  return signed_area(verts_[v[0]], verts_[v[1]], verts_[v[2]]);
}

Vec2 Mesh2::centroid(std::int32_t t) const {
  const auto& v = tris_[t].v;
  return (verts_[v[0]] + verts_[v[1]] + verts_[v[2]]) / 3.0;
}

bool Mesh2::same_root(const Mesh2& other) const {
  if (root_ == other.root_) return true;
  if (!root_ || !other.root_) return false;
  return root_->triangles == other.root_->triangles &&
         root_->vertices.size() == other.root_->vertices.size();
}

std::string Mesh2::dump() const {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "vertices %lld triangles %lld\n",
                static_cast<long long>(num_vertices()), static_cast<long long>(num_triangles()));
  out += buf;
  for (const auto& p : verts_) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out += buf;
  }
  for (const auto& t : tris_) {
    std::snprintf(buf, sizeof buf, "%d %d %d 0 %d\n", t.v[0], t.v[1], t.v[2], t.gen);
    out += buf;
  }
  return out;
}

void Mesh2::audit() const {
  double total = 0.0;
  for (std::int64_t t = 0; t < num_triangles(); ++t) {
    double a = area(static_cast<std::int32_t>(t));
    if (!(a > 0.0)) throw std::logic_error("audit: non-positive triangle area");
    total += a;
    const auto& v = tris_[t].v;
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw std::logic_error("audit: degenerate triangle");
  }
  double root_total = 0.0;
  for (const auto& tri : root_->triangles)
    root_total += signed_area(root_->vertices[tri[0]], root_->vertices[tri[1]],
                              root_->vertices[tri[2]]);
  if (std::abs(total - root_total) > 1e-12 * root_total)
    throw std::logic_error("audit: total area not preserved");
  // Two-manifold edge use and Euler characteristic of a disc.
  for (std::int64_t e = 0; e < num_edges(); ++e) {
    if (edge_tris_[e][0] < 0) throw std::logic_error("audit: orphan edge");
    if (edge_on_boundary(static_cast<std::int32_t>(e)) && edge_label_[e] < 0)
      throw std::logic_error("audit: unlabeled boundary edge");
  }
  std::int64_t euler = num_vertices() - num_edges() + num_triangles();
  if (euler != 1) throw std::logic_error("audit: Euler characteristic violated");
  // Hanging midpoints: a vertex must never sit at the exact midpoint of an
  // existing edge (bisection only ever creates midpoints).
  std::unordered_map<std::uint64_t, Vec2> at_coord;
  at_coord.reserve(verts_.size() * 2);
  for (std::size_t i = 0; i < verts_.size(); ++i) at_coord.emplace(coord_key(verts_[i]), verts_[i]);
  for (const auto& e : edges_) {
    Vec2 m = (verts_[e[0]] + verts_[e[1]]) * 0.5;
    auto it = at_coord.find(coord_key(m));
    if (it != at_coord.end() && it->second.x == m.x && it->second.y == m.y)
      throw std::logic_error("audit: hanging node at edge midpoint");
  }
}

std::vector<double> element_size(const Mesh2& mesh) {
  std::vector<double> h(mesh.num_triangles());
  for (std::int64_t t = 0; t < mesh.num_triangles(); ++t)
    h[t] = std::sqrt(mesh.area(static_cast<std::int32_t>(t)));
  return h;
}

// ---------------------------------------------------------------------------
// Refinement

Mesh2 nvb_refine(const Mesh2& mesh, const MarkedSet& marked) {
  const std::int64_t n = mesh.num_triangles();
  for (std::int32_t i : marked.idx)
    if (i < 0 || i >= n) throw std::invalid_argument("nvb_refine: marked index out of range");

  // Edge-marking closure: the refinement edge of every marked element is
  // marked; any element with a marked edge gets its own refinement edge
  // marked; iterate to a fixpoint.
  std::vector<char> edge_marked(mesh.num_edges(), 0);
  for (std::int32_t t : marked.idx) edge_marked[mesh.tri_edges(t)[0]] = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::int64_t t = 0; t < n; ++t) {
      const auto& te = mesh.tri_edges(static_cast<std::int32_t>(t));
      if (!edge_marked[te[0]] && (edge_marked[te[1]] || edge_marked[te[2]])) {
        edge_marked[te[0]] = 1;
        changed = true;
      }
    }
  }

  const auto& root = mesh.root_data();
  std::vector<std::vector<TreePath>> leaves(root->triangles.size());
  std::int64_t split_count = 0;
  for (std::int64_t t = 0; t < n; ++t) {
    const Triangle& tri = mesh.tri(static_cast<std::int32_t>(t));
    const auto& te = mesh.tri_edges(static_cast<std::int32_t>(t));
    auto& lv = leaves[tri.root];
    bool f0 = edge_marked[te[0]], f1 = edge_marked[te[1]], f2 = edge_marked[te[2]];
    if (!f0) {
      if (f1 || f2) throw std::logic_error("nvb_refine: closure fixpoint violated");
      lv.push_back(tri.path);
      continue;
    }
    ++split_count;
    TreePath c0 = tri.path.child(0), c1 = tri.path.child(1);
    // Child 0 = (peak, v0, m) owns old edge 2 as its refinement edge;
    // child 1 = (v1, peak, m) owns old edge 1.
    if (f2) {
      lv.push_back(c0.child(0));
      lv.push_back(c0.child(1));
    } else {
      lv.push_back(c0);
    }
    if (f1) {
      lv.push_back(c1.child(0));
      lv.push_back(c1.child(1));
    } else {
      lv.push_back(c1);
    }
  }
  for (auto& lv : leaves)
    if (!std::is_sorted(lv.begin(), lv.end(), path_less))
      throw std::logic_error("nvb_refine: leaf emission order broken");

  Mesh2 out = replay_leaves(root, leaves);
  if (split_count + n > out.num_triangles())
    throw std::logic_error("nvb_refine: refinement cardinality bound violated");
  // Every marked element must have been bisected, i.e. must not survive.
  const auto& new_tris = out.triangles();
  for (std::int32_t t : marked.idx) {
    const Triangle& old_tri = mesh.tri(t);
    auto it = std::lower_bound(new_tris.begin(), new_tris.end(), old_tri,
                               [](const Triangle& a, const Triangle& b) {
                                 if (a.root != b.root) return a.root < b.root;
                                 return path_less(a.path, b.path);
                               });
    if (it != new_tris.end() && it->root == old_tri.root && it->path == old_tri.path)
      throw std::logic_error("nvb_refine: marked element survived refinement");
  }
  return out;
}

Mesh2 overlay(const Mesh2& a, const Mesh2& b) {
  if (!a.same_root(b)) throw std::invalid_argument("overlay: meshes have different initial mesh");
  const auto& root = a.root_data();
  const std::size_t nroots = root->triangles.size();
  std::vector<std::vector<TreePath>> la(nroots), lb(nroots), merged(nroots);
  for (const Triangle& t : a.triangles()) la[t.root].push_back(t.path);
  for (const Triangle& t : b.triangles()) lb[t.root].push_back(t.path);
  for (std::size_t r = 0; r < nroots; ++r) {
    std::vector<TreePath> all;
    all.reserve(la[r].size() + lb[r].size());
    std::merge(la[r].begin(), la[r].end(), lb[r].begin(), lb[r].end(), std::back_inserter(all),
               path_less);
    auto& out = merged[r];
    for (const TreePath& p : all) {
      if (!out.empty() && out.back() == p) continue;  // identical leaf in both
      while (!out.empty() && out.back().ancestor_of(p)) out.pop_back();
      out.push_back(p);
    }
  }
  Mesh2 result = replay_leaves(root, merged);
  if (result.num_triangles() >
      a.num_triangles() + b.num_triangles() - static_cast<std::int64_t>(nroots))
    throw std::logic_error("overlay: cardinality bound violated");
  return result;
}

// ---------------------------------------------------------------------------
// BoundaryMesh

BoundaryMesh BoundaryMesh::polygon(const std::vector<Vec2>& corners, double max_h) {
  if (corners.size() < 3) throw std::invalid_argument("polygon: need at least 3 corners");
  double twice_area = 0.0;
  for (std::size_t i = 0; i < corners.size(); ++i)
    twice_area += cross(corners[i], corners[(i + 1) % corners.size()]);
  if (!(twice_area > 0.0)) throw std::invalid_argument("polygon: corners must be ccw");

  BoundaryMesh m;
  double s = 0.0;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const Vec2& a = corners[i];
    const Vec2& b = corners[(i + 1) % corners.size()];
    double len = norm(b - a);
    int parts = std::max(1, static_cast<int>(std::ceil(len / max_h - 1e-12)));
    double h = len / parts;
    for (int k = 0; k < parts; ++k) {
      std::int32_t na = static_cast<std::int32_t>(m.nodes_.size());
      Vec2 pa = (k == 0) ? a : a + (b - a) * (static_cast<double>(k) / parts);
      m.nodes_.push_back(pa);
      m.node_s_.push_back(s + k * h);
      Panel p;
      p.a = na;
      p.b = na + 1;  // fixed up for the wrap below
      p.root = static_cast<std::int32_t>(m.panels_.size());
      p.gen = 0;
      p.uid = static_cast<std::int64_t>(m.panels_.size());
      p.h = h;
      p.s0 = s + k * h;
      m.panels_.push_back(p);
    }
    s += len;
  }
  m.panels_.back().b = 0;
  m.corners_ = corners;
  m.total_length_ = s;
  m.next_uid_ = static_cast<std::int64_t>(m.panels_.size());
  return m;
}

Vec2 BoundaryMesh::point(std::int32_t p, double t) const {
  const Panel& pl = panels_[p];
  return nodes_[pl.a] + (nodes_[pl.b] - nodes_[pl.a]) * t;
}

Vec2 BoundaryMesh::tangent(std::int32_t p) const {
  const Panel& pl = panels_[p];
  Vec2 d = nodes_[pl.b] - nodes_[pl.a];
  return d / norm(d);
}

Vec2 BoundaryMesh::normal(std::int32_t p) const {
  Vec2 t = tangent(p);
  return {t.y, -t.x};  // outward for a ccw curve
}

std::int32_t BoundaryMesh::prev_panel(std::int32_t p) const {
  return p == 0 ? static_cast<std::int32_t>(panels_.size()) - 1 : p - 1;
}

std::int32_t BoundaryMesh::next_panel(std::int32_t p) const {
  return p + 1 == static_cast<std::int32_t>(panels_.size()) ? 0 : p + 1;
}

void BoundaryMesh::audit() const {
  const std::int64_t n = num_panels();
  if (n < 3) throw std::logic_error("boundary audit: too few panels");
  for (std::int64_t i = 0; i < n; ++i) {
    const Panel& p = panels_[i];
    const Panel& q = panels_[(i + 1) % n];
    if (p.b != q.a) throw std::logic_error("boundary audit: chain broken");
    if (!(p.h > 0.0)) throw std::logic_error("boundary audit: non-positive panel length");
    double chord = norm(nodes_[p.b] - nodes_[p.a]);
    // The recomputed chord carries rounding noise of order eps * |coordinate|,
    // which exceeds any relative tolerance once grading drives h toward the
    // coordinate ulp; genuine bookkeeping corruption shows up at O(h) or
    // larger, so an absolute eps-scale slack keeps the check meaningful.
    const double coord_scale = norm(nodes_[p.a]) + norm(nodes_[p.b]) + 1.0;
    if (std::abs(chord - p.h) >
        1e-9 * p.h + 16.0 * std::numeric_limits<double>::epsilon() * coord_scale)
      throw std::logic_error("boundary audit: arclength/chord mismatch");
    if (std::abs(node_s_[p.a] - p.s0) > 1e-12 * std::max(1.0, total_length_))
      throw std::logic_error("boundary audit: arclength bookkeeping broken");
    double ratio = p.h / q.h;
    if (ratio < 1.0) ratio = 1.0 / ratio;
    if (ratio > 2.0 * (1.0 + 1e-9))
      throw std::logic_error("boundary audit: neighbor length ratio exceeds 2");
  }
}

std::vector<double> element_size(const BoundaryMesh& mesh) {
  std::vector<double> h(mesh.num_panels());
  for (std::int64_t i = 0; i < mesh.num_panels(); ++i) h[i] = mesh.panel(static_cast<std::int32_t>(i)).h;
  return h;
}

BoundaryMesh bisect_1d(const BoundaryMesh& mesh, const MarkedSet& marked) {
  const std::int64_t n = mesh.num_panels();
  for (std::int32_t i : marked.idx)
    if (i < 0 || i >= n) throw std::invalid_argument("bisect_1d: marked index out of range");

  std::vector<char> mark(n, 0);
  for (std::int32_t i : marked.idx) mark[i] = 1;
  // Closure: a marked panel marks any strictly longer neighbor.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::int64_t i = 0; i < n; ++i) {
      if (!mark[i]) continue;
      double h = mesh.panel(static_cast<std::int32_t>(i)).h;
      for (std::int32_t nb : {mesh.prev_panel(static_cast<std::int32_t>(i)),
                              mesh.next_panel(static_cast<std::int32_t>(i))}) {
        if (!mark[nb] && mesh.panel(nb).h > h * (1.0 + 1e-12)) {
          mark[nb] = 1;
          changed = true;
        }
      }
    }
  }

  BoundaryMesh out;
  out.total_length_ = mesh.total_length_;
  out.next_uid_ = mesh.next_uid_;
  out.nodes_ = mesh.nodes_;
  out.node_s_ = mesh.node_s_;
  out.corners_ = mesh.corners_;
  out.panels_.reserve(n + std::count(mark.begin(), mark.end(), char(1)));
  for (std::int64_t i = 0; i < n; ++i) {
    const Panel& p = mesh.panels_[i];
    if (!mark[i]) {
      Panel q = p;
      q.a = p.a;
      q.b = p.b;
      out.panels_.push_back(q);
      continue;
    }
    std::int32_t mid = static_cast<std::int32_t>(out.nodes_.size());
    out.nodes_.push_back((mesh.nodes_[p.a] + mesh.nodes_[p.b]) * 0.5);
    out.node_s_.push_back(p.s0 + p.h * 0.5);
    Panel c0 = p, c1 = p;
    c0.b = mid;
    c0.gen = p.gen + 1;
    c0.uid = out.next_uid_++;
    c0.h = p.h * 0.5;
    c1.a = mid;
    c1.gen = p.gen + 1;
    c1.uid = out.next_uid_++;
    c1.h = p.h * 0.5;
    c1.s0 = p.s0 + p.h * 0.5;
    out.panels_.push_back(c0);
    out.panels_.push_back(c1);
  }
  return out;
}

}  // namespace goafem
