// mesh.hpp -- tetrahedral meshes with the node bookkeeping required by the
// P2 / P1+bubble / P0 discretization triple: vertices, derived mid-edge nodes,
// per-element mid-volume nodes (implicit), and tagged boundary facets.
//
// Meshes are immutable after construction and safe for concurrent reads.
// Mid-edge node coordinates are always the arithmetic mean of their endpoint
// coordinates; files store vertices and tets only, edge bookkeeping is derived.
#pragma once

#include "gdfem/core.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace gdfem {

enum class TagKind { DirichletComponent, Neumann, Observation };

struct BoundaryTag {
  std::string name;
  TagKind kind = TagKind::Neumann;
};

struct BoundaryFacet {
  int tet = -1;
  int local_face = -1;
  int tag = -1;  // index into Mesh::tags
};

// Outward-oriented local faces of a positively oriented tet (v0,v1,v2,v3):
// face i is opposite vertex i.
inline constexpr std::array<std::array<int, 3>, 4> kTetFaces = {
    {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  // undirected vertex pair (vmin << 32 | vmax) -> global node id (>= #vertices)
  std::unordered_map<std::uint64_t, int> edge_nodes;
  std::vector<BoundaryFacet> boundary_facets;
  std::vector<BoundaryTag> tags;
  std::vector<Vec3> element_centroids;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_tets() const { return static_cast<int>(tets.size()); }
  int num_edges() const { return static_cast<int>(edge_nodes.size()); }
  int num_nodes() const { return num_vertices() + num_edges(); }  // P2 nodes

  static std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
  }

  int edge_node(int a, int b) const { return edge_nodes.at(edge_key(a, b)); }

  Vec3 node_coord(int node) const {
    if (node < num_vertices()) return vertices[node];
    return edge_node_coords_[node - num_vertices()];
  }

  std::array<Vec3, 4> tet_coords(int t) const {
    const auto& e = tets[t];
    return {vertices[e[0]], vertices[e[1]], vertices[e[2]], vertices[e[3]]};
  }

  // The 10 P2 nodes of a tet: its 4 vertices followed by the 6 edge nodes in
  // the local edge order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
  std::array<int, 10> element_nodes(int t) const {
    const auto& e = tets[t];
    std::array<int, 10> n;
    for (int i = 0; i < 4; ++i) n[i] = e[i];
    static constexpr std::array<std::array<int, 2>, 6> edges = {
        {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    for (int k = 0; k < 6; ++k)
      n[4 + k] = edge_node(e[edges[k][0]], e[edges[k][1]]);
    return n;
  }

  double tet_volume(int t) const {
    const auto c = tet_coords(t);
    Mat3 J;
    J.col(0) = c[1] - c[0];
    J.col(1) = c[2] - c[0];
    J.col(2) = c[3] - c[0];
    return J.determinant() / 6.0;
  }

  std::array<int, 3> facet_vertices(const BoundaryFacet& f) const {
    const auto& e = tets[f.tet];
    const auto& lf = kTetFaces[f.local_face];
    return {e[lf[0]], e[lf[1]], e[lf[2]]};
  }

  Vec3 facet_centroid(const BoundaryFacet& f) const {
    const auto v = facet_vertices(f);
    return (vertices[v[0]] + vertices[v[1]] + vertices[v[2]]) / 3.0;
  }

  int tag_index(const std::string& name) const {
    for (size_t i = 0; i < tags.size(); ++i)
      if (tags[i].name == name) return static_cast<int>(i);
    throw std::invalid_argument("unknown boundary tag: " + name);
  }

  // All P2 nodes (vertices and edge nodes) lying on facets with this tag.
  std::vector<int> nodes_on_tag(int tag) const {
    std::vector<char> seen(num_nodes(), 0);
    for (const auto& f : boundary_facets) {
      if (f.tag != tag) continue;
      const auto v = facet_vertices(f);
      for (int i = 0; i < 3; ++i) seen[v[i]] = 1;
      seen[edge_node(v[0], v[1])] = 1;
      seen[edge_node(v[1], v[2])] = 1;
      seen[edge_node(v[2], v[0])] = 1;
    }
    std::vector<int> out;
    for (int n = 0; n < num_nodes(); ++n)
      if (seen[n]) out.push_back(n);
    return out;
  }

  double total_volume() const {
    double v = 0.0;
    for (int t = 0; t < num_tets(); ++t) v += tet_volume(t);
    return v;
  }

  // filled by build_mesh; indexed by (node id - #vertices)
  std::vector<Vec3> edge_node_coords_;
};

// Assemble a Mesh from raw vertices and connectivity. Generators pass
// fix_orientation = true (tets are reordered to positive volume); importers
// pass false so that inverted input elements are reported, not repaired.
inline Mesh build_mesh(std::vector<Vec3> vertices,
                       std::vector<std::array<int, 4>> tets,
                       bool fix_orientation) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.tets = std::move(tets);

  for (size_t t = 0; t < m.tets.size(); ++t) {
    for (int v : m.tets[t])
      if (v < 0 || v >= m.num_vertices())
        throw OrientationError("tet references unknown vertex", t);
    const double vol = m.tet_volume(static_cast<int>(t));
    if (vol <= 0.0) {
      if (!fix_orientation)
        throw OrientationError("non-positive tet volume", t);
      std::swap(m.tets[t][2], m.tets[t][3]);
      if (m.tet_volume(static_cast<int>(t)) <= 0.0)
        throw OrientationError("degenerate tet", t);
    }
  }

  // edge nodes, numbered after the vertices in first-encounter order
  static constexpr std::array<std::array<int, 2>, 6> edges = {
      {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  for (const auto& e : m.tets) {
    for (const auto& ed : edges) {
      const auto key = Mesh::edge_key(e[ed[0]], e[ed[1]]);
      if (!m.edge_nodes.count(key)) {
        const int id = m.num_vertices() + static_cast<int>(m.edge_node_coords_.size());
        m.edge_nodes.emplace(key, id);
        m.edge_node_coords_.push_back(
            0.5 * (m.vertices[e[ed[0]]] + m.vertices[e[ed[1]]]));
      }
    }
  }

  // face incidence: interior faces shared by exactly two tets, boundary by one
  std::map<std::array<int, 3>, std::vector<std::pair<int, int>>> faces;
  for (int t = 0; t < m.num_tets(); ++t) {
    for (int lf = 0; lf < 4; ++lf) {
      const auto& e = m.tets[t];
      std::array<int, 3> key = {e[kTetFaces[lf][0]], e[kTetFaces[lf][1]],
                                e[kTetFaces[lf][2]]};
      std::sort(key.begin(), key.end());
      faces[key].emplace_back(t, lf);
    }
  }
  m.tags.push_back({"boundary", TagKind::Neumann});
  for (const auto& [key, owners] : faces) {
    if (owners.size() == 1) {
      m.boundary_facets.push_back({owners[0].first, owners[0].second, 0});
    } else if (owners.size() != 2) {
      throw Error("non-manifold mesh: face shared by " +
                  std::to_string(owners.size()) + " tets");
    }
  }

  m.element_centroids.resize(m.num_tets());
  for (int t = 0; t < m.num_tets(); ++t) {
    const auto c = m.tet_coords(t);
    m.element_centroids[t] = 0.25 * (c[0] + c[1] + c[2] + c[3]);
  }
  return m;
}

using FacetPredicate = std::function<bool(const std::array<Vec3, 3>&)>;

inline FacetPredicate facet_on_plane(int axis, double value, double tol) {
  return [=](const std::array<Vec3, 3>& v) {
    return std::abs(v[0][axis] - value) < tol &&
           std::abs(v[1][axis] - value) < tol &&
           std::abs(v[2][axis] - value) < tol;
  };
}

inline FacetPredicate facet_on_cylinder(double radius, double tol) {
  return [=](const std::array<Vec3, 3>& v) {
    for (int i = 0; i < 3; ++i)
      if (std::abs(std::hypot(v[i][0], v[i][1]) - radius) >= tol) return false;
    return true;
  };
}

// Re-tag all boundary facets. Every facet must match exactly one predicate.
inline Mesh classify_boundary(
    Mesh mesh,
    const std::vector<std::pair<FacetPredicate, BoundaryTag>>& predicates) {
  std::vector<BoundaryTag> tags;
  tags.reserve(predicates.size());
  for (const auto& [pred, tag] : predicates) {
    for (const auto& existing : tags)
      if (existing.name == tag.name)
        throw std::invalid_argument("duplicate boundary tag: " + tag.name);
    tags.push_back(tag);
  }
  for (auto& f : mesh.boundary_facets) {
    const auto v = f;
    const auto verts = mesh.facet_vertices(v);
    const std::array<Vec3, 3> coords = {mesh.vertices[verts[0]],
                                        mesh.vertices[verts[1]],
                                        mesh.vertices[verts[2]]};
    int match = -1;
    for (size_t p = 0; p < predicates.size(); ++p) {
      if (predicates[p].first(coords)) {
        if (match >= 0) {
          std::ostringstream os;
          const Vec3 c = mesh.facet_centroid(f);
          os << "boundary facet covered twice (tags '" << tags[match].name
             << "' and '" << tags[p].name << "') at centroid (" << c[0] << ", "
             << c[1] << ", " << c[2] << ")";
          throw ClassificationError(os.str());
        }
        match = static_cast<int>(p);
      }
    }
    if (match < 0) {
      std::ostringstream os;
      const Vec3 c = mesh.facet_centroid(f);
      os << "boundary facet uncovered at centroid (" << c[0] << ", " << c[1]
         << ", " << c[2] << ")";
      throw ClassificationError(os.str());
    }
    f.tag = match;
  }
  mesh.tags = std::move(tags);
  return mesh;
}

namespace detail {

// Conforming 5-tet split of the structured cell with corners c[dx][dy][dz];
// the split is mirrored on odd-parity cells so faces match across cells.
inline void split_cell_into_tets(const int c[2][2][2], bool even,
                                 std::vector<std::array<int, 4>>& tets) {
  const int v000 = c[0][0][0], v100 = c[1][0][0], v010 = c[0][1][0],
            v110 = c[1][1][0], v001 = c[0][0][1], v101 = c[1][0][1],
            v011 = c[0][1][1], v111 = c[1][1][1];
  if (even) {
    tets.push_back({v000, v110, v101, v011});  // central
    tets.push_back({v000, v100, v110, v101});
    tets.push_back({v000, v110, v010, v011});
    tets.push_back({v000, v101, v001, v011});
    tets.push_back({v110, v101, v011, v111});
  } else {
    tets.push_back({v100, v010, v001, v111});  // central
    tets.push_back({v100, v010, v000, v001});
    tets.push_back({v100, v110, v010, v111});
    tets.push_back({v100, v001, v101, v111});
    tets.push_back({v010, v011, v001, v111});
  }
}

}  // namespace detail

// Structured cube [0, edge_length]^3, n cells per axis, each cell split into
// 5 tets with alternating parity. n = 2^s gives (2^s+1)^3 vertices and
// 5 * 2^(3s) tets. Faces are tagged x0, xL, y0, yL, z0, zL.
inline Mesh generate_structured_cube(int subdivisions_per_axis,
                                     double edge_length) {
  const int n = subdivisions_per_axis;
  if (n <= 0)
    throw std::invalid_argument("subdivisions_per_axis must be positive");
  if (edge_length <= 0.0)
    throw std::invalid_argument("edge_length must be positive");

  const int nv1 = n + 1;
  auto vid = [nv1](int i, int j, int k) { return i + nv1 * (j + nv1 * k); };
  std::vector<Vec3> vertices(static_cast<size_t>(nv1) * nv1 * nv1);
  const double h = edge_length / n;
  for (int k = 0; k < nv1; ++k)
    for (int j = 0; j < nv1; ++j)
      for (int i = 0; i < nv1; ++i)
        vertices[vid(i, j, k)] = Vec3(i * h, j * h, k * h);

  std::vector<std::array<int, 4>> tets;
  tets.reserve(static_cast<size_t>(5) * n * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        int c[2][2][2];
        for (int dz = 0; dz < 2; ++dz)
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
              c[dx][dy][dz] = vid(i + dx, j + dy, k + dz);
        detail::split_cell_into_tets(c, (i + j + k) % 2 == 0, tets);
      }

  Mesh m = build_mesh(std::move(vertices), std::move(tets), true);
  const double L = edge_length, tol = 1e-9 * edge_length;
  return classify_boundary(
      std::move(m),
      {{facet_on_plane(0, 0.0, tol), {"x0", TagKind::DirichletComponent}},
       {facet_on_plane(0, L, tol), {"xL", TagKind::Neumann}},
       {facet_on_plane(1, 0.0, tol), {"y0", TagKind::DirichletComponent}},
       {facet_on_plane(1, L, tol), {"yL", TagKind::Observation}},
       {facet_on_plane(2, 0.0, tol), {"z0", TagKind::DirichletComponent}},
       {facet_on_plane(2, L, tol), {"zL", TagKind::Neumann}}});
}

// Quarter plate with a central hole: [0,L] x [0,L] x [0,H] minus the quarter
// cylinder of radius R about the Z axis. Transfinite block between the
// polygonally approximated arc and the outer square boundary, extruded in Z
// and split into tets. Tags: x0, y0, xL, yL, z0, zH, hole.
inline Mesh generate_quarter_plate_with_hole(double radius, double length,
                                             double thickness,
                                             int refinement) {
  if (radius >= length)
    throw std::invalid_argument("hole radius must be smaller than the plate length");
  if (radius <= 0.0 || length <= 0.0 || thickness <= 0.0)
    throw std::invalid_argument("plate dimensions must be positive");
  if (refinement < 0)
    throw std::invalid_argument("refinement must be non-negative");

  const double R = radius, L = length, H = thickness;
  const int scale = 1 << refinement;
  const int nt = 4 * scale;  // cells along the arc
  const int nr = 3 * scale;  // cells from hole to outer boundary
  // the benchmark fields vary weakly through the thickness; the layer count
  // grows at half the in-plane rate and the characteristic (in-plane) size
  // still halves per refinement step
  const int nz = std::max(1, scale / 2);

  auto outer = [L](double s) {
    return s <= 0.5 ? Vec3(L, 2.0 * s * L, 0.0)
                    : Vec3((2.0 - 2.0 * s) * L, L, 0.0);
  };
  auto vid = [nt, nr](int it, int ir, int iz) {
    return it + (nt + 1) * (ir + (nr + 1) * iz);
  };

  std::vector<Vec3> vertices(static_cast<size_t>(nt + 1) * (nr + 1) * (nz + 1));
  const double half_pi = 2.0 * std::atan(1.0);
  for (int iz = 0; iz <= nz; ++iz) {
    const double z = H * iz / nz;
    for (int ir = 0; ir <= nr; ++ir) {
      const double t = static_cast<double>(ir) / nr;
      for (int it = 0; it <= nt; ++it) {
        const double s = static_cast<double>(it) / nt;
        const double theta = half_pi * s;
        const Vec3 inner(R * std::cos(theta), R * std::sin(theta), 0.0);
        Vec3 p = (1.0 - t) * inner + t * outer(s);
        p[2] = z;
        vertices[vid(it, ir, iz)] = p;
      }
    }
  }

  std::vector<std::array<int, 4>> tets;
  tets.reserve(static_cast<size_t>(5) * nt * nr * nz);
  for (int iz = 0; iz < nz; ++iz)
    for (int ir = 0; ir < nr; ++ir)
      for (int it = 0; it < nt; ++it) {
        int c[2][2][2];
        for (int dz = 0; dz < 2; ++dz)
          for (int dr = 0; dr < 2; ++dr)
            for (int dt = 0; dt < 2; ++dt)
              c[dt][dr][dz] = vid(it + dt, ir + dr, iz + dz);
        detail::split_cell_into_tets(c, (it + ir + iz) % 2 == 0, tets);
      }

  Mesh m = build_mesh(std::move(vertices), std::move(tets), true);
  const double tol = 1e-9 * L;
  return classify_boundary(
      std::move(m),
      {{facet_on_cylinder(R, tol), {"hole", TagKind::Neumann}},
       {facet_on_plane(0, 0.0, tol), {"x0", TagKind::DirichletComponent}},
       {facet_on_plane(1, 0.0, tol), {"y0", TagKind::DirichletComponent}},
       {facet_on_plane(0, L, tol), {"xL", TagKind::Neumann}},
       {facet_on_plane(1, L, tol), {"yL", TagKind::Observation}},
       {facet_on_plane(2, 0.0, tol), {"z0", TagKind::DirichletComponent}},
       {facet_on_plane(2, H, tol), {"zH", TagKind::Neumann}}});
}

enum class MeshFormat { SimpleNodesElements, GmshAscii };

namespace detail {

struct LineReader {
  std::istream& in;
  long line = 0;

  bool next(std::string& out) {
    while (std::getline(in, out)) {
      ++line;
      // strip trailing CR from DOS files
      if (!out.empty() && out.back() == '\r') out.pop_back();
      if (!out.empty()) return true;
    }
    return false;
  }
};

inline Mesh import_simple(std::istream& in) {
  LineReader r{in};
  std::string line, word;

  if (!r.next(line)) throw FormatError("empty mesh file", r.line);
  std::istringstream hs(line);
  long n = -1;
  if (!(hs >> word >> n) || word != "nodes" || n < 0)
    throw FormatError("expected header 'nodes N'", r.line);

  std::vector<Vec3> vertices(n);
  for (long i = 0; i < n; ++i) {
    if (!r.next(line)) throw FormatError("unexpected end of node list", r.line);
    std::istringstream ls(line);
    long id;
    double x, y, z;
    if (!(ls >> id >> x >> y >> z) || id != i + 1)
      throw FormatError("expected node line 'id x y z' with 1-based ids",
                        r.line);
    vertices[i] = Vec3(x, y, z);
  }

  if (!r.next(line)) throw FormatError("missing 'tets M' header", r.line);
  std::istringstream ts(line);
  long m = -1;
  if (!(ts >> word >> m) || word != "tets" || m < 0)
    throw FormatError("expected header 'tets M'", r.line);

  std::vector<std::array<int, 4>> tets(m);
  for (long i = 0; i < m; ++i) {
    if (!r.next(line)) throw FormatError("unexpected end of tet list", r.line);
    std::istringstream ls(line);
    long id, v1, v2, v3, v4;
    if (!(ls >> id >> v1 >> v2 >> v3 >> v4) || id != i + 1)
      throw FormatError("expected tet line 'id v1 v2 v3 v4' with 1-based ids",
                        r.line);
    for (long v : {v1, v2, v3, v4})
      if (v < 1 || v > n)
        throw FormatError("tet references node outside 1..N", r.line);
    tets[i] = {static_cast<int>(v1 - 1), static_cast<int>(v2 - 1),
               static_cast<int>(v3 - 1), static_cast<int>(v4 - 1)};
  }
  return build_mesh(std::move(vertices), std::move(tets), false);
}

// Minimal Gmsh ASCII v4 subset: $Nodes and $Elements with 4-node tetrahedra
// (type 4). Lower-dimensional element blocks (points, lines, triangles) are
// skipped; anything else is an error. Other sections are ignored.
inline Mesh import_gmsh(std::istream& in) {
  LineReader r{in};
  std::string line;
  std::unordered_map<long, int> node_index;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  bool saw_nodes = false, saw_elements = false;

  while (r.next(line)) {
    if (line == "$MeshFormat") {
      if (!r.next(line)) throw FormatError("truncated $MeshFormat", r.line);
      std::istringstream vs(line);
      double version;
      if (!(vs >> version) || version < 4.0 || version >= 5.0)
        throw FormatError("unsupported Gmsh format version (need 4.x)", r.line);
      continue;
    }
    if (line == "$Nodes") {
      saw_nodes = true;
      if (!r.next(line)) throw FormatError("truncated $Nodes", r.line);
      std::istringstream hs(line);
      long num_blocks, num_nodes, min_tag, max_tag;
      if (!(hs >> num_blocks >> num_nodes >> min_tag >> max_tag))
        throw FormatError("bad $Nodes header", r.line);
      vertices.reserve(num_nodes);
      for (long b = 0; b < num_blocks; ++b) {
        if (!r.next(line)) throw FormatError("truncated node block", r.line);
        std::istringstream bs(line);
        long dim, tag, parametric, count;
        if (!(bs >> dim >> tag >> parametric >> count))
          throw FormatError("bad node block header", r.line);
        std::vector<long> ids(count);
        for (long i = 0; i < count; ++i) {
          if (!r.next(line)) throw FormatError("truncated node tags", r.line);
          std::istringstream is(line);
          if (!(is >> ids[i])) throw FormatError("bad node tag", r.line);
        }
        for (long i = 0; i < count; ++i) {
          if (!r.next(line)) throw FormatError("truncated node coords", r.line);
          std::istringstream cs(line);
          double x, y, z;
          if (!(cs >> x >> y >> z))
            throw FormatError("bad node coordinates", r.line);
          node_index[ids[i]] = static_cast<int>(vertices.size());
          vertices.emplace_back(x, y, z);
        }
      }
      continue;
    }
    if (line == "$Elements") {
      saw_elements = true;
      if (!r.next(line)) throw FormatError("truncated $Elements", r.line);
      std::istringstream hs(line);
      long num_blocks, num_elems, min_tag, max_tag;
      if (!(hs >> num_blocks >> num_elems >> min_tag >> max_tag))
        throw FormatError("bad $Elements header", r.line);
      for (long b = 0; b < num_blocks; ++b) {
        if (!r.next(line)) throw FormatError("truncated element block", r.line);
        std::istringstream bs(line);
        long dim, tag, type, count;
        if (!(bs >> dim >> tag >> type >> count))
          throw FormatError("bad element block header", r.line);
        for (long i = 0; i < count; ++i) {
          if (!r.next(line)) throw FormatError("truncated element list", r.line);
          if (type == 4) {
            std::istringstream es(line);
            long id, a, bb, c, d;
            if (!(es >> id >> a >> bb >> c >> d))
              throw FormatError("bad tetrahedron line", r.line);
            std::array<int, 4> tet;
            int k = 0;
            for (long v : {a, bb, c, d}) {
              auto it = node_index.find(v);
              if (it == node_index.end())
                throw FormatError("element references unknown node", r.line);
              tet[k++] = it->second;
            }
            tets.push_back(tet);
          } else if (type != 15 && type != 1 && type != 2) {
            throw FormatError("unsupported element type " + std::to_string(type),
                              r.line);
          }
        }
      }
      continue;
    }
  }
  if (!saw_nodes || !saw_elements)
    throw FormatError("missing $Nodes or $Elements section", r.line);
  if (tets.empty()) throw FormatError("no tetrahedra in file", r.line);
  return build_mesh(std::move(vertices), std::move(tets), false);
}

}  // namespace detail

inline Mesh import_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file: " + path);
  switch (format) {
    case MeshFormat::SimpleNodesElements:
      return detail::import_simple(in);
    case MeshFormat::GmshAscii:
      return detail::import_gmsh(in);
  }
  throw std::invalid_argument("unknown mesh format");
}

inline void write_simple_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);
  out.precision(17);
  out << "nodes " << mesh.num_vertices() << "\n";
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    const Vec3& v = mesh.vertices[i];
    out << i + 1 << " " << v[0] << " " << v[1] << " " << v[2] << "\n";
  }
  out << "tets " << mesh.num_tets() << "\n";
  for (int t = 0; t < mesh.num_tets(); ++t) {
    const auto& e = mesh.tets[t];
    out << t + 1 << " " << e[0] + 1 << " " << e[1] + 1 << " " << e[2] + 1
        << " " << e[3] + 1 << "\n";
  }
  if (!out) throw Error("failed writing mesh file: " + path);
}

}  // namespace gdfem
