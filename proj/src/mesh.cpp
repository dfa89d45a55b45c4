#include "meshconv/mesh.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace meshconv {

double degeneracy_epsilon(const Mesh& m) {
  if (m.vertices.empty()) return 0.0;
  Vec3 lo = m.vertices.front();
  Vec3 hi = lo;
  for (const Vec3& v : m.vertices) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], v[k]);
      hi[k] = std::max(hi[k], v[k]);
    }
  }
  const Vec3 diag = hi - lo;
  return 1e-12 * dot(diag, diag);
}

double face_area(const Mesh& m, FaceId f) {
  const Face& t = m.faces[f];
  const Vec3 a = m.vertices[t[0]];
  return 0.5 * norm(cross(m.vertices[t[1]] - a, m.vertices[t[2]] - a));
}

ValidationReport validate_mesh(const Mesh& m) {
  ValidationReport report;
  const auto nv = static_cast<VertexId>(m.vertices.size());

  // Directed half-edge occurrences per undirected edge.
  struct EdgeUse {
    int count = 0;
    int forward = 0;  // traversals from the smaller to the larger vertex
  };
  std::map<EdgeKey, EdgeUse> edges;
  std::set<std::array<VertexId, 3>> seen_faces;

  for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
    const Face& t = m.faces[f];
    const bool in_range = std::all_of(t.begin(), t.end(), [&](VertexId v) { return v >= 0 && v < nv; });
    if (!in_range || t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      report.invalid_faces.push_back(f);
      continue;
    }
    std::array<VertexId, 3> sorted = t;
    std::sort(sorted.begin(), sorted.end());
    if (!seen_faces.insert(sorted).second) report.duplicate_faces.push_back(f);
    for (int i = 0; i < 3; ++i) {
      const VertexId a = t[i];
      const VertexId b = t[(i + 1) % 3];
      EdgeUse& use = edges[make_edge_key(a, b)];
      ++use.count;
      if (a < b) ++use.forward;
    }
  }

  for (const auto& [key, use] : edges) {
    if (use.count == 1) {
      ++report.border_edges;
    } else if (use.count == 2) {
      if (use.forward != 1) report.oriented = false;
    } else {
      report.non_manifold_edges.push_back(key);
    }
  }

  // A manifold vertex has its incident faces forming one fan: the link edges
  // (opposite each face) chain into a single path or cycle.
  if (report.invalid_faces.empty()) {
    std::vector<std::vector<FaceId>> incident(m.vertices.size());
    for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
      for (VertexId v : m.faces[f]) incident[v].push_back(f);
    }
    for (VertexId v = 0; v < nv; ++v) {
      const auto& fan = incident[v];
      if (fan.empty()) continue;
      // Union-find over fan faces joined when they share an edge through v.
      std::vector<std::size_t> parent(fan.size());
      std::iota(parent.begin(), parent.end(), 0);
      auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
      };
      std::map<VertexId, std::size_t> first_with;
      for (std::size_t i = 0; i < fan.size(); ++i) {
        for (VertexId u : m.faces[fan[i]]) {
          if (u == v) continue;
          auto [it, inserted] = first_with.emplace(u, i);
          if (!inserted) parent[find(i)] = find(it->second);
        }
      }
      std::size_t roots = 0;
      for (std::size_t i = 0; i < fan.size(); ++i) roots += (find(i) == i);
      if (roots > 1) report.non_manifold_vertices.push_back(v);
    }
  }

  report.manifold = report.non_manifold_edges.empty() && report.non_manifold_vertices.empty() &&
                    report.duplicate_faces.empty();

  if (report.invalid_faces.empty()) {
    const double eps = degeneracy_epsilon(m);
    for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
      if (!(face_area(m, f) > eps)) report.degenerate_faces.push_back(f);
    }
  }
  return report;
}

Mesh normalize_mesh(const Mesh& m) {
  if (m.vertices.empty()) throw MeshError("cannot normalize a mesh without vertices");
  Vec3 center;
  for (const Vec3& v : m.vertices) center += v;
  center = center / static_cast<double>(m.vertices.size());

  Mesh out = m;
  double radius = 0.0;
  for (Vec3& v : out.vertices) {
    v = v - center;
    radius = std::max(radius, norm(v));
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw MeshError("cannot normalize mesh: all vertices coincide");
  }
  for (Vec3& v : out.vertices) v = v / radius;
  return out;
}

std::size_t count_edges(const Mesh& m) {
  std::set<EdgeKey> edges;
  for (const Face& t : m.faces) {
    for (int i = 0; i < 3; ++i) edges.insert(make_edge_key(t[i], t[(i + 1) % 3]));
  }
  return edges.size();
}

long euler_characteristic(const Mesh& m) {
  return static_cast<long>(m.vertices.size()) - static_cast<long>(count_edges(m)) +
         static_cast<long>(m.faces.size());
}

std::vector<std::size_t> component_face_counts(const Mesh& m) {
  const std::size_t nf = m.faces.size();
  std::vector<std::size_t> parent(nf);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::map<EdgeKey, std::size_t> owner;
  for (std::size_t f = 0; f < nf; ++f) {
    const Face& t = m.faces[f];
    for (int i = 0; i < 3; ++i) {
      auto [it, inserted] = owner.emplace(make_edge_key(t[i], t[(i + 1) % 3]), f);
      if (!inserted) parent[find(f)] = find(it->second);
    }
  }
  std::vector<std::size_t> size(nf, 0);
  for (std::size_t f = 0; f < nf; ++f) ++size[find(f)];
  std::vector<std::size_t> out(nf);
  for (std::size_t f = 0; f < nf; ++f) out[f] = size[find(f)];
  return out;
}

}  // namespace meshconv
