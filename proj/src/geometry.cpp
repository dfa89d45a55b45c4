#include "meshconv/geometry.hpp"

#include <string>

namespace meshconv {

GeometryCache compute_geometry(const Mesh& m) {
  const std::size_t nf = m.faces.size();
  const double eps = degeneracy_epsilon(m);
  GeometryCache geo;
  geo.face_centroids.resize(nf);
  geo.face_normals.resize(nf);
  geo.face_areas.resize(nf);
  geo.vertex_normals.assign(m.vertices.size(), Vec3{});

  std::vector<Vec3> first_incident(m.vertices.size());
  std::vector<int> incident_count(m.vertices.size(), 0);

  for (std::size_t f = 0; f < nf; ++f) {
    const Face& t = m.faces[f];
    const Vec3 a = m.vertices[t[0]];
    const Vec3 b = m.vertices[t[1]];
    const Vec3 c = m.vertices[t[2]];
    const Vec3 n = cross(b - a, c - a);
    const double twice_area = norm(n);
    if (!(0.5 * twice_area > eps)) {
      throw MeshError("zero-area face " + std::to_string(f));
    }
    geo.face_centroids[f] = triangle_centroid(a, b, c);
    geo.face_normals[f] = n / twice_area;
    geo.face_areas[f] = 0.5 * twice_area;
    for (VertexId v : t) {
      if (incident_count[v]++ == 0) first_incident[v] = geo.face_normals[f];
      geo.vertex_normals[v] += geo.face_normals[f];
    }
  }

  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    if (incident_count[v] == 0) continue;
    const Vec3 mean = geo.vertex_normals[v] / static_cast<double>(incident_count[v]);
    const double len = norm(mean);
    geo.vertex_normals[v] = len > 1e-12 ? mean / len : first_incident[v];
  }
  return geo;
}

}  // namespace meshconv
