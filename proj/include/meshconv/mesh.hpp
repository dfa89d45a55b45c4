#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "meshconv/types.hpp"

namespace meshconv {

using Face = std::array<VertexId, 3>;

/// Triangle mesh with consistently oriented faces.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::optional<int> label;
  std::string name;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return faces.size(); }
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Undirected edge key with the smaller vertex first.
using EdgeKey = std::pair<VertexId, VertexId>;

inline EdgeKey make_edge_key(VertexId a, VertexId b) {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

struct ValidationReport {
  bool manifold = true;  ///< edges with <= 2 faces, single fan per vertex, no duplicate faces
  bool oriented = true;  ///< interior edges traversed in opposite directions
  std::size_t border_edges = 0;
  std::vector<FaceId> degenerate_faces;   ///< area below the degeneracy threshold
  std::vector<FaceId> invalid_faces;      ///< index out of range or repeated vertex
  std::vector<EdgeKey> non_manifold_edges;
  std::vector<VertexId> non_manifold_vertices;
  std::vector<FaceId> duplicate_faces;

  bool ok() const {
    return manifold && oriented && degenerate_faces.empty() && invalid_faces.empty();
  }
  bool closed() const { return border_edges == 0; }
};

ValidationReport validate_mesh(const Mesh& m);

/// Area below which a face counts as degenerate: 1e-12 times the squared
/// bounding-box diagonal.
double degeneracy_epsilon(const Mesh& m);

double face_area(const Mesh& m, FaceId f);

/// Translate the vertex centroid to the origin and scale the farthest vertex
/// to distance 1. Throws MeshError when all vertices coincide.
Mesh normalize_mesh(const Mesh& m);

std::size_t count_edges(const Mesh& m);

/// V - E + F with E counted over unique undirected edges.
long euler_characteristic(const Mesh& m);

/// Number of faces in each edge-connected component, indexed per face.
std::vector<std::size_t> component_face_counts(const Mesh& m);

}  // namespace meshconv
