#pragma once

#include <vector>

#include "meshconv/mesh.hpp"

namespace meshconv {

struct GeometryCache {
  std::vector<Vec3> face_centroids;
  std::vector<Vec3> face_normals;    ///< unit, right-handed with the face winding
  std::vector<double> face_areas;
  std::vector<Vec3> vertex_normals;  ///< normalized mean of incident face normals
};

/// Throws MeshError naming the first face whose area is at or below
/// degeneracy_epsilon(m).
GeometryCache compute_geometry(const Mesh& m);

}  // namespace meshconv
