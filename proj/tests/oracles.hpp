#pragma once

// Brute-force reference implementations. They favour obviousness over speed
// and share no code with the library beyond the mesh types and validate_mesh.

#include <vector>

#include "meshconv/adjacency.hpp"
#include "meshconv/conv.hpp"
#include "meshconv/features.hpp"
#include "meshconv/mesh.hpp"
#include "meshconv/pooling.hpp"

namespace oracle {

using meshconv::FaceId;

/// Faces sharing an edge with f, found by scanning every face, ascending.
std::vector<FaceId> edge_neighbors(const meshconv::Mesh& m, FaceId f);

/// Faces sharing at least one vertex with f (f included), ascending.
std::vector<FaceId> one_ring(const meshconv::Mesh& m, FaceId f);

/// O(F^2) pairwise shared-edge search, then slots by length desc, id asc.
meshconv::AdjacencyMatrix adjacency(const meshconv::Mesh& m);

/// Queue-based breadth-first search over the slot order of `adj`.
meshconv::RegionTable regions(const meshconv::AdjacencyMatrix& adj, int kernel_size);

/// Per-face loop over scanned neighbors and channels.
std::vector<double> face_weights(const meshconv::Mesh& m, const meshconv::FeatureMatrix& features);

struct Region {
  FaceId center = meshconv::kNone;
  std::vector<FaceId> removed;  ///< ascending
};

/// Sequentially collapses the regions in order: each center's three vertices
/// merge into a new vertex at its centroid and the removed faces disappear.
/// Vertices are never dropped; faces keep their original relative order.
meshconv::Mesh collapse(const meshconv::Mesh& m, const std::vector<Region>& regions);

/// Greedy selection that rescans all selected regions for every candidate
/// and accepts a collapse only when the collapsed copy validates, stays
/// closed, and keeps at least 4 faces per component.
std::vector<Region> greedy_plan(const meshconv::Mesh& m, const std::vector<double>& weights, std::size_t target,
                                meshconv::ConflictRule rule);

}  // namespace oracle
