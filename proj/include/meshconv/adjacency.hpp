#pragma once

#include <array>
#include <vector>

#include "meshconv/mesh.hpp"

namespace meshconv {

/// Directed edge (start, end) as it appears in the owning face's winding.
using SharedEdge = std::array<VertexId, 2>;

/// F x 3 edge-neighbor table. Slots are ordered by the length of the shared
/// edge, longest first, ties broken by ascending neighbor index. Border slots
/// hold kNone and always come after real neighbors.
struct AdjacencyMatrix {
  std::vector<std::array<FaceId, 3>> neighbors;
  std::vector<std::array<SharedEdge, 3>> shared_edges;

  std::size_t size() const { return neighbors.size(); }
  std::size_t border_slots() const;

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;
};

/// One unsorted neighbor slot: what sits across edge (edge[0], edge[1]).
struct NeighborSlot {
  FaceId face = kNone;
  SharedEdge edge{};
  double length = 0.0;
};

/// Canonical slot order shared by the full build and pooling's incremental
/// update, so both produce identical rows.
void sort_neighbor_slots(std::array<NeighborSlot, 3>& slots);

/// Throws MeshError naming the edge when more than two faces share it.
AdjacencyMatrix build_adjacency(const Mesh& m);

}  // namespace meshconv
