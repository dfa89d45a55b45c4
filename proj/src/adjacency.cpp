#include "meshconv/adjacency.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

namespace meshconv {
namespace {

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& e) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.first)) << 32) |
                                      static_cast<std::uint32_t>(e.second));
  }
};

}  // namespace

std::size_t AdjacencyMatrix::border_slots() const {
  std::size_t n = 0;
  for (const auto& row : neighbors) n += std::count(row.begin(), row.end(), kNone);
  return n;
}

void sort_neighbor_slots(std::array<NeighborSlot, 3>& slots) {
  std::stable_sort(slots.begin(), slots.end(), [](const NeighborSlot& a, const NeighborSlot& b) {
    const bool a_none = a.face == kNone;
    const bool b_none = b.face == kNone;
    if (a_none != b_none) return b_none;
    if (a_none) return false;
    if (a.length != b.length) return a.length > b.length;
    return a.face < b.face;
  });
}

AdjacencyMatrix build_adjacency(const Mesh& m) {
  const auto nf = static_cast<FaceId>(m.faces.size());
  std::unordered_map<EdgeKey, std::array<FaceId, 2>, EdgeKeyHash> owners;
  owners.reserve(static_cast<std::size_t>(nf) * 2);
  for (FaceId f = 0; f < nf; ++f) {
    const Face& t = m.faces[f];
    for (int i = 0; i < 3; ++i) {
      const EdgeKey key = make_edge_key(t[i], t[(i + 1) % 3]);
      auto [it, inserted] = owners.try_emplace(key, std::array<FaceId, 2>{f, kNone});
      if (inserted) continue;
      if (it->second[1] != kNone) {
        throw MeshError("non-manifold edge (" + std::to_string(key.first) + ", " +
                        std::to_string(key.second) + ") shared by more than two faces");
      }
      it->second[1] = f;
    }
  }

  AdjacencyMatrix adj;
  adj.neighbors.resize(nf);
  adj.shared_edges.resize(nf);
  for (FaceId f = 0; f < nf; ++f) {
    const Face& t = m.faces[f];
    std::array<NeighborSlot, 3> slots;
    for (int i = 0; i < 3; ++i) {
      const VertexId a = t[i];
      const VertexId b = t[(i + 1) % 3];
      const auto& own = owners.at(make_edge_key(a, b));
      slots[i].face = own[0] == f ? own[1] : own[0];
      slots[i].edge = {a, b};
      slots[i].length = segment_length(m.vertices[a], m.vertices[b]);
    }
    sort_neighbor_slots(slots);
    for (int i = 0; i < 3; ++i) {
      adj.neighbors[f][i] = slots[i].face;
      adj.shared_edges[f][i] = slots[i].edge;
    }
  }
  return adj;
}

}  // namespace meshconv
