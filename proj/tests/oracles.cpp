#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace oracle {

using meshconv::Face;
using meshconv::kNone;
using meshconv::Mesh;
using meshconv::VertexId;

namespace {

bool has_vertex(const Face& f, VertexId v) { return f[0] == v || f[1] == v || f[2] == v; }

int shared_vertices(const Face& a, const Face& b) {
  int n = 0;
  for (VertexId v : a) n += has_vertex(b, v) ? 1 : 0;
  return n;
}

double length(const meshconv::Vec3& a, const meshconv::Vec3& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double dz = b.z - a.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool intersects(const std::vector<FaceId>& a, const std::vector<FaceId>& b) {
  for (FaceId x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  }
  return false;
}

// Smallest component size, components joined through shared vertices.
std::size_t smallest_component(const Mesh& m) {
  const std::size_t nf = m.faces.size();
  std::vector<char> seen(nf, 0);
  std::size_t smallest = nf;
  for (std::size_t f = 0; f < nf; ++f) {
    if (seen[f]) continue;
    std::size_t count = 0;
    std::deque<std::size_t> queue{f};
    seen[f] = 1;
    while (!queue.empty()) {
      const std::size_t g = queue.front();
      queue.pop_front();
      ++count;
      for (std::size_t h = 0; h < nf; ++h) {
        if (!seen[h] && shared_vertices(m.faces[g], m.faces[h]) > 0) {
          seen[h] = 1;
          queue.push_back(h);
        }
      }
    }
    smallest = std::min(smallest, count);
  }
  return smallest;
}

}  // namespace

std::vector<FaceId> edge_neighbors(const Mesh& m, FaceId f) {
  std::vector<FaceId> out;
  for (FaceId g = 0; g < static_cast<FaceId>(m.faces.size()); ++g) {
    if (g != f && shared_vertices(m.faces[f], m.faces[g]) >= 2) out.push_back(g);
  }
  return out;
}

std::vector<FaceId> one_ring(const Mesh& m, FaceId f) {
  std::vector<FaceId> out;
  for (FaceId g = 0; g < static_cast<FaceId>(m.faces.size()); ++g) {
    if (shared_vertices(m.faces[f], m.faces[g]) > 0) out.push_back(g);
  }
  return out;
}

meshconv::AdjacencyMatrix adjacency(const Mesh& m) {
  const auto nf = static_cast<FaceId>(m.faces.size());
  meshconv::AdjacencyMatrix adj;
  adj.neighbors.resize(nf);
  adj.shared_edges.resize(nf);
  for (FaceId f = 0; f < nf; ++f) {
    struct Slot {
      FaceId face;
      meshconv::SharedEdge edge;
      double len;
    };
    std::vector<Slot> slots;
    const Face& t = m.faces[f];
    for (int i = 0; i < 3; ++i) {
      const VertexId a = t[i];
      const VertexId b = t[(i + 1) % 3];
      FaceId across = kNone;
      for (FaceId g = 0; g < nf; ++g) {
        if (g != f && has_vertex(m.faces[g], a) && has_vertex(m.faces[g], b)) across = g;
      }
      slots.push_back({across, {a, b}, length(m.vertices[a], m.vertices[b])});
    }
    // Real neighbors by length descending then id; border slots last, in edge order.
    std::vector<Slot> real;
    std::vector<Slot> border;
    for (const Slot& s : slots) (s.face == kNone ? border : real).push_back(s);
    std::sort(real.begin(), real.end(), [](const Slot& x, const Slot& y) {
      return x.len > y.len || (x.len == y.len && x.face < y.face);
    });
    real.insert(real.end(), border.begin(), border.end());
    for (int i = 0; i < 3; ++i) {
      adj.neighbors[f][i] = real[i].face;
      adj.shared_edges[f][i] = real[i].edge;
    }
  }
  return adj;
}

meshconv::RegionTable regions(const meshconv::AdjacencyMatrix& adj, int kernel_size) {
  meshconv::RegionTable table;
  table.kernel_size = kernel_size;
  for (FaceId center = 0; center < static_cast<FaceId>(adj.size()); ++center) {
    std::vector<FaceId> out;
    std::set<FaceId> visited{center};
    std::deque<FaceId> queue{center};
    while (!queue.empty() && static_cast<int>(out.size()) < kernel_size) {
      const FaceId g = queue.front();
      queue.pop_front();
      for (FaceId nb : adj.neighbors[g]) {
        if (nb == kNone || visited.count(nb) > 0) continue;
        if (static_cast<int>(out.size()) == kernel_size) break;
        visited.insert(nb);
        out.push_back(nb);
        queue.push_back(nb);
      }
    }
    table.surrounding.push_back(out);
  }
  return table;
}

std::vector<double> face_weights(const Mesh& m, const meshconv::FeatureMatrix& features) {
  std::vector<double> w(m.faces.size(), 0.0);
  for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
    double sum = 0.0;
    for (FaceId n : edge_neighbors(m, f)) {
      for (Eigen::Index c = 0; c < features.cols(); ++c) {
        const double d = features(f, c) - features(n, c);
        sum += d * d;
      }
    }
    w[f] = sum;
  }
  return w;
}

Mesh collapse(const Mesh& m, const std::vector<Region>& regions) {
  Mesh out = m;
  std::vector<char> alive(m.faces.size(), 1);
  for (const Region& r : regions) {
    const Face t = out.faces[r.center];
    const auto merged = static_cast<VertexId>(out.vertices.size());
    out.vertices.push_back((out.vertices[t[0]] + out.vertices[t[1]] + out.vertices[t[2]]) / 3.0);
    for (FaceId g : r.removed) alive[g] = 0;
    for (Face& f : out.faces) {
      for (VertexId& v : f) {
        if (has_vertex(t, v)) v = merged;
      }
    }
  }
  std::vector<Face> kept;
  for (std::size_t f = 0; f < out.faces.size(); ++f) {
    if (alive[f]) kept.push_back(out.faces[f]);
  }
  out.faces = std::move(kept);
  return out;
}

std::vector<Region> greedy_plan(const Mesh& m, const std::vector<double>& weights, std::size_t target,
                                meshconv::ConflictRule rule) {
  using meshconv::ConflictRule;
  std::vector<FaceId> order(m.faces.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<FaceId>(i);
  std::sort(order.begin(), order.end(), [&](FaceId a, FaceId b) {
    return weights[a] < weights[b] || (weights[a] == weights[b] && a < b);
  });

  std::vector<Region> selected;
  std::size_t projected = m.faces.size();
  for (FaceId f : order) {
    if (projected <= target) break;
    const std::vector<FaceId> nbs = edge_neighbors(m, f);
    if (nbs.size() != 3) continue;
    Region cand{f, {f, nbs[0], nbs[1], nbs[2]}};
    std::sort(cand.removed.begin(), cand.removed.end());
    const std::vector<FaceId> ring_f = one_ring(m, f);

    bool blocked = false;
    for (const Region& s : selected) {
      const std::vector<FaceId> ring_s = one_ring(m, s.center);
      switch (rule) {
        case ConflictRule::kCenterDisjoint:
          blocked = std::find(ring_s.begin(), ring_s.end(), f) != ring_s.end() || intersects(cand.removed, s.removed);
          break;
        case ConflictRule::kRemovedSet:
          blocked = intersects(cand.removed, ring_s) || intersects(ring_f, s.removed);
          break;
        case ConflictRule::kFullRegion:
          blocked = intersects(ring_f, ring_s);
          break;
      }
      if (blocked) break;
    }
    if (blocked) continue;

    std::vector<Region> trial = selected;
    trial.push_back(cand);
    const Mesh collapsed = collapse(m, trial);
    const meshconv::ValidationReport report = meshconv::validate_mesh(collapsed);
    if (!report.ok() || !report.closed() || !report.duplicate_faces.empty()) continue;
    if (smallest_component(collapsed) < 4) continue;
    selected.push_back(cand);
    projected -= 4;
  }
  return selected;
}

}  // namespace oracle
