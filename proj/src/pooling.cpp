#include "meshconv/pooling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "meshconv/parallel.hpp"

namespace meshconv {
namespace {

constexpr VertexId kMerged = -2;

std::vector<std::vector<FaceId>> incident_faces(const Mesh& m) {
  std::vector<std::vector<FaceId>> inc(m.vertices.size());
  for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
    for (VertexId v : m.faces[f]) inc[v].push_back(f);
  }
  return inc;
}

bool shares_vertex(const Face& a, const Face& b) {
  for (VertexId u : a) {
    for (VertexId v : b) {
      if (u == v) return true;
    }
  }
  return false;
}

// Mesh state with the collapses selected so far applied, so each new
// candidate is checked against the mesh it will actually be collapsed in.
// Merged vertices get fresh ids past the original vertex range.
class CollapseState {
 public:
  CollapseState(const Mesh& m, std::vector<std::vector<FaceId>> incident)
      : faces_(m.faces), positions_(m.vertices), incident_(std::move(incident)), alive_(m.faces.size(), 1) {
    eps_ = degeneracy_epsilon(m);
    // Components (by shared vertices) are identified by their smallest face id.
    const auto nf = static_cast<FaceId>(m.faces.size());
    component_.assign(m.faces.size(), kNone);
    for (FaceId f = 0; f < nf; ++f) {
      if (component_[f] != kNone) continue;
      std::vector<FaceId> stack{f};
      component_[f] = f;
      while (!stack.empty()) {
        const FaceId g = stack.back();
        stack.pop_back();
        for (VertexId v : faces_[g]) {
          for (FaceId h : incident_[v]) {
            if (component_[h] == kNone) {
              component_[h] = f;
              stack.push_back(h);
            }
          }
        }
      }
    }
    for (FaceId f = 0; f < nf; ++f) ++remaining_[component_[f]];
  }

  // True when collapsing `center` (with the given removed faces) leaves a
  // closed oriented manifold around the merged vertex.
  bool collapse_is_valid(FaceId center, const std::array<FaceId, 4>& removed) const {
    if (remaining_.at(component_[center]) - 4 < 4) return false;
    const Face t = faces_[center];
    const Vec3 merged = triangle_centroid(positions_[t[0]], positions_[t[1]], positions_[t[2]]);
    auto is_center_vertex = [&](VertexId v) { return v == t[0] || v == t[1] || v == t[2]; };
    auto is_removed = [&](FaceId g) { return std::find(removed.begin(), removed.end(), g) != removed.end(); };

    std::vector<FaceId> ring;
    for (VertexId v : t) {
      for (FaceId g : incident_[v]) {
        if (alive_[g] && !is_removed(g)) ring.push_back(g);
      }
    }
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    if (ring.size() < 3) return false;

    // Around the merged vertex each ring face contributes the directed link
    // edge (after -> before). A closed manifold fan is one cycle visiting
    // every link vertex exactly once as a start and once as an end.
    std::unordered_map<VertexId, VertexId> next;
    std::unordered_map<VertexId, int> ends;
    for (FaceId g : ring) {
      Face cur = faces_[g];
      int hits = 0;
      int k = 0;
      for (int i = 0; i < 3; ++i) {
        if (is_center_vertex(cur[i])) {
          cur[i] = kMerged;
          ++hits;
          k = i;
        }
      }
      if (hits != 1) return false;
      const VertexId after = cur[(k + 1) % 3];
      const VertexId before = cur[(k + 2) % 3];
      if (!next.emplace(after, before).second) return false;
      if (++ends[before] > 1) return false;

      auto pos = [&](VertexId v) { return v == kMerged ? merged : positions_[v]; };
      const Vec3 a = pos(cur[0]);
      const double area = 0.5 * norm(cross(pos(cur[1]) - a, pos(cur[2]) - a));
      if (!(area > eps_)) return false;
    }
    for (const auto& [start, end] : next) {
      if (!next.contains(end)) return false;
    }
    const VertexId first = next.begin()->first;
    VertexId v = first;
    std::size_t steps = 0;
    do {
      v = next.at(v);
      ++steps;
    } while (v != first && steps <= ring.size());
    return steps == ring.size();
  }

  void collapse(FaceId center, const std::array<FaceId, 4>& removed) {
    const Face t = faces_[center];
    const auto merged_id = static_cast<VertexId>(positions_.size());
    positions_.push_back(triangle_centroid(positions_[t[0]], positions_[t[1]], positions_[t[2]]));
    incident_.emplace_back();

    for (FaceId r : removed) {
      alive_[r] = 0;
      for (VertexId v : faces_[r]) {
        auto& inc = incident_[v];
        inc.erase(std::remove(inc.begin(), inc.end(), r), inc.end());
      }
    }
    std::vector<FaceId> ring;
    for (VertexId v : t) {
      for (FaceId g : incident_[v]) ring.push_back(g);
      incident_[v].clear();
    }
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    for (FaceId g : ring) {
      for (VertexId& v : faces_[g]) {
        if (v == t[0] || v == t[1] || v == t[2]) v = merged_id;
      }
    }
    incident_[merged_id] = std::move(ring);
    remaining_[component_[center]] -= 4;
  }

 private:
  std::vector<Face> faces_;
  std::vector<Vec3> positions_;
  std::vector<std::vector<FaceId>> incident_;
  std::vector<char> alive_;
  std::vector<FaceId> component_;
  std::unordered_map<FaceId, long> remaining_;
  double eps_ = 0.0;
};

// Remaps and provenance from the selected regions.
void finalize_plan(const Mesh& m, const PoolOptions& options, PoolPlan& plan) {
  const std::size_t nv = m.vertices.size();
  const std::size_t nf = m.faces.size();
  plan.input_vertices = nv;
  plan.provenance.input_faces = nf;

  // Each merged triple lands on the slot of its smallest vertex.
  std::vector<VertexId> merge_into(nv, kNone);
  for (const PoolRegion& r : plan.regions) {
    const VertexId keep = *std::min_element(r.old_vertices.begin(), r.old_vertices.end());
    for (VertexId v : r.old_vertices) merge_into[v] = keep;
  }
  plan.vertex_remap.assign(nv, kNone);
  VertexId next_vertex = 0;
  for (std::size_t v = 0; v < nv; ++v) {
    if (merge_into[v] == kNone || merge_into[v] == static_cast<VertexId>(v)) plan.vertex_remap[v] = next_vertex++;
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (merge_into[v] != kNone) plan.vertex_remap[v] = plan.vertex_remap[merge_into[v]];
  }
  plan.output_vertices = static_cast<std::size_t>(next_vertex);

  std::vector<char> removed(nf, 0);
  std::vector<std::vector<std::size_t>> ring_of(nf);
  for (std::size_t ri = 0; ri < plan.regions.size(); ++ri) {
    for (FaceId f : plan.regions[ri].removed) removed[f] = 1;
    for (FaceId g : plan.regions[ri].ring) ring_of[g].push_back(ri);
  }
  plan.face_remap.assign(nf, kNone);
  plan.provenance.sources.clear();
  FaceId next_face = 0;
  for (FaceId f = 0; f < static_cast<FaceId>(nf); ++f) {
    if (removed[f]) continue;
    plan.face_remap[f] = next_face++;
    std::vector<FaceId> extra;
    for (std::size_t ri : ring_of[f]) {
      for (FaceId r : plan.regions[ri].removed) {
        if (options.averaging == AveragingMode::kWholeRegion || shares_vertex(m.faces[f], m.faces[r])) {
          extra.push_back(r);
        }
      }
    }
    std::sort(extra.begin(), extra.end());
    extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
    std::vector<FaceId> sources{f};
    sources.insert(sources.end(), extra.begin(), extra.end());
    plan.provenance.sources.push_back(std::move(sources));
  }
}

}  // namespace

PoolWeights compute_face_weights(const FeatureMatrix& features, const AdjacencyMatrix& adj) {
  if (static_cast<std::size_t>(features.rows()) != adj.size()) {
    throw std::invalid_argument("compute_face_weights: feature rows do not match adjacency");
  }
  PoolWeights w;
  w.weights.assign(adj.size(), 0.0);
  const Eigen::Index channels = features.cols();
  for (std::size_t f = 0; f < adj.size(); ++f) {
    std::array<FaceId, 3> nb = adj.neighbors[f];
    std::sort(nb.begin(), nb.end());
    double sum = 0.0;
    for (FaceId n : nb) {
      if (n == kNone) continue;
      for (Eigen::Index c = 0; c < channels; ++c) {
        const double d = features(static_cast<Eigen::Index>(f), c) - features(n, c);
        sum += d * d;
      }
    }
    w.weights[f] = sum;
  }
  return w;
}

PoolPlan identity_plan(const Mesh& m) {
  PoolPlan plan;
  finalize_plan(m, PoolOptions{}, plan);
  return plan;
}

PoolPlan plan_pass(const Mesh& m, const AdjacencyMatrix& adj, const PoolWeights& weights, std::size_t target,
                   const PoolOptions& options) {
  if (target < 4) throw std::invalid_argument("plan_pass: target face count must be >= 4");
  const std::size_t nf = m.faces.size();
  if (weights.weights.size() != nf || adj.size() != nf) {
    throw std::invalid_argument("plan_pass: weights/adjacency do not match the mesh");
  }
  PoolPlan plan;
  if (nf <= target) {
    finalize_plan(m, options, plan);
    return plan;
  }

  auto incident = incident_faces(m);
  std::vector<FaceId> order(nf);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](FaceId a, FaceId b) {
    if (weights.weights[a] != weights.weights[b]) return weights.weights[a] < weights.weights[b];
    return a < b;
  });

  // touched: face lies in a selected one-ring; gone: face removed by a selection.
  std::vector<char> touched(nf, 0);
  std::vector<char> gone(nf, 0);
  CollapseState state(m, incident);
  std::size_t projected = nf;

  std::vector<FaceId> one_ring;
  for (FaceId f : order) {
    if (projected <= target) break;
    const auto& nb = adj.neighbors[f];
    if (nb[0] == kNone || nb[1] == kNone || nb[2] == kNone) continue;
    const std::array<FaceId, 4> removed{f, nb[0], nb[1], nb[2]};

    one_ring.clear();
    for (VertexId v : m.faces[f]) one_ring.insert(one_ring.end(), incident[v].begin(), incident[v].end());
    std::sort(one_ring.begin(), one_ring.end());
    one_ring.erase(std::unique(one_ring.begin(), one_ring.end()), one_ring.end());

    bool blocked = false;
    if (options.conflict == ConflictRule::kCenterDisjoint) {
      blocked = touched[f] != 0 || std::any_of(removed.begin(), removed.end(), [&](FaceId g) { return gone[g] != 0; });
    } else if (options.conflict == ConflictRule::kFullRegion) {
      blocked = std::any_of(one_ring.begin(), one_ring.end(), [&](FaceId g) { return touched[g] != 0; });
    } else {
      blocked = std::any_of(removed.begin(), removed.end(), [&](FaceId g) { return touched[g] != 0; }) ||
                std::any_of(one_ring.begin(), one_ring.end(), [&](FaceId g) { return gone[g] != 0; });
    }
    if (blocked || !state.collapse_is_valid(f, removed)) continue;

    state.collapse(f, removed);
    PoolRegion region;
    region.center = f;
    region.removed = removed;
    region.old_vertices = m.faces[f];
    region.merged_vertex = triangle_centroid(m.vertices[m.faces[f][0]], m.vertices[m.faces[f][1]],
                                             m.vertices[m.faces[f][2]]);
    for (FaceId g : one_ring) {
      touched[g] = 1;
      if (std::find(removed.begin(), removed.end(), g) == removed.end()) region.ring.push_back(g);
    }
    for (FaceId g : removed) gone[g] = 1;
    plan.regions.push_back(std::move(region));
    projected -= 4;
  }
  // A later region may remove a face listed in an earlier ring.
  for (PoolRegion& region : plan.regions) {
    std::erase_if(region.ring, [&](FaceId g) { return gone[g] != 0; });
  }
  finalize_plan(m, options, plan);
  return plan;
}

PooledMesh apply_pass(const Mesh& m, const AdjacencyMatrix& adj, const FeatureMatrix& features, const PoolPlan& plan,
                      const PoolOptions& options) {
  const std::size_t nf = m.faces.size();
  if (plan.input_faces() != nf || plan.input_vertices != m.vertices.size() || adj.size() != nf ||
      static_cast<std::size_t>(features.rows()) != nf) {
    throw std::invalid_argument("apply_pass: plan does not match the mesh");
  }
  const std::size_t out_faces = plan.output_faces();

  PooledMesh out;
  out.mesh.label = m.label;
  out.mesh.name = m.name;
  out.mesh.vertices.resize(plan.output_vertices);
  for (std::size_t v = 0; v < m.vertices.size(); ++v) out.mesh.vertices[plan.vertex_remap[v]] = m.vertices[v];

  // Per-region work touches disjoint merged vertices and only sets flags on
  // ring faces, so region order does not matter.
  std::vector<char> merged(plan.output_vertices, 0);
  std::vector<char> dirty(out_faces, 0);
  std::vector<std::size_t> region_order(plan.regions.size());
  std::iota(region_order.begin(), region_order.end(), 0);
  if (options.reverse_region_order) std::reverse(region_order.begin(), region_order.end());
  std::unordered_map<VertexId, std::vector<FaceId>> fan;  // merged vertex -> new ring faces
  for (std::size_t ri : region_order) {
    const PoolRegion& r = plan.regions[ri];
    const VertexId p = plan.vertex_remap[r.old_vertices[0]];
    out.mesh.vertices[p] = r.merged_vertex;
    merged[p] = 1;
    auto& faces = fan[p];
    for (FaceId g : r.ring) {
      const FaceId ng = plan.face_remap[g];
      dirty[ng] = 1;
      faces.push_back(ng);
    }
    std::sort(faces.begin(), faces.end());
  }

  std::vector<FaceId> old_of(out_faces);
  out.mesh.faces.resize(out_faces);
  for (FaceId f = 0; f < static_cast<FaceId>(nf); ++f) {
    const FaceId nfid = plan.face_remap[f];
    if (nfid == kNone) continue;
    old_of[nfid] = f;
    for (int k = 0; k < 3; ++k) out.mesh.faces[nfid][k] = plan.vertex_remap[m.faces[f][k]];
  }

  out.features.resize(static_cast<Eigen::Index>(out_faces), features.cols());
  out.adjacency.neighbors.resize(out_faces);
  out.adjacency.shared_edges.resize(out_faces);
  
  parallel_for(out_faces, options.threads, [&](std::size_t g) {
    const auto& src = plan.provenance.sources[g];
    auto row = out.features.row(static_cast<Eigen::Index>(g));
    row = features.row(src[0]);
    for (std::size_t i = 1; i < src.size(); ++i) row += features.row(src[i]);
    if (src.size() > 1) row /= static_cast<double>(src.size());

    const FaceId og = old_of[g];
    if (!dirty[g]) {
      for (int s = 0; s < 3; ++s) {
        const FaceId nb = adj.neighbors[og][s];
        out.adjacency.neighbors[g][s] = nb == kNone ? kNone : plan.face_remap[nb];
        const SharedEdge& e = adj.shared_edges[og][s];
        out.adjacency.shared_edges[g][s] = {plan.vertex_remap[e[0]], plan.vertex_remap[e[1]]};
      }
      return;
    }

    const Face& t = out.mesh.faces[g];
    std::array<NeighborSlot, 3> slots;
    for (int e = 0; e < 3; ++e) {
      const VertexId u = t[e];
      const VertexId v = t[(e + 1) % 3];
      FaceId across = kNone;
      if (merged[u] || merged[v]) {
        for (FaceId h : fan.at(merged[u] ? u : v)) {
          if (h == static_cast<FaceId>(g)) continue;
          const Face& th = out.mesh.faces[h];
          const bool has_u = th[0] == u || th[1] == u || th[2] == u;
          const bool has_v = th[0] == v || th[1] == v || th[2] == v;
          if (has_u && has_v) {
            across = h;
            break;
          }
        }
        if (across == kNone) throw std::logic_error("apply_pass: merged edge without an opposite face");
      } else {
        for (int s = 0; s < 3; ++s) {
          const SharedEdge& old_edge = adj.shared_edges[og][s];
          if (plan.vertex_remap[old_edge[0]] == u && plan.vertex_remap[old_edge[1]] == v) {
            const FaceId nb = adj.neighbors[og][s];
            across = nb == kNone ? kNone : plan.face_remap[nb];
          }
        }
      }
      slots[e] = {across, {u, v}, segment_length(out.mesh.vertices[u], out.mesh.vertices[v])};
    }
    sort_neighbor_slots(slots);
    for (int s = 0; s < 3; ++s) {
      out.adjacency.neighbors[g][s] = slots[s].face;
      out.adjacency.shared_edges[g][s] = slots[s].edge;
    }
  });
  return out;
}

PooledMesh pool_to_target(const Mesh& m, const AdjacencyMatrix& adj, const FeatureMatrix& features,
                          std::size_t target, const PoolOptions& options) {
  if (target < 4) throw std::invalid_argument("pool_to_target: target face count must be >= 4");
  PooledMesh cur{m, adj, features, {}, false};
  while (cur.mesh.faces.size() > target) {
    const PoolWeights w = compute_face_weights(cur.features, cur.adjacency);
    PoolPlan plan = plan_pass(cur.mesh, cur.adjacency, w, target, options);
    if (plan.empty()) {
      cur.stalled = true;
      break;
    }
    PooledMesh next = apply_pass(cur.mesh, cur.adjacency, cur.features, plan, options);
    next.passes = std::move(cur.passes);
    next.passes.push_back(std::move(plan));
    cur = std::move(next);
  }
  return cur;
}

PooledMesh replay_passes(const Mesh& m, const AdjacencyMatrix& adj, const FeatureMatrix& features,
                         const std::vector<PoolPlan>& passes, const PoolOptions& options) {
  PooledMesh cur{m, adj, features, {}, false};
  for (const PoolPlan& plan : passes) {
    PooledMesh next = apply_pass(cur.mesh, cur.adjacency, cur.features, plan, options);
    next.passes = std::move(cur.passes);
    next.passes.push_back(plan);
    cur = std::move(next);
  }
  return cur;
}

FeatureMatrix pooling_backward(const Provenance& provenance, const FeatureMatrix& grad_out) {
  if (static_cast<std::size_t>(grad_out.rows()) != provenance.output_faces()) {
    throw std::invalid_argument("pooling_backward: gradient rows do not match provenance");
  }
  FeatureMatrix grad_in = FeatureMatrix::Zero(static_cast<Eigen::Index>(provenance.input_faces), grad_out.cols());
  for (std::size_t g = 0; g < provenance.sources.size(); ++g) {
    const auto& src = provenance.sources[g];
    const double inv = 1.0 / static_cast<double>(src.size());
    for (FaceId s : src) {
      if (s < 0 || static_cast<std::size_t>(s) >= provenance.input_faces) {
        throw std::invalid_argument("pooling_backward: provenance references an unknown face");
      }
      grad_in.row(s) += grad_out.row(static_cast<Eigen::Index>(g)) * inv;
    }
  }
  return grad_in;
}

FeatureMatrix pooling_backward(const std::vector<PoolPlan>& passes, const FeatureMatrix& grad_out) {
  FeatureMatrix g = grad_out;
  for (auto it = passes.rbegin(); it != passes.rend(); ++it) g = pooling_backward(it->provenance, g);
  return g;
}

}  // namespace meshconv
