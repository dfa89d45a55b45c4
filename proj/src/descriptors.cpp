#include "meshconv/descriptors.hpp"

#include <cmath>
#include <stdexcept>

namespace meshconv {
namespace {

Vec3 magnitude(Vec3 v, AbsMode mode) {
  if (mode == AbsMode::kComponentwise) return abs(v);
  const double n = norm(v);
  return {n, n, n};
}

// Vertex of face `t` that is not on edge (a, b).
VertexId apex(const Face& t, VertexId a, VertexId b) {
  for (VertexId v : t) {
    if (v != a && v != b) return v;
  }
  return t[0];
}

}  // namespace

DescriptorParams DescriptorParams::zeros(std::size_t k_geo, std::size_t k_geom) {
  DescriptorParams p;
  p.geodesic.assign(k_geo, {0.0, 0.0, 0.0});
  p.geometric.assign(k_geom, {0.0, 0.0, 0.0, 0.0});
  return p;
}

DescriptorParams DescriptorParams::random(std::size_t k_geo, std::size_t k_geom, Rng& rng) {
  DescriptorParams p = zeros(k_geo, k_geom);
  const double s_geo = 1.0 / std::sqrt(3.0);
  const double s_geom = 1.0 / std::sqrt(4.0);
  for (auto& k : p.geodesic) {
    for (double& w : k) w = uniform(rng, -s_geo, s_geo);
  }
  for (auto& k : p.geometric) {
    for (double& w : k) w = uniform(rng, -s_geom, s_geom);
  }
  return p;
}

GeodesicTerms compute_geodesic_terms(const Mesh& m, const AdjacencyMatrix& adj, const GeometryCache& geo,
                                     AbsMode mode) {
  const std::size_t nf = m.faces.size();
  GeodesicTerms out;
  out.pos_dev.resize(nf);
  out.vnormal.resize(nf);
  out.edge_pair_diff.resize(nf);
  out.sums.resize(nf);

  for (std::size_t f = 0; f < nf; ++f) {
    const Face& t = m.faces[f];
    const Vec3 c = geo.face_centroids[f];

    // Slot of the neighbor across edge (t[e], t[e+1]), per face-edge index e.
    std::array<int, 3> slot_of_edge{-1, -1, -1};
    for (int s = 0; s < 3; ++s) {
      const SharedEdge& se = adj.shared_edges[f][s];
      for (int e = 0; e < 3; ++e) {
        if (se[0] == t[e] && se[1] == t[(e + 1) % 3]) slot_of_edge[e] = s;
      }
    }

    // Vector from `v` to the far vertex of the neighbor across face edge e.
    auto outer_edge = [&](int e, VertexId v) -> Vec3 {
      const int s = slot_of_edge[e];
      const FaceId nb = s < 0 ? kNone : adj.neighbors[f][s];
      if (nb == kNone) return {};
      const VertexId far = apex(m.faces[nb], t[e], t[(e + 1) % 3]);
      return m.vertices[far] - m.vertices[v];
    };

    std::array<Vec3, 3> sums{};
    for (int i = 0; i < 3; ++i) {
      const VertexId v = t[i];
      const int e_next = i;            // edge (t[i], t[i+1])
      const int e_prev = (i + 2) % 3;  // edge (t[i-1], t[i])
      // Order the pair by adjacency slot; |a - b| is symmetric so this only
      // fixes which neighbor is called the first.
      int e1 = e_next;
      int e2 = e_prev;
      if (slot_of_edge[e2] >= 0 && (slot_of_edge[e1] < 0 || slot_of_edge[e2] < slot_of_edge[e1])) {
        std::swap(e1, e2);
      }
      out.pos_dev[f][i] = m.vertices[v] - c;
      out.vnormal[f][i] = geo.vertex_normals[v];
      out.edge_pair_diff[f][i] = magnitude(outer_edge(e1, v) - outer_edge(e2, v), mode);
      sums[0] += out.pos_dev[f][i];
      sums[1] += out.vnormal[f][i];
      sums[2] += out.edge_pair_diff[f][i];
    }
    out.sums[f] = sums;
  }
  return out;
}

GeometricTerms compute_geometric_terms(const AdjacencyMatrix& adj, const GeometryCache& geo, AbsMode mode) {
  const std::size_t nf = adj.size();
  GeometricTerms out;
  out.terms.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const Vec3 c = geo.face_centroids[f];
    const Vec3 n = geo.face_normals[f];
    Vec3 offsets;
    Vec3 crosses;
    for (FaceId nb : adj.neighbors[f]) {
      if (nb == kNone) continue;
      offsets += magnitude(c - geo.face_centroids[nb], mode);
      crosses += magnitude(cross(n, geo.face_normals[nb]), mode);
    }
    out.terms[f] = {c, n, offsets, crosses};
  }
  return out;
}

DescriptorInputs compute_descriptor_inputs(const Mesh& m, const AdjacencyMatrix& adj, const GeometryCache& geo,
                                           AbsMode mode) {
  return {compute_geodesic_terms(m, adj, geo, mode), compute_geometric_terms(adj, geo, mode)};
}

FeatureMatrix geodesic_forward(const GeodesicTerms& terms, const DescriptorParams& params) {
  const auto nf = static_cast<Eigen::Index>(terms.sums.size());
  FeatureMatrix out(nf, static_cast<Eigen::Index>(3 * params.geodesic.size()));
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto& s = terms.sums[f];
    for (std::size_t j = 0; j < params.geodesic.size(); ++j) {
      const auto& a = params.geodesic[j];
      for (int c = 0; c < 3; ++c) {
        out(f, static_cast<Eigen::Index>(3 * j + c)) = a[0] * s[0][c] + a[1] * s[1][c] + a[2] * s[2][c];
      }
    }
  }
  return out;
}

FeatureMatrix geometric_forward(const GeometricTerms& terms, const DescriptorParams& params) {
  const auto nf = static_cast<Eigen::Index>(terms.terms.size());
  FeatureMatrix out(nf, static_cast<Eigen::Index>(3 * params.geometric.size()));
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto& t = terms.terms[f];
    for (std::size_t j = 0; j < params.geometric.size(); ++j) {
      const auto& b = params.geometric[j];
      for (int c = 0; c < 3; ++c) {
        out(f, static_cast<Eigen::Index>(3 * j + c)) =
            b[0] * t[0][c] + b[1] * t[1][c] + b[2] * t[2][c] + b[3] * t[3][c];
      }
    }
  }
  return out;
}

FeatureMatrix descriptor_forward(const DescriptorInputs& inputs, const DescriptorParams& params) {
  const FeatureMatrix k = geodesic_forward(inputs.geodesic, params);
  const FeatureMatrix g = geometric_forward(inputs.geometric, params);
  FeatureMatrix out(k.rows(), k.cols() + g.cols());
  out << k, g;
  return out;
}

DescriptorParams descriptor_backward(const DescriptorInputs& inputs, const DescriptorParams& params,
                                     const FeatureMatrix& grad_out) {
  const auto nf = static_cast<Eigen::Index>(inputs.faces());
  const std::size_t kg = params.geodesic.size();
  const std::size_t km = params.geometric.size();
  if (grad_out.rows() != nf || grad_out.cols() != static_cast<Eigen::Index>(params.channels())) {
    throw std::invalid_argument("descriptor_backward: gradient shape does not match descriptor output");
  }
  DescriptorParams grad = DescriptorParams::zeros(kg, km);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto& s = inputs.geodesic.sums[f];
    for (std::size_t j = 0; j < kg; ++j) {
      for (int c = 0; c < 3; ++c) {
        const double g = grad_out(f, static_cast<Eigen::Index>(3 * j + c));
        for (int t = 0; t < 3; ++t) grad.geodesic[j][t] += g * s[t][c];
      }
    }
    const auto& gt = inputs.geometric.terms[f];
    for (std::size_t j = 0; j < km; ++j) {
      for (int c = 0; c < 3; ++c) {
        const double g = grad_out(f, static_cast<Eigen::Index>(3 * (kg + j) + c));
        for (int t = 0; t < 4; ++t) grad.geometric[j][t] += g * gt[t][c];
      }
    }
  }
  return grad;
}

}  // namespace meshconv
