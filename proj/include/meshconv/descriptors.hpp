#pragma once

#include <array>
#include <vector>

#include "meshconv/adjacency.hpp"
#include "meshconv/features.hpp"
#include "meshconv/geometry.hpp"
#include "meshconv/rng.hpp"

namespace meshconv {

/// How |x| of a 3-vector is taken in the descriptor terms. kEuclidean puts
/// the vector norm in all three components.
enum class AbsMode { kComponentwise, kEuclidean };

/// Learnable descriptor weights. Each geodesic kernel holds one weight per
/// term (deviation, vertex normal, edge-pair difference); each geometric
/// kernel one per term (centroid, normal, centroid offsets, normal crosses).
struct DescriptorParams {
  std::vector<std::array<double, 3>> geodesic;
  std::vector<std::array<double, 4>> geometric;

  std::size_t channels() const { return 3 * (geodesic.size() + geometric.size()); }
  static DescriptorParams zeros(std::size_t k_geo, std::size_t k_geom);
  /// Uniform in [-1/sqrt(terms), 1/sqrt(terms)].
  static DescriptorParams random(std::size_t k_geo, std::size_t k_geom, Rng& rng);
};

/// Per-face, per-vertex-slot inputs of the geodesic descriptor.
struct GeodesicTerms {
  std::vector<std::array<Vec3, 3>> pos_dev;         ///< v_i - centroid
  std::vector<std::array<Vec3, 3>> vnormal;         ///< vertex normal at v_i
  std::vector<std::array<Vec3, 3>> edge_pair_diff;  ///< |e_i1 - e_i2|
  /// Slot sums, in term order: deviation, vertex normal, edge-pair difference.
  std::vector<std::array<Vec3, 3>> sums;
};

/// Per-face inputs of the geometric descriptor, in term order: centroid,
/// face normal, sum |c - c_n|, sum |n x n_n| over edge neighbors.
struct GeometricTerms {
  std::vector<std::array<Vec3, 4>> terms;
};

GeodesicTerms compute_geodesic_terms(const Mesh& m, const AdjacencyMatrix& adj, const GeometryCache& geo,
                                     AbsMode mode = AbsMode::kComponentwise);

GeometricTerms compute_geometric_terms(const AdjacencyMatrix& adj, const GeometryCache& geo,
                                       AbsMode mode = AbsMode::kComponentwise);

/// Geometry-only inputs to the descriptor layer; constant during training.
struct DescriptorInputs {
  GeodesicTerms geodesic;
  GeometricTerms geometric;

  std::size_t faces() const { return geometric.terms.size(); }
};

DescriptorInputs compute_descriptor_inputs(const Mesh& m, const AdjacencyMatrix& adj, const GeometryCache& geo,
                                           AbsMode mode = AbsMode::kComponentwise);

/// F x 3*k_geo block; kernel j occupies columns [3j, 3j+3).
FeatureMatrix geodesic_forward(const GeodesicTerms& terms, const DescriptorParams& params);

/// F x 3*k_geom block.
FeatureMatrix geometric_forward(const GeometricTerms& terms, const DescriptorParams& params);

/// Geodesic block followed by geometric block.
FeatureMatrix descriptor_forward(const DescriptorInputs& inputs, const DescriptorParams& params);

/// Gradient of a loss with respect to the descriptor weights. The geometry
/// is an input and receives no gradient. Throws std::invalid_argument on a
/// shape mismatch.
DescriptorParams descriptor_backward(const DescriptorInputs& inputs, const DescriptorParams& params,
                                     const FeatureMatrix& grad_out);

}  // namespace meshconv
