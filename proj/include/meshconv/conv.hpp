#pragma once

#include <Eigen/Core>
#include <vector>

#include "meshconv/adjacency.hpp"
#include "meshconv/features.hpp"
#include "meshconv/rng.hpp"

namespace meshconv {

/// Convolution support per face: up to K surrounding faces in breadth-first
/// discovery order. The center is implicit (row index) and never listed.
struct RegionTable {
  int kernel_size = 0;
  std::vector<std::vector<FaceId>> surrounding;

  std::size_t size() const { return surrounding.size(); }
  friend bool operator==(const RegionTable&, const RegionTable&) = default;
};

/// Grow each region breadth-first from the face's edge neighbors until K
/// surrounding faces are collected or the component is exhausted.
/// Throws std::invalid_argument when K < 3.
RegionTable build_regions(const AdjacencyMatrix& adj, int kernel_size);

struct ConvParams {
  Eigen::MatrixXd w_center;     ///< C_out x C_in, applied to d_f
  Eigen::MatrixXd w_neighbors;  ///< C_out x C_in, applied to sum of d_n
  Eigen::MatrixXd w_absdiff;    ///< C_out x C_in, applied to sum of |d_f - d_n|
  Eigen::VectorXd bias;         ///< C_out

  Eigen::Index in_channels() const { return w_center.cols(); }
  Eigen::Index out_channels() const { return w_center.rows(); }

  static ConvParams zeros(Eigen::Index c_in, Eigen::Index c_out);
  /// Uniform in [-s, s] with s = 1/sqrt(c_in * (1 + K)), bias zero.
  static ConvParams random(Eigen::Index c_in, Eigen::Index c_out, int kernel_size, Rng& rng);
};

struct ConvOptions {
  bool relu = true;
  /// Divide both neighbor sums by the region's member count.
  bool mean_aggregate = false;
};

/// Cached intermediates of one convolution, consumed by conv_backward.
struct ConvCache {
  FeatureMatrix neighbor_sum;  ///< per face sum of d_n (scaled when mean_aggregate)
  FeatureMatrix absdiff_sum;   ///< per face sum of |d_f - d_n|
  FeatureMatrix output;        ///< post-activation output
};

/// out_f = W0 d_f + W1 sum_n d_n + W2 sum_n |d_f - d_n| + b, then ReLU when
/// enabled. Neighbor contributions are accumulated in ascending face id, so
/// the result does not depend on the order of a region's list.
FeatureMatrix conv_forward(const FeatureMatrix& features, const RegionTable& regions, const ConvParams& params,
                           const ConvOptions& options = {}, ConvCache* cache = nullptr);

struct ConvGradients {
  FeatureMatrix features;
  ConvParams params;
};

/// Adjoint of conv_forward; the subgradient of |x| at 0 is taken as 0.
/// Throws std::invalid_argument on a shape mismatch.
ConvGradients conv_backward(const FeatureMatrix& features, const RegionTable& regions, const ConvParams& params,
                            const ConvCache& cache, const FeatureMatrix& grad_out, const ConvOptions& options = {});

/// Convenience overload that recomputes the forward cache.
ConvGradients conv_backward(const FeatureMatrix& features, const RegionTable& regions, const ConvParams& params,
                            const FeatureMatrix& grad_out, const ConvOptions& options = {});

}  // namespace meshconv
