#pragma once

#include <Eigen/Core>

namespace meshconv {

/// F x C per-face features, one row per face.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace meshconv
