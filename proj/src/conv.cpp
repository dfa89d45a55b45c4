#include "meshconv/conv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace meshconv {
namespace {

std::vector<FaceId> sorted_members(const std::vector<FaceId>& row) {
  std::vector<FaceId> ids = row;
  std::sort(ids.begin(), ids.end());
  return ids;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_shapes(const FeatureMatrix& features, const RegionTable& regions, const ConvParams& params) {
  if (static_cast<std::size_t>(features.rows()) != regions.size()) {
    throw std::invalid_argument("conv: feature rows do not match region table");
  }
  if (features.cols() != params.in_channels() || params.w_neighbors.cols() != params.in_channels() ||
      params.w_absdiff.cols() != params.in_channels() || params.bias.size() != params.out_channels()) {
    throw std::invalid_argument("conv: channel mismatch between features and parameters");
  }
}

}  // namespace

RegionTable build_regions(const AdjacencyMatrix& adj, int kernel_size) {
  if (kernel_size < 3) throw std::invalid_argument("build_regions: kernel size must be >= 3");
  const auto nf = static_cast<FaceId>(adj.size());
  RegionTable table;
  table.kernel_size = kernel_size;
  table.surrounding.resize(nf);

  // Stamp per face avoids clearing a visited array for every row.
  std::vector<FaceId> stamp(nf, kNone);
  for (FaceId center = 0; center < nf; ++center) {
    auto& row = table.surrounding[center];
    row.reserve(kernel_size);
    stamp[center] = center;
    for (FaceId nb : adj.neighbors[center]) {
      if (nb == kNone || stamp[nb] == center || static_cast<int>(row.size()) >= kernel_size) continue;
      stamp[nb] = center;
      row.push_back(nb);
    }
    for (std::size_t head = 0; head < row.size() && static_cast<int>(row.size()) < kernel_size; ++head) {
      for (FaceId nb : adj.neighbors[row[head]]) {
        if (nb == kNone || stamp[nb] == center) continue;
        stamp[nb] = center;
        row.push_back(nb);
        if (static_cast<int>(row.size()) == kernel_size) break;
      }
    }
  }
  return table;
}

ConvParams ConvParams::zeros(Eigen::Index c_in, Eigen::Index c_out) {
  ConvParams p;
  p.w_center = Eigen::MatrixXd::Zero(c_out, c_in);
  p.w_neighbors = Eigen::MatrixXd::Zero(c_out, c_in);
  p.w_absdiff = Eigen::MatrixXd::Zero(c_out, c_in);
  p.bias = Eigen::VectorXd::Zero(c_out);
  return p;
}

ConvParams ConvParams::random(Eigen::Index c_in, Eigen::Index c_out, int kernel_size, Rng& rng) {
  ConvParams p = zeros(c_in, c_out);
  const double s = 1.0 / std::sqrt(static_cast<double>(c_in) * (1.0 + kernel_size));
  for (Eigen::MatrixXd* w : {&p.w_center, &p.w_neighbors, &p.w_absdiff}) {
    for (Eigen::Index i = 0; i < w->size(); ++i) w->data()[i] = uniform(rng, -s, s);
  }
  return p;
}

FeatureMatrix conv_forward(const FeatureMatrix& features, const RegionTable& regions, const ConvParams& params,
                           const ConvOptions& options, ConvCache* cache) {
  check_shapes(features, regions, params);
  const Eigen::Index nf = features.rows();
  const Eigen::Index c_in = features.cols();

  FeatureMatrix nsum = FeatureMatrix::Zero(nf, c_in);
  FeatureMatrix asum = FeatureMatrix::Zero(nf, c_in);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto members = sorted_members(regions.surrounding[f]);
    auto ns = nsum.row(f);
    auto as = asum.row(f);
    const auto df = features.row(f);
    for (FaceId n : members) {
      const auto dn = features.row(n);
      ns += dn;
      as += (df - dn).cwiseAbs();
    }
    if (options.mean_aggregate && !members.empty()) {
      const double inv = 1.0 / static_cast<double>(members.size());
      ns *= inv;
      as *= inv;
    }
  }

  FeatureMatrix out = features * params.w_center.transpose();
  out.noalias() += nsum * params.w_neighbors.transpose();
  out.noalias() += asum * params.w_absdiff.transpose();
  out.rowwise() += params.bias.transpose();
  if (options.relu) out = out.cwiseMax(0.0);

  if (cache != nullptr) {
    cache->neighbor_sum = std::move(nsum);
    cache->absdiff_sum = std::move(asum);
    cache->output = out;
  }
  return out;
}

ConvGradients conv_backward(const FeatureMatrix& features, const RegionTable& regions, const ConvParams& params,
                            const ConvCache& cache, const FeatureMatrix& grad_out, const ConvOptions& options) {
  check_shapes(features, regions, params);
  const Eigen::Index nf = features.rows();
  const Eigen::Index c_in = features.cols();
  if (grad_out.rows() != nf || grad_out.cols() != params.out_channels() || cache.output.rows() != nf) {
    throw std::invalid_argument("conv_backward: gradient shape does not match conv output");
  }

  // Gradient at the pre-activation; ReLU passes where the output is positive.
  FeatureMatrix g = grad_out;
  if (options.relu) g = (cache.output.array() > 0.0).select(grad_out, 0.0);

  ConvGradients grads;
  grads.params.w_center = g.transpose() * features;
  grads.params.w_neighbors = g.transpose() * cache.neighbor_sum;
  grads.params.w_absdiff = g.transpose() * cache.absdiff_sum;
  grads.params.bias = g.colwise().sum().transpose();

  grads.features = g * params.w_center;
  const FeatureMatrix h_neighbors = g * params.w_neighbors;
  const FeatureMatrix h_absdiff = g * params.w_absdiff;

  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto members = sorted_members(regions.surrounding[f]);
    if (members.empty()) continue;
    const double scale = options.mean_aggregate ? 1.0 / static_cast<double>(members.size()) : 1.0;
    const auto hn = h_neighbors.row(f);
    const auto ha = h_absdiff.row(f);
    const auto df = features.row(f);
    for (FaceId n : members) {
      const auto dn = features.row(n);
      grads.features.row(n) += scale * hn;
      for (Eigen::Index c = 0; c < c_in; ++c) {
        const double s = scale * ha(c) * sign(df(c) - dn(c));
        grads.features(f, c) += s;
        grads.features(n, c) -= s;
      }
    }
  }
  return grads;
}

ConvGradients conv_backward(const FeatureMatrix& features, const RegionTable& regions, const ConvParams& params,
                            const FeatureMatrix& grad_out, const ConvOptions& options) {
  ConvCache cache;
  conv_forward(features, regions, params, options, &cache);
  return conv_backward(features, regions, params, cache, grad_out, options);
}

}  // namespace meshconv
