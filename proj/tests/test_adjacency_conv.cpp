#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "meshconv/adjacency.hpp"
#include "meshconv/conv.hpp"
#include "meshconv/shapes.hpp"
#include "oracles.hpp"

using namespace meshconv;

namespace {

FeatureMatrix column(std::initializer_list<double> values) {
  FeatureMatrix x(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) x(i++, 0) = v;
  return x;
}

ConvParams scalar_conv(double w0, double w1, double w2) {
  ConvParams p = ConvParams::zeros(1, 1);
  p.w_center(0, 0) = w0;
  p.w_neighbors(0, 0) = w1;
  p.w_absdiff(0, 0) = w2;
  return p;
}

// Forward with every argument of |.| away from zero, so finite differences
// stay on one side of each kink.
bool kink_free(const FeatureMatrix& x, const RegionTable& r, double margin) {
  for (std::size_t f = 0; f < r.size(); ++f) {
    for (FaceId n : r.surrounding[f]) {
      if (((x.row(static_cast<Eigen::Index>(f)) - x.row(n)).array().abs() < margin).any()) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("adjacency") {
  TEST_CASE("tetrahedron rows use the ascending tie-break") {
    const AdjacencyMatrix adj = build_adjacency(shapes::tetrahedron());
    CHECK(adj.neighbors[0] == std::array<FaceId, 3>{1, 2, 3});
    CHECK(adj.border_slots() == 0);
  }

  TEST_CASE("single triangle has only border slots") {
    const AdjacencyMatrix adj = build_adjacency(shapes::single_triangle());
    CHECK(adj.neighbors[0] == std::array<FaceId, 3>{kNone, kNone, kNone});
    CHECK(adj.border_slots() == 3);
  }

  TEST_CASE("icosahedron and perturbed shapes match the brute-force oracle") {
    CHECK(build_adjacency(shapes::icosahedron()) == oracle::adjacency(shapes::icosahedron()));
    for (std::uint64_t s = 0; s < 24; ++s) {
      const Mesh m = fixtures::small_closed_mesh(s);
      CHECK(build_adjacency(m) == oracle::adjacency(m));
    }
    const Mesh open = shapes::flat_grid(4);
    CHECK(build_adjacency(open) == oracle::adjacency(open));
  }

  TEST_CASE("slots are sorted by shared edge length, longest first") {
    const Mesh m = fixtures::perturbed(shapes::icosphere(3), 9);
    const AdjacencyMatrix adj = build_adjacency(m);
    for (std::size_t f = 0; f < adj.size(); ++f) {
      for (int i = 0; i + 1 < 3; ++i) {
        const auto& a = adj.shared_edges[f][i];
        const auto& b = adj.shared_edges[f][i + 1];
        CHECK(segment_length(m.vertices[a[0]], m.vertices[a[1]]) >=
              segment_length(m.vertices[b[0]], m.vertices[b[1]]));
      }
    }
  }

  TEST_CASE("adjacency is symmetric and the shared edge is reversed across it") {
    const Mesh m = fixtures::perturbed(shapes::torus(9, 5), 2);
    const AdjacencyMatrix adj = build_adjacency(m);
    for (FaceId f = 0; f < static_cast<FaceId>(adj.size()); ++f) {
      for (int i = 0; i < 3; ++i) {
        const FaceId g = adj.neighbors[f][i];
        const auto& row = adj.neighbors[g];
        const auto it = std::find(row.begin(), row.end(), f);
        REQUIRE(it != row.end());
        const auto& back = adj.shared_edges[g][it - row.begin()];
        CHECK(back == SharedEdge{adj.shared_edges[f][i][1], adj.shared_edges[f][i][0]});
      }
    }
  }

  TEST_CASE("an edge on three faces throws") {
    Mesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
    m.faces = {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}};
    CHECK_THROWS_WITH_AS(build_adjacency(m), "non-manifold edge (0, 1) shared by more than two faces", MeshError);
  }
}

TEST_SUITE("regions") {
  TEST_CASE("tetrahedron K=3 lists the other faces; K=10 saturates") {
    const AdjacencyMatrix adj = build_adjacency(shapes::tetrahedron());
    for (const RegionTable& r : {build_regions(adj, 3), build_regions(adj, 10)}) {
      for (FaceId f = 0; f < 4; ++f) {
        std::vector<FaceId> row = r.surrounding[f];
        std::sort(row.begin(), row.end());
        std::vector<FaceId> others;
        for (FaceId g = 0; g < 4; ++g) {
          if (g != f) others.push_back(g);
        }
        CHECK(row == others);
      }
    }
  }

  TEST_CASE("icosahedron K=12 face 0: three neighbors then nine second-ring faces") {
    const Mesh ico = shapes::icosahedron();
    const AdjacencyMatrix adj = build_adjacency(ico);
    const RegionTable r = build_regions(adj, 12);
    const auto& row = r.surrounding[0];
    REQUIRE(row.size() == 12);
    std::vector<FaceId> first(row.begin(), row.begin() + 3);
    std::sort(first.begin(), first.end());
    CHECK(first == oracle::edge_neighbors(ico, 0));
    CHECK(r == oracle::regions(adj, 12));
  }

  TEST_CASE("rows have no duplicates, exclude the center and fill up to K") {
    const Mesh m = fixtures::perturbed(shapes::icosphere(3), 4);
    const AdjacencyMatrix adj = build_adjacency(m);
    for (int k : {3, 6, 9, 20}) {
      const RegionTable r = build_regions(adj, k);
      CHECK(r == oracle::regions(adj, k));
      for (FaceId f = 0; f < static_cast<FaceId>(r.size()); ++f) {
        std::vector<FaceId> row = r.surrounding[f];
        CHECK(static_cast<int>(row.size()) == k);
        CHECK(std::find(row.begin(), row.end(), f) == row.end());
        std::sort(row.begin(), row.end());
        CHECK(std::adjacent_find(row.begin(), row.end()) == row.end());
      }
    }
  }

  TEST_CASE("K below 3 is rejected") { CHECK_THROWS_AS(build_regions(build_adjacency(shapes::icosahedron()), 2), std::invalid_argument); }
}

TEST_SUITE("conv") {
  TEST_CASE("identity center weight passes the input through") {
    const AdjacencyMatrix adj = build_adjacency(shapes::icosahedron());
    const RegionTable r = build_regions(adj, 3);
    const FeatureMatrix x = fixtures::random_features(20, 5, 1);
    ConvParams p = ConvParams::zeros(5, 5);
    p.w_center.setIdentity();
    CHECK(conv_forward(x, r, p, {.relu = false}) == x);
  }

  TEST_CASE("constant field: the absolute-difference term contributes nothing") {
    const RegionTable r = build_regions(build_adjacency(shapes::icosahedron()), 6);
    const FeatureMatrix x = FeatureMatrix::Constant(20, 1, 2.5);
    const FeatureMatrix with = conv_forward(x, r, scalar_conv(0.3, 0.2, 5.0), {.relu = false});
    const FeatureMatrix without = conv_forward(x, r, scalar_conv(0.3, 0.2, 0.0), {.relu = false});
    CHECK(with == without);
  }

  TEST_CASE("tetrahedron neighbor sum of a one-hot field") {
    const RegionTable r = build_regions(build_adjacency(shapes::tetrahedron()), 3);
    const FeatureMatrix out = conv_forward(column({1, 0, 0, 0}), r, scalar_conv(0, 1, 0), {.relu = false});
    CHECK(out == column({0, 1, 1, 1}));
  }

  TEST_CASE("ReLU clamps negative outputs and mean aggregation divides by the member count") {
    const RegionTable r = build_regions(build_adjacency(shapes::tetrahedron()), 3);
    const FeatureMatrix x = column({1, 2, 3, 4});
    CHECK(conv_forward(x, r, scalar_conv(-1, 0, 0)) == column({0, 0, 0, 0}));
    const FeatureMatrix mean = conv_forward(x, r, scalar_conv(0, 1, 0), {.relu = false, .mean_aggregate = true});
    CHECK(mean(0, 0) == doctest::Approx(3.0));
  }

  TEST_CASE("zero upstream gradient gives zero gradients") {
    const RegionTable r = build_regions(build_adjacency(shapes::icosahedron()), 6);
    Rng rng(5);
    const ConvParams p = ConvParams::random(4, 3, 6, rng);
    const FeatureMatrix x = fixtures::random_features(20, 4, 2);
    const ConvGradients g = conv_backward(x, r, p, FeatureMatrix::Zero(20, 3));
    CHECK(g.features.isZero(0.0));
    CHECK(g.params.w_center.isZero(0.0));
    CHECK(g.params.w_neighbors.isZero(0.0));
    CHECK(g.params.w_absdiff.isZero(0.0));
    CHECK(g.params.bias.isZero(0.0));
  }

  TEST_CASE("W1-only layer scatters W1^T to the region members") {
    const RegionTable r = build_regions(build_adjacency(shapes::icosahedron()), 4);
    Rng rng(6);
    ConvParams p = ConvParams::random(3, 2, 4, rng);
    p.w_center.setZero();
    p.w_absdiff.setZero();
    FeatureMatrix grad_out = FeatureMatrix::Zero(20, 2);
    grad_out(7, 1) = 1.0;
    const ConvGradients g = conv_backward(fixtures::random_features(20, 3, 3), r, p, grad_out, {.relu = false});
    for (FaceId f = 0; f < 20; ++f) {
      const auto& row = r.surrounding[7];
      const bool member = std::find(row.begin(), row.end(), f) != row.end();
      const Eigen::RowVectorXd expected =
          member ? Eigen::RowVectorXd(p.w_neighbors.row(1)) : Eigen::RowVectorXd::Zero(3);
      CHECK((g.features.row(f) - expected).norm() == 0.0);
    }
  }

  TEST_CASE("backward matches central differences at kink-free points") {
    const Mesh m = fixtures::perturbed(shapes::icosphere(2), 7);
    const RegionTable r = build_regions(build_adjacency(m), 6);
    Rng rng(7);
    const ConvParams p = ConvParams::random(3, 4, 6, rng);
    const FeatureMatrix x = fixtures::random_features(m.faces.size(), 3, 7);
    REQUIRE(kink_free(x, r, 1e-4));
    const FeatureMatrix seed_grad = fixtures::random_features(m.faces.size(), 4, 8);
    for (bool relu : {false, true}) {
      const ConvOptions opt{.relu = relu};
      auto loss = [&](const FeatureMatrix& xx, const ConvParams& pp) {
        return conv_forward(xx, r, pp, opt).cwiseProduct(seed_grad).sum();
      };
      const ConvGradients g = conv_backward(x, r, p, seed_grad, opt);
      const double h = 1e-5;
      double worst = 0.0;
      for (Eigen::Index i = 0; i < x.size(); i += 7) {
        FeatureMatrix xp = x;
        FeatureMatrix xm = x;
        xp.data()[i] += h;
        xm.data()[i] -= h;
        const double num = (loss(xp, p) - loss(xm, p)) / (2 * h);
        worst = std::max(worst, std::fabs(num - g.features.data()[i]) / std::max({std::fabs(num), 1e-4}));
      }
      for (Eigen::Index i = 0; i < p.w_absdiff.size(); ++i) {
        ConvParams pp = p;
        ConvParams pm = p;
        pp.w_absdiff.data()[i] += h;
        pm.w_absdiff.data()[i] -= h;
        const double num = (loss(x, pp) - loss(x, pm)) / (2 * h);
        worst = std::max(worst, std::fabs(num - g.params.w_absdiff.data()[i]) / std::max({std::fabs(num), 1e-4}));
      }
      CHECK(worst < 1e-4);
    }
  }

  TEST_CASE("locality: features outside a region do not affect its output") {
    const Mesh m = fixtures::perturbed(shapes::icosphere(2), 12);
    const RegionTable r = build_regions(build_adjacency(m), 5);
    Rng rng(12);
    const ConvParams p = ConvParams::random(2, 2, 5, rng);
    const FeatureMatrix x = fixtures::random_features(m.faces.size(), 2, 12);
    const FeatureMatrix full = conv_forward(x, r, p);
    for (FaceId f : {0, 17, 55}) {
      FeatureMatrix masked = FeatureMatrix::Zero(x.rows(), x.cols());
      masked.row(f) = x.row(f);
      for (FaceId n : r.surrounding[f]) masked.row(n) = x.row(n);
      CHECK(conv_forward(masked, r, p).row(f) == full.row(f));
    }
  }

  TEST_CASE("shape mismatches throw") {
    const RegionTable r = build_regions(build_adjacency(shapes::tetrahedron()), 3);
    CHECK_THROWS_AS(conv_forward(FeatureMatrix::Zero(3, 1), r, ConvParams::zeros(1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(conv_forward(FeatureMatrix::Zero(4, 2), r, ConvParams::zeros(1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(conv_backward(FeatureMatrix::Zero(4, 1), r, ConvParams::zeros(1, 1), FeatureMatrix::Zero(4, 2)),
                    std::invalid_argument);
  }
}
