#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "meshconv/conv.hpp"
#include "meshconv/descriptors.hpp"
#include "meshconv/pooling.hpp"

using namespace meshconv;

namespace {

/// Face f of `m` becomes face perm[f].
Mesh relabel_faces(const Mesh& m, const std::vector<FaceId>& perm) {
  Mesh out = m;
  for (std::size_t f = 0; f < m.faces.size(); ++f) out.faces[static_cast<std::size_t>(perm[f])] = m.faces[f];
  return out;
}

std::vector<FaceId> random_permutation(std::size_t n, Rng& rng) {
  std::vector<FaceId> p(n);
  std::iota(p.begin(), p.end(), 0);
  shuffle(p.begin(), p.end(), rng);
  return p;
}

shapes::Rotation axis_rotation(const std::array<int, 3>& perm) {
  shapes::Rotation r{};
  for (int k = 0; k < 3; ++k) r[static_cast<std::size_t>(k)][static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = 1.0;
  return r;
}

/// Rows are 3-vectors that move rigidly with the mesh: centroid, face
/// normal, summed vertex normals. Neighbor differences keep their lengths
/// under rotations, translations and axis permutations.
FeatureMatrix rigid_features(const Mesh& m) {
  const AdjacencyMatrix adj = build_adjacency(m);
  const DescriptorInputs in = compute_descriptor_inputs(m, adj, compute_geometry(m));
  FeatureMatrix x(static_cast<Eigen::Index>(m.faces.size()), 9);
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const Vec3 parts[3] = {in.geometric.terms[f][0], in.geometric.terms[f][1], in.geodesic.sums[f][1]};
    for (int p = 0; p < 3; ++p) {
      for (int k = 0; k < 3; ++k) x(static_cast<Eigen::Index>(f), 3 * p + k) = parts[p][k];
    }
  }
  return x;
}

/// Smallest relative gap between distinct-rank weights; selection is only
/// stable under transforms when ranks are separated well above round-off.
double min_relative_gap(std::vector<double> w) {
  std::sort(w.begin(), w.end());
  double gap = 1e300;
  for (std::size_t i = 1; i < w.size(); ++i) gap = std::min(gap, (w[i] - w[i - 1]) / std::max(std::fabs(w[i]), 1e-12));
  return gap;
}

std::vector<FaceId> centers(const PoolPlan& p) {
  std::vector<FaceId> c;
  for (const PoolRegion& r : p.regions) c.push_back(r.center);
  return c;
}

Mesh medium_mesh(std::uint64_t seed) {
  const Mesh choices[] = {shapes::icosphere(3), shapes::box(3), shapes::torus(10, 6), shapes::icosphere(4)};
  return fixtures::perturbed(choices[seed % 4], derive_seed(0xface, seed));
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("adjacency and regions are unchanged by rigid motion and uniform scaling") {
    Rng rng(2024);
    for (std::uint64_t i = 0; i < 20; ++i) {
      const Mesh m = fixtures::small_closed_mesh(i);
      const double scale = i % 2 == 0 ? 0.25 : 4.0;
      const Vec3 shift{uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5)};
      const Mesh moved = shapes::transformed(m, shapes::random_rotation(rng), scale, shift);
      const AdjacencyMatrix a = build_adjacency(m);
      const AdjacencyMatrix b = build_adjacency(moved);
      CHECK(a.neighbors == b.neighbors);
      CHECK(a.shared_edges == b.shared_edges);
      for (int k : {3, 6, 9}) CHECK(build_regions(a, k) == build_regions(b, k));
    }
  }

  TEST_CASE("relabeling faces relabels adjacency rows and regions") {
    Rng rng(7);
    for (std::uint64_t i = 0; i < 20; ++i) {
      const Mesh m = fixtures::small_closed_mesh(i + 100);
      const std::vector<FaceId> perm = random_permutation(m.faces.size(), rng);
      const AdjacencyMatrix a = build_adjacency(m);
      const AdjacencyMatrix b = build_adjacency(relabel_faces(m, perm));
      const RegionTable ra = build_regions(a, 6);
      const RegionTable rb = build_regions(b, 6);
      for (std::size_t f = 0; f < m.faces.size(); ++f) {
        const std::size_t g = static_cast<std::size_t>(perm[f]);
        for (int s = 0; s < 3; ++s) {
          const FaceId n = a.neighbors[f][static_cast<std::size_t>(s)];
          CHECK(b.neighbors[g][static_cast<std::size_t>(s)] == (n == kNone ? kNone : perm[static_cast<std::size_t>(n)]));
        }
        std::vector<FaceId> mapped;
        for (FaceId n : ra.surrounding[f]) mapped.push_back(perm[static_cast<std::size_t>(n)]);
        CHECK(rb.surrounding[g] == mapped);
      }
    }
  }

  TEST_CASE("conv output ignores the order of each region list") {
    Rng rng(11);
    for (std::uint64_t i = 0; i < 12; ++i) {
      const Mesh m = fixtures::small_closed_mesh(i);
      const RegionTable regions = build_regions(build_adjacency(m), 3 + static_cast<int>(i % 8));
      RegionTable shuffled = regions;
      for (auto& row : shuffled.surrounding) shuffle(row.begin(), row.end(), rng);
      const FeatureMatrix x = fixtures::random_features(m.faces.size(), 5, i);
      const ConvParams p = ConvParams::random(5, 4, regions.kernel_size, rng);
      for (bool mean : {false, true}) {
        const ConvOptions opt{.relu = true, .mean_aggregate = mean};
        CHECK(conv_forward(x, shuffled, p, opt) == conv_forward(x, regions, p, opt));
      }
    }
  }

  TEST_CASE("conv commutes with face relabeling") {
    Rng rng(12);
    for (std::uint64_t i = 0; i < 12; ++i) {
      const Mesh m = fixtures::small_closed_mesh(i + 40);
      const std::vector<FaceId> perm = random_permutation(m.faces.size(), rng);
      const RegionTable ra = build_regions(build_adjacency(m), 6);
      const RegionTable rb = build_regions(build_adjacency(relabel_faces(m, perm)), 6);
      const FeatureMatrix x = fixtures::random_features(m.faces.size(), 3, i);
      FeatureMatrix xp(x.rows(), x.cols());
      for (Eigen::Index f = 0; f < x.rows(); ++f) xp.row(perm[static_cast<std::size_t>(f)]) = x.row(f);
      const ConvParams p = ConvParams::random(3, 4, 6, rng);
      const FeatureMatrix ya = conv_forward(x, ra, p);
      const FeatureMatrix yb = conv_forward(xp, rb, p);
      double err = 0.0;
      for (Eigen::Index f = 0; f < x.rows(); ++f) {
        err = std::max(err, (yb.row(perm[static_cast<std::size_t>(f)]) - ya.row(f)).cwiseAbs().maxCoeff());
      }
      CHECK(err < 1e-12);
    }
  }

  TEST_CASE("pooling selection is unchanged by axis permutation, translation and rotation") {
    Rng rng(99);
    int compared = 0;
    for (std::uint64_t i = 0; i < 24; ++i) {
      const Mesh m = medium_mesh(i);
      const std::size_t target = m.faces.size() / 2;
      const AdjacencyMatrix adj = build_adjacency(m);
      const PoolWeights w = compute_face_weights(rigid_features(m), adj);
      if (min_relative_gap(w.weights) < 1e-6) continue;
      ++compared;
      const PoolPlan base = plan_pass(m, adj, w, target);
      REQUIRE_FALSE(base.empty());

      std::vector<Mesh> variants;
      for (const auto& perm : std::vector<std::array<int, 3>>{{1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}}) {
        variants.push_back(shapes::permuted_axes(m, perm));
      }
      variants.push_back(shapes::transformed(m, axis_rotation({0, 1, 2}), 1.0,
                                             {uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3)}));
      variants.push_back(shapes::transformed(m, shapes::random_rotation(rng), 1.0, {0.5, -0.25, 2.0}));
      for (const Mesh& v : variants) {
        const AdjacencyMatrix va = build_adjacency(v);
        REQUIRE(va.neighbors == adj.neighbors);
        const PoolPlan plan = plan_pass(v, va, compute_face_weights(rigid_features(v), va), target);
        CHECK(centers(plan) == centers(base));
        const PooledMesh a = pool_to_target(m, adj, rigid_features(m), target);
        const PooledMesh b = pool_to_target(v, va, rigid_features(v), target);
        CHECK(a.mesh.faces == b.mesh.faces);
      }
    }
    CHECK(compared >= 16);
  }
}
