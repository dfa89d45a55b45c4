#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "meshconv/data.hpp"
#include "meshconv/gradcheck.hpp"
#include "meshconv/network.hpp"
#include "meshconv/shapes.hpp"

using namespace meshconv;

namespace {

ModelConfig small_config(std::size_t t1, std::size_t t2) {
  ModelConfig c;
  c.k_geo = 2;
  c.k_geom = 2;
  c.blocks = {{1, 8, 3, t1}, {2, 8, 5, t2}};
  return c;
}

// A x I3: mixes 3-vector blocks but acts identically on x, y, z.
Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * a.rows(), 3 * a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(3 * i, 3 * j, 3, 3) = a(i, j) * Eigen::Matrix3d::Identity();
  }
  return out;
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -0.5, 0.5);
  return m;
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("config validation") {
    CHECK_NOTHROW(ModelConfig{}.validate());
    ModelConfig c;
    c.blocks[1].pool_target = 400;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ModelConfig{};
    c.num_classes = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ModelConfig{};
    c.blocks[0].kernel_size = 2;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ModelConfig{};
    c.head = HeadKind::kClassChannels;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.blocks.back().channels = c.num_classes;
    CHECK_NOTHROW(c.validate());
  }

  TEST_CASE("parameter shapes chain and the tensor list covers every parameter") {
    ModelConfig c;
    ModelParams p = ModelParams::init(c);
    REQUIRE(p.conv.size() == 6);
    Eigen::Index in = 48;
    for (std::size_t i = 0; i < p.conv.size(); ++i) {
      CHECK(p.conv[i].in_channels() == in);
      in = p.conv[i].out_channels();
    }
    CHECK(p.classifier.rows() == 3);
    CHECK(p.classifier.cols() == 128);
    std::size_t total = 0;
    for (const TensorRef& t : tensors(p)) total += t.size;
    CHECK(total == parameter_count(p));
    CHECK(tensors(p).front().name == "descriptor.geodesic");
    CHECK(tensors(p).back().name == "classifier.bias");
  }

  TEST_CASE("zero classifier weights give logits equal to the bias") {
    const ModelConfig c = small_config(60, 40);
    ModelParams p = ModelParams::init(c);
    p.classifier.setZero();
    p.classifier_bias = Eigen::Vector3d(0.5, -1.0, 2.0);
    const MeshInput in = prepare_input(fixtures::perturbed(shapes::icosphere(2), 1), c);
    CHECK(model_forward(in, p, c).logits == p.classifier_bias);
  }

  TEST_CASE("500-face mesh: default schedule lands in the 400/300/200 bands") {
    const ModelConfig c;
    const ModelParams p = ModelParams::init(c);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Mesh m = preprocess(mesh_near_face_count(500, seed));
      const ForwardResult fr = model_forward(prepare_input(m, c), p, c);
      REQUIRE_FALSE(fr.any_stall());
      const auto counts = fr.block_face_counts();
      REQUIRE(counts.size() == 3);
      for (std::size_t b = 0; b < 3; ++b) {
        CHECK(counts[b] <= c.blocks[b].pool_target);
        CHECK(counts[b] + 3 >= c.blocks[b].pool_target);
      }
    }
  }

  TEST_CASE("frozen replay reproduces the forward pass") {
    const ModelConfig c = small_config(60, 40);
    const ModelParams p = ModelParams::init(c);
    const MeshInput in = prepare_input(fixtures::perturbed(shapes::icosphere(2), 2), c);
    const ForwardResult a = model_forward(in, p, c);
    const FrozenPlans plans = frozen_plans(a.tape);
    CHECK(model_forward(in, p, c, &plans).logits == a.logits);
  }

  TEST_CASE("global average pooling examples") {
    FeatureMatrix one(1, 3);
    one << 1, 2, 3;
    CHECK(global_average_pool(one) == Eigen::Vector3d(1, 2, 3));
    CHECK(global_average_pool(FeatureMatrix::Constant(7, 2, 0.5)) == Eigen::Vector2d(0.5, 0.5));
    FeatureMatrix two(2, 1);
    two << 0, 2;
    CHECK(global_average_pool(two)(0) == 1.0);
    CHECK_THROWS_AS(global_average_pool(FeatureMatrix(0, 3)), std::invalid_argument);
  }

  TEST_CASE("cross entropy: uniform logits, monotone decrease, gradient") {
    CHECK(cross_entropy_loss(Eigen::VectorXd::Zero(5), 2).loss == doctest::Approx(std::log(5.0)).epsilon(1e-15));
    double prev = 1e300;
    for (double z = -5; z <= 30; z += 5) {
      Eigen::VectorXd logits = Eigen::VectorXd::Zero(3);
      logits(1) = z;
      const double loss = cross_entropy_loss(logits, 1).loss;
      CHECK(loss < prev);
      prev = loss;
    }
    CHECK(prev < 1e-12);
    Eigen::VectorXd big(3);
    big << 1000, -1000, 0;
    CHECK(std::isfinite(cross_entropy_loss(big, 1).loss));

    Rng rng(3);
    Eigen::VectorXd logits(4);
    for (int i = 0; i < 4; ++i) logits(i) = uniform(rng, -3, 3);
    const LossResult lr = cross_entropy_loss(logits, 3);
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd up = logits;
      Eigen::VectorXd dn = logits;
      up(i) += 1e-5;
      dn(i) -= 1e-5;
      const double num = (cross_entropy_loss(up, 3).loss - cross_entropy_loss(dn, 3).loss) / 2e-5;
      CHECK(std::fabs(num - lr.grad(i)) <= 1e-6 * std::max(std::fabs(num), 1e-4));
    }
    CHECK_THROWS_AS(cross_entropy_loss(logits, 4), std::out_of_range);
    CHECK_THROWS_AS(cross_entropy_loss(logits, -1), std::out_of_range);
  }

  TEST_CASE("backward: zero logits gradient and the classifier outer product") {
    const ModelConfig c = small_config(60, 40);
    const ModelParams p = ModelParams::init(c);
    const MeshInput in = prepare_input(fixtures::perturbed(shapes::icosphere(2), 4), c);
    const ForwardResult fr = model_forward(in, p, c);
    ModelParams zero = model_backward(in, fr.tape, p, c, Eigen::VectorXd::Zero(3));
    for (const TensorRef& t : tensors(zero)) {
      for (std::size_t i = 0; i < t.size; ++i) CHECK(t.data[i] == 0.0);
    }
    const Eigen::Vector3d g(0.2, -0.7, 0.5);
    const ModelParams grads = model_backward(in, fr.tape, p, c, g);
    CHECK((grads.classifier - g * fr.tape.pooled.transpose()).norm() == 0.0);
    CHECK(grads.classifier_bias == Eigen::VectorXd(g));

    CHECK_THROWS_AS(model_backward(in, fr.tape, p, c, Eigen::VectorXd::Zero(4)), std::invalid_argument);
    ModelConfig other = c;
    other.blocks.pop_back();
    CHECK_THROWS_AS(model_backward(in, fr.tape, p, other, g), std::invalid_argument);
  }

  TEST_CASE("end-to-end gradients on a 60-face mesh") {
    const Mesh m = gradcheck_mesh(60, 11);
    for (bool linear : {false, true}) {
      const ModelConfig c = gradcheck_model_config(m.faces.size(), 3, linear, 11);
      const ModelParams p = gradcheck_params(c, linear);
      GradCheckOptions opt;
      opt.tolerance = linear ? 1e-6 : 1e-3;
      const GradCheckReport r = grad_check(prepare_input(m, c), 1, p, c, opt);
      CHECK(r.passed());
      CHECK(r.max_rel_error() <= opt.tolerance);
      CHECK(r.checked() > 0);
    }
  }

  TEST_CASE("a corrupted conv adjoint is flagged") {
    const Mesh m = gradcheck_mesh(55, 2);
    const ModelConfig c = gradcheck_model_config(m.faces.size(), 3, false, 2);
    GradCheckOptions opt;
    opt.conv_backward_override = [](const FeatureMatrix& x, const RegionTable& r, const ConvParams& p,
                                    const ConvCache& cache, const FeatureMatrix& g, const ConvOptions& o) {
      ConvGradients out = conv_backward(x, r, p, cache, g, o);
      out.params.w_neighbors *= 1.05;
      return out;
    };
    const GradCheckReport r = grad_check(prepare_input(m, c), 0, gradcheck_params(c, false), c, opt);
    CHECK_FALSE(r.passed());
    bool conv_flagged = false;
    for (const GroupReport& g : r.groups) {
      if (g.name.rfind("conv", 0) == 0 && !g.passed) conv_flagged = true;
      if (g.name == "classifier") CHECK(g.passed);
    }
    CHECK(conv_flagged);
  }

  TEST_CASE("class-channel head: logits are the averaged last layer") {
    ModelConfig c = small_config(60, 40);
    c.head = HeadKind::kClassChannels;
    c.blocks.back().channels = 3;
    const ModelParams p = ModelParams::init(c);
    CHECK(p.classifier.size() == 0);
    const MeshInput in = prepare_input(fixtures::perturbed(shapes::icosphere(2), 6), c);
    const ForwardResult fr = model_forward(in, p, c);
    CHECK(fr.logits == fr.tape.pooled);
    const GradCheckReport r = grad_check(in, 2, p, c, {.max_entries_per_tensor = 12});
    CHECK(r.passed());
  }

  TEST_CASE("invalid meshes are rejected before the forward pass") {
    Mesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    m.faces = {{0, 1, 2}};
    CHECK_THROWS_AS(prepare_input(m, ModelConfig{}), MeshError);
  }

  TEST_CASE("cyclic axis permutation leaves logits unchanged for axis-blind weights") {
    // Weights of the form A x I3 treat x, y, z alike, so a rotation that only
    // permutes axes permutes every 3-block and the pooled logits agree.
    ModelConfig c;
    c.k_geo = 1;
    c.k_geom = 1;
    c.blocks = {{1, 6, 3, 120}, {1, 9, 4, 80}};
    ModelParams p = ModelParams::init(c);
    Rng rng(77);
    for (ConvParams& cp : p.conv) {
      const Eigen::Index o = cp.out_channels() / 3;
      const Eigen::Index i = cp.in_channels() / 3;
      cp.w_center = kron_identity(random_matrix(o, i, rng));
      cp.w_neighbors = kron_identity(random_matrix(o, i, rng));
      cp.w_absdiff = kron_identity(random_matrix(o, i, rng));
      const Eigen::VectorXd b = random_matrix(o, 1, rng);
      for (Eigen::Index k = 0; k < cp.bias.size(); ++k) cp.bias(k) = b(k / 3);
    }
    for (Eigen::Index r = 0; r < p.classifier.rows(); ++r) {
      for (Eigen::Index k = 0; k < p.classifier.cols(); ++k) p.classifier(r, k) = uniform(rng, -1, 1);
      for (Eigen::Index k = 0; k < p.classifier.cols(); ++k) p.classifier(r, k) = p.classifier(r, k - k % 3);
    }
    const Mesh m = preprocess(fixtures::perturbed(shapes::icosphere(3), 5));
    const ForwardResult a = model_forward(prepare_input(m, c), p, c);
    const ForwardResult b = model_forward(prepare_input(shapes::permuted_axes(m, {1, 2, 0}), c), p, c);
    CHECK(a.block_face_counts() == b.block_face_counts());
    CHECK((a.logits - b.logits).cwiseAbs().maxCoeff() < 1e-6);
  }
}
