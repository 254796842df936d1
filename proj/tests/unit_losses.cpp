#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "augraph/errors.hpp"
#include "augraph/losses.hpp"
#include "augraph/rng.hpp"

using namespace augraph;

namespace {

Mat make_row(std::initializer_list<Scalar> vals) {
  Mat m(1, static_cast<Eigen::Index>(vals.size()));
  Eigen::Index j = 0;
  for (Scalar v : vals) m(0, j++) = v;
  return m;
}

}  // namespace

TEST_CASE("equal occurrence rates give unit weights") {
  Mat w = compute_weights(make_row({0.3, 0.3, 0.3, 0.3}));
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(w(0, i) == doctest::Approx(1.0));
}

TEST_CASE("hand-computed weights for rates [0.5, 0.25, 0.25]") {
  // Inverse rates (2, 4, 4) sum to 10; scaled by N/10 = 0.3.
  Mat w = compute_weights(make_row({0.5, 0.25, 0.25}));
  CHECK(w(0, 0) == doctest::Approx(0.6));
  CHECK(w(0, 1) == doctest::Approx(1.2));
  CHECK(w(0, 2) == doctest::Approx(1.2));
}

TEST_CASE("weights sum to N for random valid rates") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(10));
    Mat rates(1, n);
    for (Eigen::Index i = 0; i < n; ++i) rates(0, i) = rng.uniform(0.01, 1.0);
    Mat w = compute_weights(rates);
    CHECK(std::abs(w.sum() - static_cast<double>(n)) < 1e-9);
  }
}

TEST_CASE("rarer AUs always get strictly larger weights") {
  Mat w = compute_weights(make_row({0.9, 0.5, 0.1, 0.05}));
  CHECK(w(0, 0) < w(0, 1));
  CHECK(w(0, 1) < w(0, 2));
  CHECK(w(0, 2) < w(0, 3));
}

TEST_CASE("non-positive or above-one rates are rejected") {
  CHECK_THROWS_AS(compute_weights(make_row({0.5, 0.0})), ConfigError);
  CHECK_THROWS_AS(compute_weights(make_row({0.5, -0.1})), ConfigError);
  CHECK_THROWS_AS(compute_weights(make_row({0.5, 1.5})), ConfigError);
  CHECK_NOTHROW(compute_weights(make_row({1.0, 0.5})));
}

TEST_CASE("perfect predictions drive the loss to (near) zero") {
  Mat w = make_row({1.0, 1.0});
  Mat y = make_row({1.0, 0.0});
  auto p = constant(make_row({1.0, 0.0}));
  auto loss = weighted_asymmetric_loss(p, y, w);
  CHECK(loss->item() == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(loss->item() >= 0.0);
}

TEST_CASE("hand value: single inactivated AU at p = 0.5") {
  auto loss = weighted_asymmetric_loss(constant(make_row({0.5})), make_row({0.0}),
                                       make_row({1.0}));
  CHECK(loss->item() == doctest::Approx(0.34657359).epsilon(1e-6));
}

TEST_CASE("the inactivated term carries half the magnitude at p = 0.5") {
  auto off = weighted_asymmetric_loss(constant(make_row({0.5})), make_row({0.0}),
                                      make_row({1.0}));
  auto on = weighted_asymmetric_loss(constant(make_row({0.5})), make_row({1.0}),
                                     make_row({1.0}));
  CHECK(off->item() == doctest::Approx(0.5 * on->item()));
}

TEST_CASE("loss is non-negative for random probabilities and labels") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 3;
    Mat p(1, n), y(1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(0, i) = rng.uniform01();
      y(0, i) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    Mat w = compute_weights(make_row({0.4, 0.3, 0.3}));
    CHECK(weighted_asymmetric_loss(constant(p), y, w)->item() >= 0.0);
  }
}

TEST_CASE("out-of-range probabilities violate the contract") {
  Mat y = make_row({1.0});
  Mat w = make_row({1.0});
  CHECK_THROWS_AS(weighted_asymmetric_loss(constant(make_row({1.2})), y, w), ConfigError);
  CHECK_THROWS_AS(weighted_asymmetric_loss(constant(make_row({-0.1})), y, w), ConfigError);
}

TEST_CASE("easy-negative gradient fades as p approaches zero") {
  auto grad_at = [](Scalar pv) {
    auto p = variable(make_row({pv}));
    backward(weighted_asymmetric_loss(p, make_row({0.0}), make_row({1.0})));
    return std::abs(p->grad(0, 0));
  };
  const Scalar near_zero = grad_at(1e-4);
  const Scalar mid = grad_at(0.5);
  CHECK(near_zero < 1e-3);
  CHECK(near_zero < mid / 100.0);
}

TEST_CASE("edge labels enumerate the four joint states") {
  CHECK(edge_label(0, 0) == 0);
  CHECK(edge_label(0, 1) == 1);
  CHECK(edge_label(1, 0) == 2);
  CHECK(edge_label(1, 1) == 3);
  CHECK_THROWS_AS(edge_label(2, 0), ConfigError);
}

TEST_CASE("reversing an edge swaps classes 1 and 2 and fixes 0 and 3") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int yi = rng.bernoulli(0.5) ? 1 : 0;
    const int yj = rng.bernoulli(0.5) ? 1 : 0;
    const int fwd = edge_label(yi, yj);
    const int rev = edge_label(yj, yi);
    if (fwd == 1) CHECK(rev == 2);
    if (fwd == 2) CHECK(rev == 1);
    if (fwd == 0 || fwd == 3) CHECK(rev == fwd);
  }
}

TEST_CASE("edge label list covers all directed pairs in order") {
  std::vector<int> labels = edge_labels(make_row({1.0, 0.0, 1.0}));
  REQUIRE(labels.size() == 6);
  // Pairs in order: (0,1) (0,2) (1,0) (1,2) (2,0) (2,1).
  CHECK(labels[0] == edge_label(1, 0));
  CHECK(labels[1] == edge_label(1, 1));
  CHECK(labels[2] == edge_label(0, 1));
  CHECK(labels[3] == edge_label(0, 1));
  CHECK(labels[4] == edge_label(1, 1));
  CHECK(labels[5] == edge_label(1, 0));
}

TEST_CASE("uniform logits cost exactly log 4") {
  std::vector<TensorPtr> logits{constant(Mat::Zero(1, 4)), constant(Mat::Zero(1, 4))};
  std::vector<int> labels{0, 3};
  auto loss = edge_cooccurrence_loss(logits, labels);
  CHECK(loss->item() == doctest::Approx(std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("confident correct logits drive the edge loss to zero") {
  Mat z = Mat::Zero(1, 4);
  z(0, 2) = 50.0;
  auto loss = edge_cooccurrence_loss({constant(z)}, {2});
  CHECK(loss->item() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("edge loss averages over the directed edges") {
  Mat good = Mat::Zero(1, 4);
  good(0, 1) = 50.0;
  auto loss = edge_cooccurrence_loss({constant(good), constant(Mat::Zero(1, 4))}, {1, 1});
  CHECK(loss->item() == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("edge loss stays finite for extreme logits") {
  Mat z = make_row({1e4, -1e4, 0.0, 5.0});
  auto loss = edge_cooccurrence_loss({constant(z)}, {0});
  CHECK(std::isfinite(loss->item()));
  CHECK(loss->item() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mismatched label and logit counts are rejected") {
  std::vector<TensorPtr> logits{constant(Mat::Zero(1, 4))};
  CHECK_THROWS_AS(edge_cooccurrence_loss(logits, {0, 1}), ConfigError);
  CHECK_THROWS_AS(edge_cooccurrence_loss(logits, {5}), ConfigError);
}

TEST_CASE("edge head with zero input and bias yields uniform class odds") {
  Rng rng(5);
  Linear fc = make_linear(6, 4, rng);
  fc.b->value.setZero();
  auto logits = edge_head(constant(Mat::Zero(1, 6)), fc);
  CHECK(logits->cols() == 4);
  CHECK(logits->value.cwiseAbs().maxCoeff() == 0.0);

  auto sm = softmax_rows(logits);
  for (Eigen::Index j = 0; j < 4; ++j) CHECK(sm->value(0, j) == doctest::Approx(0.25));
}

TEST_CASE("the shared head maps identical edges to identical logits") {
  Rng rng(6);
  Linear fc = make_linear(3, 4, rng);
  Mat e = make_row({0.3, -1.2, 0.7});
  auto z1 = edge_head(constant(e), fc);
  auto z2 = edge_head(constant(e), fc);
  CHECK((z1->value - z2->value).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("combined loss weights the edge term by lambda") {
  auto lwa = constant(1.0);
  auto le = constant(1.0);
  CHECK(combined_loss(lwa, le, 0.0)->item() == doctest::Approx(1.0));
  CHECK(combined_loss(lwa, le, 1.0)->item() == doctest::Approx(2.0));
  CHECK(combined_loss(lwa, le, 0.05)->item() == doctest::Approx(1.05));
  CHECK_THROWS_AS(combined_loss(lwa, le, -0.1), ConfigError);
}

TEST_CASE("weighted loss gradient passes grad_check through a sigmoid") {
  Rng rng(7);
  Mat z0(1, 4);
  for (Eigen::Index i = 0; i < 4; ++i) z0(0, i) = rng.normal();
  auto z = variable(z0);
  Mat y = make_row({1.0, 0.0, 1.0, 0.0});
  Mat w = compute_weights(make_row({0.5, 0.25, 0.2, 0.8}));
  auto f = [&] { return weighted_asymmetric_loss(sigmoid(z), y, w); };
  CHECK(grad_check(f, {z}) < 1e-6);
}

TEST_CASE("edge loss gradient passes grad_check") {
  Rng rng(8);
  Mat z0(1, 4), z1(1, 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    z0(0, i) = rng.normal();
    z1(0, i) = rng.normal();
  }
  auto a = variable(z0);
  auto b = variable(z1);
  auto f = [&] { return edge_cooccurrence_loss({a, b}, {1, 2}); };
  CHECK(grad_check(f, {a, b}) < 1e-6);
}

TEST_CASE("full combined loss gradient passes grad_check") {
  Rng rng(10);
  Mat z0(1, 3);
  for (Eigen::Index i = 0; i < 3; ++i) z0(0, i) = rng.normal();
  auto z = variable(z0);
  Linear head = make_linear(3, 4, rng);
  Mat y = make_row({1.0, 0.0, 1.0});
  Mat w = compute_weights(make_row({0.4, 0.3, 0.3}));
  std::vector<int> labels = edge_labels(y);

  auto f = [&] {
    auto lwa = weighted_asymmetric_loss(sigmoid(z), y, w);
    // Six directed edges derived from the same logits tensor, shifted so the
    // edge head sees distinct inputs.
    std::vector<TensorPtr> logits;
    for (int k = 0; k < 6; ++k) {
      logits.push_back(edge_head(add_scalar(z, 0.1 * k), head));
    }
    auto le = edge_cooccurrence_loss(logits, labels);
    return combined_loss(lwa, le, 0.05);
  };
  CHECK(grad_check(f, {z, head.w, head.b}) < 1e-6);
}
