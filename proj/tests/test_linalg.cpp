#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oped/common.hpp"
#include "oped/linalg.hpp"
#include "oped/random.hpp"

using Catch::Approx;
using namespace oped;

namespace {

// Dense angular sweep for 2x2 generalized Rayleigh quotients.
double rayleigh_sweep(const Eigen::Matrix2d& QA, const Eigen::Matrix2d& QB) {
  double best = 0.0;
  for (double th = 0.0; th < M_PI; th += 1e-4) {
    Eigen::Vector2d x(std::cos(th), std::sin(th));
    double den = x.dot(QB * x);
    if (den <= 1e-12) continue;
    best = std::max(best, x.dot(QA * x) / den);
  }
  return best;
}

Eigen::Matrix2d psd_from(Rng& rng) {
  Eigen::Matrix2d F;
  F << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
      rng.uniform(-1.0, 1.0);
  return F.transpose() * F;
}

}  // namespace

TEST_CASE("extreal ordering and formatting") {
  ExtReal a = ExtReal::finite(2.0);
  ExtReal b = ExtReal::finite(3.0);
  ExtReal inf = ExtReal::inf();
  CHECK(a < b);
  CHECK(a < inf);
  CHECK(!(inf < inf));
  CHECK(inf <= inf);
  CHECK(a <= a);
  CHECK(!inf.finite_value());
  CHECK(a.finite_value());
  CHECK(inf.to_string() == "inf");
  CHECK(ExtReal::finite(0.5).to_string() == "0.5");
}

TEST_CASE("seed derivation is stable and collision-free at small scale") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(123, 456) == derive_seed(123, 456));
}

TEST_CASE("max_rayleigh on diagonal pairs") {
  Eigen::Matrix2d QA = Eigen::Vector2d(4.0, 1.0).asDiagonal();
  Eigen::Matrix2d QB = Eigen::Matrix2d::Identity();
  linalg::RayleighResult r = linalg::max_rayleigh(QA, QB);
  CHECK(r.max_ratio == Approx(4.0));
  CHECK(!r.null_numerator);
  CHECK(!r.degenerate);

  QB = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  r = linalg::max_rayleigh(QA, QB);
  CHECK(r.max_ratio == Approx(4.0));  // attained along the first axis
}

TEST_CASE("max_rayleigh matches a dense angular sweep") {
  Rng rng(808);
  for (int trial = 0; trial < 12; ++trial) {
    Eigen::Matrix2d QA = psd_from(rng);
    Eigen::Matrix2d QB = psd_from(rng) + 0.05 * Eigen::Matrix2d::Identity();
    linalg::RayleighResult r = linalg::max_rayleigh(QA, QB);
    double want = rayleigh_sweep(QA, QB);
    CHECK(r.max_ratio == Approx(want).epsilon(1e-3));
    CHECK(!r.null_numerator);
  }
}

TEST_CASE("max_rayleigh flags genuine denominator-null energy") {
  Eigen::Matrix2d QB = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  Eigen::Matrix2d QA = Eigen::Vector2d(0.5, 2.0).asDiagonal();
  linalg::RayleighResult r = linalg::max_rayleigh(QA, QB);
  CHECK(r.null_numerator);
  CHECK(r.max_ratio == Approx(0.5));  // range part still reported
}

TEST_CASE("max_rayleigh treats numerator roundoff as zero") {
  // A numerator at the square of machine noise must not trip the null flag
  // or produce a ratio: the whole form is indistinguishable from zero.
  Eigen::Matrix2d QB = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  Eigen::Matrix2d QA = 1e-30 * Eigen::Matrix2d::Identity();
  linalg::RayleighResult r = linalg::max_rayleigh(QA, QB);
  CHECK(!r.null_numerator);
  CHECK(!r.degenerate);
  CHECK(r.max_ratio == 0.0);
}

TEST_CASE("max_rayleigh degenerate cases") {
  Eigen::Matrix2d Z = Eigen::Matrix2d::Zero();
  linalg::RayleighResult r = linalg::max_rayleigh(Z, Z);
  CHECK(r.degenerate);

  // Zero denominator with real numerator energy: flagged, no finite ratio.
  Eigen::Matrix2d QA = Eigen::Matrix2d::Identity();
  r = linalg::max_rayleigh(QA, Z);
  CHECK(r.null_numerator);
  CHECK(r.max_ratio == 0.0);
}

TEST_CASE("ball_max hand cases with identity constraint") {
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2);

  SECTION("centered ball, pure norm") {
    linalg::BallMaxResult r = linalg::ball_max(I2, z, I2, z, 2.0);
    CHECK(!r.empty);
    CHECK(r.value == Approx(4.0));
  }
  SECTION("shifted center adds along the center direction") {
    Eigen::VectorXd t(2);
    t << 3.0, 0.0;
    linalg::BallMaxResult r = linalg::ball_max(I2, z, I2, t, 1.0);
    CHECK(r.value == Approx(16.0));  // (|t| + r)^2
  }
  SECTION("affine offset shifts the objective") {
    Eigen::VectorXd c(2);
    c << 0.0, 2.0;
    linalg::BallMaxResult r = linalg::ball_max(I2, c, I2, z, 1.0);
    CHECK(r.value == Approx(9.0));  // (|c| + r)^2
  }
  SECTION("rank-deficient objective, hard case fill") {
    Eigen::MatrixXd G = Eigen::Vector2d(1.0, 0.0).asDiagonal();
    Eigen::VectorXd c(2);
    c << 0.0, 5.0;
    linalg::BallMaxResult r = linalg::ball_max(G, c, I2, z, 2.0);
    CHECK(r.value == Approx(4.0 + 25.0));  // w1 = +-2 fills the active direction
  }
}

TEST_CASE("ball_max reports infeasible radii") {
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd B(3, 2);  // tall constraint with nonzero least-squares residual
  B << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
  Eigen::VectorXd t(3);
  t << 0.0, 0.0, 2.0;
  linalg::BallMaxResult r = linalg::ball_max(I2, z, B, t, 1.0);
  CHECK(r.empty);
  CHECK(r.min_residual_sq == Approx(4.0));

  linalg::BallMaxResult ok = linalg::ball_max(I2, z, B, t, 3.0);
  CHECK(!ok.empty);  // radius above the residual is feasible again
  CHECK(ok.value == Approx(5.0));  // remaining budget sqrt(9-4) in the plane
}

TEST_CASE("ball_max matches a boundary sweep for identity constraints") {
  Rng rng(909);
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::MatrixXd G(2, 2);
    G << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-1.0, 1.0);
    if (trial % 2 == 0) G.row(1) = 0.3 * G.row(0);  // exercise singular G
    Eigen::VectorXd c(2), t(2);
    c << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    t << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    double radius = rng.uniform(0.5, 2.0);
    Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);

    linalg::BallMaxResult r = linalg::ball_max(G, c, I2, t, radius);
    REQUIRE(!r.empty);
    double want = 0.0;
    for (double th = 0.0; th < 2.0 * M_PI; th += 1e-4) {
      Eigen::VectorXd w = t;
      w(0) += radius * std::cos(th);
      w(1) += radius * std::sin(th);
      want = std::max(want, (G * w + c).squaredNorm());
    }
    CHECK(r.value >= want - 1e-9);            // never below any feasible point
    CHECK(r.value == Approx(want).epsilon(1e-3));
  }
}
