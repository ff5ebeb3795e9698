#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgc/inertia.hpp"
#include "test_util.hpp"

using namespace mgc;
using test::Rng;

TEST_CASE("to_pseudo of a unit solid sphere") {
  // m = 1 kg, radius 1 m at the origin: I_A = 0.4 I, Sigma = 0.6 I - 0.4 I
  const SpatialInertia sphere{1.0, Vec3::Zero(), 0.4 * Mat3::Identity()};
  const Mat4 L = to_pseudo(sphere).matrix();
  Mat4 expected = Mat4::Zero();
  expected.diagonal() << 0.2, 0.2, 0.2, 1.0;
  CHECK(test::max_abs_diff(L, expected) <= 1e-15);
}

TEST_CASE("pseudo-inertia round trip") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const SpatialInertia M = test::random_inertia(rng);
    const SpatialInertia back = from_pseudo(to_pseudo(M));
    CHECK(std::abs(back.mass - M.mass) <= 1e-12);
    CHECK(test::max_abs_diff(back.first_moment, M.first_moment) <= 1e-12);
    CHECK(test::max_abs_diff(back.rotational_inertia, M.rotational_inertia) <= 1e-12);
  }
}

TEST_CASE("to_pseudo rejects a point mass") {
  const SpatialInertia point{1.0, Vec3::Zero(), Mat3::Zero()};
  CHECK_THROWS_AS(to_pseudo(point), ValidationError);
  CHECK_THROWS_AS(to_pseudo(SpatialInertia{-1.0, Vec3::Zero(), Mat3::Identity()}),
                  ValidationError);
  CHECK_FALSE(is_physically_consistent(point));
}

TEST_CASE("from_pseudo examples") {
  Mat4 L = Mat4::Zero();
  L.diagonal() << 0.2, 0.2, 0.2, 1.0;
  const SpatialInertia sphere = from_pseudo(PseudoInertia(L));
  CHECK(sphere.mass == 1.0);
  CHECK(sphere.first_moment.norm() == 0.0);
  CHECK(test::max_abs_diff(sphere.rotational_inertia, Mat3(0.4 * Mat3::Identity())) <= 1e-15);

  // identity pseudo-inertia: Sigma = I -> I_A = trace(I)*I - I = 2I, m = 1
  const SpatialInertia unit = from_pseudo(PseudoInertia(Mat4::Identity()));
  CHECK(unit.mass == 1.0);
  CHECK(test::max_abs_diff(unit.rotational_inertia, Mat3(2.0 * Mat3::Identity())) <= 1e-15);
  CHECK(test::max_abs_diff(to_pseudo(unit).matrix(), Mat4::Identity()) <= 1e-15);
}

TEST_CASE("PseudoInertia validates its matrix") {
  Mat4 skewed = Mat4::Identity();
  skewed(0, 1) = 0.3;  // not symmetric
  CHECK_THROWS_AS(PseudoInertia{skewed}, ValidationError);

  Mat4 indefinite = Mat4::Identity();
  indefinite(3, 3) = -1.0;
  CHECK_THROWS_AS(PseudoInertia{indefinite}, ValidationError);
}

TEST_CASE("metric reduces to Frobenius at the identity") {
  Rng rng(32);
  for (int i = 0; i < 50; ++i) {
    const Mat4 X = test::random_sym4(rng, 2.0);
    CHECK(test::rel_err(metric_inner(PseudoInertia(Mat4::Identity()), X, X),
                        0.5 * X.squaredNorm()) <= 1e-14);
  }
}

TEST_CASE("metric affine invariance and symmetry") {
  Rng rng(33);
  for (int i = 0; i < 100; ++i) {
    const Mat4 L = test::random_spd4(rng);
    const Mat4 X = test::random_sym4(rng);
    const Mat4 Y = test::random_sym4(rng);
    const PseudoInertia PL(L);

    CHECK(std::abs(metric_inner(PL, X, Y) - metric_inner(PL, Y, X)) <= 1e-12);

    Mat4 A;
    do {
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) A(r, c) = test::uniform(rng, -1.0, 1.0);
    } while (std::abs(A.determinant()) < 0.1);
    const PseudoInertia PAL(Mat4(A * L * A.transpose()));
    const double lhs = metric_inner(PAL, A * X * A.transpose(), A * Y * A.transpose());
    const double rhs = metric_inner(PL, X, Y);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("bregman divergence values") {
  const PseudoInertia I4(Mat4::Identity());
  CHECK(std::abs(bregman_divergence(I4, I4)) <= 1e-12);

  // eigenvalues of Lhat^-1 L are {1,1,1,2}: d = -log 2 + 2 - 1
  Mat4 L = Mat4::Identity();
  L(3, 3) = 2.0;
  CHECK(std::abs(bregman_divergence(PseudoInertia(L), I4, 1.0) - 0.30685281944005469) <= 1e-12);
}

TEST_CASE("bregman determinant and eigenvalue forms agree") {
  Rng rng(34);
  for (int i = 0; i < 100; ++i) {
    const PseudoInertia L(test::random_spd4(rng));
    const PseudoInertia Lhat(test::random_spd4(rng));
    const double det_form = bregman_divergence(L, Lhat, 1.0);
    const Vec4 lam = relative_eigenvalues(L, Lhat);
    const double eig_form = (-lam.array().log() + lam.array() - 1.0).sum();
    CHECK(std::abs(det_form - eig_form) <= 1e-10);
    CHECK(det_form >= -1e-12);
    if (test::max_abs_diff(L.matrix(), Lhat.matrix()) > 1e-6) CHECK(det_form > 0.0);
  }
}

TEST_CASE("geodesic distance") {
  Rng rng(35);
  const PseudoInertia I4(Mat4::Identity());
  CHECK(geodesic_distance(I4, I4) <= 1e-10);

  Mat4 L = Mat4::Identity();
  L(0, 0) = std::exp(1.0);
  CHECK(std::abs(geodesic_distance(I4, PseudoInertia(L)) - 1.0) <= 1e-12);

  for (int i = 0; i < 100; ++i) {
    const PseudoInertia A(test::random_spd4(rng));
    const PseudoInertia B(test::random_spd4(rng));
    CHECK(std::abs(geodesic_distance(A, B) - geodesic_distance(B, A)) <= 1e-10);
  }
}

TEST_CASE("regressor trace identity") {
  Rng rng(36);
  for (int i = 0; i < 100; ++i) {
    const Twist v_err = test::random_vec6(rng, 2.0);
    const Twist v_ref = test::random_vec6(rng, 2.0);
    const Twist a_ref = test::random_vec6(rng, 2.0);
    const Twist v_body = test::random_vec6(rng, 2.0);
    const SymmetricRegressor R = regressor(v_err, v_ref, a_ref, v_body);
    CHECK(test::max_abs_diff(R, Mat4(R.transpose())) <= 1e-12);

    const PseudoInertia L(test::random_spd4(rng, 0.3, 3.0));
    const Mat6 M = from_pseudo(L).matrix();
    const double lhs = v_err.dot(M * a_ref - coad(v_body, M * v_ref));
    const double rhs = (L.matrix() * R).trace();
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("regressor vanishes with zero inputs") {
  Rng rng(37);
  const Twist x = test::random_vec6(rng, 2.0);
  CHECK(regressor(Twist::Zero(), x, x, x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(regressor(x, Twist::Zero(), Twist::Zero(), x).cwiseAbs().maxCoeff() == 0.0);
}

namespace {
mgc::AdaptationConfig make_cfg(double gamma, double sigma, const mgc::Mat4& nominal) {
  mgc::AdaptationConfig cfg;
  cfg.gamma = gamma;
  cfg.sigma = sigma;
  cfg.nominal.emplace_back(nominal);
  return cfg;
}
}  // namespace

TEST_CASE("adapt_step with zero flow is the identity") {
  Rng rng(38);
  const Mat4 L = test::random_spd4(rng);
  const auto cfg = make_cfg(1.0, 0.0, Mat4::Identity());
  const PseudoInertia next = adapt_step(PseudoInertia(L), Mat4::Zero(), cfg, 0, 1e-3);
  CHECK(test::max_abs_diff(next.matrix(), L) <= 1e-14);
}

TEST_CASE("leakage contracts toward the nominal value") {
  Rng rng(39);
  for (int i = 0; i < 20; ++i) {
    const Mat4 L0 = test::random_spd4(rng);
    const Mat4 L = test::random_spd4(rng);
    const auto cfg = make_cfg(1.0, 0.5, L0);
    const PseudoInertia next = adapt_step(PseudoInertia(L), Mat4::Zero(), cfg, 0, 1e-3);
    const double before = geodesic_distance(PseudoInertia(L), PseudoInertia(L0));
    const double after = geodesic_distance(next, PseudoInertia(L0));
    if (before > 1e-8) CHECK(after < before);
  }
}

TEST_CASE("retraction matches the Euler step to second order") {
  Rng rng(40);
  for (int i = 0; i < 20; ++i) {
    const Mat4 L = test::random_spd4(rng);
    const Mat4 L0 = test::random_spd4(rng);
    const Mat4 reg = test::random_sym4(rng, 1.0);
    const auto cfg = make_cfg(1.0, 0.1, L0);
    const Mat4 flow = (1.0 / cfg.gamma) * L * reg * L - cfg.sigma * (L - L0);

    const auto defect = [&](double dt) {
      const Mat4 euler = L + dt * flow;
      return test::max_abs_diff(adapt_step(PseudoInertia(L), reg, cfg, 0, dt).matrix(), euler);
    };
    const double c1 = defect(1e-3) / 1e-6;
    const double c2 = defect(1e-4) / 1e-8;
    CHECK(c1 <= 4.0 * c2 + 1e-6);
    CHECK(c2 <= 4.0 * c1 + 1e-6);
  }
}

TEST_CASE("adaptation keeps iterates on the SPD manifold") {
  Rng rng(41);
  PseudoInertia L(test::random_spd4(rng));
  const auto cfg = make_cfg(10.0, 0.05, Mat4::Identity());
  for (int k = 0; k < 1000; ++k) {
    const Mat4 reg = test::random_sym4(rng, 5.0);
    L = adapt_step(L, reg, cfg, 0, 1e-2);
    CHECK(L.min_eigenvalue() > 0.0);
  }
}

TEST_CASE("adapt_step argument validation") {
  const auto cfg = make_cfg(1.0, 0.0, Mat4::Identity());
  CHECK_THROWS_AS(adapt_step(PseudoInertia(Mat4::Identity()), Mat4::Zero(), cfg, 0, 0.0),
                  ValidationError);
  CHECK_THROWS_AS(adapt_step(PseudoInertia(Mat4::Identity()), Mat4::Zero(), cfg, 3, 1e-3),
                  ValidationError);
}

TEST_CASE("divergence is dominated by squared metric distances to a nominal point") {
  // existence of a finite constant C with
  //   d_h(L || Lhat) <= C (||Lhat - L0||^2_Lhat + ||L - L0||^2_Lhat)
  // over a compact sample set
  Rng rng(42);
  double C = 0.0;
  for (int i = 0; i < 300; ++i) {
    const PseudoInertia L(test::random_spd4(rng, 0.5, 2.0));
    const PseudoInertia Lhat(test::random_spd4(rng, 0.5, 2.0));
    const Mat4 L0 = test::random_spd4(rng, 0.5, 2.0);
    const double denom = metric_norm_sq(Lhat, Lhat.matrix() - L0) +
                         metric_norm_sq(Lhat, L.matrix() - L0);
    if (denom < 1e-10) continue;
    C = std::max(C, bregman_divergence(L, Lhat, 1.0) / denom);
  }
  CHECK(std::isfinite(C));
  CHECK(C > 0.0);
}
