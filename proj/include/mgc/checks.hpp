#pragma once

#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mgc/control.hpp"
#include "mgc/sim.hpp"

// Self-contained property suite behind the `check` CLI subcommand: the
// Lie-group identities, inertia round trips, the regressor trace identity,
// plant power balance, telescoping virtual power flow, and the
// MGC/AMGC reduction identity. Each check is deterministic and reports a
// one-line detail string.

namespace mgc::checks {

struct Check {
  std::string name;
  std::function<bool(std::string&)> fn;
};

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline Vec3 rvec3(std::mt19937_64& rng, double mag) {
  return {uniform(rng, -mag, mag), uniform(rng, -mag, mag), uniform(rng, -mag, mag)};
}

inline Vec6 rvec6(std::mt19937_64& rng, double mag) {
  return make_twist(rvec3(rng, mag), rvec3(rng, mag));
}

inline Vec3 rrotvec(std::mt19937_64& rng, double max_angle) {
  Vec3 a = rvec3(rng, 1.0);
  while (a.norm() < 1e-6) a = rvec3(rng, 1.0);
  a.normalize();
  return uniform(rng, 0.0, max_angle) * a;
}

inline Pose rpose(std::mt19937_64& rng, double max_angle = 2.5, double max_trans = 2.0) {
  return {exp_so3(rrotvec(rng, max_angle)), rvec3(rng, max_trans)};
}

inline Mat4 rspd4(std::mt19937_64& rng, double lo = 0.4, double hi = 2.5) {
  Mat4 A;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = uniform(rng, -1.0, 1.0);
  const Mat4 Q = Eigen::HouseholderQR<Mat4>(A).householderQ();
  Vec4 d;
  for (int i = 0; i < 4; ++i) d(i) = uniform(rng, lo, hi);
  const Mat4 L = Q * d.asDiagonal() * Q.transpose();
  return 0.5 * (L + L.transpose());
}

inline bool report(bool ok, std::string& detail, double worst, double tol) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max deviation %.3e (tolerance %.0e)", worst, tol);
  detail = buf;
  return ok;
}

}  // namespace detail

inline bool check_lie_roundtrip(std::string& detail) {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Pose T = detail::rpose(rng, 3.0);
    const Pose back = exp_se3(log_se3(T));
    worst = std::max(worst, (back.R - T.R).cwiseAbs().maxCoeff());
    worst = std::max(worst, (back.p - T.p).cwiseAbs().maxCoeff());
  }
  return detail::report(worst <= 1e-10, detail, worst, 1e-10);
}

inline bool check_adjoint_homomorphism(std::string& detail) {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const Pose A = detail::rpose(rng);
    const Pose B = detail::rpose(rng);
    worst = std::max(worst,
                     (adjoint(A * B) - adjoint(A) * adjoint(B)).cwiseAbs().maxCoeff());
  }
  return detail::report(worst <= 1e-10, detail, worst, 1e-10);
}

inline bool check_jacobi(std::string& detail) {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const Twist x = detail::rvec6(rng, 2.0);
    const Twist y = detail::rvec6(rng, 2.0);
    const Twist z = detail::rvec6(rng, 2.0);
    const Twist j =
        bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y));
    worst = std::max(worst, j.cwiseAbs().maxCoeff());
  }
  return detail::report(worst <= 1e-10, detail, worst, 1e-10);
}

inline bool check_dlog(std::string& detail) {
  std::mt19937_64 rng(4);
  const double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Twist eta0 = make_twist(detail::rrotvec(rng, 1.2), detail::rvec3(rng, 1.0));
    const Pose e0 = exp_se3(eta0);
    const Twist x = detail::rvec6(rng, 1.0);
    const Twist plus = log_se3(e0 * exp_se3(Twist(h * x)));
    const Twist minus = log_se3(e0 * exp_se3(Twist(-h * x)));
    const Twist fd = (plus - minus) / (2.0 * h);
    const Twist op = bernoulli_operator(log_se3(e0), 8) * x;
    worst = std::max(worst, (fd - op).cwiseAbs().maxCoeff());
  }
  return detail::report(worst <= 1e-6, detail, worst, 1e-6);
}

/// Duality pairing of the co-adjoint; the operator is injectable so a
/// deliberately broken variant can be shown to fail.
inline bool check_coad_pairing(std::string& detail,
                               Wrench (*coad_fn)(const Twist&, const Wrench&) = &mgc::coad) {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const Twist x = detail::rvec6(rng, 2.0);
    const Twist y = detail::rvec6(rng, 2.0);
    const Wrench f = detail::rvec6(rng, 2.0);
    worst = std::max(worst, std::abs(coad_fn(x, f).dot(y) - f.dot(bracket(x, y))));
  }
  return detail::report(worst <= 1e-12, detail, worst, 1e-12);
}

inline bool check_inertia_roundtrip(std::string& detail) {
  std::mt19937_64 rng(6);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const PseudoInertia L(detail::rspd4(rng));
    const Mat4 back = to_pseudo(from_pseudo(L)).matrix();
    worst = std::max(worst, (back - L.matrix()).cwiseAbs().maxCoeff());
  }
  return detail::report(worst <= 1e-12, detail, worst, 1e-12);
}

inline bool check_bregman_dual(std::string& detail) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const PseudoInertia L(detail::rspd4(rng));
    const PseudoInertia Lhat(detail::rspd4(rng));
    const double det_form = bregman_divergence(L, Lhat, 1.0);
    const Vec4 lam = relative_eigenvalues(L, Lhat);
    const double eig_form = (-lam.array().log() + lam.array() - 1.0).sum();
    worst = std::max(worst, std::abs(det_form - eig_form));
    if (det_form < -1e-12) return detail::report(false, detail, det_form, 0.0);
  }
  return detail::report(worst <= 1e-10, detail, worst, 1e-10);
}

inline bool check_metric_affine(std::string& detail) {
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Mat4 L = detail::rspd4(rng);
    Mat4 X, Y, A;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        X(r, c) = detail::uniform(rng, -1.0, 1.0);
        Y(r, c) = detail::uniform(rng, -1.0, 1.0);
      }
    X = 0.5 * (X + X.transpose());
    Y = 0.5 * (Y + Y.transpose());
    do {
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) A(r, c) = detail::uniform(rng, -1.0, 1.0);
    } while (std::abs(A.determinant()) < 0.1);
    const double lhs =
        metric_inner(PseudoInertia(Mat4(A * L * A.transpose())), A * X * A.transpose(),
                     A * Y * A.transpose());
    const double rhs = metric_inner(PseudoInertia(L), X, Y);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return detail::report(worst <= 1e-9, detail, worst, 1e-9);
}

inline bool check_regressor(std::string& detail) {
  std::mt19937_64 rng(9);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Twist v_err = detail::rvec6(rng, 2.0);
    const Twist v_ref = detail::rvec6(rng, 2.0);
    const Twist a_ref = detail::rvec6(rng, 2.0);
    const Twist v_body = detail::rvec6(rng, 2.0);
    const SymmetricRegressor R = regressor(v_err, v_ref, a_ref, v_body);
    const PseudoInertia L(detail::rspd4(rng, 0.3, 3.0));
    const Mat6 M = from_pseudo(L).matrix();
    const double lhs = v_err.dot(M * a_ref - coad(v_body, M * v_ref));
    const double rhs = (L.matrix() * R).trace();
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  return detail::report(worst <= 1e-8, detail, worst, 1e-8);
}

inline bool check_adapt_spd(std::string& detail) {
  std::mt19937_64 rng(10);
  AdaptationConfig cfg;
  cfg.gamma = 10.0;
  cfg.sigma = 0.05;
  cfg.nominal.emplace_back(Mat4::Identity());
  PseudoInertia L(detail::rspd4(rng));
  double min_eig = L.min_eigenvalue();
  for (int k = 0; k < 500; ++k) {
    Mat4 R;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) R(r, c) = detail::uniform(rng, -4.0, 4.0);
    L = adapt_step(L, Mat4(0.5 * (R + R.transpose())), cfg, 0, 1e-2);
    min_eig = std::min(min_eig, L.min_eigenvalue());
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "min eigenvalue along flow %.3e", min_eig);
  detail = buf;
  return min_eig > 0.0;
}

inline bool check_power_balance(std::string& detail) {
  std::mt19937_64 rng(11);
  const ChainModel model = make_planar_twolink();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    VecX q(2), qd(2), tau(2);
    for (int k = 0; k < 2; ++k) {
      q(k) = detail::uniform(rng, -2.0, 2.0);
      qd(k) = detail::uniform(rng, -2.0, 2.0);
      tau(k) = detail::uniform(rng, -10.0, 10.0);
    }
    const VecX qdd = forward_dynamics(model, q, qd, tau);
    const auto twist = body_velocities(model, q, qd);
    const auto accel = body_accelerations(model, q, qd, qdd);
    double dT = 0.0;
    for (int b = 0; b < 2; ++b) {
      const Mat6 M = model.bodies[static_cast<size_t>(b)].inertia.matrix();
      dT += twist[static_cast<size_t>(b)].dot(M * accel[static_cast<size_t>(b)]);
      dT += model.bodies[static_cast<size_t>(b)].rotor_inertia * qd(b) * qdd(b);
    }
    const double rhs = qd.dot(tau) + gravity_power(model, q, qd);
    worst = std::max(worst, std::abs(dT - rhs) / std::max(1.0, std::abs(dT)));
  }
  return detail::report(worst <= 1e-5, detail, worst, 1e-5);
}

inline bool check_telescoping_vpf(std::string& detail) {
  std::mt19937_64 rng(12);
  const ChainModel chain = make_uniform_chain(6);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    VecX theta(6);
    for (int k = 0; k < 6; ++k) theta(k) = detail::uniform(rng, -1.5, 1.5);
    const auto local = local_transforms(chain, theta);
    std::vector<Twist> v_req, v_act;
    std::vector<Wrench> f_req, f_act;
    for (int k = 0; k < 6; ++k) {
      v_req.push_back(detail::rvec6(rng, 3.0));
      v_act.push_back(detail::rvec6(rng, 3.0));
      f_req.push_back(detail::rvec6(rng, 40.0));
      f_act.push_back(detail::rvec6(rng, 40.0));
    }
    const VpfRecord rec = vpf_record(chain, local, v_req, v_act, f_req, f_act);
    worst = std::max(worst, std::abs(rec.telescoping_sum) / std::max(1.0, rec.scale));
  }
  return detail::report(worst <= 1e-9, detail, worst, 1e-9);
}

inline bool check_reduction_identity(std::string& detail) {
  std::mt19937_64 rng(13);
  const ChainModel model = make_planar_twolink();
  GainSet gains = default_gains(model);
  Controller mgc(model, gains, ControllerKind::mgc);
  Controller amgc(model, gains, ControllerKind::amgc);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    VecX theta(2), theta_dot(2), theta_d(2);
    for (int k = 0; k < 2; ++k) {
      theta(k) = detail::uniform(rng, -1.5, 1.5);
      theta_dot(k) = detail::uniform(rng, -1.0, 1.0);
      theta_d(k) = theta(k) + detail::uniform(rng, -0.5, 0.5);
    }
    DesiredJointState des{theta_d, VecX::Zero(2), VecX::Zero(2)};
    const ControlOutput a = mgc.evaluate(theta, theta_dot, des, VecX::Zero(2));
    const ControlOutput b = amgc.evaluate(theta, theta_dot, des, VecX::Zero(2));
    worst = std::max(worst, (a.tau - b.tau).cwiseAbs().maxCoeff() /
                                std::max(1.0, a.tau.cwiseAbs().maxCoeff()));
  }
  return detail::report(worst <= 1e-12, detail, worst, 1e-12);
}

inline std::vector<Check> standard_checks() {
  return {
      {"liegroup.exp_log_roundtrip", check_lie_roundtrip},
      {"liegroup.adjoint_homomorphism", check_adjoint_homomorphism},
      {"liegroup.jacobi_identity", check_jacobi},
      {"liegroup.dlog_series", check_dlog},
      {"liegroup.coad_pairing", [](std::string& d) { return check_coad_pairing(d); }},
      {"inertia.pseudo_roundtrip", check_inertia_roundtrip},
      {"inertia.bregman_dual_form", check_bregman_dual},
      {"inertia.metric_affine_invariance", check_metric_affine},
      {"inertia.regressor_trace_identity", check_regressor},
      {"inertia.adaptation_spd", check_adapt_spd},
      {"kindyn.power_balance", check_power_balance},
      {"control.telescoping_vpf", check_telescoping_vpf},
      {"control.reduction_identity", check_reduction_identity},
  };
}

}  // namespace mgc::checks
