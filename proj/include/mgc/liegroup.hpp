#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>

#include "mgc/errors.hpp"

// Coordinate-free SE(3)/so(3) primitives: hat/vee maps, exponential and
// logarithm, adjoint maps, Lie bracket, co-adjoint, and the truncated
// Bernoulli-series operator that differentiates the group logarithm.
//
// Conventions, used consistently across the library:
//   * 6-vectors are ordered (angular; linear): a twist is (omega; v),
//     a wrench is (moment; force).
//   * adjoint(T) has block form [[R, 0], [hat3(p) R, R]].
//   * bernoulli_operator(eta) maps the body-frame velocity X of an error
//     pose e (hat(X) = e^-1 de/dt) to d/dt log(e), i.e. the series
//     I + 1/2 ad_eta + 1/12 ad_eta^2 - 1/720 ad_eta^4 + ...

namespace mgc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

using Twist = Vec6;   // (angular velocity; linear velocity)
using Wrench = Vec6;  // (moment; force)

inline Twist make_twist(const Vec3& angular, const Vec3& linear) {
  Twist x;
  x << angular, linear;
  return x;
}

inline Wrench make_wrench(const Vec3& moment, const Vec3& force) {
  Wrench f;
  f << moment, force;
  return f;
}

inline Vec3 angular_part(const Vec6& x) { return x.head<3>(); }
inline Vec3 linear_part(const Vec6& x) { return x.tail<3>(); }

/// R^T R = I and det(R) = +1 up to `tol`.
inline bool is_rotation(const Mat3& R, double tol = 1e-9) {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(R.determinant() - 1.0) <= tol;
}

/// Rigid transform, stored as rotation + translation.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();

  static Pose identity() { return {}; }

  /// Builds from a homogeneous 4x4 matrix, checking the last row and the
  /// rotation block.
  static Pose from_matrix(const Mat4& T, double tol = 1e-9) {
    if (T.row(3).head<3>().cwiseAbs().maxCoeff() > tol || std::abs(T(3, 3) - 1.0) > tol)
      throw MalformedElementError("Pose: last row of homogeneous matrix must be (0,0,0,1)");
    Mat3 R = T.topLeftCorner<3, 3>();
    if (!is_rotation(R, tol)) throw MalformedElementError("Pose: rotation block is not in SO(3)");
    return {R, T.topRightCorner<3, 1>()};
  }

  Mat4 matrix() const {
    Mat4 T = Mat4::Identity();
    T.topLeftCorner<3, 3>() = R;
    T.topRightCorner<3, 1>() = p;
    return T;
  }

  Pose inverse() const { return {R.transpose(), -(R.transpose() * p)}; }

  Pose operator*(const Pose& o) const { return {R * o.R, R * o.p + p}; }

  Vec3 apply(const Vec3& x) const { return R * x + p; }
};

inline Mat3 hat3(const Vec3& w) {
  Mat3 W;
  // clang-format off
  W <<    0.0, -w.z(),  w.y(),
        w.z(),    0.0, -w.x(),
       -w.y(),  w.x(),    0.0;
  // clang-format on
  return W;
}

/// Inverse of hat3; rejects matrices that are not antisymmetric to `tol`.
inline Vec3 vee3(const Mat3& W, double tol = 1e-9) {
  if ((W + W.transpose()).cwiseAbs().maxCoeff() > tol)
    throw MalformedElementError("vee3: matrix is not antisymmetric");
  return Vec3(W(2, 1), W(0, 2), W(1, 0));
}

/// 4x4 embedding of a twist: [[hat3(w), v], [0, 0]].
inline Mat4 hat6(const Twist& x) {
  Mat4 X = Mat4::Zero();
  X.topLeftCorner<3, 3>() = hat3(angular_part(x));
  X.topRightCorner<3, 1>() = linear_part(x);
  return X;
}

/// Inverse of hat6; rejects matrices whose last row is not zero or whose
/// rotation block is not antisymmetric to `tol`.
inline Twist vee6(const Mat4& X, double tol = 1e-9) {
  if (X.row(3).cwiseAbs().maxCoeff() > tol)
    throw MalformedElementError("vee6: last row must be zero");
  const Mat3 W = X.topLeftCorner<3, 3>();
  return make_twist(vee3(W, tol), X.topRightCorner<3, 1>());
}

namespace detail {
constexpr double kSmallAngle = 1e-4;
constexpr double kLogTraceGuard = 1e-10;

// sin(t)/t
inline double sinc(double t, double t2) {
  if (t < kSmallAngle) return 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0);
  return std::sin(t) / t;
}
// (1 - cos(t))/t^2
inline double cosc(double t, double t2) {
  if (t < kSmallAngle) return 0.5 - t2 / 24.0 * (1.0 - t2 / 30.0);
  return (1.0 - std::cos(t)) / t2;
}
// (t - sin(t))/t^3
inline double sincc(double t, double t2) {
  if (t < kSmallAngle) return 1.0 / 6.0 - t2 / 120.0 * (1.0 - t2 / 42.0);
  return (t - std::sin(t)) / (t2 * t);
}
}  // namespace detail

/// Rodrigues formula.
inline Mat3 exp_so3(const Vec3& w) {
  const double t2 = w.squaredNorm();
  const double t = std::sqrt(t2);
  const Mat3 W = hat3(w);
  return Mat3::Identity() + detail::sinc(t, t2) * W + detail::cosc(t, t2) * W * W;
}

/// Rotation-vector logarithm. Requires trace(R) > -1 (angle < pi); near the
/// boundary the axis is extracted from the symmetric part of R with
/// largest-diagonal pivoting, near zero a second-order series is used.
inline Vec3 log_so3(const Mat3& R) {
  if (!is_rotation(R, 1e-8)) throw MalformedElementError("log_so3: input is not a rotation");
  const double tr = R.trace();
  if (tr <= -1.0 + detail::kLogTraceGuard)
    throw InjectivityError("log_so3: rotation at or beyond the injectivity radius (trace <= -1)");
  const double c = std::clamp(0.5 * (tr - 1.0), -1.0, 1.0);
  const Vec3 s = 0.5 * Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const double sn = s.norm();
  const double theta = std::atan2(sn, c);
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    return s * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0);
  }
  if (c > -0.999) return s * (theta / sn);
  // theta close to pi: aa^T = I + ((R + R^T)/2 - I)/(1 - c)
  const Mat3 B = Mat3::Identity() + (0.5 * (R + R.transpose()) - Mat3::Identity()) / (1.0 - c);
  int k = 0;
  B.diagonal().maxCoeff(&k);
  Vec3 a = B.col(k) / std::sqrt(B(k, k));
  a.normalize();
  if (a.dot(s) < 0.0) a = -a;
  return theta * a;
}

/// Left Jacobian of SO(3): integrates a constant rotation rate into the
/// translation part of the SE(3) exponential.
inline Mat3 so3_left_jacobian(const Vec3& w) {
  const double t2 = w.squaredNorm();
  const double t = std::sqrt(t2);
  const Mat3 W = hat3(w);
  return Mat3::Identity() + detail::cosc(t, t2) * W + detail::sincc(t, t2) * W * W;
}

/// Closed-form inverse of the left Jacobian; valid for ||w|| < 2*pi.
inline Mat3 so3_left_jacobian_inverse(const Vec3& w) {
  const double t2 = w.squaredNorm();
  const double t = std::sqrt(t2);
  const Mat3 W = hat3(w);
  double d;
  if (t < detail::kSmallAngle) {
    d = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    d = 1.0 / t2 - 0.5 * std::cos(0.5 * t) / (t * std::sin(0.5 * t));
  }
  return Mat3::Identity() - 0.5 * W + d * W * W;
}

inline Pose exp_se3(const Twist& x) {
  const Vec3 w = angular_part(x);
  return {exp_so3(w), so3_left_jacobian(w) * linear_part(x)};
}

inline Twist log_se3(const Pose& T) {
  const Vec3 w = log_so3(T.R);
  return make_twist(w, so3_left_jacobian_inverse(w) * T.p);
}

/// Change-of-frame operator for twists: adjoint(T) * x expresses x in the
/// frame T is measured in. Group homomorphism.
inline Mat6 adjoint(const Pose& T) {
  Mat6 A = Mat6::Zero();
  A.topLeftCorner<3, 3>() = T.R;
  A.bottomLeftCorner<3, 3>() = hat3(T.p) * T.R;
  A.bottomRightCorner<3, 3>() = T.R;
  return A;
}

/// Matrix of the Lie bracket: ad(x) * y = bracket(x, y).
inline Mat6 ad(const Twist& x) {
  Mat6 A = Mat6::Zero();
  const Mat3 W = hat3(angular_part(x));
  A.topLeftCorner<3, 3>() = W;
  A.bottomLeftCorner<3, 3>() = hat3(linear_part(x));
  A.bottomRightCorner<3, 3>() = W;
  return A;
}

inline Twist bracket(const Twist& x, const Twist& y) { return ad(x) * y; }

/// Co-adjoint action on wrenches, fixed by the duality pairing
/// <coad(x, f), y> = <f, bracket(x, y)>.
inline Wrench coad(const Twist& x, const Wrench& f) { return ad(x).transpose() * f; }

/// Truncated series  sum_n c_n ad(eta)^n  with c = (1, 1/2, 1/12, 0, -1/720,
/// 0, 1/30240, ...).  Applied to the body-frame velocity X of an error pose
/// e (hat(X) = e^-1 de/dt) it yields d/dt log(e); the dlog property is
/// pinned by a finite-difference test.  Converges for ||angular(eta)|| < 2*pi.
inline Mat6 bernoulli_operator(const Twist& eta, int order = 8) {
  if (order < 2) throw ValidationError("bernoulli_operator: order must be >= 2");
  if (order > 16) throw ValidationError("bernoulli_operator: truncation order above 16 is not supported");
  if (angular_part(eta).norm() >= 2.0 * M_PI)
    throw DivergenceRiskError("bernoulli_operator: angular norm >= 2*pi, series may diverge");
  static constexpr std::array<double, 17> kCoeff = {
      1.0,
      0.5,
      1.0 / 12.0,
      0.0,
      -1.0 / 720.0,
      0.0,
      1.0 / 30240.0,
      0.0,
      -1.0 / 1209600.0,
      0.0,
      1.0 / 47900160.0,
      0.0,
      -691.0 / 1307674368000.0,
      0.0,
      1.0 / 74724249600.0,
      0.0,
      -3617.0 / 10670622842880000.0,
  };
  const Mat6 A = ad(eta);
  Mat6 out = Mat6::Identity();
  Mat6 power = Mat6::Identity();
  for (int n = 1; n <= order; ++n) {
    power = power * A;
    if (kCoeff[static_cast<size_t>(n)] != 0.0) out += kCoeff[static_cast<size_t>(n)] * power;
  }
  return out;
}

}  // namespace mgc
