#pragma once

#include <random>

#include "mgc/inertia.hpp"
#include "mgc/liegroup.hpp"

// Shared helpers for the test suites: deterministic random elements and
// tolerance checks kept independent of the library internals.

namespace mgc::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec3(Rng& rng, double mag = 1.0) {
  return {uniform(rng, -mag, mag), uniform(rng, -mag, mag), uniform(rng, -mag, mag)};
}

inline Vec6 random_vec6(Rng& rng, double mag = 1.0) {
  return make_twist(random_vec3(rng, mag), random_vec3(rng, mag));
}

/// Rotation vector with angle at most `max_angle`.
inline Vec3 random_rotvec(Rng& rng, double max_angle) {
  Vec3 axis = random_vec3(rng);
  while (axis.norm() < 1e-6) axis = random_vec3(rng);
  axis.normalize();
  return uniform(rng, 0.0, max_angle) * axis;
}

inline Mat3 random_rotation(Rng& rng, double max_angle = 3.0) {
  return exp_so3(random_rotvec(rng, max_angle));
}

inline Pose random_pose(Rng& rng, double max_angle = 3.0, double max_trans = 2.0) {
  return {random_rotation(rng, max_angle), random_vec3(rng, max_trans)};
}

inline double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::max(1.0, std::abs(reference));
}

/// SPD 4x4 with eigenvalues drawn from [lo, hi].
inline Mat4 random_spd4(Rng& rng, double lo = 0.5, double hi = 2.0) {
  Mat4 A;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = uniform(rng, -1.0, 1.0);
  const Mat4 Q = Eigen::HouseholderQR<Mat4>(A).householderQ();
  Vec4 d;
  for (int i = 0; i < 4; ++i) d(i) = uniform(rng, lo, hi);
  const Mat4 L = Q * d.asDiagonal() * Q.transpose();
  return 0.5 * (L + L.transpose());
}

inline Mat4 random_sym4(Rng& rng, double mag = 1.0) {
  Mat4 A;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = uniform(rng, -mag, mag);
  return 0.5 * (A + A.transpose());
}

/// Physically consistent random inertia: principal moments satisfy the
/// triangle inequalities, center of mass offset from the body origin.
inline SpatialInertia random_inertia(Rng& rng) {
  const double m = uniform(rng, 0.5, 5.0);
  const Vec3 com = random_vec3(rng, 0.4);
  Vec3 d;
  do {
    d = {uniform(rng, 0.3, 1.0), uniform(rng, 0.3, 1.0), uniform(rng, 0.3, 1.0)};
  } while (d(0) >= d(1) + d(2) || d(1) >= d(0) + d(2) || d(2) >= d(0) + d(1));
  const Mat3 R = random_rotation(rng);
  const Mat3 I_c = R * d.asDiagonal() * R.transpose();
  return SpatialInertia::from_com(m, com, 0.5 * (I_c + I_c.transpose()));
}

template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace mgc::test
