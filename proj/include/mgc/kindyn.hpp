#pragma once

#include <vector>

#include "mgc/model.hpp"

// Product-of-exponentials kinematics, body velocity/acceleration recursions,
// the backward Newton-Euler wrench pass, and the composite plant dynamics
// (inverse dynamics, mass matrix, forward dynamics) built on top of them.
// All recursions are a single O(n) sweep.

namespace mgc {

/// Local transform of frame {i} in frame {i-1}: home * exp(xi * theta).
inline Pose fk_local(const BodyModule& body, double theta) {
  return body.home_transform * exp_se3(Twist(body.screw_axis * theta));
}

/// Fictitious base acceleration that folds gravity into the acceleration
/// recursion: linear part -g, expressed in the base frame.
inline Twist gravity_base_accel(const Vec3& gravity) {
  return make_twist(Vec3::Zero(), -gravity);
}

/// Local transforms T_{i-1,i} for all bodies.
inline std::vector<Pose> local_transforms(const ChainModel& model, const VecX& theta) {
  std::vector<Pose> local;
  local.reserve(model.bodies.size());
  for (size_t i = 0; i < model.bodies.size(); ++i)
    local.push_back(fk_local(model.bodies[i], theta(static_cast<int>(i))));
  return local;
}

/// Cumulative base-frame poses T_i = T_{0,1} ... T_{i-1,i}.
inline std::vector<Pose> fk_chain(const ChainModel& model, const VecX& theta) {
  std::vector<Pose> pose;
  pose.reserve(model.bodies.size());
  Pose T = Pose::identity();
  for (size_t i = 0; i < model.bodies.size(); ++i) {
    T = T * fk_local(model.bodies[i], theta(static_cast<int>(i)));
    pose.push_back(T);
  }
  return pose;
}

/// Body twist recursion V_i = Ad_{T_{i-1,i}^-1} V_{i-1} + xi_i * theta_dot_i.
inline std::vector<Twist> body_velocities(const ChainModel& model, const std::vector<Pose>& local,
                                          const VecX& theta_dot,
                                          const Twist& base_twist = Twist::Zero()) {
  std::vector<Twist> twist;
  twist.reserve(model.bodies.size());
  Twist prev = base_twist;
  for (size_t i = 0; i < model.bodies.size(); ++i) {
    prev = adjoint(local[i].inverse()) * prev +
           model.bodies[i].screw_axis * theta_dot(static_cast<int>(i));
    twist.push_back(prev);
  }
  return twist;
}

inline std::vector<Twist> body_velocities(const ChainModel& model, const VecX& theta,
                                          const VecX& theta_dot,
                                          const Twist& base_twist = Twist::Zero()) {
  return body_velocities(model, local_transforms(model, theta), theta_dot, base_twist);
}

/// Body acceleration recursion, the exact time derivative of the twist
/// recursion:
///   A_i = Ad_{T^-1} A_{i-1} + [Ad_{T^-1} V_{i-1}, xi_i theta_dot_i] + xi_i theta_ddot_i.
/// Gravity enters through base_accel = gravity_base_accel(g).
inline std::vector<Twist> body_accelerations(const ChainModel& model,
                                             const std::vector<Pose>& local,
                                             const std::vector<Twist>& velocity,
                                             const VecX& theta_dot, const VecX& theta_ddot,
                                             const Twist& base_accel = Twist::Zero()) {
  std::vector<Twist> accel;
  accel.reserve(model.bodies.size());
  Twist prev_accel = base_accel;
  for (size_t i = 0; i < model.bodies.size(); ++i) {
    const Mat6 Adinv = adjoint(local[i].inverse());
    const Twist xi_rate = model.bodies[i].screw_axis * theta_dot(static_cast<int>(i));
    // transported parent twist = V_i - xi_i * theta_dot_i
    const Twist transported = velocity[i] - xi_rate;
    prev_accel = Adinv * prev_accel + bracket(transported, xi_rate) +
                 model.bodies[i].screw_axis * theta_ddot(static_cast<int>(i));
    accel.push_back(prev_accel);
  }
  return accel;
}

inline std::vector<Twist> body_accelerations(const ChainModel& model, const VecX& theta,
                                             const VecX& theta_dot, const VecX& theta_ddot,
                                             const Twist& base_accel = Twist::Zero()) {
  const std::vector<Pose> local = local_transforms(model, theta);
  const std::vector<Twist> velocity = body_velocities(model, local, theta_dot);
  return body_accelerations(model, local, velocity, theta_dot, theta_ddot, base_accel);
}

/// Backward wrench pass
///   F_i = M_i A_i - coad(V_i, M_i V_i) + Ad^T_{T_{i,i+1}^-1} F_{i+1},
/// with F_{n+1} = tip_wrench applied at the tool frame (T_{n,n+1} is the
/// end-effector offset).
inline std::vector<Wrench> rne_wrenches(const ChainModel& model, const std::vector<Pose>& local,
                                        const std::vector<Twist>& velocity,
                                        const std::vector<Twist>& accel,
                                        const Wrench& tip_wrench = Wrench::Zero()) {
  const size_t n = model.bodies.size();
  std::vector<Wrench> wrench(n);
  Wrench child = tip_wrench;
  Pose child_local = model.ee_offset;
  for (size_t i = n; i-- > 0;) {
    const Mat6 M = model.bodies[i].inertia.matrix();
    wrench[i] = M * accel[i] - coad(velocity[i], M * velocity[i]) +
                adjoint(child_local.inverse()).transpose() * child;
    child = wrench[i];
    child_local = local[i];
  }
  return wrench;
}

namespace detail {
inline VecX rne_torques(const ChainModel& model, const VecX& theta, const VecX& theta_dot,
                        const VecX& theta_ddot, const Wrench& tip_wrench, const Vec3& gravity) {
  const std::vector<Pose> local = local_transforms(model, theta);
  const std::vector<Twist> velocity = body_velocities(model, local, theta_dot);
  const std::vector<Twist> accel = body_accelerations(model, local, velocity, theta_dot,
                                                      theta_ddot, gravity_base_accel(gravity));
  const std::vector<Wrench> wrench = rne_wrenches(model, local, velocity, accel, tip_wrench);
  VecX tau(model.size());
  for (int i = 0; i < model.size(); ++i) {
    const auto& body = model.bodies[static_cast<size_t>(i)];
    tau(i) = body.screw_axis.dot(wrench[static_cast<size_t>(i)]) + body.rotor_inertia * theta_ddot(i);
  }
  return tau;
}
}  // namespace detail

/// Actuator torques tau_i = xi_i . F_i + I_mi * theta_ddot_i.
inline VecX inverse_dynamics(const ChainModel& model, const VecX& theta, const VecX& theta_dot,
                             const VecX& theta_ddot, const Wrench& tip_wrench = Wrench::Zero()) {
  return detail::rne_torques(model, theta, theta_dot, theta_ddot, tip_wrench, model.gravity);
}

/// Assembled column by column from unit-acceleration inverse dynamics with
/// rates and gravity zeroed; includes the rotor inertias on the diagonal.
inline MatX mass_matrix(const ChainModel& model, const VecX& theta) {
  const int n = model.size();
  MatX M(n, n);
  const VecX zero = VecX::Zero(n);
  for (int j = 0; j < n; ++j) {
    VecX unit = VecX::Zero(n);
    unit(j) = 1.0;
    M.col(j) = detail::rne_torques(model, theta, zero, unit, Wrench::Zero(), Vec3::Zero());
  }
  return M;
}

/// Solves M(theta) theta_ddot = tau - bias with
/// bias = inverse_dynamics(theta, theta_dot, 0, tip).
inline VecX forward_dynamics(const ChainModel& model, const VecX& theta, const VecX& theta_dot,
                             const VecX& tau, const Wrench& tip_wrench = Wrench::Zero()) {
  const VecX bias = inverse_dynamics(model, theta, theta_dot, VecX::Zero(model.size()), tip_wrench);
  const MatX M = mass_matrix(model, theta);
  const VecX rhs = tau - bias;
  const VecX theta_ddot = Eigen::LDLT<MatX>(M).solve(rhs);
  if (!theta_ddot.allFinite())
    throw NumericalError("forward_dynamics: mass matrix solve produced non-finite accelerations");
  return theta_ddot;
}

/// One fixed-step RK4 update of (theta, theta_dot) under a held torque.
inline void rk4_step(const ChainModel& model, VecX& theta, VecX& theta_dot, const VecX& tau,
                     const Wrench& tip_wrench, double h) {
  const auto accel = [&](const VecX& q, const VecX& qd) {
    return forward_dynamics(model, q, qd, tau, tip_wrench);
  };
  const VecX k1q = theta_dot;
  const VecX k1v = accel(theta, theta_dot);
  const VecX k2q = theta_dot + 0.5 * h * k1v;
  const VecX k2v = accel(theta + 0.5 * h * k1q, theta_dot + 0.5 * h * k1v);
  const VecX k3q = theta_dot + 0.5 * h * k2v;
  const VecX k3v = accel(theta + 0.5 * h * k2q, theta_dot + 0.5 * h * k2v);
  const VecX k4q = theta_dot + h * k3v;
  const VecX k4v = accel(theta + h * k3q, theta_dot + h * k3v);
  theta += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  theta_dot += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

/// Kinetic energy of links and rotors.
inline double kinetic_energy(const ChainModel& model, const VecX& theta, const VecX& theta_dot) {
  const std::vector<Twist> twist = body_velocities(model, theta, theta_dot);
  double T = 0.0;
  for (int i = 0; i < model.size(); ++i) {
    const auto& body = model.bodies[static_cast<size_t>(i)];
    T += 0.5 * twist[static_cast<size_t>(i)].dot(body.inertia.matrix() * twist[static_cast<size_t>(i)]);
    T += 0.5 * body.rotor_inertia * theta_dot(i) * theta_dot(i);
  }
  return T;
}

/// Power injected by gravity: sum_i m_i g . (world velocity of COM_i).
inline double gravity_power(const ChainModel& model, const VecX& theta, const VecX& theta_dot) {
  const std::vector<Pose> local = local_transforms(model, theta);
  const std::vector<Twist> twist = body_velocities(model, local, theta_dot);
  Pose T = Pose::identity();
  double P = 0.0;
  for (int i = 0; i < model.size(); ++i) {
    T = T * local[static_cast<size_t>(i)];
    const auto& body = model.bodies[static_cast<size_t>(i)];
    const Vec3 com = body.inertia.com();
    const Vec3 v_com = T.R * (linear_part(twist[static_cast<size_t>(i)]) +
                              angular_part(twist[static_cast<size_t>(i)]).cross(com));
    P += body.inertia.mass * model.gravity.dot(v_com);
  }
  return P;
}

}  // namespace mgc
