#pragma once

#include <optional>
#include <vector>

#include "mgc/kindyn.hpp"

// The modular geometric controller (MGC), its adaptive variant (AMGC), a
// simplified geometric-PD baseline, and the virtual-power-flow / Lyapunov
// diagnostics of the closed loop.
//
// Per body the controller forms the pose error e = Td^-1 T, its logarithm
// eta, the velocity error Ve = Ad_{e^-1} Vd - V, the required velocity
// Vr = Ad_{e^-1} Vd - Gamma eta, and the required acceleration
//   Ar = Ad_{e^-1} Ad_d + [Ve, Ad_{e^-1} Vd] + Gamma B(eta) Ve,
// the exact time derivative of Vr (B is the dlog series; since
// d/dt eta = -B(eta) Ve, the feedback term enters with a plus sign).
// A backward pass assembles the required wrenches and the joint layer turns
// them into actuator torques.

namespace mgc {

/// Per-body tracking error. `v_err` is the velocity error Ve.
struct BodyError {
  Pose e;
  Twist eta = Twist::Zero();
  Twist v_err = Twist::Zero();
  double psi = 0.0;
};

/// e = desired^-1 * actual, eta = log(e), psi = eta . K_z eta / 2.
/// Throws InjectivityError when the relative rotation reaches the boundary
/// of the logarithm's injectivity region.
inline BodyError config_error(const Pose& desired, const Pose& actual, const Mat6& K_z) {
  BodyError out;
  out.e = desired.inverse() * actual;
  out.eta = log_se3(out.e);
  out.psi = 0.5 * out.eta.dot(K_z * out.eta);
  return out;
}

/// Ve = Ad_{e^-1} v_desired - v_actual: the desired velocity is transported
/// into the actual body frame before comparison.
inline Twist velocity_error(const Pose& e, const Twist& v_desired, const Twist& v_actual) {
  return adjoint(e.inverse()) * v_desired - v_actual;
}

/// Vr = Ad_{e^-1} v_desired - Gamma eta.
inline Twist required_velocity(const Pose& e, const Twist& v_desired, const Twist& eta,
                               const Mat6& Gamma) {
  return adjoint(e.inverse()) * v_desired - Gamma * eta;
}

/// Exact time derivative of required_velocity; see the header comment for
/// the sign of the series term.
inline Twist required_acceleration(const Pose& e, const Twist& a_desired, const Twist& v_desired,
                                   const Twist& v_err, const Twist& eta, const Mat6& Gamma,
                                   int order = 8) {
  const Mat6 Ad_einv = adjoint(e.inverse());
  const Twist v_desired_local = Ad_einv * v_desired;
  return Ad_einv * a_desired + bracket(v_err, v_desired_local) +
         Gamma * (bernoulli_operator(eta, order) * v_err);
}

/// Backward pass of the required wrenches:
///   Fr_i = M_i Ar_i - coad(V_i, M_i Vr_i) + K_v (Vr_i - V_i) + Ad^T Fr_{i+1},
/// with a free tip (Fr_{n+1} = 0). The inertia per body is passed in so the
/// exact-parameter and estimated variants share the pass.
inline std::vector<Wrench> required_wrenches(const ChainModel& model,
                                             const std::vector<Mat6>& inertias, const Mat6& K_v,
                                             const std::vector<Pose>& local,
                                             const std::vector<Twist>& v_req,
                                             const std::vector<Twist>& a_req,
                                             const std::vector<Twist>& v_actual) {
  const size_t n = model.bodies.size();
  std::vector<Wrench> f_req(n);
  Wrench child = Wrench::Zero();
  for (size_t i = n; i-- > 0;) {
    f_req[i] = inertias[i] * a_req[i] - coad(v_actual[i], inertias[i] * v_req[i]) +
               K_v * (v_req[i] - v_actual[i]);
    if (i + 1 < n) f_req[i] += adjoint(local[i + 1].inverse()).transpose() * child;
    child = f_req[i];
  }
  return f_req;
}

/// Required wrenches with the true (believed-model) inertias.
inline std::vector<Wrench> required_wrenches_mgc(const ChainModel& model, const Mat6& K_v,
                                                 const std::vector<Pose>& local,
                                                 const std::vector<Twist>& v_req,
                                                 const std::vector<Twist>& a_req,
                                                 const std::vector<Twist>& v_actual) {
  std::vector<Mat6> inertias;
  inertias.reserve(model.bodies.size());
  for (const auto& b : model.bodies) inertias.push_back(b.inertia.matrix());
  return required_wrenches(model, inertias, K_v, local, v_req, a_req, v_actual);
}

/// Required wrenches with estimated inertias; also emits the per-body
/// symmetric regressor driving the adaptation. The regressor's first slot
/// is the required-velocity error Vr - V, matching the adaptation Lyapunov
/// cross term.
inline std::vector<Wrench> required_wrenches_amgc(const ChainModel& model,
                                                  const std::vector<PseudoInertia>& estimates,
                                                  const Mat6& K_v, const std::vector<Pose>& local,
                                                  const std::vector<Twist>& v_req,
                                                  const std::vector<Twist>& a_req,
                                                  const std::vector<Twist>& v_actual,
                                                  std::vector<SymmetricRegressor>* regressors) {
  const size_t n = model.bodies.size();
  std::vector<Mat6> inertias;
  inertias.reserve(n);
  for (const auto& L : estimates) inertias.push_back(from_pseudo(L).matrix());
  if (regressors) {
    regressors->clear();
    for (size_t i = 0; i < n; ++i)
      regressors->push_back(regressor(v_req[i] - v_actual[i], v_req[i], a_req[i], v_actual[i]));
  }
  return required_wrenches(model, inertias, K_v, local, v_req, a_req, v_actual);
}

/// Least-squares solution of xi * rate = Vr_i - Ad_{T^-1} Vr_{i-1}; the
/// residual norm reports how consistent the per-body required velocities
/// are with the joint constraint.
inline double required_joint_velocity(const Twist& v_req, const Twist& v_req_parent,
                                      const Pose& local, const Twist& xi,
                                      double* residual = nullptr) {
  const Twist r = v_req - adjoint(local.inverse()) * v_req_parent;
  const double rate = xi.dot(r) / xi.squaredNorm();
  if (residual) *residual = (r - xi * rate).norm();
  return rate;
}

/// Joint-layer action: rotor feedforward plus velocity servo.
inline double required_joint_action(double theta_ddot_req, double theta_dot_req, double theta_dot,
                                    double rotor_inertia, double k_a) {
  return rotor_inertia * theta_ddot_req + k_a * (theta_dot_req - theta_dot);
}

/// Actuator torque: wrench projection through the screw axis plus the joint
/// action.
inline double joint_command(const Twist& xi, const Wrench& f_req, double joint_action) {
  return xi.dot(f_req) + joint_action;
}

/// Virtual power flow at a subsystem interface.
inline double vpf(const Twist& v_req, const Twist& v_actual, const Wrench& f_req,
                  const Wrench& f_actual) {
  return (v_req - v_actual).dot(f_req - f_actual);
}

inline double lyapunov_body(const Twist& v_req, const Twist& v_actual, const Mat6& M, double psi) {
  const Twist d = v_req - v_actual;
  return 0.5 * d.dot(M * d) + psi;
}

inline double lyapunov_joint(double theta_dot_req, double theta_dot, double rotor_inertia) {
  const double d = theta_dot_req - theta_dot;
  return 0.5 * rotor_inertia * d * d;
}

/// Interface power bookkeeping of one control step. Each body subsystem
/// exchanges p_i with its joint and hands p_tilde_{i+1} (its own velocity
/// error transported across the joint, paired with the child wrench error)
/// to the next subsystem; the joint subsystem returns them with opposite
/// signs. With a fixed base and a free tip every term cancels.
struct VpfRecord {
  std::vector<double> p;            // (Vr_i - V_i) . (Fr_i - F_i)
  std::vector<double> body_cross;   // p_i - p_tilde_{i+1}
  std::vector<double> joint_cross;  // p_tilde_i - p_i
  double telescoping_sum = 0.0;     // sum of all cross terms
  double scale = 0.0;               // sum of magnitudes, for relative checks
};

inline VpfRecord vpf_record(const ChainModel& model, const std::vector<Pose>& local,
                            const std::vector<Twist>& v_req, const std::vector<Twist>& v_actual,
                            const std::vector<Wrench>& f_req,
                            const std::vector<Wrench>& f_actual) {
  const size_t n = model.bodies.size();
  VpfRecord rec;
  rec.p.resize(n);
  rec.body_cross.resize(n);
  rec.joint_cross.resize(n);
  const auto transported = [&](size_t interface) {
    // p_tilde at `interface` (1-based body index): parent velocity error
    // moved across T_{interface-1, interface}, paired with Delta F there
    if (interface == 0 || interface >= n) return 0.0;  // fixed base / free tip
    const Twist parent_err = v_req[interface - 1] - v_actual[interface - 1];
    return (adjoint(local[interface].inverse()) * parent_err).dot(f_req[interface] - f_actual[interface]);
  };
  for (size_t i = 0; i < n; ++i) {
    rec.p[i] = vpf(v_req[i], v_actual[i], f_req[i], f_actual[i]);
    rec.body_cross[i] = rec.p[i] - transported(i + 1);
    rec.joint_cross[i] = transported(i) - rec.p[i];
    rec.telescoping_sum += rec.body_cross[i] + rec.joint_cross[i];
    rec.scale += std::abs(rec.body_cross[i]) + std::abs(rec.joint_cross[i]);
  }
  return rec;
}

/// End-effector wrench of the geometric-PD baseline: exact configuration
/// energy gradient plus velocity-error damping.
inline Wrench baseline_wrench(const Pose& e, const Twist& v_err, const Mat6& K_z, const Mat6& K_v,
                              int order = 8) {
  const Twist eta = log_se3(e);
  return -bernoulli_operator(eta, order).transpose() * (K_z * eta) + K_v * v_err;
}

/// Desired joint-space signals handed to the controller each step.
struct DesiredJointState {
  VecX theta;
  VecX theta_dot;
  VecX theta_ddot;
};

/// Everything one controller evaluation produces, for the trace and tests.
struct ControlOutput {
  VecX tau;
  std::vector<BodyError> errors;
  std::vector<Twist> v_req;
  std::vector<Twist> a_req;
  std::vector<Wrench> f_req;
  VecX theta_dot_req;
  VecX theta_ddot_req;
  VecX residual;  // joint-consistency residual of the required velocities
  std::vector<SymmetricRegressor> regressors;  // filled for AMGC
};

/// Control law plus the state it owns: the derivative filter for the
/// required joint acceleration and, for AMGC, the inertia estimates.
/// Evaluation itself is a pure function of (model, gains, state, desired,
/// estimates); `step` additionally advances the owned state.
class Controller {
 public:
  Controller(ChainModel believed_model, GainSet gains, ControllerKind kind,
             int bernoulli_order = 8)
      : model_(std::move(believed_model)),
        gains_(std::move(gains)),
        kind_(kind),
        order_(bernoulli_order) {
    validate(model_);
    validate(gains_, model_.size());
    adaptation_ = gains_.adaptation;
    adaptation_.nominal.clear();
    for (const auto& b : model_.bodies) {
      estimates_.push_back(to_pseudo(b.inertia));
      adaptation_.nominal.push_back(estimates_.back());
    }
    reset();
  }

  const ChainModel& model() const { return model_; }
  const GainSet& gains() const { return gains_; }
  ControllerKind kind() const { return kind_; }
  const std::vector<PseudoInertia>& estimates() const { return estimates_; }

  void set_estimates(std::vector<PseudoInertia> estimates) {
    if (estimates.size() != model_.bodies.size())
      throw ValidationError("Controller: one estimate per body required");
    estimates_ = std::move(estimates);
  }

  /// Disables the adaptation update; the wrench law keeps using the current
  /// estimates. Used by the reduction-identity diagnostics.
  void freeze_adaptation(bool frozen) { frozen_ = frozen; }

  void reset() {
    prev_rate_valid_ = false;
    prev_theta_dot_req_ = VecX::Zero(model_.size());
    filtered_accel_ = VecX::Zero(model_.size());
  }

  /// Pure evaluation with an explicit required joint acceleration.
  ControlOutput evaluate(const VecX& theta, const VecX& theta_dot,
                         const DesiredJointState& desired, const VecX& theta_ddot_req) const {
    return run(theta, theta_dot, desired, &theta_ddot_req, 0.0, nullptr);
  }

  /// Control-rate step: filters the required joint acceleration from the
  /// required joint velocity history and, for AMGC, advances the estimates.
  ControlOutput step(const VecX& theta, const VecX& theta_dot, const DesiredJointState& desired,
                     double dt) {
    ControlOutput out = run(theta, theta_dot, desired, nullptr, dt, this);
    if (kind_ == ControllerKind::amgc && !frozen_) {
      for (size_t i = 0; i < estimates_.size(); ++i)
        estimates_[i] = adapt_step(estimates_[i], out.regressors[i], adaptation_, i, dt);
    }
    return out;
  }

 private:
  ControlOutput run(const VecX& theta, const VecX& theta_dot, const DesiredJointState& desired,
                    const VecX* theta_ddot_req, double dt, Controller* mutable_self) const {
    const int n = model_.size();
    ControlOutput out;
    out.errors.resize(static_cast<size_t>(n));
    out.v_req.resize(static_cast<size_t>(n));
    out.a_req.resize(static_cast<size_t>(n));
    out.theta_dot_req = VecX::Zero(n);
    out.residual = VecX::Zero(n);
    out.tau = VecX::Zero(n);

    // desired-side kinematics; the desired accelerations carry the gravity
    // base term so the wrench pass produces gravity feedforward
    const std::vector<Pose> local_d = local_transforms(model_, desired.theta);
    const std::vector<Twist> v_d = body_velocities(model_, local_d, desired.theta_dot);
    const std::vector<Twist> a_d =
        body_accelerations(model_, local_d, v_d, desired.theta_dot, desired.theta_ddot,
                           gravity_base_accel(model_.gravity));
    std::vector<Pose> pose_d(static_cast<size_t>(n));
    Pose acc_d = Pose::identity();
    for (int i = 0; i < n; ++i) {
      acc_d = acc_d * local_d[static_cast<size_t>(i)];
      pose_d[static_cast<size_t>(i)] = acc_d;
    }

    const std::vector<Pose> local = local_transforms(model_, theta);
    const std::vector<Twist> v = body_velocities(model_, local, theta_dot);
    std::vector<Pose> pose(static_cast<size_t>(n));
    Pose acc = Pose::identity();
    for (int i = 0; i < n; ++i) {
      acc = acc * local[static_cast<size_t>(i)];
      pose[static_cast<size_t>(i)] = acc;
    }

    for (int i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(i);
      BodyError err = config_error(pose_d[k], pose[k], gains_.K_z[k]);
      err.v_err = velocity_error(err.e, v_d[k], v[k]);
      out.v_req[k] = required_velocity(err.e, v_d[k], err.eta, gains_.Gamma[k]);
      out.a_req[k] = required_acceleration(err.e, a_d[k], v_d[k], err.v_err, err.eta,
                                           gains_.Gamma[k], order_);
      out.errors[k] = err;
    }

    for (int i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(i);
      const Twist parent = (i == 0) ? Twist::Zero() : out.v_req[k - 1];
      out.theta_dot_req(i) = required_joint_velocity(out.v_req[k], parent, local[k],
                                                     model_.bodies[k].screw_axis, &out.residual(i));
    }

    if (theta_ddot_req) {
      out.theta_ddot_req = *theta_ddot_req;
    } else {
      // first-order low pass on the backward difference of theta_dot_req
      const double alpha = 1.0 - std::exp(-2.0 * M_PI * gains_.accel_filter_cutoff_hz * dt);
      VecX raw = VecX::Zero(n);
      if (prev_rate_valid_) raw = (out.theta_dot_req - prev_theta_dot_req_) / dt;
      VecX filtered = filtered_accel_ + alpha * (raw - filtered_accel_);
      out.theta_ddot_req = filtered;
      if (mutable_self) {
        mutable_self->prev_theta_dot_req_ = out.theta_dot_req;
        mutable_self->filtered_accel_ = filtered;
        mutable_self->prev_rate_valid_ = true;
      }
    }

    if (kind_ == ControllerKind::amgc) {
      out.f_req = required_wrenches_amgc(model_, estimates_, gains_.K_v, local, out.v_req,
                                         out.a_req, v, &out.regressors);
    } else {
      out.f_req = required_wrenches_mgc(model_, gains_.K_v, local, out.v_req, out.a_req, v);
    }

    if (kind_ == ControllerKind::baseline_pd) {
      out.tau = baseline_torques(pose, pose_d, v, v_d, theta);
    } else {
      for (int i = 0; i < n; ++i) {
        const size_t k = static_cast<size_t>(i);
        const double action =
            required_joint_action(out.theta_ddot_req(i), out.theta_dot_req(i), theta_dot(i),
                                  model_.bodies[k].rotor_inertia, gains_.k_a[k]);
        out.tau(i) = joint_command(model_.bodies[k].screw_axis, out.f_req[k], action);
      }
    }
    return out;
  }

  /// Simplified geometric-PD baseline: end-effector energy-gradient wrench
  /// mapped through the body Jacobian transpose, plus gravity feedforward
  /// from the believed model. Not a reimplementation of the published
  /// comparison controllers.
  VecX baseline_torques(const std::vector<Pose>& pose, const std::vector<Pose>& pose_d,
                        const std::vector<Twist>& v, const std::vector<Twist>& v_d,
                        const VecX& theta) const {
    const int n = model_.size();
    const Pose T_ee = pose[static_cast<size_t>(n - 1)] * model_.ee_offset;
    const Pose T_ee_d = pose_d[static_cast<size_t>(n - 1)] * model_.ee_offset;
    const Mat6 Ad_tool = adjoint(model_.ee_offset.inverse());
    const Twist v_ee = Ad_tool * v[static_cast<size_t>(n - 1)];
    const Twist v_ee_d = Ad_tool * v_d[static_cast<size_t>(n - 1)];

    const Pose e = T_ee_d.inverse() * T_ee;
    const Twist v_err = velocity_error(e, v_ee_d, v_ee);
    const Wrench F = baseline_wrench(e, v_err, gains_.K_z[static_cast<size_t>(n - 1)], gains_.K_v,
                                     order_);

    // body Jacobian of the tool frame
    VecX tau(n);
    for (int k = 0; k < n; ++k) {
      const Pose T_k_to_ee = pose[static_cast<size_t>(k)].inverse() * T_ee;
      const Twist column = adjoint(T_k_to_ee.inverse()) * model_.bodies[static_cast<size_t>(k)].screw_axis;
      tau(k) = column.dot(F);
    }
    // gravity feedforward keeps the set-point reachable
    tau += inverse_dynamics(model_, theta, VecX::Zero(n), VecX::Zero(n));
    return tau;
  }

  ChainModel model_;
  GainSet gains_;
  ControllerKind kind_;
  int order_;
  AdaptationConfig adaptation_;
  std::vector<PseudoInertia> estimates_;
  bool frozen_ = false;
  bool prev_rate_valid_ = false;
  VecX prev_theta_dot_req_;
  VecX filtered_accel_;
};

}  // namespace mgc
