#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

#include "mgc/control.hpp"
#include "mgc/model_io.hpp"

// Closed-loop simulation of plant + controller + adaptation, trace
// recording, and post-run analysis: decay-rate fitting, error metrics, and
// the empirical boundedness certificate for the parameter estimates.

namespace mgc {

/// Uniform-grid record of one run, one row per control step. Column names
/// are stable; see docs/SCHEMA.md for the full list.
struct Trace {
  std::vector<std::string> columns;
  std::vector<VecX> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    throw ValidationError("Trace: no column named '" + name + "'");
  }

  std::vector<double> series(const std::string& name) const {
    const int c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r(c));
    return out;
  }

  void write_csv(std::ostream& os) const {
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    char buf[32];
    for (const auto& r : rows) {
      for (int i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", r(i));
        os << (i ? "," : "") << buf;
      }
      os << "\n";
    }
  }
};

struct DecayFit {
  double rate = 0.0;  // 1/s
  double r2 = 0.0;
};

/// Least-squares slope of log V over the transient window [0, t90], where
/// t90 is the first time V reaches 10% of V(0).
inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& V) {
  if (t.size() != V.size() || t.size() < 3)
    throw ValidationError("fit_decay: need at least 3 samples");
  size_t end = t.size();
  for (size_t i = 0; i < V.size(); ++i) {
    if (!(V[i] > 0.0)) throw ValidationError("fit_decay: V must be positive over the fit window");
    if (V[i] <= 0.1 * V[0]) {
      end = i + 1;
      break;
    }
  }
  if (end < 3) end = std::min<size_t>(3, t.size());
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  const double n = static_cast<double>(end);
  for (size_t i = 0; i < end; ++i) {
    const double y = std::log(V[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
    syy += y * y;
  }
  const double denom = n * stt - st * st;
  const double slope = (n * sty - st * sy) / denom;
  const double ss_tot = syy - sy * sy / n;
  double r2 = 1.0;
  if (ss_tot > 0.0) {
    const double intercept = (sy - slope * st) / n;
    double ss_res = 0.0;
    for (size_t i = 0; i < end; ++i) {
      const double y = std::log(V[i]);
      const double fit = intercept + slope * t[i];
      ss_res += (y - fit) * (y - fit);
    }
    r2 = 1.0 - ss_res / ss_tot;
  }
  return {-slope, r2};
}

inline DecayFit fit_decay(const Trace& trace) {
  return fit_decay(trace.series("t"), trace.series("V_total"));
}

/// phi(lambda) = -log(lambda) + lambda - 1, the per-eigenvalue divergence.
inline double phi(double lambda) { return -std::log(lambda) + lambda - 1.0; }

struct BoundCheck {
  bool ok = false;
  double margin = 0.0;         // min over bodies of max v_T - gamma phi(lambda_max)
  double transient_max = 0.0;  // max relative eigenvalue seen in the transient
};

/// Empirical boundedness certificate for the estimation error: every
/// lambda_max(Lhat^-1 L) sample must stay below phi^-1(max observed v_T /
/// gamma), and past the initial transient it must not exceed its transient
/// maximum (no drift). The transient window is the first half of the run,
/// so the scenario must comfortably contain its own transient.
inline BoundCheck estimate_bound_check(const Trace& trace, double gamma, int n_bodies) {
  const std::vector<double> vT = trace.series("v_T");
  const double v_bound = *std::max_element(vT.begin(), vT.end());
  BoundCheck out;
  out.ok = true;
  out.margin = v_bound;
  const size_t transient_end = trace.rows.size() / 2;
  for (int b = 0; b < n_bodies; ++b) {
    const std::vector<double> lam = trace.series("lam_max_rel" + std::to_string(b + 1));
    double transient_max = 1.0;
    for (size_t k = 0; k <= std::min(transient_end, lam.size() - 1); ++k)
      transient_max = std::max(transient_max, lam[k]);
    out.transient_max = std::max(out.transient_max, transient_max);
    for (size_t k = 0; k < lam.size(); ++k) {
      out.margin = std::min(out.margin, v_bound - gamma * phi(lam[k]));
      if (gamma * phi(lam[k]) > v_bound) out.ok = false;
      if (k > transient_end && lam[k] > transient_max * (1.0 + 1e-9) + 1e-12) out.ok = false;
    }
  }
  return out;
}

struct RunSummary {
  std::string name;
  std::string controller;
  double final_position_error = 0.0;     // m
  double final_orientation_error = 0.0;  // rad
  double decay_rate = 0.0;               // 1/s
  double decay_r2 = 0.0;
  double max_vpf_rel = 0.0;       // max over steps of |telescoping sum| / scale
  double min_lambda_min = 0.0;    // min over time and bodies of lambda_min(Lhat)
  double sup_velocity = 0.0;      // sup over time and bodies of ||V_i||
  double torque_rms = 0.0;

  Json to_json() const {
    return Json{{"name", name},
                {"controller", controller},
                {"final_position_error_m", final_position_error},
                {"final_orientation_error_rad", final_orientation_error},
                {"decay_rate_1_per_s", decay_rate},
                {"decay_r2", decay_r2},
                {"max_vpf_rel", max_vpf_rel},
                {"min_lambda_min", min_lambda_min},
                {"sup_velocity", sup_velocity},
                {"torque_rms", torque_rms}};
  }
};

struct RunResult {
  Trace trace;
  RunSummary summary;
};

namespace detail {

inline std::vector<std::string> trace_columns(int n) {
  std::vector<std::string> cols{"t"};
  const auto per_joint = [&](const std::string& base) {
    for (int i = 1; i <= n; ++i) cols.push_back(base + std::to_string(i));
  };
  const auto per_body6 = [&](const std::string& base) {
    for (int i = 1; i <= n; ++i)
      for (int c = 0; c < 6; ++c) cols.push_back(base + std::to_string(i) + "_" + std::to_string(c));
  };
  per_joint("theta");
  per_joint("theta_dot");
  per_joint("tau");
  per_joint("theta_dot_req");
  per_joint("residual");
  per_body6("eta");
  per_joint("psi");
  per_body6("verr");
  per_joint("vpf");
  cols.push_back("vpf_sum");
  cols.push_back("vpf_scale");
  cols.push_back("V_total");
  cols.push_back("v_T");
  per_joint("dh");
  per_joint("lam_min");
  per_joint("lam_max_rel");
  per_joint("Lhat_norm");
  cols.push_back("ee_pos_err");
  cols.push_back("ee_rot_err");
  return cols;
}

inline bool verbose_logging() {
  const char* env = std::getenv("MGC_LOG");
  return env && *env;
}

}  // namespace detail

/// Runs one closed-loop scenario. Deterministic for a fixed document: the
/// controller runs at the scenario control rate with zero-order-hold torque,
/// the plant integrates with fixed-step RK4 substeps, and AMGC adaptation
/// advances once per control step. Throws NumericalError when the state
/// stops being finite, reporting the last valid time.
inline RunResult run(const ScenarioDocument& doc) {
  const ChainModel& plant = doc.model;
  const Scenario& sc = doc.scenario;
  const int n = plant.size();
  validate(plant);
  validate(doc.gains, n);
  validate(sc, n);

  const ChainModel believed =
      perturb_inertias(plant, sc.perturbation_fraction, sc.seed);
  Controller controller(believed, doc.gains, sc.controller, sc.bernoulli_order);

  const double dt = 1.0 / sc.control_rate;
  const double h = dt / sc.substeps;
  const long steps = std::lround(sc.duration * sc.control_rate);

  std::vector<PseudoInertia> true_pseudo;
  std::vector<Mat6> true_inertia;
  for (const auto& b : plant.bodies) {
    true_pseudo.push_back(to_pseudo(b.inertia));
    true_inertia.push_back(b.inertia.matrix());
  }
  const double gamma = doc.gains.adaptation.gamma;

  Trace trace;
  trace.columns = detail::trace_columns(n);
  trace.rows.reserve(static_cast<size_t>(steps) + 1);

  RunSummary summary;
  summary.name = sc.name;
  summary.controller = to_string(sc.controller);
  summary.min_lambda_min = std::numeric_limits<double>::infinity();
  double torque_sq_sum = 0.0;

  VecX theta = sc.theta0;
  VecX theta_dot = sc.theta_dot0;

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    DesiredJointState desired;
    desired.theta = VecX(n);
    desired.theta_dot = VecX(n);
    desired.theta_ddot = VecX(n);
    for (int i = 0; i < n; ++i) {
      desired.theta(i) = sc.desired[static_cast<size_t>(i)].position(t);
      desired.theta_dot(i) = sc.desired[static_cast<size_t>(i)].velocity(t);
      desired.theta_ddot(i) = sc.desired[static_cast<size_t>(i)].acceleration(t);
    }

    const std::vector<PseudoInertia> estimates = controller.estimates();
    const ControlOutput out = controller.step(theta, theta_dot, desired, dt);
    if (!out.tau.allFinite())
      throw NumericalError("run: controller produced non-finite torque at t = " +
                           std::to_string(t));

    // plant-side diagnostics with the true parameters
    const std::vector<Pose> local = local_transforms(plant, theta);
    const std::vector<Twist> vel = body_velocities(plant, local, theta_dot);
    const VecX theta_ddot = forward_dynamics(plant, theta, theta_dot, out.tau);
    const std::vector<Twist> acc =
        body_accelerations(plant, local, vel, theta_dot, theta_ddot,
                           gravity_base_accel(plant.gravity));
    const std::vector<Wrench> wrench = rne_wrenches(plant, local, vel, acc);
    const VpfRecord vpfs = vpf_record(plant, local, out.v_req, vel, out.f_req, wrench);

    double V_total = 0.0;
    for (int i = 0; i < n; ++i) {
      const size_t b = static_cast<size_t>(i);
      V_total += lyapunov_body(out.v_req[b], vel[b], true_inertia[b], out.errors[b].psi);
      V_total += lyapunov_joint(out.theta_dot_req(i), theta_dot(i),
                                plant.bodies[b].rotor_inertia);
    }

    double v_T = V_total;
    VecX dh(n), lam_min(n), lam_max_rel(n), lhat_norm(n);
    for (int i = 0; i < n; ++i) {
      const size_t b = static_cast<size_t>(i);
      dh(i) = bregman_divergence(true_pseudo[b], estimates[b], gamma);
      v_T += dh(i);
      lam_min(i) = estimates[b].min_eigenvalue();
      lam_max_rel(i) = relative_eigenvalues(true_pseudo[b], estimates[b]).maxCoeff();
      lhat_norm(i) = estimates[b].matrix().norm();
      summary.min_lambda_min = std::min(summary.min_lambda_min, lam_min(i));
    }

    const Pose ee = fk_chain(plant, theta).back() * plant.ee_offset;
    const Pose ee_d = fk_chain(plant, desired.theta).back() * plant.ee_offset;
    const Pose ee_err = ee_d.inverse() * ee;
    const double pos_err = ee_err.p.norm();
    const double rot_err = log_so3(ee_err.R).norm();

    VecX row(static_cast<int>(trace.columns.size()));
    int c = 0;
    row(c++) = t;
    for (int i = 0; i < n; ++i) row(c++) = theta(i);
    for (int i = 0; i < n; ++i) row(c++) = theta_dot(i);
    for (int i = 0; i < n; ++i) row(c++) = out.tau(i);
    for (int i = 0; i < n; ++i) row(c++) = out.theta_dot_req(i);
    for (int i = 0; i < n; ++i) row(c++) = out.residual(i);
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < 6; ++d) row(c++) = out.errors[static_cast<size_t>(i)].eta(d);
    for (int i = 0; i < n; ++i) row(c++) = out.errors[static_cast<size_t>(i)].psi;
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < 6; ++d) row(c++) = out.errors[static_cast<size_t>(i)].v_err(d);
    for (int i = 0; i < n; ++i) row(c++) = vpfs.p[static_cast<size_t>(i)];
    row(c++) = vpfs.telescoping_sum;
    row(c++) = vpfs.scale;
    row(c++) = V_total;
    row(c++) = v_T;
    for (int i = 0; i < n; ++i) row(c++) = dh(i);
    for (int i = 0; i < n; ++i) row(c++) = lam_min(i);
    for (int i = 0; i < n; ++i) row(c++) = lam_max_rel(i);
    for (int i = 0; i < n; ++i) row(c++) = lhat_norm(i);
    row(c++) = pos_err;
    row(c++) = rot_err;
    if (!row.allFinite())
      throw NumericalError("run: non-finite diagnostics at t = " + std::to_string(t));
    trace.rows.push_back(row);

    summary.max_vpf_rel = std::max(
        summary.max_vpf_rel, std::abs(vpfs.telescoping_sum) / std::max(1e-300, vpfs.scale));
    for (const auto& v : vel) summary.sup_velocity = std::max(summary.sup_velocity, v.norm());
    torque_sq_sum += out.tau.squaredNorm();

    if (k == steps) {
      summary.final_position_error = pos_err;
      summary.final_orientation_error = rot_err;
      break;
    }

    for (int s = 0; s < sc.substeps; ++s) rk4_step(plant, theta, theta_dot, out.tau, Wrench::Zero(), h);
    if (!theta.allFinite() || !theta_dot.allFinite())
      throw NumericalError("run: state became non-finite after t = " + std::to_string(t) +
                           " (last valid step " + std::to_string(k) + ")");

    if (detail::verbose_logging() && k % std::max<long>(1, steps / 10) == 0)
      std::fprintf(stderr, "[mgc] %s t=%.3f ee_err=%.3e V=%.3e\n", sc.name.c_str(), t, pos_err,
                   V_total);
  }

  summary.torque_rms =
      std::sqrt(torque_sq_sum / (static_cast<double>(steps + 1) * static_cast<double>(n)));
  try {
    const DecayFit fit = fit_decay(trace);
    summary.decay_rate = fit.rate;
    summary.decay_r2 = fit.r2;
  } catch (const ValidationError&) {
    summary.decay_rate = 0.0;  // V not positive over the window (e.g. exact start)
    summary.decay_r2 = 0.0;
  }
  return {std::move(trace), summary};
}

/// Runs every scenario and aligns the summaries into one table; duplicate
/// run names are deduplicated with a numeric suffix.
inline std::vector<RunSummary> compare(const std::vector<ScenarioDocument>& docs) {
  std::vector<RunSummary> out;
  for (const auto& doc : docs) {
    RunSummary s = run(doc).summary;
    std::string base = s.name;
    int suffix = 2;
    for (const auto& prev : out)
      if (prev.name == s.name) s.name = base + "_" + std::to_string(suffix++);
    out.push_back(s);
  }
  return out;
}

inline void write_comparison_csv(const std::vector<RunSummary>& rows, std::ostream& os) {
  os << "name,controller,final_position_error_m,final_orientation_error_rad,decay_rate_1_per_s,"
        "decay_r2,torque_rms,max_vpf_rel,min_lambda_min,sup_velocity\n";
  char buf[32];
  const auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    os << r.name << "," << r.controller << "," << num(r.final_position_error) << ","
       << num(r.final_orientation_error) << "," << num(r.decay_rate) << "," << num(r.decay_r2)
       << "," << num(r.torque_rms) << "," << num(r.max_vpf_rel) << "," << num(r.min_lambda_min)
       << "," << num(r.sup_velocity) << "\n";
  }
}

}  // namespace mgc
