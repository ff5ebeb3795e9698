#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mgc/inertia.hpp"
#include "mgc/liegroup.hpp"

// Chain description, gain schedules, scenario definitions, programmatic
// model builders, and controlled perturbation of inertial parameters for
// adaptive experiments.

namespace mgc {

/// One body + joint module of a serial chain. The screw axis is expressed
/// in the body frame, after the home transform; revolute axes carry a unit
/// angular part.
struct BodyModule {
  std::string name;
  Twist screw_axis = make_twist(Vec3::UnitZ(), Vec3::Zero());
  Pose home_transform;  // frame {i} in frame {i-1} at zero joint angle
  SpatialInertia inertia;
  double rotor_inertia = 1.0;
};

struct ChainModel {
  std::string name = "chain";
  std::vector<BodyModule> bodies;
  Vec3 gravity{0.0, 0.0, -9.80665};
  Pose ee_offset;  // tool frame in the last body frame

  int size() const { return static_cast<int>(bodies.size()); }

  double total_mass() const {
    double m = 0.0;
    for (const auto& b : bodies) m += b.inertia.mass;
    return m;
  }
};

inline void validate(const ChainModel& model) {
  if (model.bodies.empty()) throw ValidationError("model.bodies: chain must have at least one body");
  for (size_t i = 0; i < model.bodies.size(); ++i) {
    const auto& b = model.bodies[i];
    const std::string where = "model.bodies[" + std::to_string(i) + "]";
    if (std::abs(angular_part(b.screw_axis).norm() - 1.0) > 1e-9)
      throw ValidationError(where + ".screw_axis: angular part must be unit for a revolute joint");
    if (!(b.rotor_inertia > 0.0)) throw ValidationError(where + ".rotor_inertia: must be positive");
    if (!(b.inertia.mass > 0.0)) throw ValidationError(where + ".inertia.mass: must be positive");
    if (!is_physically_consistent(b.inertia))
      throw ValidationError(where + ".inertia: parameters are not physically consistent");
    if (!is_rotation(b.home_transform.R, 1e-9))
      throw ValidationError(where + ".home: rotation block is not in SO(3)");
  }
  if (!model.gravity.allFinite()) throw ValidationError("model.gravity: entries must be finite");
}

/// Controller gains for the whole chain.
struct GainSet {
  std::vector<Mat6> Gamma;  // per-body configuration-error gain, SPD
  std::vector<Mat6> K_z;    // per-body configuration-energy weight, SPD
  Mat6 K_v = 2000.0 * Mat6::Identity();
  std::vector<double> k_a;  // per-joint velocity gain, > 0
  AdaptationConfig adaptation;
  double accel_filter_cutoff_hz = 100.0;
};

namespace detail {
inline bool is_spd6(const Mat6& M, double tol = 1e-9) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, M.cwiseAbs().maxCoeff()))
    return false;
  Eigen::SelfAdjointEigenSolver<Mat6> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}
}  // namespace detail

inline void validate(const GainSet& gains, int n) {
  const auto require = [&](bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ValidationError("gains." + field + ": " + why);
  };
  require(static_cast<int>(gains.Gamma.size()) == n, "Gamma", "needs one entry per body");
  require(static_cast<int>(gains.K_z.size()) == n, "K_z", "needs one entry per body");
  require(static_cast<int>(gains.k_a.size()) == n, "k_a", "needs one entry per joint");
  for (int i = 0; i < n; ++i) {
    require(detail::is_spd6(gains.Gamma[static_cast<size_t>(i)]),
            "Gamma[" + std::to_string(i) + "]", "must be symmetric positive definite");
    require(detail::is_spd6(gains.K_z[static_cast<size_t>(i)]),
            "K_z[" + std::to_string(i) + "]", "must be symmetric positive definite");
    require(gains.k_a[static_cast<size_t>(i)] > 0.0, "k_a[" + std::to_string(i) + "]",
            "must be positive");
  }
  require(detail::is_spd6(gains.K_v), "K_v", "must be symmetric positive definite");
  require(gains.adaptation.gamma > 0.0, "adaptation.gamma", "must be positive");
  require(gains.adaptation.sigma >= 0.0, "adaptation.sigma", "must be nonnegative");
  require(gains.accel_filter_cutoff_hz > 0.0, "accel_filter_cutoff_hz", "must be positive");
}

/// Defaults: the published 4R gain schedule when the chain has four bodies,
/// a generic schedule otherwise; K_z falls back to 0.5 * Gamma_i * K_v.
inline GainSet default_gains(const ChainModel& model) {
  const int n = model.size();
  GainSet g;
  if (n == 4) {
    for (double s : {5.0, 3.0, 3.0, 1.5}) g.Gamma.push_back(s * Mat6::Identity());
    g.k_a = {10000.0, 20000.0, 10000.0, 350.0};
  } else {
    g.Gamma.assign(static_cast<size_t>(n), 3.0 * Mat6::Identity());
    g.k_a.assign(static_cast<size_t>(n), 1000.0);
  }
  g.K_v = 2000.0 * Mat6::Identity();
  for (int i = 0; i < n; ++i) g.K_z.push_back(0.5 * g.Gamma[static_cast<size_t>(i)] * g.K_v);
  g.adaptation.gamma = 8.0e4;
  g.adaptation.sigma = 0.1;
  return g;
}

/// Desired joint motion, one per joint.
struct JointTrajectory {
  enum class Kind { setpoint, polynomial, sinusoid };
  Kind kind = Kind::setpoint;
  double value = 0.0;           // setpoint
  std::vector<double> coeffs;   // polynomial in t, ascending powers
  double amplitude = 0.0;       // sinusoid: offset + A sin(2 pi f t + phase)
  double frequency_hz = 0.0;
  double phase = 0.0;
  double offset = 0.0;

  double position(double t) const {
    switch (kind) {
      case Kind::setpoint: return value;
      case Kind::polynomial: {
        double acc = 0.0;
        for (size_t k = coeffs.size(); k-- > 0;) acc = acc * t + coeffs[k];
        return acc;
      }
      case Kind::sinusoid:
        return offset + amplitude * std::sin(2.0 * M_PI * frequency_hz * t + phase);
    }
    return 0.0;
  }

  double velocity(double t) const {
    switch (kind) {
      case Kind::setpoint: return 0.0;
      case Kind::polynomial: {
        double acc = 0.0;
        for (size_t k = coeffs.size(); k-- > 1;) acc = acc * t + static_cast<double>(k) * coeffs[k];
        return acc;
      }
      case Kind::sinusoid: {
        const double w = 2.0 * M_PI * frequency_hz;
        return amplitude * w * std::cos(w * t + phase);
      }
    }
    return 0.0;
  }

  double acceleration(double t) const {
    switch (kind) {
      case Kind::setpoint: return 0.0;
      case Kind::polynomial: {
        double acc = 0.0;
        for (size_t k = coeffs.size(); k-- > 2;)
          acc = acc * t + static_cast<double>(k) * static_cast<double>(k - 1) * coeffs[k];
        return acc;
      }
      case Kind::sinusoid: {
        const double w = 2.0 * M_PI * frequency_hz;
        return -amplitude * w * w * std::sin(w * t + phase);
      }
    }
    return 0.0;
  }
};

enum class ControllerKind { mgc, amgc, baseline_pd };

inline std::string to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::mgc: return "mgc";
    case ControllerKind::amgc: return "amgc";
    case ControllerKind::baseline_pd: return "baseline_pd";
  }
  return "mgc";
}

struct Scenario {
  std::string name = "scenario";
  ControllerKind controller = ControllerKind::mgc;
  double duration = 10.0;        // s
  double control_rate = 1000.0;  // Hz
  int substeps = 2;              // RK4 steps per control period
  VecX theta0;
  VecX theta_dot0;
  std::vector<JointTrajectory> desired;
  double perturbation_fraction = 0.0;
  std::uint64_t seed = 1;
  int bernoulli_order = 8;
};

inline void validate(const Scenario& s, int n) {
  const auto require = [&](bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ValidationError("scenario." + field + ": " + why);
  };
  require(s.duration > 0.0, "duration", "must be positive");
  require(s.control_rate > 0.0, "control_rate", "must be positive");
  require(s.substeps >= 1, "substeps", "must be at least 1");
  require(s.theta0.size() == n, "initial.theta", "needs one entry per joint");
  require(s.theta_dot0.size() == n, "initial.theta_dot", "needs one entry per joint");
  require(static_cast<int>(s.desired.size()) == n, "desired", "needs one trajectory per joint");
  require(s.perturbation_fraction >= 0.0 && s.perturbation_fraction <= 0.5,
          "perturbation.fraction", "must be in [0, 0.5]");
  require(s.bernoulli_order >= 2 && s.bernoulli_order <= 16, "bernoulli_order",
          "must be in [2, 16]");
}

/// Scales each body's (mass, first moment, rotational inertia) by three
/// independent factors in [1 - fraction, 1 + fraction], drawn
/// deterministically from the seed. Re-checks physical consistency and
/// resamples a body up to 100 times before giving up.
inline ChainModel perturb_inertias(const ChainModel& model, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 0.5)
    throw ValidationError("perturb_inertias: fraction must be in [0, 0.5]");
  ChainModel out = model;
  std::mt19937_64 rng(seed);
  // engine output mapped to [0,1) by hand so results are identical across
  // standard libraries
  const auto draw = [&]() {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return 1.0 - fraction + 2.0 * fraction * u;
  };
  for (auto& body : out.bodies) {
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      SpatialInertia cand;
      cand.mass = body.inertia.mass * draw();
      cand.first_moment = body.inertia.first_moment * draw();
      cand.rotational_inertia = body.inertia.rotational_inertia * draw();
      if (is_physically_consistent(cand)) {
        body.inertia = cand;
        ok = true;
      }
    }
    if (!ok)
      throw ValidationError("perturb_inertias: no physically consistent perturbation found for body '" +
                            body.name + "'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Programmatic builders used by tests, property checks, and benchmarks.

/// Parameters of the planar two-link arm: both joints about z, links along
/// x, gravity along -y, so the closed-form planar dynamics apply.
struct TwolinkParams {
  double m1 = 2.0, l1 = 1.0, lc1 = 0.5;
  double izz1 = 0.16833333333333333;  // about the COM; box 1.0 x 0.1 x 0.1
  double ixx1 = 0.0033333333333333335;
  double rotor1 = 0.1;
  double m2 = 1.5, lc2 = 0.4;
  double izz2 = 0.08125;  // box 0.8 x 0.1 x 0.1
  double ixx2 = 0.0025;
  double rotor2 = 0.08;
  double gravity = 9.81;
  double tool = 0.8;
};

inline ChainModel make_planar_twolink(const TwolinkParams& p = {}) {
  ChainModel model;
  model.name = "planar_twolink";
  model.gravity = Vec3(0.0, -p.gravity, 0.0);

  BodyModule b1;
  b1.name = "link1";
  b1.screw_axis = make_twist(Vec3::UnitZ(), Vec3::Zero());
  b1.home_transform = Pose::identity();
  b1.inertia = SpatialInertia::from_com(p.m1, Vec3(p.lc1, 0, 0),
                                        Vec3(p.ixx1, p.izz1, p.izz1).asDiagonal());
  b1.rotor_inertia = p.rotor1;

  BodyModule b2;
  b2.name = "link2";
  b2.screw_axis = make_twist(Vec3::UnitZ(), Vec3::Zero());
  b2.home_transform = Pose{Mat3::Identity(), Vec3(p.l1, 0, 0)};
  b2.inertia = SpatialInertia::from_com(p.m2, Vec3(p.lc2, 0, 0),
                                        Vec3(p.ixx2, p.izz2, p.izz2).asDiagonal());
  b2.rotor_inertia = p.rotor2;

  model.bodies = {b1, b2};
  model.ee_offset = Pose{Mat3::Identity(), Vec3(p.tool, 0, 0)};
  validate(model);
  return model;
}

/// Serial chain of n identical links with alternating joint axes; used for
/// the linear-complexity benchmark.
inline ChainModel make_uniform_chain(int n) {
  ChainModel model;
  model.name = "uniform_chain_" + std::to_string(n);
  for (int i = 0; i < n; ++i) {
    BodyModule b;
    b.name = "link" + std::to_string(i + 1);
    b.screw_axis = (i % 2 == 0) ? make_twist(Vec3::UnitZ(), Vec3::Zero())
                                : make_twist(Vec3::UnitY(), Vec3::Zero());
    b.home_transform = (i == 0) ? Pose::identity() : Pose{Mat3::Identity(), Vec3(1.0, 0, 0)};
    b.inertia = SpatialInertia::from_com(10.0, Vec3(0.5, 0, 0),
                                         Vec3(0.05, 0.85, 0.85).asDiagonal());
    b.rotor_inertia = 0.5;
    model.bodies.push_back(b);
  }
  model.ee_offset = Pose{Mat3::Identity(), Vec3(1.0, 0, 0)};
  validate(model);
  return model;
}

}  // namespace mgc
