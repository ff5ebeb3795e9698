#pragma once

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "mgc/model.hpp"

// JSON ingestion and canonical serialization of the model/gains/scenario
// document. The schema is documented field by field in docs/SCHEMA.md.

namespace mgc {

using Json = nlohmann::json;

/// Everything one scenario file describes.
struct ScenarioDocument {
  ChainModel model;
  GainSet gains;
  Scenario scenario;
};

namespace io_detail {

[[noreturn]] inline void fail(const std::string& ctx, const std::string& why) {
  throw ValidationError(ctx + ": " + why);
}

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                       const std::string& ctx) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(ctx, "unknown key '" + item.key() + "'");
  }
}

inline const Json& required(const Json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) fail(ctx, "missing required field '" + std::string(key) + "'");
  return j.at(key);
}

inline double number(const Json& v, const std::string& ctx) {
  if (!v.is_number()) fail(ctx, "expected a number");
  return v.get<double>();
}

inline Vec3 vec3(const Json& v, const std::string& ctx) {
  if (!v.is_array() || v.size() != 3) fail(ctx, "expected an array of 3 numbers");
  return {number(v[0], ctx), number(v[1], ctx), number(v[2], ctx)};
}

inline VecX vecn(const Json& v, int n, const std::string& ctx) {
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    fail(ctx, "expected an array of " + std::to_string(n) + " numbers");
  VecX out(n);
  for (int i = 0; i < n; ++i) out(i) = number(v[static_cast<size_t>(i)], ctx);
  return out;
}

inline Pose parse_pose(const Json& j, const std::string& ctx) {
  check_keys(j, {"translation", "rotation", "rotvec"}, ctx);
  Pose T;
  if (j.contains("translation")) T.p = vec3(j.at("translation"), ctx + ".translation");
  if (j.contains("rotation") && j.contains("rotvec"))
    fail(ctx, "give either 'rotation' or 'rotvec', not both");
  if (j.contains("rotation")) {
    const Json& r = j.at("rotation");
    if (!r.is_array() || r.size() != 9) fail(ctx + ".rotation", "expected 9 numbers, row major");
    Mat3 R;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) R(i, k) = number(r[static_cast<size_t>(3 * i + k)], ctx + ".rotation");
    if (!is_rotation(R, 1e-8)) fail(ctx + ".rotation", "matrix is not a rotation");
    T.R = R;
  } else if (j.contains("rotvec")) {
    T.R = exp_so3(vec3(j.at("rotvec"), ctx + ".rotvec"));
  }
  return T;
}

inline SpatialInertia parse_inertia(const Json& j, const std::string& ctx) {
  check_keys(j, {"mass", "com", "inertia", "first_moment", "inertia_origin"}, ctx);
  SpatialInertia M;
  M.mass = number(required(j, "mass", ctx), ctx + ".mass");
  const bool com_form = j.contains("com") || j.contains("inertia");
  const bool origin_form = j.contains("first_moment") || j.contains("inertia_origin");
  if (com_form && origin_form) fail(ctx, "mix of COM-referred and origin-referred inertia fields");
  if (origin_form) {
    M.first_moment = vec3(required(j, "first_moment", ctx), ctx + ".first_moment");
    const Json& v = required(j, "inertia_origin", ctx);
    if (!v.is_array() || v.size() != 6)
      fail(ctx + ".inertia_origin", "expected [xx, yy, zz, xy, xz, yz]");
    const std::string c = ctx + ".inertia_origin";
    Mat3 I;
    I << number(v[0], c), number(v[3], c), number(v[4], c),
         number(v[3], c), number(v[1], c), number(v[5], c),
         number(v[4], c), number(v[5], c), number(v[2], c);
    M.rotational_inertia = I;
    return M;
  }
  const Vec3 com = j.contains("com") ? vec3(j.at("com"), ctx + ".com") : Vec3::Zero();
  const Json& ji = required(j, "inertia", ctx);
  check_keys(ji, {"ixx", "iyy", "izz", "ixy", "ixz", "iyz"}, ctx + ".inertia");
  const auto entry = [&](const char* key, bool req) {
    if (!ji.contains(key)) {
      if (req) fail(ctx + ".inertia", "missing '" + std::string(key) + "'");
      return 0.0;
    }
    return number(ji.at(key), ctx + ".inertia." + key);
  };
  Mat3 I_c;
  I_c << entry("ixx", true), entry("ixy", false), entry("ixz", false),
         entry("ixy", false), entry("iyy", true), entry("iyz", false),
         entry("ixz", false), entry("iyz", false), entry("izz", true);
  return SpatialInertia::from_com(M.mass, com, I_c);
}

/// scalar -> s*I, [6] -> diagonal, [36] -> full row-major.
inline Mat6 parse_gain6(const Json& v, const std::string& ctx) {
  if (v.is_number()) return number(v, ctx) * Mat6::Identity();
  if (v.is_array() && v.size() == 6) {
    Mat6 M = Mat6::Zero();
    for (int i = 0; i < 6; ++i) M(i, i) = number(v[static_cast<size_t>(i)], ctx);
    return M;
  }
  if (v.is_array() && v.size() == 36) {
    Mat6 M;
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 6; ++k) M(i, k) = number(v[static_cast<size_t>(6 * i + k)], ctx);
    return M;
  }
  fail(ctx, "expected a scalar, 6 diagonal entries, or 36 row-major entries");
}

/// Per-body gain list: scalar applies to all bodies, otherwise an array of
/// n entries, each in parse_gain6 form.
inline std::vector<Mat6> parse_gain_list(const Json& v, int n, const std::string& ctx) {
  std::vector<Mat6> out;
  if (v.is_number()) {
    out.assign(static_cast<size_t>(n), number(v, ctx) * Mat6::Identity());
    return out;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    fail(ctx, "expected a scalar or an array with one entry per body");
  for (int i = 0; i < n; ++i)
    out.push_back(parse_gain6(v[static_cast<size_t>(i)], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

inline JointTrajectory parse_trajectory(const Json& j, const std::string& ctx) {
  check_keys(j, {"type", "value", "coeffs", "amplitude", "frequency_hz", "phase", "offset"}, ctx);
  const std::string type = required(j, "type", ctx).get<std::string>();
  JointTrajectory traj;
  if (type == "setpoint") {
    traj.kind = JointTrajectory::Kind::setpoint;
    traj.value = number(required(j, "value", ctx), ctx + ".value");
  } else if (type == "polynomial") {
    traj.kind = JointTrajectory::Kind::polynomial;
    const Json& c = required(j, "coeffs", ctx);
    if (!c.is_array() || c.empty()) fail(ctx + ".coeffs", "expected a nonempty array");
    for (const auto& x : c) traj.coeffs.push_back(number(x, ctx + ".coeffs"));
  } else if (type == "sinusoid") {
    traj.kind = JointTrajectory::Kind::sinusoid;
    traj.amplitude = number(required(j, "amplitude", ctx), ctx + ".amplitude");
    traj.frequency_hz = number(required(j, "frequency_hz", ctx), ctx + ".frequency_hz");
    if (j.contains("phase")) traj.phase = number(j.at("phase"), ctx + ".phase");
    if (j.contains("offset")) traj.offset = number(j.at("offset"), ctx + ".offset");
  } else {
    fail(ctx + ".type", "unknown trajectory type '" + type + "'");
  }
  return traj;
}

}  // namespace io_detail

inline ChainModel parse_model(const Json& j) {
  using namespace io_detail;
  const std::string ctx = "model";
  check_keys(j, {"name", "gravity", "end_effector", "bodies"}, ctx);
  ChainModel model;
  if (j.contains("name")) model.name = j.at("name").get<std::string>();
  if (j.contains("gravity")) model.gravity = vec3(j.at("gravity"), ctx + ".gravity");
  if (j.contains("end_effector")) model.ee_offset = parse_pose(j.at("end_effector"), ctx + ".end_effector");
  const Json& bodies = required(j, "bodies", ctx);
  if (!bodies.is_array() || bodies.empty()) fail(ctx + ".bodies", "expected a nonempty array");
  for (size_t i = 0; i < bodies.size(); ++i) {
    const std::string bctx = ctx + ".bodies[" + std::to_string(i) + "]";
    const Json& jb = bodies[i];
    check_keys(jb, {"name", "screw_axis", "home", "inertia", "rotor_inertia"}, bctx);
    BodyModule b;
    b.name = jb.contains("name") ? jb.at("name").get<std::string>() : "body" + std::to_string(i + 1);
    const Json& axis = required(jb, "screw_axis", bctx);
    check_keys(axis, {"angular", "linear"}, bctx + ".screw_axis");
    const Vec3 w = vec3(required(axis, "angular", bctx + ".screw_axis"), bctx + ".screw_axis.angular");
    const Vec3 v = axis.contains("linear") ? vec3(axis.at("linear"), bctx + ".screw_axis.linear")
                                           : Vec3::Zero();
    b.screw_axis = make_twist(w, v);
    if (jb.contains("home")) b.home_transform = parse_pose(jb.at("home"), bctx + ".home");
    b.inertia = parse_inertia(required(jb, "inertia", bctx), bctx + ".inertia");
    b.rotor_inertia = number(required(jb, "rotor_inertia", bctx), bctx + ".rotor_inertia");
    model.bodies.push_back(b);
  }
  validate(model);
  return model;
}

inline GainSet parse_gains(const Json& j, const ChainModel& model) {
  using namespace io_detail;
  const int n = model.size();
  GainSet g = default_gains(model);
  if (j.is_null()) return g;
  const std::string ctx = "gains";
  check_keys(j, {"Gamma", "K_z", "K_v", "k_a", "adaptation", "accel_filter_cutoff_hz"}, ctx);
  if (j.contains("Gamma")) g.Gamma = parse_gain_list(j.at("Gamma"), n, ctx + ".Gamma");
  if (j.contains("K_v")) g.K_v = parse_gain6(j.at("K_v"), ctx + ".K_v");
  if (j.contains("K_z")) {
    g.K_z = parse_gain_list(j.at("K_z"), n, ctx + ".K_z");
  } else {
    g.K_z.clear();
    for (int i = 0; i < n; ++i) g.K_z.push_back(0.5 * g.Gamma[static_cast<size_t>(i)] * g.K_v);
  }
  if (j.contains("k_a")) {
    const Json& v = j.at("k_a");
    if (v.is_number()) {
      g.k_a.assign(static_cast<size_t>(n), number(v, ctx + ".k_a"));
    } else {
      const VecX ka = vecn(v, n, ctx + ".k_a");
      g.k_a.assign(ka.data(), ka.data() + n);
    }
  }
  if (j.contains("adaptation")) {
    const Json& a = j.at("adaptation");
    check_keys(a, {"gamma", "sigma"}, ctx + ".adaptation");
    if (a.contains("gamma")) g.adaptation.gamma = number(a.at("gamma"), ctx + ".adaptation.gamma");
    if (a.contains("sigma")) g.adaptation.sigma = number(a.at("sigma"), ctx + ".adaptation.sigma");
  }
  if (j.contains("accel_filter_cutoff_hz"))
    g.accel_filter_cutoff_hz = number(j.at("accel_filter_cutoff_hz"), ctx + ".accel_filter_cutoff_hz");
  validate(g, n);
  return g;
}

inline Scenario parse_scenario(const Json& j, int n) {
  using namespace io_detail;
  Scenario s;
  s.theta0 = VecX::Zero(n);
  s.theta_dot0 = VecX::Zero(n);
  s.desired.assign(static_cast<size_t>(n), JointTrajectory{});
  if (j.is_null()) {
    validate(s, n);
    return s;
  }
  const std::string ctx = "scenario";
  check_keys(j,
             {"name", "controller", "duration", "control_rate", "substeps", "initial", "desired",
              "perturbation", "bernoulli_order"},
             ctx);
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("controller")) {
    const std::string c = j.at("controller").get<std::string>();
    if (c == "mgc") s.controller = ControllerKind::mgc;
    else if (c == "amgc") s.controller = ControllerKind::amgc;
    else if (c == "baseline_pd") s.controller = ControllerKind::baseline_pd;
    else fail(ctx + ".controller", "unknown controller '" + c + "'");
  }
  if (j.contains("duration")) s.duration = number(j.at("duration"), ctx + ".duration");
  if (j.contains("control_rate")) s.control_rate = number(j.at("control_rate"), ctx + ".control_rate");
  if (j.contains("substeps")) s.substeps = j.at("substeps").get<int>();
  if (j.contains("initial")) {
    const Json& init = j.at("initial");
    check_keys(init, {"theta", "theta_dot"}, ctx + ".initial");
    if (init.contains("theta")) s.theta0 = vecn(init.at("theta"), n, ctx + ".initial.theta");
    if (init.contains("theta_dot"))
      s.theta_dot0 = vecn(init.at("theta_dot"), n, ctx + ".initial.theta_dot");
  }
  if (j.contains("desired")) {
    const Json& d = j.at("desired");
    if (!d.is_array() || static_cast<int>(d.size()) != n)
      fail(ctx + ".desired", "expected one trajectory per joint");
    s.desired.clear();
    for (int i = 0; i < n; ++i)
      s.desired.push_back(
          parse_trajectory(d[static_cast<size_t>(i)], ctx + ".desired[" + std::to_string(i) + "]"));
  }
  if (j.contains("perturbation")) {
    const Json& p = j.at("perturbation");
    check_keys(p, {"fraction", "seed"}, ctx + ".perturbation");
    if (p.contains("fraction"))
      s.perturbation_fraction = number(p.at("fraction"), ctx + ".perturbation.fraction");
    if (p.contains("seed")) s.seed = p.at("seed").get<std::uint64_t>();
  }
  if (j.contains("bernoulli_order")) s.bernoulli_order = j.at("bernoulli_order").get<int>();
  validate(s, n);
  return s;
}

inline ScenarioDocument parse_document(const Json& j) {
  try {
    io_detail::check_keys(j, {"model", "gains", "scenario"}, "document");
    ScenarioDocument doc;
    doc.model = parse_model(io_detail::required(j, "model", "document"));
    doc.gains = parse_gains(j.contains("gains") ? j.at("gains") : Json(), doc.model);
    doc.scenario =
        parse_scenario(j.contains("scenario") ? j.at("scenario") : Json(), doc.model.size());
    return doc;
  } catch (const Json::exception& e) {
    // wrong JSON types surface as library exceptions; report them uniformly
    throw ValidationError(std::string("document: ") + e.what());
  }
}

/// Loads and fully validates a scenario document.
inline ScenarioDocument load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_model: cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("load_model: " + std::string(e.what()));
  }
  return parse_document(j);
}

// ---------------------------------------------------------------------------
// Canonical serialization: origin-referred inertias, explicit rotation
// matrices, scalar gains compacted only when exactly scalar multiples of I.

namespace io_detail {

inline Json pose_json(const Pose& T) {
  Json j;
  j["translation"] = {T.p.x(), T.p.y(), T.p.z()};
  Json r = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r.push_back(T.R(i, k));
  j["rotation"] = r;
  return j;
}

inline Json gain6_json(const Mat6& M) {
  if (M == Mat6(M(0, 0) * Mat6::Identity())) return Json(M(0, 0));
  Json r = Json::array();
  for (int i = 0; i < 6; ++i)
    for (int k = 0; k < 6; ++k) r.push_back(M(i, k));
  return r;
}

inline Json trajectory_json(const JointTrajectory& t) {
  Json j;
  switch (t.kind) {
    case JointTrajectory::Kind::setpoint:
      j["type"] = "setpoint";
      j["value"] = t.value;
      break;
    case JointTrajectory::Kind::polynomial:
      j["type"] = "polynomial";
      j["coeffs"] = t.coeffs;
      break;
    case JointTrajectory::Kind::sinusoid:
      j["type"] = "sinusoid";
      j["amplitude"] = t.amplitude;
      j["frequency_hz"] = t.frequency_hz;
      j["phase"] = t.phase;
      j["offset"] = t.offset;
      break;
  }
  return j;
}

}  // namespace io_detail

inline Json to_json(const ScenarioDocument& doc) {
  using namespace io_detail;
  Json j;
  Json jm;
  jm["name"] = doc.model.name;
  jm["gravity"] = {doc.model.gravity.x(), doc.model.gravity.y(), doc.model.gravity.z()};
  jm["end_effector"] = pose_json(doc.model.ee_offset);
  Json bodies = Json::array();
  for (const auto& b : doc.model.bodies) {
    Json jb;
    jb["name"] = b.name;
    jb["screw_axis"] = {{"angular", {b.screw_axis(0), b.screw_axis(1), b.screw_axis(2)}},
                        {"linear", {b.screw_axis(3), b.screw_axis(4), b.screw_axis(5)}}};
    jb["home"] = pose_json(b.home_transform);
    const Mat3& I = b.inertia.rotational_inertia;
    jb["inertia"] = {{"mass", b.inertia.mass},
                     {"first_moment",
                      {b.inertia.first_moment.x(), b.inertia.first_moment.y(),
                       b.inertia.first_moment.z()}},
                     {"inertia_origin", {I(0, 0), I(1, 1), I(2, 2), I(0, 1), I(0, 2), I(1, 2)}}};
    jb["rotor_inertia"] = b.rotor_inertia;
    bodies.push_back(jb);
  }
  jm["bodies"] = bodies;
  j["model"] = jm;

  Json jg;
  Json gammas = Json::array();
  for (const auto& G : doc.gains.Gamma) gammas.push_back(gain6_json(G));
  jg["Gamma"] = gammas;
  Json kzs = Json::array();
  for (const auto& K : doc.gains.K_z) kzs.push_back(gain6_json(K));
  jg["K_z"] = kzs;
  jg["K_v"] = gain6_json(doc.gains.K_v);
  jg["k_a"] = doc.gains.k_a;
  jg["adaptation"] = {{"gamma", doc.gains.adaptation.gamma}, {"sigma", doc.gains.adaptation.sigma}};
  jg["accel_filter_cutoff_hz"] = doc.gains.accel_filter_cutoff_hz;
  j["gains"] = jg;

  Json js;
  js["name"] = doc.scenario.name;
  js["controller"] = to_string(doc.scenario.controller);
  js["duration"] = doc.scenario.duration;
  js["control_rate"] = doc.scenario.control_rate;
  js["substeps"] = doc.scenario.substeps;
  js["initial"] = {{"theta", std::vector<double>(doc.scenario.theta0.data(),
                                                 doc.scenario.theta0.data() + doc.scenario.theta0.size())},
                   {"theta_dot",
                    std::vector<double>(doc.scenario.theta_dot0.data(),
                                        doc.scenario.theta_dot0.data() + doc.scenario.theta_dot0.size())}};
  Json desired = Json::array();
  for (const auto& t : doc.scenario.desired) desired.push_back(trajectory_json(t));
  js["desired"] = desired;
  js["perturbation"] = {{"fraction", doc.scenario.perturbation_fraction},
                        {"seed", doc.scenario.seed}};
  js["bernoulli_order"] = doc.scenario.bernoulli_order;
  j["scenario"] = js;
  return j;
}

}  // namespace mgc
