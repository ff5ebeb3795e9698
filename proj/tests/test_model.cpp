#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgc/model_io.hpp"
#include "test_util.hpp"

using namespace mgc;
using test::Rng;

namespace {
const std::string kScenarioDir = MGC_SCENARIO_DIR;

Json minimal_doc() {
  return Json::parse(R"({
    "model": {
      "bodies": [
        {
          "screw_axis": {"angular": [0, 0, 1]},
          "inertia": {"mass": 2.0, "com": [0.4, 0, 0],
                      "inertia": {"ixx": 0.01, "iyy": 0.2, "izz": 0.2}},
          "rotor_inertia": 0.1
        }
      ]
    }
  })");
}
}  // namespace

TEST_CASE("bundled 4R model loads with the documented aggregates") {
  const ScenarioDocument doc = load_model(kScenarioDir + "/4r_generic_mgc.json");
  CHECK(doc.model.size() == 4);
  CHECK(doc.model.total_mass() == doctest::Approx(9350.0).epsilon(1e-12));

  // default gain schedule fills in when the file omits the gains section
  CHECK(test::max_abs_diff(doc.gains.Gamma[0], Mat6(5.0 * Mat6::Identity())) == 0.0);
  CHECK(test::max_abs_diff(doc.gains.Gamma[1], Mat6(3.0 * Mat6::Identity())) == 0.0);
  CHECK(test::max_abs_diff(doc.gains.Gamma[2], Mat6(3.0 * Mat6::Identity())) == 0.0);
  CHECK(test::max_abs_diff(doc.gains.Gamma[3], Mat6(1.5 * Mat6::Identity())) == 0.0);
  CHECK(test::max_abs_diff(doc.gains.K_v, Mat6(2000.0 * Mat6::Identity())) == 0.0);
  CHECK(doc.gains.k_a == std::vector<double>{10000.0, 20000.0, 10000.0, 350.0});
  CHECK(doc.gains.adaptation.gamma == 8.0e4);
  CHECK(doc.scenario.controller == ControllerKind::mgc);
  CHECK(doc.scenario.control_rate == 1000.0);

  // reach along x with the arm stretched: 3.0 + 2.5 + 0.5 tool
  double reach = 0.0;
  for (const auto& b : doc.model.bodies) reach += b.home_transform.p.norm();
  reach += doc.model.ee_offset.p.norm();
  CHECK(reach == doctest::Approx(7.0));
}

TEST_CASE("missing required fields are rejected with field names") {
  Json j = minimal_doc();
  j["model"]["bodies"][0]["inertia"].erase("mass");
  try {
    parse_document(j);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("mass") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected") {
  Json j = minimal_doc();
  j["scenario"] = {{"controler", "mgc"}};
  CHECK_THROWS_AS(parse_document(j), ValidationError);
}

TEST_CASE("non-SPD gains are rejected with a field-specific diagnostic") {
  Json j = minimal_doc();
  j["gains"] = {{"Gamma", {-1.0}}};
  try {
    parse_document(j);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("Gamma") != std::string::npos);
  }

  Json j2 = minimal_doc();
  j2["gains"] = {{"k_a", 0.0}};
  CHECK_THROWS_AS(parse_document(j2), ValidationError);
}

TEST_CASE("load -> serialize -> load is idempotent") {
  const ScenarioDocument doc = load_model(kScenarioDir + "/4r_generic_amgc.json");
  const Json j1 = to_json(doc);
  const ScenarioDocument doc2 = parse_document(j1);
  const Json j2 = to_json(doc2);
  CHECK(j1 == j2);
  CHECK(j1.dump() == j2.dump());
}

TEST_CASE("perturb_inertias is deterministic and consistency preserving") {
  const ChainModel model = load_model(kScenarioDir + "/4r_generic_mgc.json").model;

  const ChainModel same = perturb_inertias(model, 0.0, 7);
  for (int i = 0; i < model.size(); ++i) {
    const auto& a = model.bodies[static_cast<size_t>(i)].inertia;
    const auto& b = same.bodies[static_cast<size_t>(i)].inertia;
    CHECK(a.mass == b.mass);
    CHECK(a.first_moment == b.first_moment);
    CHECK(a.rotational_inertia == b.rotational_inertia);
  }

  const ChainModel p1 = perturb_inertias(model, 0.1, 42);
  const ChainModel p2 = perturb_inertias(model, 0.1, 42);
  const ChainModel p3 = perturb_inertias(model, 0.1, 43);
  bool differs_across_seeds = false;
  for (int i = 0; i < model.size(); ++i) {
    const auto& a = p1.bodies[static_cast<size_t>(i)].inertia;
    const auto& b = p2.bodies[static_cast<size_t>(i)].inertia;
    CHECK(a.mass == b.mass);
    CHECK(a.first_moment == b.first_moment);
    CHECK(a.rotational_inertia == b.rotational_inertia);
    CHECK(to_pseudo(a).min_eigenvalue() > 0.0);
    if (a.mass != p3.bodies[static_cast<size_t>(i)].inertia.mass) differs_across_seeds = true;
    const double ratio = a.mass / model.bodies[static_cast<size_t>(i)].inertia.mass;
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.1);
  }
  CHECK(differs_across_seeds);

  CHECK_THROWS_AS(perturb_inertias(model, 0.6, 1), ValidationError);
}

TEST_CASE("joint trajectories differentiate consistently") {
  Rng rng(51);
  std::vector<JointTrajectory> trajs;
  JointTrajectory poly;
  poly.kind = JointTrajectory::Kind::polynomial;
  poly.coeffs = {0.3, -0.2, 0.5, 0.1, -0.05};
  trajs.push_back(poly);
  JointTrajectory sin;
  sin.kind = JointTrajectory::Kind::sinusoid;
  sin.amplitude = 0.7;
  sin.frequency_hz = 0.8;
  sin.phase = 0.4;
  sin.offset = -0.1;
  trajs.push_back(sin);
  JointTrajectory set;
  set.value = 1.3;
  trajs.push_back(set);

  const double h = 1e-6;
  for (const auto& t : trajs) {
    for (int i = 0; i < 20; ++i) {
      const double at = test::uniform(rng, 0.0, 5.0);
      const double vel_fd = (t.position(at + h) - t.position(at - h)) / (2 * h);
      const double acc_fd = (t.velocity(at + h) - t.velocity(at - h)) / (2 * h);
      CHECK(std::abs(vel_fd - t.velocity(at)) <= 1e-6);
      CHECK(std::abs(acc_fd - t.acceleration(at)) <= 1e-6);
    }
  }
  CHECK(set.velocity(2.0) == 0.0);
  CHECK(set.acceleration(2.0) == 0.0);
}

TEST_CASE("programmatic builders validate") {
  const ChainModel two = make_planar_twolink();
  CHECK(two.size() == 2);
  CHECK_NOTHROW(validate(two));
  const ChainModel chain = make_uniform_chain(8);
  CHECK(chain.size() == 8);
  CHECK_NOTHROW(validate(chain));
  CHECK_NOTHROW(validate(default_gains(chain), 8));
}

TEST_CASE("model validation names the offending field") {
  ChainModel m = make_planar_twolink();
  m.bodies[1].screw_axis = make_twist(Vec3(0, 0, 2.0), Vec3::Zero());
  try {
    validate(m);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bodies[1].screw_axis") != std::string::npos);
  }
}
