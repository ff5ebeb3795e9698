#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mgc/checks.hpp"
#include "mgc/sim.hpp"

// Subcommand implementations behind the command-line tool. Exit code
// contract: 0 success, 1 usage error, 2 validation error (paths, parsing,
// invariants), 3 numerical failure.

namespace mgc::cli {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kNumerical = 3;

/// Command-line problem (unknown override key, malformed key=value).
struct UsageError : Error {
  using Error::Error;
};

namespace detail {

/// Maps the documented short override names onto document paths.
inline std::string override_path(const std::string& key) {
  if (key == "controller") return "/scenario/controller";
  if (key == "perturbation") return "/scenario/perturbation/fraction";
  if (key == "seed") return "/scenario/perturbation/seed";
  if (key == "duration") return "/scenario/duration";
  if (key == "control_rate") return "/scenario/control_rate";
  if (key == "substeps") return "/scenario/substeps";
  if (key == "bernoulli_order") return "/scenario/bernoulli_order";
  if (key == "sigma") return "/gains/adaptation/sigma";
  if (key == "gamma") return "/gains/adaptation/gamma";
  if (key == "K_v") return "/gains/K_v";
  if (key.find('.') != std::string::npos) {
    // dotted path into the document, e.g. model.gravity
    std::string path = "/" + key;
    for (auto& c : path)
      if (c == '.') c = '/';
    return path;
  }
  throw UsageError("unknown override key '" + key + "'");
}

inline Json parse_value(const std::string& text) {
  const Json v = Json::parse(text, nullptr, false);
  if (v.is_discarded()) return Json(text);  // plain string value
  return v;
}

}  // namespace detail

/// Applies `key=value` overrides to a parsed document.
inline Json apply_overrides(Json doc, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("override must have the form key=value, got '" + kv + "'");
    const std::string path = detail::override_path(kv.substr(0, eq));
    doc[Json::json_pointer(path)] = detail::parse_value(kv.substr(eq + 1));
  }
  return doc;
}

namespace detail {

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  const Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ValidationError("'" + path + "' is not valid JSON");
  return j;
}

inline ScenarioDocument load_with_overrides(const std::string& path,
                                            const std::vector<std::string>& sets,
                                            const std::optional<std::uint64_t>& seed) {
  Json j = apply_overrides(load_json(path), sets);
  if (seed) j[Json::json_pointer("/scenario/perturbation/seed")] = *seed;
  return parse_document(j);
}

inline void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + out_dir + "'");
}

}  // namespace detail

inline int cmd_run(const std::string& path, const std::vector<std::string>& sets,
                   const std::optional<std::uint64_t>& seed, const std::string& out_dir,
                   std::ostream& os = std::cout) {
  ScenarioDocument doc;
  try {
    doc = detail::load_with_overrides(path, sets, seed);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  }

  os << "model '" << doc.model.name << "': " << doc.model.size() << " bodies, total mass "
     << doc.model.total_mass() << " kg\n";
  os << "scenario '" << doc.scenario.name << "': controller " << to_string(doc.scenario.controller)
     << ", " << doc.scenario.duration << " s at " << doc.scenario.control_rate << " Hz\n";

  RunResult res;
  try {
    res = run(doc);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }

  try {
    detail::ensure_out_dir(out_dir);
    const auto trace_path = std::filesystem::path(out_dir) / "trace.csv";
    std::ofstream trace(trace_path);
    res.trace.write_csv(trace);
    const auto summary_path = std::filesystem::path(out_dir) / "summary.json";
    std::ofstream summary(summary_path);
    summary << res.summary.to_json().dump(2) << "\n";
    os << "trace:   " << trace_path.string() << " (" << res.trace.rows.size() << " steps)\n";
    os << "summary: " << summary_path.string() << "\n";
  } catch (const Error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  }

  os << "final position error  " << res.summary.final_position_error << " m\n";
  os << "final orientation err " << res.summary.final_orientation_error << " rad\n";
  os << "decay rate            " << res.summary.decay_rate << " 1/s (R^2 " << res.summary.decay_r2
     << ")\n";
  os << "max |VPF sum| (rel)   " << res.summary.max_vpf_rel << "\n";
  os << "min lambda_min(Lhat)  " << res.summary.min_lambda_min << "\n";
  return kOk;
}

inline int cmd_compare(const std::vector<std::string>& paths, const std::vector<std::string>& sets,
                       const std::optional<std::uint64_t>& seed, const std::string& out_dir,
                       std::ostream& os = std::cout) {
  std::vector<ScenarioDocument> docs;
  try {
    for (const auto& p : paths) docs.push_back(detail::load_with_overrides(p, sets, seed));
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  }

  std::vector<RunSummary> rows;
  try {
    rows = compare(docs);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }

  try {
    detail::ensure_out_dir(out_dir);
    const auto csv_path = std::filesystem::path(out_dir) / "comparison.csv";
    std::ofstream csv(csv_path);
    write_comparison_csv(rows, csv);
    os << "comparison: " << csv_path.string() << " (" << rows.size() << " rows)\n";
  } catch (const Error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  }

  for (const auto& r : rows)
    os << "  " << r.name << " [" << r.controller << "]: final pos err "
       << r.final_position_error << " m, decay " << r.decay_rate << " 1/s, torque RMS "
       << r.torque_rms << "\n";
  return kOk;
}

/// Runs the property suite, printing one pass/fail line per property.
inline int cmd_check(const std::string& filter = "", std::ostream& os = std::cout) {
  bool all_ok = true;
  int ran = 0;
  for (const auto& check : checks::standard_checks()) {
    if (!filter.empty() && check.name.find(filter) == std::string::npos) continue;
    ++ran;
    std::string detail;
    bool ok = false;
    try {
      ok = check.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    os << (ok ? "[PASS] " : "[FAIL] ") << check.name << " - " << detail << "\n";
    all_ok = all_ok && ok;
  }
  if (ran == 0) {
    std::cerr << "usage error: no property matches filter '" << filter << "'\n";
    return kUsage;
  }
  return all_ok ? kOk : kNumerical;
}

inline int cmd_schema(std::ostream& os = std::cout) {
  os << R"(Scenario document schema (JSON). Full reference: docs/SCHEMA.md.

{
  "model": {
    "name": string,
    "gravity": [gx, gy, gz],                       // m/s^2
    "end_effector": {"translation": [x,y,z], "rotvec"|"rotation": ...},
    "bodies": [
      {
        "name": string,
        "screw_axis": {"angular": [x,y,z], "linear": [x,y,z]},  // unit angular part
        "home": {"translation": [x,y,z], "rotvec"|"rotation": ...},
        "inertia": {"mass": kg, "com": [x,y,z],
                    "inertia": {"ixx","iyy","izz","ixy","ixz","iyz"}}  // about COM
                 | {"mass": kg, "first_moment": [x,y,z], "inertia_origin": [xx,yy,zz,xy,xz,yz]},
        "rotor_inertia": kg m^2
      }, ...
    ]
  },
  "gains": {                                        // optional; defaults applied
    "Gamma": scalar | [per-body scalar | 6 diag | 36 row-major],
    "K_z":   like Gamma (default 0.5 * Gamma_i * K_v),
    "K_v":   scalar | 6 diag | 36 row-major,
    "k_a":   scalar | [per-joint],
    "adaptation": {"gamma": scalar, "sigma": scalar},
    "accel_filter_cutoff_hz": scalar
  },
  "scenario": {
    "name": string,
    "controller": "mgc" | "amgc" | "baseline_pd",
    "duration": s, "control_rate": Hz, "substeps": int,
    "initial": {"theta": [...], "theta_dot": [...]},
    "desired": [ {"type":"setpoint","value":v}
               | {"type":"polynomial","coeffs":[c0,c1,...]}
               | {"type":"sinusoid","amplitude":a,"frequency_hz":f,"phase":p,"offset":o}, ...],
    "perturbation": {"fraction": [0,0.5], "seed": uint},
    "bernoulli_order": int (default 8)
  }
}

Overrides: --set key=value with keys controller, perturbation, seed, duration,
control_rate, substeps, bernoulli_order, sigma, gamma, K_v, or a dotted
document path (e.g. model.gravity=[0,0,-9.81]).
)";
  return kOk;
}

}  // namespace mgc::cli
