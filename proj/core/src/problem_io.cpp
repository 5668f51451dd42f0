// Copyright 2026 The RNO Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rno/problem_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rno/asymptotic.hpp"
#include "rno/comms.hpp"
#include "rno/conic.hpp"
#include "rno/dynamic_measures.hpp"
#include "rno/erasure.hpp"
#include "rno/errors.hpp"
#include "rno/static_measures.hpp"
#include "rno/transform.hpp"

namespace rno::problem_io {

using freesets::FreeSetModel;

namespace {

// ---------------------------------------------------------------------------
// Parse helpers: ParseError carries the JSON-pointer path of the offender,
// ValidationError names the object whose invariant failed.
// ---------------------------------------------------------------------------

[[noreturn]] void parse_fail(const std::string& pointer,
                             const std::string& message) {
  throw Error(ErrorCode::ParseError, pointer + ": " + message);
}

[[noreturn]] void validation_fail(const std::string& object,
                                  const std::string& message) {
  throw Error(ErrorCode::ValidationError, object + ": " + message);
}

const Json& field(const Json& j, const std::string& key,
                  const std::string& pointer) {
  if (!j.is_object()) parse_fail(pointer, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) parse_fail(pointer + "/" + key, "missing required field");
  return *it;
}

double number_at(const Json& j, const std::string& pointer) {
  if (!j.is_number()) parse_fail(pointer, "expected a number");
  return j.get<double>();
}

int int_at(const Json& j, const std::string& pointer) {
  if (!j.is_number_integer()) parse_fail(pointer, "expected an integer");
  return j.get<int>();
}

std::string string_at(const Json& j, const std::string& pointer) {
  if (!j.is_string()) parse_fail(pointer, "expected a string");
  return j.get<std::string>();
}

bool bool_at(const Json& j, const std::string& pointer) {
  if (!j.is_boolean()) parse_fail(pointer, "expected a boolean");
  return j.get<bool>();
}

Matrix matrix_at(const Json& j, const std::string& pointer,
                 const std::string& object) {
  if (!j.is_array() || j.empty())
    parse_fail(pointer, "expected a nonempty array of rows");
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  Matrix m;
  for (int r = 0; r < rows; ++r) {
    const Json& row = j[r];
    const std::string row_ptr = pointer + "/" + std::to_string(r);
    if (!row.is_array() || row.empty())
      parse_fail(row_ptr, "expected a nonempty row array");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      m = Matrix::Zero(rows, cols);
    } else if (static_cast<int>(row.size()) != cols) {
      parse_fail(row_ptr, "row length differs from the first row");
    }
    for (int c = 0; c < cols; ++c) {
      const Json& e = row[c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
          !e[1].is_number())
        parse_fail(row_ptr + "/" + std::to_string(c),
                   "expected a [re, im] pair");
      const double re = e[0].get<double>();
      const double im = e[1].get<double>();
      if (!std::isfinite(re) || !std::isfinite(im))
        validation_fail(object, "non-finite entry at " + row_ptr + "/" +
                                    std::to_string(c));
      m(r, c) = Complex(re, im);
    }
  }
  return m;
}

std::vector<int> dims_at(const Json& j, const std::string& pointer) {
  if (!j.is_array() || j.empty())
    parse_fail(pointer, "expected a nonempty array of dimensions");
  std::vector<int> dims;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const int d = int_at(j[i], pointer + "/" + std::to_string(i));
    if (d < 1)
      parse_fail(pointer + "/" + std::to_string(i),
                 "dimensions must be positive");
    dims.push_back(d);
  }
  return dims;
}

FreeSetModel model_at(const Json& j, const std::string& pointer) {
  const std::string kind = string_at(field(j, "kind", pointer),
                                     pointer + "/kind");
  FreeSetModel model;
  try {
    if (kind == "incoherent") {
      model = FreeSetModel::incoherent(
          int_at(field(j, "d", pointer), pointer + "/d"));
    } else if (kind == "separable_ppt") {
      model = FreeSetModel::separable_ppt(
          int_at(field(j, "da", pointer), pointer + "/da"),
          int_at(field(j, "db", pointer), pointer + "/db"));
    } else {
      parse_fail(pointer + "/kind", "unknown model kind '" + kind + "'");
    }
    if (j.contains("copies")) {
      model = model.tensor_power(
          int_at(j["copies"], pointer + "/copies"));
    }
  } catch (const Error& err) {
    if (err.code() == ErrorCode::ParseError) throw;
    validation_fail("model", err.what());
  }
  return model;
}

constexpr const char* kCommands[] = {
    "robustness",        "std-robustness",
    "geometric",         "transform",
    "channel-robustness", "smooth-channel-robustness",
    "diamond",           "divergence",
    "erasure-sweep",     "cost-bounds",
    "destruction-bounds", "capacity-bound",
    "seesaw",            "axioms",
};

bool known_command(const std::string& name) {
  for (const char* c : kCommands)
    if (name == c) return true;
  return false;
}

void allow_keys(const Json& cmd, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : cmd.items()) {
    (void)value;
    if (key == "name") continue;
    bool ok = false;
    for (const char* k : keys)
      if (key == k) ok = true;
    if (!ok) parse_fail("/command/" + key, "unknown parameter");
  }
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

double env_default_tol() {
  const char* raw = std::getenv("RNO_TOL");
  if (raw == nullptr || raw[0] == '\0') return 1e-7;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !std::isfinite(v) || v <= 0.0)
    throw Error(ErrorCode::ValidationError,
                std::string("RNO_TOL: not a positive number: ") + raw);
  return v;
}

// ---------------------------------------------------------------------------
// Report helpers
// ---------------------------------------------------------------------------

Json finite_or_null(double v) {
  if (std::isfinite(v)) return Json(v);
  return Json(nullptr);
}

std::string join_notes(const std::vector<std::string>& notes) {
  std::string out;
  for (const auto& n : notes) {
    if (!out.empty()) out += "; ";
    out += n;
  }
  return out;
}

Json optional_to_json(const std::optional<double>& v) {
  if (v.has_value()) return Json(*v);
  return Json(nullptr);
}

// ---------------------------------------------------------------------------
// Dispatch plumbing
// ---------------------------------------------------------------------------

const DensityMatrix& state_ref(const ProblemFile& pf, const std::string& key) {
  const std::string name =
      string_at(field(pf.params, key, "/command"), "/command/" + key);
  const auto it = pf.states.find(name);
  if (it == pf.states.end())
    parse_fail("/command/" + key, "references unknown state '" + name + "'");
  return it->second;
}

const Channel& channel_ref(const ProblemFile& pf, const std::string& key) {
  const std::string name =
      string_at(field(pf.params, key, "/command"), "/command/" + key);
  const auto it = pf.channels.find(name);
  if (it == pf.channels.end())
    parse_fail("/command/" + key,
               "references unknown channel '" + name + "'");
  return it->second;
}

const FreeSetModel& model_req(const ProblemFile& pf) {
  if (!pf.model.has_value())
    parse_fail("/model", "this command requires a model");
  return *pf.model;
}

double param_number(const ProblemFile& pf, const std::string& key) {
  return number_at(field(pf.params, key, "/command"), "/command/" + key);
}

int param_int(const ProblemFile& pf, const std::string& key) {
  return int_at(field(pf.params, key, "/command"), "/command/" + key);
}

double param_number_or(const ProblemFile& pf, const std::string& key,
                       double fallback) {
  if (!pf.params.contains(key)) return fallback;
  return number_at(pf.params[key], "/command/" + key);
}

int param_int_or(const ProblemFile& pf, const std::string& key, int fallback) {
  if (!pf.params.contains(key)) return fallback;
  return int_at(pf.params[key], "/command/" + key);
}

bool param_bool_or(const ProblemFile& pf, const std::string& key,
                   bool fallback) {
  if (!pf.params.contains(key)) return fallback;
  return bool_at(pf.params[key], "/command/" + key);
}

// Principal eigenvector of a state that must be pure.
Vector pure_vector(const std::string& name, const DensityMatrix& rho) {
  const double purity = (rho.mat * rho.mat).trace().real();
  if (purity < 1.0 - 1e-9)
    validation_fail("objects/" + name,
                    "this command needs a pure state (tr rho^2 = " +
                        std::to_string(purity) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat);
  return es.eigenvectors().col(rho.mat.rows() - 1);
}

std::string param_state_name(const ProblemFile& pf, const std::string& key) {
  return string_at(field(pf.params, key, "/command"), "/command/" + key);
}

// ---------------------------------------------------------------------------
// Command implementations
// ---------------------------------------------------------------------------

Json robustness_results(const ProblemFile& pf, bool standard) {
  allow_keys(pf.params, {"state", "eps"});
  const FreeSetModel& model = model_req(pf);
  const DensityMatrix& rho = state_ref(pf, "state");
  const double eps = param_number_or(pf, "eps", 0.0);
  const static_measures::RobustnessOptions opts{pf.tol, pf.max_iter};

  static_measures::RobustnessResult r;
  if (standard) {
    r = eps > 0.0
            ? static_measures::smoothed_standard_robustness(model, rho, eps,
                                                            opts)
            : static_measures::standard_robustness(model, rho, opts);
  } else {
    r = eps > 0.0 ? static_measures::smoothed_generalized_robustness(
                        model, rho, eps, opts)
                  : static_measures::generalized_robustness(model, rho, opts);
  }

  Json out;
  out["state"] = param_state_name(pf, "state");
  out["eps"] = eps;
  out["value"] = finite_or_null(r.value);
  out["infinite"] = !std::isfinite(r.value);
  out["log2_value"] = finite_or_null(r.log2_value);
  out["exact_model"] = r.exact_model;
  out["solver_status"] = conic::status_name(r.status);
  return out;
}

Json geometric_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"state"});
  const FreeSetModel& model = model_req(pf);
  const std::string name = param_state_name(pf, "state");
  const Vector psi = pure_vector(name, state_ref(pf, "state"));
  const auto g =
      static_measures::geometric_measure_pure(model, psi, pf.seed,
                                              pf.restarts);
  Json out;
  out["state"] = name;
  out["value"] = g.value;
  out["overlap"] = g.overlap;
  out["exact"] = g.exact;
  out["restarts"] = pf.restarts;
  return out;
}

Json transform_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"psi", "sigma", "audit_trials"});
  const FreeSetModel& model = model_req(pf);
  const std::string psi_name = param_state_name(pf, "psi");
  const Vector psi = pure_vector(psi_name, state_ref(pf, "psi"));
  const DensityMatrix& sigma = state_ref(pf, "sigma");
  const int audit_trials = param_int_or(pf, "audit_trials", 50);

  transform::TransformOptions opts;
  opts.tight_mode = pf.tight_mode;
  opts.tol = pf.tol;
  opts.max_iter = pf.max_iter;
  opts.seed = pf.seed;
  opts.overlap_restarts = pf.restarts;

  const auto plan = transform::plan_transform(model, psi, sigma, opts);
  Json out;
  out["plan"] = Json{{"feasible", plan.feasible},
                     {"overlap", plan.overlap},
                     {"geometric", plan.geometric},
                     {"robustness", finite_or_null(plan.robustness)},
                     {"threshold", plan.threshold},
                     {"required", plan.required},
                     {"condition_lhs", plan.condition_lhs},
                     {"overlap_exact", plan.overlap_exact},
                     {"model_exact", plan.model_exact},
                     {"detail", plan.detail}};
  if (plan.feasible) {
    const auto built = transform::build_transform(model, psi, sigma, opts);
    qmath::Rng rng(pf.seed);
    const auto audit = transform::audit_transform(model, built, psi, sigma,
                                                  audit_trials, rng);
    out["build"] =
        Json{{"effective_threshold", built.effective_threshold}};
    out["audit"] = Json{{"target_error", audit.target_error},
                        {"worst_margin", audit.worst_margin},
                        {"outputs_free", audit.outputs_free},
                        {"trials", audit.trials}};
  }
  return out;
}

Json channel_robustness_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"channel"});
  const Channel& e = channel_ref(pf, "channel");
  const dynamic_measures::SolveOptions opts{pf.tol, pf.max_iter};
  const auto r = dynamic_measures::channel_rno_robustness(e, opts);
  Json out;
  out["p_star"] = r.p_star;
  out["solver_status"] = conic::status_name(r.status);
  out["solver_residual"] = r.solver_residual;
  out["reconstruction_residual"] = r.reconstruction_residual;
  return out;
}

Json smooth_channel_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"channel", "eps", "eps_grid"});
  const Channel& e = channel_ref(pf, "channel");
  dynamic_measures::SmoothingConfig cfg;
  cfg.restarts = pf.restarts;
  cfg.seed = pf.seed;
  cfg.solve = dynamic_measures::SolveOptions{pf.tol, pf.max_iter};

  Json out;
  if (pf.params.contains("eps_grid")) {
    const Json& grid_json = pf.params["eps_grid"];
    if (!grid_json.is_array() || grid_json.empty())
      parse_fail("/command/eps_grid", "expected a nonempty array of numbers");
    std::vector<double> grid;
    for (std::size_t i = 0; i < grid_json.size(); ++i)
      grid.push_back(number_at(grid_json[i],
                               "/command/eps_grid/" + std::to_string(i)));
    const auto sweep = dynamic_measures::smoothed_channel_sweep(e, grid, cfg);
    Json rows = Json::array();
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      rows.push_back(Json{{"eps", grid[i]},
                          {"upper_estimate", sweep[i].upper_estimate},
                          {"witness_distance", sweep[i].witness_distance},
                          {"heuristic", sweep[i].heuristic}});
    }
    out["grid"] = std::move(rows);
  } else {
    const double eps = param_number(pf, "eps");
    const auto r = dynamic_measures::smoothed_channel_robustness(e, eps, cfg);
    out["eps"] = eps;
    out["upper_estimate"] = r.upper_estimate;
    out["witness_distance"] = r.witness_distance;
    out["heuristic"] = r.heuristic;
  }
  return out;
}

Json diamond_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"a", "b"});
  const Channel& a = channel_ref(pf, "a");
  const Channel& b = channel_ref(pf, "b");
  const dynamic_measures::SolveOptions opts{pf.tol, pf.max_iter};
  Json out;
  out["value"] = dynamic_measures::diamond_distance(a, b, opts);
  return out;
}

Json divergence_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"channel"});
  const Channel& e = channel_ref(pf, "channel");
  const dynamic_measures::SolveOptions opts{pf.tol, pf.max_iter};
  Json out;
  out["value"] = dynamic_measures::channel_divergence_to_free(e, opts);
  return out;
}

Json erasure_sweep_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"psi", "phi", "p_grid", "n_grid", "compute_diamond"});
  const Channel& psi = channel_ref(pf, "psi");
  const Channel& phi = channel_ref(pf, "phi");
  const bool diamond = param_bool_or(pf, "compute_diamond", false);

  const auto grid_of = [&](const char* key) {
    const Json& g = field(pf.params, key, "/command");
    if (!g.is_array() || g.empty())
      parse_fail(std::string("/command/") + key,
                 "expected a nonempty array");
    return g;
  };
  const Json& p_grid = grid_of("p_grid");
  const Json& n_grid = grid_of("n_grid");

  Json rows = Json::array();
  for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
    const double p =
        number_at(p_grid[pi], "/command/p_grid/" + std::to_string(pi));
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
      const int n =
          int_at(n_grid[ni], "/command/n_grid/" + std::to_string(ni));
      const auto rep = erasure::mixing_deviation_bound(psi, phi, p, n,
                                                       diamond);
      rows.push_back(
          Json{{"p", rep.p},
               {"n", rep.n},
               {"exact_sum_bound", rep.exact_sum_bound},
               {"closed_form_bound", finite_or_null(rep.closed_form_bound)},
               {"measured_choi_trace_distance",
                optional_to_json(rep.measured_choi_trace_distance)},
               {"measured_choi_trace_distance_raw",
                optional_to_json(rep.measured_choi_trace_distance_raw)},
               {"measured_diamond_distance",
                optional_to_json(rep.measured_diamond_distance)},
               {"threshold_n", rep.threshold_n},
               {"cost_lower", rep.cost_lower},
               {"cost_upper", finite_or_null(rep.cost_upper)},
               {"cost_lower_weak", rep.cost_lower_weak},
               {"notes", join_notes(rep.notes)}});
    }
  }
  Json out;
  out["grid"] = std::move(rows);
  return out;
}

Json cost_bounds_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"state", "n", "eps"});
  const FreeSetModel& model = model_req(pf);
  const DensityMatrix& rho = state_ref(pf, "state");
  const int n = param_int(pf, "n");
  const double eps = param_number_or(pf, "eps", 0.0);
  asymptotic::CostOptions opts;
  opts.solve = static_measures::RobustnessOptions{pf.tol, pf.max_iter};
  const auto r = asymptotic::cost_bounds(model, rho, n, eps, opts);
  Json out;
  out["n"] = r.n;
  out["eps"] = r.eps;
  out["lower_bound"] = r.lower_bound;
  out["upper_bound"] = finite_or_null(r.upper_bound);
  out["vacuous"] = r.vacuous;
  return out;
}

Json destruction_bounds_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"channel", "eps", "eta"});
  const Channel& e = channel_ref(pf, "channel");
  const double eps = param_number(pf, "eps");
  const double eta = param_number(pf, "eta");
  erasure::DestructionConfig cfg;
  cfg.smoothing.restarts = pf.restarts;
  cfg.smoothing.seed = pf.seed;
  cfg.smoothing.solve = dynamic_measures::SolveOptions{pf.tol, pf.max_iter};
  const auto r = erasure::destruction_cost_bounds(e, eps, eta, cfg);
  Json out;
  out["eps"] = r.eps;
  out["eta"] = r.eta;
  out["lower"] = r.lower;
  out["upper"] = finite_or_null(r.upper);
  out["robustness_inner"] = r.robustness_inner;
  out["robustness_outer"] = r.robustness_outer;
  out["degenerate"] = r.degenerate;
  out["lower_weak"] = r.lower_weak;
  out["notes"] = join_notes(r.notes);
  return out;
}

Json capacity_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"channel", "theta", "delta", "max_messages"});
  const Channel& e = channel_ref(pf, "channel");
  const double theta = param_number(pf, "theta");
  const double delta = param_number(pf, "delta");
  comms::CapacityConfig cfg;
  cfg.seesaw.restarts = pf.restarts;
  cfg.seesaw.seed = pf.seed;
  cfg.seesaw.solve = dynamic_measures::SolveOptions{pf.tol, pf.max_iter};
  cfg.smoothing.restarts = pf.restarts;
  cfg.smoothing.seed = pf.seed;
  cfg.smoothing.solve = cfg.seesaw.solve;
  cfg.max_messages = param_int_or(pf, "max_messages", 8);
  const auto r = comms::capacity_bound(e, theta, delta, cfg);
  Json out;
  out["theta"] = r.theta;
  out["delta"] = r.delta;
  out["l_delta_estimate"] = r.l_delta_estimate;
  out["l_estimate_heuristic"] = r.l_estimate_heuristic;
  out["bound_on_m"] = finite_or_null(r.bound_on_m);
  out["c_theta_bits"] = finite_or_null(r.c_theta_bits);
  out["achieved_f"] = r.achieved_f;
  out["achieved_m"] = r.achieved_m;
  out["verdict"] = comms::consistency_verdict_name(r.verdict);
  out["notes"] = join_notes(r.notes);
  return out;
}

Json seesaw_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"channel", "m", "ancilla_dim", "rounds"});
  const Channel& e = channel_ref(pf, "channel");
  const int m = param_int(pf, "m");
  const int ancilla_dim = param_int_or(pf, "ancilla_dim", 1);
  comms::SeesawConfig cfg;
  cfg.rounds = param_int_or(pf, "rounds", cfg.rounds);
  cfg.restarts = pf.restarts;
  cfg.seed = pf.seed;
  cfg.solve = dynamic_measures::SolveOptions{pf.tol, pf.max_iter};
  const auto r = comms::seesaw_success_probability(e, m, ancilla_dim, cfg);
  Json out;
  out["m"] = m;
  out["ancilla_dim"] = ancilla_dim;
  out["f_hat"] = r.f_hat;
  out["rounds_used"] = static_cast<int>(r.round_values.size());
  out["round_values"] = r.round_values;
  return out;
}

Json axiom_check_json(const static_measures::AxiomCheck& c) {
  return Json{{"checks", c.checks}, {"max_violation", c.max_violation}};
}

Json axioms_results(const ProblemFile& pf) {
  allow_keys(pf.params, {"quantifier", "trials"});
  const FreeSetModel& model = model_req(pf);
  const std::string which = string_at(
      field(pf.params, "quantifier", "/command"), "/command/quantifier");
  static_measures::Quantifier q;
  if (which == "generalized") {
    q = static_measures::Quantifier::Generalized;
  } else if (which == "standard") {
    q = static_measures::Quantifier::Standard;
  } else {
    parse_fail("/command/quantifier",
               "expected 'generalized' or 'standard'");
  }
  const int trials = param_int_or(pf, "trials", 20);
  const static_measures::RobustnessOptions opts{pf.tol, pf.max_iter};
  const auto rep =
      static_measures::quantifier_axiom_suite(model, q, trials, pf.seed, opts);
  Json out;
  out["quantifier"] = which;
  out["trials"] = rep.trials;
  out["vanishes_on_free"] = axiom_check_json(rep.vanishes_on_free);
  out["monotone"] = axiom_check_json(rep.monotone);
  out["faithful"] = axiom_check_json(rep.faithful);
  out["convex"] = axiom_check_json(rep.convex);
  out["max_violation"] = rep.max_violation();
  return out;
}

Json dispatch(const ProblemFile& pf) {
  if (pf.command == "robustness") return robustness_results(pf, false);
  if (pf.command == "std-robustness") return robustness_results(pf, true);
  if (pf.command == "geometric") return geometric_results(pf);
  if (pf.command == "transform") return transform_results(pf);
  if (pf.command == "channel-robustness")
    return channel_robustness_results(pf);
  if (pf.command == "smooth-channel-robustness")
    return smooth_channel_results(pf);
  if (pf.command == "diamond") return diamond_results(pf);
  if (pf.command == "divergence") return divergence_results(pf);
  if (pf.command == "erasure-sweep") return erasure_sweep_results(pf);
  if (pf.command == "cost-bounds") return cost_bounds_results(pf);
  if (pf.command == "destruction-bounds")
    return destruction_bounds_results(pf);
  if (pf.command == "capacity-bound") return capacity_results(pf);
  if (pf.command == "seesaw") return seesaw_results(pf);
  if (pf.command == "axioms") return axioms_results(pf);
  parse_fail("/command/name", "unknown command name '" + pf.command + "'");
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (const char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    return quoted;
  }
  return s;
}

void flatten_into(const Json& j, const std::string& prefix,
                  std::vector<std::pair<std::string, Json>>& cells) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten_into(value, prefix.empty() ? key : prefix + "." + key, cells);
    }
    return;
  }
  if (j.is_array()) {
    // Numeric lists collapse into one semicolon-joined cell for plotting.
    std::string joined;
    for (const auto& e : j) {
      if (!joined.empty()) joined += ";";
      joined += e.dump();
    }
    cells.emplace_back(prefix, Json(joined));
    return;
  }
  cells.emplace_back(prefix, j);
}

}  // namespace

ProblemFile parse_problem_text(const std::string& text,
                               const Overrides& overrides) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    parse_fail("", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) parse_fail("", "expected a top-level object");

  static const std::set<std::string> top_keys = {
      "version", "model", "objects", "command", "seed", "tolerances"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (top_keys.find(key) == top_keys.end())
      parse_fail("/" + key, "unknown top-level field");
  }

  ProblemFile pf;
  pf.input_hash = fnv1a_hex(text);
  pf.version = string_at(field(j, "version", ""), "/version");
  if (pf.version != "rno-problem/1")
    parse_fail("/version", "unsupported version '" + pf.version +
                               "' (expected rno-problem/1)");

  if (j.contains("model")) pf.model = model_at(j["model"], "/model");

  if (j.contains("objects")) {
    const Json& objects = j["objects"];
    if (!objects.is_object()) parse_fail("/objects", "expected an object");
    for (const auto& [name, obj] : objects.items()) {
      const std::string ptr = "/objects/" + name;
      const std::string type =
          string_at(field(obj, "type", ptr), ptr + "/type");
      if (type == "state") {
        const auto dims = dims_at(field(obj, "dims", ptr), ptr + "/dims");
        const Matrix m = matrix_at(field(obj, "matrix", ptr), ptr + "/matrix",
                                   "objects/" + name);
        try {
          pf.states.emplace(name, DensityMatrix(m, dims));
        } catch (const Error& err) {
          validation_fail("objects/" + name, err.what());
        }
      } else if (type == "channel") {
        const auto in_dims =
            dims_at(field(obj, "in_dims", ptr), ptr + "/in_dims");
        const auto out_dims =
            dims_at(field(obj, "out_dims", ptr), ptr + "/out_dims");
        const bool has_kraus = obj.contains("kraus");
        const bool has_choi = obj.contains("choi");
        if (has_kraus == has_choi)
          parse_fail(ptr, "supply exactly one of 'kraus' or 'choi'");
        try {
          if (has_kraus) {
            const Json& ks = obj["kraus"];
            if (!ks.is_array() || ks.empty())
              parse_fail(ptr + "/kraus", "expected a nonempty array");
            std::vector<Matrix> kraus;
            for (std::size_t i = 0; i < ks.size(); ++i)
              kraus.push_back(matrix_at(ks[i],
                                        ptr + "/kraus/" + std::to_string(i),
                                        "objects/" + name));
            pf.channels.emplace(
                name, Channel::from_kraus(in_dims, out_dims, kraus));
          } else {
            const Matrix choi = matrix_at(field(obj, "choi", ptr),
                                          ptr + "/choi", "objects/" + name);
            qmath::ChoiNorm norm = qmath::ChoiNorm::TraceDIn;
            if (obj.contains("normalization")) {
              const std::string tag = string_at(obj["normalization"],
                                                ptr + "/normalization");
              if (tag == "trace_din") {
                norm = qmath::ChoiNorm::TraceDIn;
              } else if (tag == "trace_one") {
                norm = qmath::ChoiNorm::TraceOne;
              } else {
                parse_fail(ptr + "/normalization",
                           "expected 'trace_din' or 'trace_one'");
              }
            }
            pf.channels.emplace(
                name, Channel::from_choi(in_dims, out_dims, choi, norm));
          }
        } catch (const Error& err) {
          if (err.code() == ErrorCode::ParseError) throw;
          validation_fail("objects/" + name, err.what());
        }
      } else {
        parse_fail(ptr + "/type", "expected 'state' or 'channel'");
      }
    }
  }

  const Json& command = field(j, "command", "");
  pf.command = string_at(field(command, "name", "/command"), "/command/name");
  if (!known_command(pf.command))
    parse_fail("/command/name", "unknown command name '" + pf.command + "'");
  pf.params = command;

  if (j.contains("seed")) {
    const Json& s = j["seed"];
    if (!s.is_number_integer() || s.get<long long>() < 0)
      parse_fail("/seed", "expected a nonnegative integer");
    pf.seed = s.get<std::uint64_t>();
  }

  double file_tol = -1.0;
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    if (!t.is_object()) parse_fail("/tolerances", "expected an object");
    static const std::set<std::string> tol_keys = {"tol", "max_iter",
                                                   "restarts", "tight_mode"};
    for (const auto& [key, value] : t.items()) {
      (void)value;
      if (tol_keys.find(key) == tol_keys.end())
        parse_fail("/tolerances/" + key, "unknown tolerance field");
    }
    if (t.contains("tol")) {
      file_tol = number_at(t["tol"], "/tolerances/tol");
      if (!(file_tol > 0.0))
        parse_fail("/tolerances/tol", "must be positive");
    }
    if (t.contains("max_iter")) {
      pf.max_iter = int_at(t["max_iter"], "/tolerances/max_iter");
      if (pf.max_iter < 1)
        parse_fail("/tolerances/max_iter", "must be positive");
    }
    if (t.contains("restarts")) {
      pf.restarts = int_at(t["restarts"], "/tolerances/restarts");
      if (pf.restarts < 0)
        parse_fail("/tolerances/restarts", "must be nonnegative");
    }
    if (t.contains("tight_mode"))
      pf.tight_mode = bool_at(t["tight_mode"], "/tolerances/tight_mode");
  }

  // Precedence: command-line flag, then the file, then the environment's
  // default, then the built-in default.
  pf.tol = file_tol > 0.0 ? file_tol : env_default_tol();
  if (overrides.tol.has_value()) {
    if (!(*overrides.tol > 0.0))
      throw Error(ErrorCode::ValidationError, "--tol must be positive");
    pf.tol = *overrides.tol;
  }
  if (overrides.seed.has_value()) pf.seed = *overrides.seed;
  if (overrides.max_iter.has_value()) {
    if (*overrides.max_iter < 1)
      throw Error(ErrorCode::ValidationError, "--max-iter must be positive");
    pf.max_iter = *overrides.max_iter;
  }
  if (overrides.restarts.has_value()) {
    if (*overrides.restarts < 0)
      throw Error(ErrorCode::ValidationError,
                  "--restarts must be nonnegative");
    pf.restarts = *overrides.restarts;
  }
  if (overrides.tight_mode.has_value()) pf.tight_mode = *overrides.tight_mode;
  if (pf.tight_mode) {
    // Tight mode sharpens every solve; explicit --tol/--max-iter still win.
    if (!overrides.tol.has_value()) pf.tol = std::min(pf.tol, 1e-9);
    if (!overrides.max_iter.has_value())
      pf.max_iter = std::max(pf.max_iter, 2000000);
  }
  return pf;
}

ProblemFile parse_problem_file(const std::string& path,
                               const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot read problem file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_problem_text(buffer.str(), overrides);
}

Json run_command(const ProblemFile& pf) {
  struct CertScope {
    int solves = 0;
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
    CertScope() {
      conic::set_solve_observer([this](const conic::SdpProblem& prob,
                                       const conic::SolveResult& res) {
        ++solves;
        const auto kkt = conic::check_kkt(prob, res);
        primal = std::max(primal, kkt.primal_residual);
        dual = std::max(dual, kkt.dual_residual);
        gap = std::max(gap, std::abs(kkt.gap));
      });
    }
    ~CertScope() { conic::clear_solve_observer(); }
  } cert;

  const Json results = dispatch(pf);

  Json report;
  report["version"] = "rno-report/1";
  report["command"] = pf.command;
  report["input_hash"] = pf.input_hash;
  report["seed"] = pf.seed;
  report["tolerances"] = Json{{"tol", pf.tol},
                              {"max_iter", pf.max_iter},
                              {"restarts", pf.restarts},
                              {"tight_mode", pf.tight_mode}};
  report["results"] = results;
  report["certificates"] = Json{{"solves", cert.solves},
                                {"max_primal_residual", cert.primal},
                                {"max_dual_residual", cert.dual},
                                {"max_gap", cert.gap}};
  return report;
}

std::string report_to_csv(const Json& report) {
  const Json& results = report.at("results");
  std::ostringstream out;
  if (results.is_object() && results.contains("grid") &&
      results["grid"].is_array() && !results["grid"].empty()) {
    const Json& grid = results["grid"];
    const Json& first = grid[0];
    bool lead = true;
    for (const auto& [key, value] : first.items()) {
      (void)value;
      if (!lead) out << ",";
      out << csv_cell(Json(key));
      lead = false;
    }
    out << "\n";
    for (const auto& row : grid) {
      lead = true;
      for (const auto& [key, value] : first.items()) {
        (void)key;
        if (!lead) out << ",";
        out << csv_cell(row.contains(key) ? row[key] : Json(nullptr));
        lead = false;
      }
      out << "\n";
    }
    return out.str();
  }

  std::vector<std::pair<std::string, Json>> cells;
  flatten_into(results, "", cells);
  bool lead = true;
  for (const auto& [key, value] : cells) {
    (void)value;
    if (!lead) out << ",";
    out << csv_cell(Json(key));
    lead = false;
  }
  out << "\n";
  lead = true;
  for (const auto& [key, value] : cells) {
    (void)key;
    if (!lead) out << ",";
    out << csv_cell(value);
    lead = false;
  }
  out << "\n";
  return out.str();
}

void emit_report(const Json& report, const std::string& format,
                 const std::string& path, bool overwrite_protect) {
  std::string payload;
  if (format == "json") {
    payload = report.dump(2) + "\n";
  } else if (format == "csv") {
    payload = report_to_csv(report);
  } else {
    throw Error(ErrorCode::InvalidRequest,
                "format must be 'json' or 'csv', got '" + format + "'");
  }

  if (path.empty() || path == "-") {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
    return;
  }

  namespace fs = std::filesystem;
  const fs::path target(path);
  if (overwrite_protect) {
    std::error_code ec;
    if (fs::exists(target, ec))
      throw Error(ErrorCode::IoError,
                  "refusing to overwrite existing " + path);
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(payload.data(),
              static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw Error(ErrorCode::IoError,
                "cannot move report into place: " + ec.message());
  }
}

}  // namespace rno::problem_io
