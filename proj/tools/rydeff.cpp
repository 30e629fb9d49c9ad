// Command-line experiment runner: parses a JSON config, dispatches to the
// selected method(s), writes CSV results plus a resolved-config manifest.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "rydeff/eit_reduced.hpp"
#include "rydeff/evolution.hpp"
#include "rydeff/kmc.hpp"
#include "rydeff/liouvillian.hpp"
#include "rydeff/qjmc.hpp"
#include "rydeff/rates.hpp"

#ifndef RYDEFF_VERSION
#define RYDEFF_VERSION "0.1.0"
#endif
#ifndef RYDEFF_PRESET_DIR
#define RYDEFF_PRESET_DIR "presets"
#endif

namespace {

using json = nlohmann::json;
using namespace rydeff;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) fail(path + "." + key, "unknown key");
  }
}

double require_num(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "required");
  if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
  return obj[key].get<double>();
}

double num_or(const json& obj, const std::string& path, const char* key, double dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
  return obj[key].get<double>();
}

long int_or(const json& obj, const std::string& path, const char* key, long dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number_integer()) fail(path + "." + key, "expected an integer");
  return obj[key].get<long>();
}

std::vector<double> num_list(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "required");
  if (!obj[key].is_array() || obj[key].empty()) fail(path + "." + key, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& x : obj[key]) {
    if (!x.is_number()) fail(path + "." + key, "expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// --- parsed experiment configuration ---

struct Experiment {
  std::vector<std::string> methods;
  std::string output;

  DephasingParams model{1.0, 0.0, 10.0, 0.0};
  EitParams eit{1.0, 1.0, 0.0, 100.0};
  LatticeSpec lattice{1, 6, 0.0, Boundary::periodic};

  TimeGrid grid;
  std::vector<std::string> observable_names;
  ConfigIndex initial_config = 0;
  std::uint64_t seed = 1;
  int n_trajectories = 100;

  // positivity-scan
  double v_min = 0, v_max = 30, delta_min = -30, delta_max = 30;
  int v_resolution = 0, delta_resolution = 0;

  // steady-state
  std::string ss_target;
  std::vector<double> ss_n_values, ss_v_values, ss_gamma_values;

  // compare
  std::string input_a, input_b;

  // EIT probe-strength sweep
  std::vector<double> omega_p_values;

  json resolved;
};

const std::vector<std::string> kMethods = {"full-integrate", "qjmc",      "rate2",       "rate4",
                                           "kmc",            "eit-full",  "eit-reduced", "eit-exclusion",
                                           "eit-nonpert",    "steady-state", "positivity-scan", "compare"};

bool needs_time_grid(const std::string& m) {
  return m != "steady-state" && m != "positivity-scan" && m != "compare";
}
bool is_eit_method(const std::string& m) { return m.rfind("eit-", 0) == 0; }

Experiment parse_experiment(const json& cfg) {
  check_keys(cfg, "config",
             {"description", "method", "output", "model", "eit", "lattice", "time_grid", "observables",
              "initial_state", "seed", "n_trajectories", "scan", "steady_state", "compare", "omega_p_values"});
  Experiment e;
  json resolved = json::object();
  if (cfg.contains("description")) resolved["description"] = cfg["description"];

  if (!cfg.contains("method")) fail("config.method", "required");
  if (cfg["method"].is_string()) {
    e.methods = {cfg["method"].get<std::string>()};
  } else if (cfg["method"].is_array()) {
    for (const auto& m : cfg["method"]) {
      if (!m.is_string()) fail("config.method", "expected strings");
      e.methods.push_back(m.get<std::string>());
    }
  } else {
    fail("config.method", "expected a string or an array of strings");
  }
  if (e.methods.empty()) fail("config.method", "empty");
  for (const auto& m : e.methods)
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
      fail("config.method", "unknown method '" + m + "'");
  resolved["method"] = e.methods;

  const bool compare_only = e.methods.size() == 1 && e.methods[0] == "compare";
  if (!cfg.contains("output")) fail("config.output", "required");
  e.output = cfg["output"].get<std::string>();
  resolved["output"] = e.output;

  if (cfg.contains("model")) {
    const json& m = cfg["model"];
    check_keys(m, "config.model", {"rabi_omega", "detuning", "dephasing_gamma", "decay_gamma_ryd"});
    e.model.rabi_omega = num_or(m, "config.model", "rabi_omega", e.model.rabi_omega);
    e.model.detuning = num_or(m, "config.model", "detuning", e.model.detuning);
    e.model.dephasing_gamma = num_or(m, "config.model", "dephasing_gamma", e.model.dephasing_gamma);
    e.model.decay_gamma_ryd = num_or(m, "config.model", "decay_gamma_ryd", e.model.decay_gamma_ryd);
  }
  resolved["model"] = {{"rabi_omega", e.model.rabi_omega},
                       {"detuning", e.model.detuning},
                       {"dephasing_gamma", e.model.dephasing_gamma},
                       {"decay_gamma_ryd", e.model.decay_gamma_ryd}};

  if (cfg.contains("eit")) {
    const json& m = cfg["eit"];
    check_keys(m, "config.eit", {"omega_p", "omega_c", "detuning", "decay_Gamma"});
    e.eit.omega_p = num_or(m, "config.eit", "omega_p", e.eit.omega_p);
    e.eit.omega_c = num_or(m, "config.eit", "omega_c", e.eit.omega_c);
    e.eit.detuning = num_or(m, "config.eit", "detuning", e.eit.detuning);
    e.eit.decay_Gamma = num_or(m, "config.eit", "decay_Gamma", e.eit.decay_Gamma);
  }
  resolved["eit"] = {{"omega_p", e.eit.omega_p},
                     {"omega_c", e.eit.omega_c},
                     {"detuning", e.eit.detuning},
                     {"decay_Gamma", e.eit.decay_Gamma}};

  if (!compare_only) {
    if (!cfg.contains("lattice")) fail("config.lattice", "required");
    const json& l = cfg["lattice"];
    check_keys(l, "config.lattice", {"n_sites", "exponent_p", "nn_strength_V", "boundary"});
    e.lattice.n_sites = static_cast<int>(int_or(l, "config.lattice", "n_sites", 0));
    if (e.lattice.n_sites < 1) fail("config.lattice.n_sites", "required, >= 1");
    e.lattice.exponent_p = static_cast<int>(int_or(l, "config.lattice", "exponent_p", 6));
    e.lattice.nn_strength_V = num_or(l, "config.lattice", "nn_strength_V", 0.0);
    const std::string b = l.value("boundary", "periodic");
    if (b == "periodic")
      e.lattice.boundary = Boundary::periodic;
    else if (b == "open")
      e.lattice.boundary = Boundary::open;
    else
      fail("config.lattice.boundary", "expected 'periodic' or 'open'");
    resolved["lattice"] = {{"n_sites", e.lattice.n_sites},
                           {"exponent_p", e.lattice.exponent_p},
                           {"nn_strength_V", e.lattice.nn_strength_V},
                           {"boundary", b}};
  }

  bool want_grid = false;
  for (const auto& m : e.methods) want_grid |= needs_time_grid(m);
  if (want_grid) {
    if (!cfg.contains("time_grid")) fail("config.time_grid", "required");
    const json& t = cfg["time_grid"];
    check_keys(t, "config.time_grid", {"t_start", "t_end", "n_samples"});
    const double t0 = num_or(t, "config.time_grid", "t_start", 0.0);
    const double t1 = require_num(t, "config.time_grid", "t_end");
    const int ns = static_cast<int>(int_or(t, "config.time_grid", "n_samples", 0));
    if (ns < 2) fail("config.time_grid.n_samples", "required, >= 2");
    e.grid = TimeGrid::linspace(t0, t1, ns);
    resolved["time_grid"] = {{"t_start", t0}, {"t_end", t1}, {"n_samples", ns}};
  }

  e.observable_names = {"mean_density"};
  if (cfg.contains("observables")) {
    if (!cfg["observables"].is_array()) fail("config.observables", "expected an array of names");
    e.observable_names.clear();
    for (const auto& o : cfg["observables"]) e.observable_names.push_back(o.get<std::string>());
    if (e.observable_names.empty()) fail("config.observables", "empty");
  }
  resolved["observables"] = e.observable_names;

  if (cfg.contains("initial_state")) {
    const json& s = cfg["initial_state"];
    if (s.is_string()) {
      const std::string name = s.get<std::string>();
      if (name == "all_down")
        e.initial_config = 0;
      else if (name == "all_up")
        e.initial_config = two_level_dim(e.lattice.n_sites) - 1;
      else
        fail("config.initial_state", "expected 'all_down', 'all_up' or a configuration index");
    } else if (s.is_number_integer()) {
      e.initial_config = s.get<ConfigIndex>();
      if (e.initial_config >= two_level_dim(e.lattice.n_sites))
        fail("config.initial_state", "configuration index out of range");
    } else {
      fail("config.initial_state", "expected a string or an integer");
    }
  }
  resolved["initial_state"] = e.initial_config;

  e.seed = static_cast<std::uint64_t>(int_or(cfg, "config", "seed", 1));
  e.n_trajectories = static_cast<int>(int_or(cfg, "config", "n_trajectories", 100));
  resolved["seed"] = e.seed;
  resolved["n_trajectories"] = e.n_trajectories;

  if (cfg.contains("omega_p_values")) e.omega_p_values = num_list(cfg, "config", "omega_p_values");
  if (!e.omega_p_values.empty()) resolved["omega_p_values"] = e.omega_p_values;

  for (const auto& m : e.methods) {
    if (m == "positivity-scan") {
      if (!cfg.contains("scan")) fail("config.scan", "required for positivity-scan");
      const json& s = cfg["scan"];
      check_keys(s, "config.scan",
                 {"v_min", "v_max", "delta_min", "delta_max", "v_resolution", "delta_resolution"});
      e.v_min = num_or(s, "config.scan", "v_min", 0.0);
      e.v_max = require_num(s, "config.scan", "v_max");
      e.delta_min = require_num(s, "config.scan", "delta_min");
      e.delta_max = require_num(s, "config.scan", "delta_max");
      e.v_resolution = static_cast<int>(int_or(s, "config.scan", "v_resolution", 0));
      e.delta_resolution = static_cast<int>(int_or(s, "config.scan", "delta_resolution", 0));
      if (e.v_resolution < 2 || e.delta_resolution < 2)
        fail("config.scan", "v_resolution and delta_resolution must be >= 2");
      resolved["scan"] = {{"v_min", e.v_min},           {"v_max", e.v_max},
                          {"delta_min", e.delta_min},   {"delta_max", e.delta_max},
                          {"v_resolution", e.v_resolution}, {"delta_resolution", e.delta_resolution}};
    }
    if (m == "steady-state") {
      if (!cfg.contains("steady_state")) fail("config.steady_state", "required for steady-state");
      const json& s = cfg["steady_state"];
      check_keys(s, "config.steady_state", {"target", "n_values", "v_values", "gamma_values"});
      if (!s.contains("target")) fail("config.steady_state.target", "required");
      e.ss_target = s["target"].get<std::string>();
      const std::vector<std::string> targets = {"two-level",     "eit-full",   "eit-reduced",
                                                "eit-exclusion", "eit-nonpert", "exclusion-distance"};
      if (std::find(targets.begin(), targets.end(), e.ss_target) == targets.end())
        fail("config.steady_state.target", "unknown target '" + e.ss_target + "'");
      if (e.ss_target == "exclusion-distance") {
        e.ss_n_values = num_list(s, "config.steady_state", "n_values");
        e.ss_v_values = num_list(s, "config.steady_state", "v_values");
        e.ss_gamma_values = num_list(s, "config.steady_state", "gamma_values");
      }
      resolved["steady_state"] = s;
    }
    if (m == "compare") {
      if (!cfg.contains("compare")) fail("config.compare", "required for compare");
      const json& s = cfg["compare"];
      check_keys(s, "config.compare", {"input_a", "input_b"});
      if (!s.contains("input_a") || !s.contains("input_b"))
        fail("config.compare", "input_a and input_b are required");
      e.input_a = s["input_a"].get<std::string>();
      e.input_b = s["input_b"].get<std::string>();
      resolved["compare"] = s;
    }
  }

  e.resolved = std::move(resolved);
  return e;
}

// --- helpers ---

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<ObservableSpec> parse_observables(const std::vector<std::string>& names, int n_sites) {
  std::vector<ObservableSpec> specs;
  for (const auto& n : names) specs.push_back(ObservableSpec::parse(n, n_sites));
  return specs;
}

DensityMatrix classical_unit(ConfigIndex c, std::size_t dim) {
  DensityMatrix rho = DensityMatrix::Zero(dim, dim);
  rho(c, c) = 1.0;
  return rho;
}

std::size_t three_level_index(ConfigIndex c, int n) {
  const Basis b3(n, 3);
  std::vector<int> word(n);
  for (int s = 0; s < n; ++s) word[s] = occ2(c, s, n) ? kThreeLevelUp : kThreeLevelDown;
  return b3.encode(word);
}

std::string output_name(const Experiment& e, const std::string& method, const std::string& suffix) {
  std::string stem = e.output;
  const bool single = e.methods.size() == 1 && suffix.empty();
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
  if (single) return stem + ".csv";
  std::string name = stem + "." + method;
  if (!suffix.empty()) name += "." + suffix;
  return name + ".csv";
}

ReducedVariant variant_of(const std::string& method) {
  if (method == "eit-reduced") return ReducedVariant::second_order;
  if (method == "eit-exclusion") return ReducedVariant::nn_exclusion;
  return ReducedVariant::nonperturbative;
}

// --- method dispatch ---

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt17(row[i]);
    out << "\n";
  }
}

void run_steady_state(const Experiment& e, const std::string& out_path) {
  if (e.ss_target == "exclusion-distance") {
    // trace distance between the projected full steady state and the
    // exclusion-limit reduced one, swept over system size / interaction /
    // decay; the full model carries nearest-neighbour interaction only, the
    // coupling whose hard-core limit the exclusion equations describe
    std::vector<std::vector<double>> rows;
    for (double nd : e.ss_n_values) {
      const int n = static_cast<int>(nd);
      for (double gamma : e.ss_gamma_values) {
        for (double v : e.ss_v_values) {
          EitParams p = e.eit;
          p.decay_Gamma = gamma;
          Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(n, n);
          for (int k = 0; k + 1 < n; ++k) vals(k, k + 1) = vals(k + 1, k) = v;
          if (e.lattice.boundary == Boundary::periodic && n > 2) vals(n - 1, 0) = vals(0, n - 1) = v;
          const InteractionMatrix inter(vals);
          auto full = steady_state(build_three_level_liouvillian(p, inter));
          auto reduced = reduced_steady_state(p, inter, ReducedVariant::nn_exclusion, e.lattice.boundary);
          rows.push_back({static_cast<double>(n), gamma, v,
                          trace_distance(full.rho, embed_reduced(reduced.rho, n)),
                          trace_distance(project_and_reduce(full.rho, n), reduced.rho)});
        }
      }
    }
    write_table(out_path, {"n_sites", "gamma", "v", "trace_distance", "trace_distance_projected"}, rows);
    return;
  }

  const InteractionMatrix inter = build_chain_interactions(e.lattice);
  const int n = e.lattice.n_sites;
  SteadyStateResult ss;
  Basis basis(n, 2);
  if (e.ss_target == "two-level") {
    ss = steady_state(build_two_level_liouvillian(e.model, inter));
  } else if (e.ss_target == "eit-full") {
    ss = steady_state(build_three_level_liouvillian(e.eit, inter));
    basis = Basis(n, 3);
  } else {
    ss = reduced_steady_state(e.eit, inter, variant_of(e.ss_target), e.lattice.boundary);
  }
  const auto specs = parse_observables(e.observable_names, n);
  std::vector<std::string> header;
  std::vector<double> row;
  for (const auto& s : specs) {
    header.push_back(s.name());
    row.push_back(evaluate(s, ss.rho, basis));
  }
  header.push_back("residual");
  row.push_back(ss.residual);
  header.push_back("multiplicity");
  row.push_back(ss.multiplicity);
  write_table(out_path, header, {row});
  std::printf("steady state (%s): method=%s residual=%g multiplicity=%d\n", e.ss_target.c_str(),
              ss.method.c_str(), ss.residual, ss.multiplicity);
}

int compare_records(const TrajectoryRecord& a, const TrajectoryRecord& b, const std::string& report_path) {
  if (a.times.size() != b.times.size()) throw ConfigError("compare: sample counts differ");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > 1e-9)
      throw ConfigError("compare: sample times differ at row " + std::to_string(i));
  std::vector<std::string> common;
  for (const auto& [name, col] : a.observables)
    if (b.observables.count(name)) common.push_back(name);
  if (common.empty()) throw ConfigError("compare: no common observable columns");

  std::vector<std::vector<double>> rows;
  std::printf("%-20s %-22s %-22s\n", "observable", "max_abs_dev", "mean_abs_dev");
  std::ofstream out(report_path);
  if (!out) throw std::runtime_error("cannot open output file: " + report_path);
  out << "observable,max_abs_dev,mean_abs_dev\n";
  for (const auto& name : common) {
    const auto& ca = a.observables.at(name);
    const auto& cb = b.observables.at(name);
    double mx = 0, mean = 0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
      const double d = std::abs(ca[i] - cb[i]);
      mx = std::max(mx, d);
      mean += d;
    }
    mean /= ca.size();
    std::printf("%-20s %-22s %-22s\n", name.c_str(), fmt17(mx).c_str(), fmt17(mean).c_str());
    out << name << "," << fmt17(mx) << "," << fmt17(mean) << "\n";
  }
  return 0;
}

void run_method(const Experiment& e, const std::string& method) {
  const int n = e.lattice.n_sites;
  if (method == "compare") {
    compare_records(TrajectoryRecord::from_csv(e.input_a), TrajectoryRecord::from_csv(e.input_b),
                    output_name(e, method, ""));
    return;
  }
  if (method == "positivity-scan") {
    scan_positivity(e.model, e.lattice, e.v_min, e.v_max, e.delta_min, e.delta_max, e.v_resolution,
                    e.delta_resolution)
        .to_csv(output_name(e, method, ""));
    return;
  }
  if (method == "steady-state") {
    run_steady_state(e, output_name(e, method, ""));
    return;
  }

  const InteractionMatrix inter = build_chain_interactions(e.lattice);
  const auto specs = parse_observables(e.observable_names, n);

  if (method == "full-integrate") {
    const auto liou = build_two_level_liouvillian(e.model, inter);
    integrate(liou, classical_unit(e.initial_config, liou.dim()), e.grid, specs)
        .to_csv(output_name(e, method, ""));
  } else if (method == "qjmc") {
    const auto u = make_unravelling(e.model, inter);
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(u.dim());
    psi0(e.initial_config) = 1.0;
    average_trajectories(u, psi0, e.grid, specs, e.n_trajectories, e.seed)
        .to_csv(output_name(e, method, ""));
  } else if (method == "rate2" || method == "rate4") {
    const int order = method == "rate4" ? 4 : 2;
    const auto gen = build_generator(e.model, inter, order, e.model.decay_gamma_ryd > 0);
    if (gen.has_negative_rates)
      std::fprintf(stderr, "warning: %s generator has negative rates at these parameters\n", method.c_str());
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(gen.dim());
    v0(e.initial_config) = 1.0;
    integrate_rate_equation(gen, v0, e.grid, specs).to_csv(output_name(e, method, ""));
  } else if (method == "kmc") {
    std::vector<std::uint8_t> config0(n, 0);
    for (int s = 0; s < n; ++s) config0[s] = n <= 62 ? static_cast<std::uint8_t>(occ2(e.initial_config, s, n)) : 0;
    average_gillespie(e.model, e.lattice, config0, e.grid, specs, e.n_trajectories, e.seed)
        .to_csv(output_name(e, method, ""));
  } else if (method == "eit-full" || is_eit_method(method)) {
    std::vector<double> op_values = e.omega_p_values;
    if (op_values.empty()) op_values.push_back(e.eit.omega_p);
    for (double op : op_values) {
      EitParams p = e.eit;
      p.omega_p = op;
      const std::string suffix = e.omega_p_values.empty() ? "" : "op" + fmt17(op);
      if (method == "eit-full") {
        const auto liou = build_three_level_liouvillian(p, inter);
        integrate(liou, classical_unit(three_level_index(e.initial_config, n), liou.dim()), e.grid, specs)
            .to_csv(output_name(e, method, suffix));
      } else {
        integrate_reduced(p, inter, variant_of(method), e.lattice.boundary,
                          classical_unit(e.initial_config, two_level_dim(n)), e.grid, specs)
            .to_csv(output_name(e, method, suffix));
      }
    }
  } else {
    fail("config.method", "unhandled method '" + method + "'");
  }
}

int run_config(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    std::fprintf(stderr, "error: cannot read config file %s\n", config_path.c_str());
    return 2;
  }
  json cfg;
  in >> cfg;
  const Experiment e = parse_experiment(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& method : e.methods) {
    try {
      run_method(e, method);
    } catch (const NumericalError& err) {
      throw NumericalError(method + ": " + err.what());
    } catch (const StiffnessError& err) {
      throw NumericalError(method + ": " + err.what());
    }
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string stem = e.output;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
  json manifest = {{"config", e.resolved},
                   {"version", RYDEFF_VERSION},
                   {"wall_time_seconds", wall},
                   {"generated_at", static_cast<long>(std::time(nullptr))}};
  std::ofstream mout(stem + ".manifest.json");
  mout << manifest.dump(2) << "\n";
  return 0;
}

int list_presets() {
  namespace fs = std::filesystem;
  std::vector<fs::path> candidates = {fs::path(RYDEFF_PRESET_DIR), fs::path("presets")};
  for (const auto& dir : candidates) {
    if (!fs::is_directory(dir)) continue;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::string desc;
      try {
        std::ifstream in(f);
        json j;
        in >> j;
        desc = j.value("description", "");
      } catch (...) {
      }
      std::printf("%-28s %s\n", f.filename().string().c_str(), desc.c_str());
      std::printf("%-28s   run with: rydeff run %s\n", "", f.string().c_str());
    }
    return 0;
  }
  std::fprintf(stderr, "error: no preset directory found\n");
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rydeff: effective dynamics of dissipative Rydberg lattice gases"};
  app.require_subcommand(1);

  std::string config_path, csv_a, csv_b;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "path to the config JSON")->required();
  auto* cmp = app.add_subcommand("compare", "per-observable deviations between two result CSVs");
  cmp->add_option("a", csv_a, "first CSV")->required();
  cmp->add_option("b", csv_b, "second CSV")->required();
  auto* presets = app.add_subcommand("presets", "preset configs");
  presets->add_subcommand("list", "list available presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_config(config_path);
    if (cmp->parsed()) {
      const auto a = TrajectoryRecord::from_csv(csv_a);
      const auto b = TrajectoryRecord::from_csv(csv_b);
      // stdout-only report: write next to the first input
      return compare_records(a, b, csv_a + ".compare.csv");
    }
    if (presets->parsed()) return list_presets();
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const nlohmann::json::exception& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const std::invalid_argument& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "numerical failure: %s\n", err.what());
    return 3;
  }
  return 0;
}
