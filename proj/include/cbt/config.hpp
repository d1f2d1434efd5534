#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbt/collision.hpp"
#include "cbt/observables.hpp"
#include "cbt/qme.hpp"

namespace cbt {

using json = nlohmann::json;

class ConfigError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

enum class ScenarioKind { single_qubit, dichromatic, qs, phase_scan, bench };
enum class EngineKind { collision, qme, both };
enum class SpectrumSource { average, composite, slot };

struct InitialState {
  int level{0};              // eigenlevel index for single_qubit and dichromatic (photons start in vacuum)
  double spin1_angle{0.0};   // qs: spin k is cos(a/2)|up> + sin(a/2)|down>
  double spin2_angle{kPi};
};

struct G2Spec {
  std::size_t max_lag{4000};
  std::size_t lag_stride{20};
  G2Ordering ordering{G2Ordering::normal};
};

struct Range {
  double min{0.0}, max{1.0};
  std::size_t n{1};
  std::vector<double> points() const {
    std::vector<double> p;
    for (std::size_t k = 0; k < n; ++k)
      p.push_back(n == 1 ? min : min + (max - min) * static_cast<double>(k) / static_cast<double>(n - 1));
    return p;
  }
};

struct ScanSpec {
  Range phi0{0.0, kPi / 2, 7};
  Range temperature{0.0, 2.0, 5};
  double zero_temperature_beta{50.0};
};

struct SweepSpec {
  std::string parameter{"g"};
  std::vector<double> values{1.0, 0.5, 0.25};
};

struct SpectrumSpec {
  SpectrumSource source{SpectrumSource::average};
  std::size_t slot{0};
  double tol_cluster{1e-5};
  double tol_rank{1e-6};
};

struct ScenarioConfig {
  std::string id{"run"};
  ScenarioKind scenario{ScenarioKind::qs};
  EngineKind engine{EngineKind::qme};
  Integrator integrator{Integrator::exact};
  int substeps{1};
  CouplingMode coupling{CouplingMode::resonant};
  bool shift{true};
  Splitting splitting{Splitting::lie};

  double g{2.0};
  double t_bar{0.05};
  double beta{1.0};
  double theta_q{0.55};
  double theta_c{kPi / 3};
  double omega{1.0};

  double omega_10{1.0}, omega_21{1.0};
  double g_int{0.4}, kappa{0.1};
  int cutoff{2};

  double J{0.2}, h_x{0.5}, h_z{1.0};
  double phi0{kPi / 3};

  InitialState initial;
  std::size_t steps{150000};
  std::size_t stride{10};
  std::size_t window{2000};
  G2Spec g2;
  ScanSpec scan;
  SweepSpec sweep;
  SpectrumSpec spectrum;
};

template <class E>
struct EnumNames;

template <>
struct EnumNames<ScenarioKind> {
  static constexpr std::pair<ScenarioKind, const char*> table[] = {{ScenarioKind::single_qubit, "single_qubit"},
                                                                   {ScenarioKind::dichromatic, "dichromatic"},
                                                                   {ScenarioKind::qs, "qs"},
                                                                   {ScenarioKind::phase_scan, "phase_scan"},
                                                                   {ScenarioKind::bench, "bench"}};
};
template <>
struct EnumNames<EngineKind> {
  static constexpr std::pair<EngineKind, const char*> table[] = {
      {EngineKind::collision, "collision"}, {EngineKind::qme, "qme"}, {EngineKind::both, "both"}};
};
template <>
struct EnumNames<Integrator> {
  static constexpr std::pair<Integrator, const char*> table[] = {
      {Integrator::euler, "euler"}, {Integrator::rk4, "rk4"}, {Integrator::exact, "exact"}};
};
template <>
struct EnumNames<CouplingMode> {
  static constexpr std::pair<CouplingMode, const char*> table[] = {{CouplingMode::full, "full"},
                                                                   {CouplingMode::resonant, "resonant"}};
};
template <>
struct EnumNames<Splitting> {
  static constexpr std::pair<Splitting, const char*> table[] = {{Splitting::lie, "lie"}, {Splitting::strang, "strang"}};
};
template <>
struct EnumNames<G2Ordering> {
  static constexpr std::pair<G2Ordering, const char*> table[] = {{G2Ordering::as_written, "as_written"},
                                                                 {G2Ordering::normal, "normal"}};
};
template <>
struct EnumNames<SpectrumSource> {
  static constexpr std::pair<SpectrumSource, const char*> table[] = {
      {SpectrumSource::average, "average"}, {SpectrumSource::composite, "composite"}, {SpectrumSource::slot, "slot"}};
};

template <class E>
std::string enum_name(E e) {
  for (const auto& [v, s] : EnumNames<E>::table)
    if (v == e) return s;
  return "unknown";
}

template <class E>
E parse_enum(const std::string& field, const std::string& s) {
  std::string allowed;
  for (const auto& [v, name] : EnumNames<E>::table) {
    if (s == name) return v;
    allowed += std::string(allowed.empty() ? "" : ", ") + name;
  }
  throw ConfigError(field, "unknown value '" + s + "' (expected one of " + allowed + ")");
}

inline ScenarioConfig defaults_for(ScenarioKind kind) {
  ScenarioConfig c;
  c.scenario = kind;
  switch (kind) {
    case ScenarioKind::single_qubit:
      c.id = "single_qubit";
      c.g = 1.0;
      c.theta_q = kPi / 6;
      c.theta_c = kPi / 3;
      c.steps = 50000;
      c.stride = 100;
      c.initial.level = 0;
      break;
    case ScenarioKind::dichromatic:
      c.id = "fig3";
      c.g = 1.0;
      c.theta_q = kPi / 6;
      c.theta_c = kPi / 3;
      c.steps = 4000;
      c.stride = 10;
      c.initial.level = 0;
      break;
    case ScenarioKind::qs:
      c.id = "fig4";
      break;
    case ScenarioKind::phase_scan:
      c.id = "phase";
      c.steps = 20000;
      c.stride = 1;
      break;
    case ScenarioKind::bench:
      c.id = "bench";
      c.engine = EngineKind::both;
      c.t_bar = 0.2;
      c.g = 1.0;
      c.steps = 4000;
      c.stride = 1;
      break;
  }
  return c;
}

inline json range_to_json(const Range& r) { return json::array({r.min, r.max, r.n}); }

inline json to_json(const ScenarioConfig& c) {
  json j;
  j["id"] = c.id;
  j["scenario"] = enum_name(c.scenario);
  j["engine"] = enum_name(c.engine);
  j["integrator"] = enum_name(c.integrator);
  j["substeps"] = c.substeps;
  j["coupling"] = enum_name(c.coupling);
  j["shift"] = c.shift;
  j["splitting"] = enum_name(c.splitting);
  j["g"] = c.g;
  j["t_bar"] = c.t_bar;
  j["beta"] = c.beta;
  j["theta_q"] = c.theta_q;
  j["theta_c"] = c.theta_c;
  j["omega"] = c.omega;
  j["omega_10"] = c.omega_10;
  j["omega_21"] = c.omega_21;
  j["g_int"] = c.g_int;
  j["kappa"] = c.kappa;
  j["cutoff"] = c.cutoff;
  j["J"] = c.J;
  j["h_x"] = c.h_x;
  j["h_z"] = c.h_z;
  j["phi0"] = c.phi0;
  j["initial"] = {{"level", c.initial.level}, {"spin1_angle", c.initial.spin1_angle},
                  {"spin2_angle", c.initial.spin2_angle}};
  j["steps"] = c.steps;
  j["stride"] = c.stride;
  j["window"] = c.window;
  j["g2"] = {{"max_lag", c.g2.max_lag}, {"lag_stride", c.g2.lag_stride}, {"ordering", enum_name(c.g2.ordering)}};
  j["scan"] = {{"phi0", range_to_json(c.scan.phi0)},
               {"T", range_to_json(c.scan.temperature)},
               {"zero_temperature_beta", c.scan.zero_temperature_beta}};
  j["sweep"] = {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}};
  j["spectrum"] = {{"source", enum_name(c.spectrum.source)},
                   {"slot", c.spectrum.slot},
                   {"tol_cluster", c.spectrum.tol_cluster},
                   {"tol_rank", c.spectrum.tol_rank}};
  return j;
}

namespace detail {

inline void check_keys(const json& j, const std::string& prefix, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(prefix.empty() ? "config" : prefix, "must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(prefix + it.key(), "unknown key");
}

inline double get_number(const json& j, const std::string& field, double fallback) {
  const auto key = field.substr(field.rfind('.') + 1);
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(field, "must be a number");
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

inline long long get_integer(const json& j, const std::string& field, long long fallback) {
  const auto key = field.substr(field.rfind('.') + 1);
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ConfigError(field, "must be an integer");
  return j[key].get<long long>();
}

inline std::size_t get_count(const json& j, const std::string& field, std::size_t fallback) {
  const long long v = get_integer(j, field, static_cast<long long>(fallback));
  if (v < 0) throw ConfigError(field, "must be >= 0");
  return static_cast<std::size_t>(v);
}

inline std::string get_string(const json& j, const std::string& field, const std::string& fallback) {
  const auto key = field.substr(field.rfind('.') + 1);
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(field, "must be a string");
  return j[key].get<std::string>();
}

inline bool get_bool(const json& j, const std::string& field, bool fallback) {
  const auto key = field.substr(field.rfind('.') + 1);
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(field, "must be true or false");
  return j[key].get<bool>();
}

inline Range get_range(const json& j, const std::string& field, const Range& fallback) {
  const auto key = field.substr(field.rfind('.') + 1);
  if (!j.contains(key)) return fallback;
  const json& a = j[key];
  if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() || !a[2].is_number_integer())
    throw ConfigError(field, "must be [min, max, count]");
  Range r{a[0].get<double>(), a[1].get<double>(), 0};
  const long long n = a[2].get<long long>();
  if (n < 1) throw ConfigError(field, "count must be >= 1");
  if (!(r.max >= r.min)) throw ConfigError(field, "max must be >= min");
  r.n = static_cast<std::size_t>(n);
  return r;
}

}  // namespace detail

inline void validate(const ScenarioConfig& c) {
  auto positive = [](double v, const char* f) {
    if (!(std::isfinite(v) && v > 0.0)) throw ConfigError(f, "must be finite and > 0");
  };
  auto nonneg = [](double v, const char* f) {
    if (!(std::isfinite(v) && v >= 0.0)) throw ConfigError(f, "must be finite and >= 0");
  };
  if (c.id.empty() || c.id.find('/') != std::string::npos) throw ConfigError("id", "must be a plain file stem");
  positive(c.t_bar, "t_bar");
  nonneg(c.g, "g");
  nonneg(c.beta, "beta");
  positive(c.omega, "omega");
  positive(c.omega_10, "omega_10");
  positive(c.omega_21, "omega_21");
  nonneg(c.g_int, "g_int");
  nonneg(c.kappa, "kappa");
  if (!(c.theta_q >= 0.0 && c.theta_q <= kPi)) throw ConfigError("theta_q", "must lie in [0, pi]");
  if (c.cutoff < 1) throw ConfigError("cutoff", "must be >= 1");
  if (c.substeps < 1) throw ConfigError("substeps", "must be >= 1");
  if (c.stride < 1) throw ConfigError("stride", "must be >= 1");
  if (c.window < 2) throw ConfigError("window", "must be >= 2");
  if (c.g2.lag_stride < 1) throw ConfigError("g2.lag_stride", "must be >= 1");
  if (c.initial.level < 0) throw ConfigError("initial.level", "must be >= 0");
  if (c.scenario == ScenarioKind::single_qubit && c.initial.level > 1)
    throw ConfigError("initial.level", "single_qubit has levels 0 and 1");
  if (c.scenario == ScenarioKind::dichromatic && c.initial.level > 2)
    throw ConfigError("initial.level", "dichromatic has levels 0, 1 and 2");
  if (c.scan.zero_temperature_beta <= 0.0) throw ConfigError("scan.zero_temperature_beta", "must be > 0");
  if (c.scan.temperature.min < 0.0) throw ConfigError("scan.T", "temperatures must be >= 0");
  if (c.sweep.parameter != "g" && c.sweep.parameter != "t_bar")
    throw ConfigError("sweep.parameter", "must be g or t_bar");
  if (c.sweep.values.empty()) throw ConfigError("sweep.values", "must not be empty");
  for (double v : c.sweep.values)
    if (!(std::isfinite(v) && v >= 0.0) || (c.sweep.parameter == "t_bar" && v <= 0.0))
      throw ConfigError("sweep.values", "entries must be admissible values of " + c.sweep.parameter);
  if (!(c.spectrum.tol_cluster > 0.0)) throw ConfigError("spectrum.tol_cluster", "must be > 0");
  if (!(c.spectrum.tol_rank > 0.0)) throw ConfigError("spectrum.tol_rank", "must be > 0");
  if (c.scenario == ScenarioKind::qs || c.scenario == ScenarioKind::phase_scan || c.scenario == ScenarioKind::bench)
    if (c.window > c.steps + 1) throw ConfigError("window", "exceeds the number of recorded steps");
}

inline ScenarioConfig parse_config(const json& j) {
  using namespace detail;
  check_keys(j, "",
             {"id", "scenario", "engine", "integrator", "substeps", "coupling", "shift", "splitting", "g", "t_bar",
              "beta", "theta_q", "theta_c", "omega", "omega_10", "omega_21", "g_int", "kappa", "cutoff", "J", "h_x",
              "h_z", "phi0", "initial", "steps", "stride", "window", "g2", "scan", "sweep", "spectrum"});
  if (!j.contains("scenario")) throw ConfigError("scenario", "is required");
  ScenarioConfig c = defaults_for(parse_enum<ScenarioKind>("scenario", get_string(j, "scenario", "")));
  c.id = get_string(j, "id", c.id);
  if (j.contains("engine")) c.engine = parse_enum<EngineKind>("engine", get_string(j, "engine", ""));
  if (j.contains("integrator")) c.integrator = parse_enum<Integrator>("integrator", get_string(j, "integrator", ""));
  c.substeps = static_cast<int>(get_integer(j, "substeps", c.substeps));
  if (j.contains("coupling")) c.coupling = parse_enum<CouplingMode>("coupling", get_string(j, "coupling", ""));
  c.shift = get_bool(j, "shift", c.shift);
  if (j.contains("splitting")) c.splitting = parse_enum<Splitting>("splitting", get_string(j, "splitting", ""));
  c.g = get_number(j, "g", c.g);
  c.t_bar = get_number(j, "t_bar", c.t_bar);
  c.beta = get_number(j, "beta", c.beta);
  c.theta_q = get_number(j, "theta_q", c.theta_q);
  c.theta_c = get_number(j, "theta_c", c.theta_c);
  c.omega = get_number(j, "omega", c.omega);
  c.omega_10 = get_number(j, "omega_10", c.omega_10);
  c.omega_21 = get_number(j, "omega_21", c.omega_21);
  c.g_int = get_number(j, "g_int", c.g_int);
  c.kappa = get_number(j, "kappa", c.kappa);
  c.cutoff = static_cast<int>(get_integer(j, "cutoff", c.cutoff));
  c.J = get_number(j, "J", c.J);
  c.h_x = get_number(j, "h_x", c.h_x);
  c.h_z = get_number(j, "h_z", c.h_z);
  c.phi0 = get_number(j, "phi0", c.phi0);
  if (j.contains("initial")) {
    const json& s = j["initial"];
    check_keys(s, "initial.", {"level", "spin1_angle", "spin2_angle"});
    c.initial.level = static_cast<int>(get_integer(s, "initial.level", c.initial.level));
    c.initial.spin1_angle = get_number(s, "initial.spin1_angle", c.initial.spin1_angle);
    c.initial.spin2_angle = get_number(s, "initial.spin2_angle", c.initial.spin2_angle);
  }
  c.steps = get_count(j, "steps", c.steps);
  c.stride = get_count(j, "stride", c.stride);
  c.window = get_count(j, "window", c.window);
  if (j.contains("g2")) {
    const json& s = j["g2"];
    check_keys(s, "g2.", {"max_lag", "lag_stride", "ordering"});
    c.g2.max_lag = get_count(s, "g2.max_lag", c.g2.max_lag);
    c.g2.lag_stride = get_count(s, "g2.lag_stride", c.g2.lag_stride);
    if (s.contains("ordering"))
      c.g2.ordering = parse_enum<G2Ordering>("g2.ordering", get_string(s, "g2.ordering", ""));
  }
  if (j.contains("scan")) {
    const json& s = j["scan"];
    check_keys(s, "scan.", {"phi0", "T", "zero_temperature_beta"});
    c.scan.phi0 = get_range(s, "scan.phi0", c.scan.phi0);
    c.scan.temperature = get_range(s, "scan.T", c.scan.temperature);
    c.scan.zero_temperature_beta = get_number(s, "scan.zero_temperature_beta", c.scan.zero_temperature_beta);
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, "sweep.", {"parameter", "values"});
    c.sweep.parameter = get_string(s, "sweep.parameter", c.sweep.parameter);
    if (s.contains("values")) {
      if (!s["values"].is_array()) throw ConfigError("sweep.values", "must be an array of numbers");
      c.sweep.values.clear();
      for (const auto& v : s["values"]) {
        if (!v.is_number()) throw ConfigError("sweep.values", "must be an array of numbers");
        c.sweep.values.push_back(v.get<double>());
      }
    }
  }
  if (j.contains("spectrum")) {
    const json& s = j["spectrum"];
    check_keys(s, "spectrum.", {"source", "slot", "tol_cluster", "tol_rank"});
    if (s.contains("source"))
      c.spectrum.source = parse_enum<SpectrumSource>("spectrum.source", get_string(s, "spectrum.source", ""));
    c.spectrum.slot = get_count(s, "spectrum.slot", c.spectrum.slot);
    c.spectrum.tol_cluster = get_number(s, "spectrum.tol_cluster", c.spectrum.tol_cluster);
    c.spectrum.tol_rank = get_number(s, "spectrum.tol_rank", c.spectrum.tol_rank);
  }
  validate(c);
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace cbt
