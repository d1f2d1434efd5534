#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cbt/config.hpp"
#include "cbt/scenarios.hpp"

#ifndef CBT_VERSION
#define CBT_VERSION "0.0.0"
#endif

namespace cbt {

namespace fs = std::filesystem;

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_numeric = 3 };

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header, bool append = false)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    if (!append) row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const fs::path& path) {
  CsvTable t;
  std::ifstream in(path);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    return cells;
  };
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split(line));
  return t;
}

inline std::vector<std::string> trajectory_header(const Trajectory& t) {
  std::vector<std::string> h{"step", "t", "trace"};
  h.insert(h.end(), t.names.begin(), t.names.end());
  return h;
}

inline void write_trajectory_csv(const fs::path& path, const Trajectory& t) {
  CsvWriter w(path, trajectory_header(t));
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<std::string> r{std::to_string(t.steps[k]), format_number(t.times[k]), format_number(t.traces[k])};
    for (const auto& s : t.series) r.push_back(format_number(s[k]));
    w.row(r);
  }
}

inline void write_g2_csv(const fs::path& path, const std::vector<G2Curve>& curves, double t_bar) {
  CsvWriter w(path, {"n_base", "lag_steps", "tau", "pair", "value"});
  for (const auto& c : curves)
    for (std::size_t k = 0; k < c.lags.size(); ++k)
      w.row({std::to_string(c.n_base), std::to_string(c.lags[k]),
             format_number(static_cast<double>(c.lags[k]) * t_bar), c.pair, format_number(c.values[k])});
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json slot_json(const SlotConstants& k) {
  const SpectralData& d = k.spectral;
  return {{"transition", {k.transition.lower, k.transition.upper}},
          {"omega", k.qubit.omega},
          {"theta_q", k.qubit.theta_q},
          {"theta_c", k.qubit.theta_c},
          {"beta", std::isinf(k.qubit.beta) ? json("inf") : json(k.qubit.beta)},
          {"w_a", d.w_a},
          {"w_b", d.w_b},
          {"b_ab", {d.b_ab.real(), d.b_ab.imag()}},
          {"b_ba", {d.b_ba.real(), d.b_ba.imag()}},
          {"gamma_plus", d.gamma_plus},
          {"gamma_minus", d.gamma_minus},
          {"gammabar_plus", d.gammabar_plus},
          {"gammabar_minus", d.gammabar_minus},
          {"delta_plus", d.delta_plus},
          {"delta_minus", d.delta_minus},
          {"kms_status", to_string(k.kms.status)},
          {"eta", std::isnan(k.kms.eta) ? json(nullptr) : json(k.kms.eta)},
          {"beta_bar", optional_number(k.kms.beta_bar)},
          {"mu_b", {k.mu_b.real(), k.mu_b.imag()}}};
}

struct ManifestInfo {
  const ScenarioConfig* config{nullptr};
  const ScenarioSetup* setup{nullptr};
  double wall_time{0.0};
  std::vector<std::string> outputs;
  json extra = json::object();
};

inline void write_manifest(const fs::path& path, const ManifestInfo& m) {
  json j;
  j["config"] = to_json(*m.config);
  j["code_version"] = CBT_VERSION;
  j["wall_time_s"] = m.wall_time;
  j["engine"] = enum_name(m.config->engine);
  j["units"] = "hbar = k_B = 1; time in units of 1/energy";
  if (m.setup) {
    json slots = json::array();
    for (const auto& k : m.setup->constants) slots.push_back(slot_json(k));
    j["slots"] = slots;
  }
  j["outputs"] = m.outputs;
  for (auto it = m.extra.begin(); it != m.extra.end(); ++it) j[it.key()] = it.value();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setw(2) << j << '\n';
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct CliOptions {
  std::string config_path;
  std::string out_dir{"."};
  std::optional<EngineKind> engine;
  unsigned workers{1};
  bool resume{false};
};

inline ScenarioConfig load_for_cli(const CliOptions& o) {
  ScenarioConfig c = load_config(o.config_path);
  if (o.engine) c.engine = *o.engine;
  validate(c);
  fs::create_directories(o.out_dir);
  return c;
}

// Keeps the QS trajectory at the output stride and adds the trailing-window C12 column.
inline Trajectory qs_output_trajectory(const QsRun& run, const ScenarioConfig& c, const std::vector<double>& dev) {
  const Trajectory& t = run.traj;
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (k % c.stride == 0 || k + 1 == t.size()) keep.push_back(k);
  Trajectory out;
  out.t_bar = t.t_bar;
  for (std::size_t k : keep) {
    out.steps.push_back(t.steps[k]);
    out.times.push_back(t.times[k]);
    out.traces.push_back(t.traces[k]);
  }
  auto pick = [&](const std::vector<double>& s) {
    std::vector<double> v;
    for (std::size_t k : keep) v.push_back(s[k]);
    return v;
  };
  out.add_column("sx1", pick(t.column("sx1")));
  out.add_column("sx2", pick(t.column("sx2")));
  out.add_column("C12", rolling_pearson(t.column("sx1"), t.column("sx2"), c.window, keep));
  for (const char* n : {"bloch_x", "bloch_y", "bloch_z"}) out.add_column(n, pick(t.column(n)));
  if (!dev.empty()) out.add_column("dev_sx1", pick(dev));
  out.final_state = t.final_state;
  out.final_step = t.final_step;
  return out;
}

inline int cmd_scan(const CliOptions& o);
inline int cmd_bench(const CliOptions& o);

inline int run_scenario(const CliOptions& o) {
  const Stopwatch sw;
  const ScenarioConfig c = load_for_cli(o);
  const fs::path dir(o.out_dir);
  ManifestInfo m;
  m.config = &c;
  auto traj_name = [&](const std::string& engine, bool many) {
    return c.id + (many ? "_traj_" + engine : std::string("_traj")) + ".csv";
  };
  switch (c.scenario) {
    case ScenarioKind::phase_scan: return cmd_scan(o);
    case ScenarioKind::bench: return cmd_bench(o);
    case ScenarioKind::single_qubit: {
      const SingleQubitResult r = single_qubit_run(c);
      for (const auto& run : r.runs) {
        const std::string f = traj_name(run.engine, r.runs.size() > 1);
        write_trajectory_csv(dir / f, run.traj);
        m.outputs.push_back(f);
      }
      m.setup = &r.setup;
      m.wall_time = sw.seconds();
      write_manifest(dir / (c.id + "_manifest.json"), m);
      return exit_ok;
    }
    case ScenarioKind::dichromatic: {
      const DichromaticResult r = dichromatic_run(c);
      for (std::size_t k = 0; k < r.runs.size(); ++k) {
        const bool many = r.runs.size() > 1;
        const std::string f = traj_name(r.runs[k].engine, many);
        const std::string g = c.id + (many ? "_g2_" + r.runs[k].engine : std::string("_g2")) + ".csv";
        write_trajectory_csv(dir / f, r.runs[k].traj);
        write_g2_csv(dir / g, r.g2[k], c.t_bar);
        m.outputs.push_back(f);
        m.outputs.push_back(g);
      }
      m.setup = &r.setup;
      m.extra["g2_ordering"] = enum_name(c.g2.ordering);
      m.wall_time = sw.seconds();
      write_manifest(dir / (c.id + "_manifest.json"), m);
      return exit_ok;
    }
    case ScenarioKind::qs: {
      const QsResult r = qs_run(c);
      json summary = json::array();
      for (const auto& run : r.runs) {
        const std::string f = traj_name(run.engine, r.runs.size() > 1);
        write_trajectory_csv(dir / f, qs_output_trajectory(run, c, r.deviation));
        m.outputs.push_back(f);
        summary.push_back({{"engine", run.engine},
                           {"C12_final_window", std::isnan(run.c12) ? json(nullptr) : json(run.c12)},
                           {"amplitude_final_window", run.amplitude}});
      }
      m.setup = &r.setup;
      m.extra["summary"] = summary;
      m.extra["amplitude_definition"] = "peak-to-peak/2 of sx1 over the final window";
      if (!r.deviation.empty()) m.extra["max_dev_sx1"] = r.max_deviation;
      m.wall_time = sw.seconds();
      write_manifest(dir / (c.id + "_manifest.json"), m);
      return exit_ok;
    }
  }
  return exit_failure;
}

inline const std::vector<std::string>& scan_header() {
  static const std::vector<std::string> h{"grid_index", "phi0", "T", "beta", "amplitude", "C12"};
  return h;
}

inline std::vector<std::string> scan_cells(const ScanRow& r) {
  return {std::to_string(r.grid_index), format_number(r.phi0), format_number(r.temperature),
          format_number(r.beta),        format_number(r.amplitude), format_number(r.c12)};
}

// Loads completed rows of an earlier run. Rows with a foreign header are ignored.
inline CsvTable completed_rows(const fs::path& path, const std::vector<std::string>& header, bool resume) {
  if (!resume || !fs::exists(path)) return {};
  CsvTable t = read_csv(path);
  if (t.header != header) return {};
  std::vector<std::vector<std::string>> ok;
  for (auto& r : t.rows)
    if (r.size() == header.size()) ok.push_back(std::move(r));
  t.rows = std::move(ok);
  return t;
}

inline int cmd_scan(const CliOptions& o) {
  const Stopwatch sw;
  ScenarioConfig c = load_for_cli(o);
  if (c.scenario == ScenarioKind::bench) return cmd_bench(o);
  if (c.scenario != ScenarioKind::phase_scan)
    throw ConfigError("scenario", "scan needs a phase_scan or bench config");
  const fs::path dir(o.out_dir);
  const fs::path path = dir / (c.id + "_scan.csv");
  CsvTable done = completed_rows(path, scan_header(), o.resume);
  std::set<std::size_t> skip;
  for (const auto& r : done.rows) skip.insert(std::stoul(r[0]));
  {
    CsvWriter w(path, scan_header(), false);
    for (const auto& r : done.rows) w.row(r);
  }
  CsvWriter w(path, scan_header(), true);
  const std::vector<ScanRow> fresh = phase_scan(c, o.workers, skip, [&](const ScanRow& r) { w.row(scan_cells(r)); });
  std::vector<std::pair<std::size_t, std::vector<std::string>>> all;
  for (const auto& r : done.rows) all.emplace_back(std::stoul(r[0]), r);
  for (const auto& r : fresh) all.emplace_back(r.grid_index, scan_cells(r));
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  {
    CsvWriter sorted(path, scan_header(), false);
    for (const auto& [idx, cells] : all) sorted.row(cells);
  }
  ManifestInfo m;
  m.config = &c;
  const ScenarioSetup setup = qs_setup(c);
  m.setup = &setup;
  m.outputs = {path.filename().string()};
  m.extra["resumed_rows"] = done.rows.size();
  m.extra["amplitude_definition"] = "peak-to-peak/2 of sx1 over the final window";
  m.wall_time = sw.seconds();
  write_manifest(dir / (c.id + "_manifest.json"), m);
  return exit_ok;
}

inline int cmd_bench(const CliOptions& o) {
  const Stopwatch sw;
  ScenarioConfig c = load_for_cli(o);
  if (c.scenario != ScenarioKind::bench && c.scenario != ScenarioKind::qs)
    throw ConfigError("scenario", "bench needs a bench or qs config");
  const fs::path dir(o.out_dir);
  const fs::path path = dir / (c.id + "_bench.csv");
  const std::vector<std::string> header{"sweep_value", "max_dev"};
  CsvTable done = completed_rows(path, header, o.resume);
  std::set<double> skip;
  for (const auto& r : done.rows) skip.insert(std::stod(r[0]));
  {
    CsvWriter w(path, header, false);
    for (const auto& r : done.rows) w.row(r);
  }
  CsvWriter w(path, header, true);
  const auto fresh = benchmark_map_vs_qme(c, skip, [&](const BenchRow& r) {
    w.row({format_number(r.sweep_value), format_number(r.max_dev)});
  });
  ManifestInfo m;
  m.config = &c;
  const ScenarioSetup setup = qs_setup(c);
  m.setup = &setup;
  m.outputs = {path.filename().string()};
  m.extra["sweep_parameter"] = c.sweep.parameter;
  m.extra["resumed_rows"] = done.rows.size();
  m.wall_time = sw.seconds();
  write_manifest(dir / (c.id + "_manifest.json"), m);
  return exit_ok;
}

inline json lep_json(const SpectrumReport& r) {
  const LepReport& l = r.lep;
  json clusters = json::array();
  for (const auto& c : l.clusters)
    clusters.push_back({{"centroid", {c.centroid.real(), c.centroid.imag()}},
                        {"algebraic", c.algebraic},
                        {"geometric", c.geometric},
                        {"order", c.order},
                        {"members", c.members}});
  json j{{"source", r.source},
         {"norm", l.norm},
         {"tol_cluster", l.tol_cluster},
         {"tol_rank", l.tol_rank},
         {"max_order", l.max_order()},
         {"has_growth", l.has_growth},
         {"defective", r.defective},
         {"eigenvector_condition", std::isinf(r.condition) ? json("inf") : json(r.condition)},
         {"clusters", clusters},
         {"stationary_index", l.stationary_index ? json(*l.stationary_index) : json(nullptr)}};
  if (l.oscillation)
    j["oscillation_pair"] = {{"upper", {l.oscillation->upper.real(), l.oscillation->upper.imag()}},
                             {"lower", {l.oscillation->lower.real(), l.oscillation->lower.imag()}},
                             {"dominant", l.oscillation->dominant}};
  else
    j["oscillation_pair"] = nullptr;
  return j;
}

inline int cmd_spectrum(const CliOptions& o) {
  const Stopwatch sw;
  const ScenarioConfig c = load_for_cli(o);
  const fs::path dir(o.out_dir);
  const SpectrumReport r = spectrum_analysis(c);
  const std::string csv = c.id + "_spectrum.csv", rep = c.id + "_lep.json";
  {
    CsvWriter w(dir / csv, {"index", "re", "im", "cluster", "geometric_mult", "lep_order"});
    for (std::size_t k = 0; k < r.lep.values.size(); ++k) {
      const EigenCluster& cl = r.lep.clusters[r.lep.cluster_of[k]];
      w.row({std::to_string(k), format_number(r.lep.values[k].real()), format_number(r.lep.values[k].imag()),
             std::to_string(r.lep.cluster_of[k]), std::to_string(cl.geometric), std::to_string(cl.order)});
    }
  }
  {
    std::ofstream out(dir / rep);
    out << std::setw(2) << lep_json(r) << '\n';
  }
  ManifestInfo m;
  m.config = &c;
  const ScenarioSetup setup = make_setup(c);
  m.setup = &setup;
  m.outputs = {csv, rep};
  m.wall_time = sw.seconds();
  write_manifest(dir / (c.id + "_manifest.json"), m);
  return exit_ok;
}

// Maps library exceptions onto the documented exit codes.
template <class Fn>
int guarded(Fn&& fn, std::ostream& err = std::cerr) {
  try {
    return fn();
  } catch (const InvalidParameter& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DegenerateSpectrum& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return exit_numeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
}

}  // namespace cbt
