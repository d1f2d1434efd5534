#include <CLI11.hpp>

#include "cbt/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Collision-model and master-equation simulator for non-Hermitian reservoir qubits"};
  app.require_subcommand(1);
  cbt::CliOptions opts;
  std::string engine;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "Scenario config (JSON)")->required();
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--engine", engine, "Override the engine")->check(CLI::IsMember({"collision", "qme", "both"}));
  };
  CLI::App* run = app.add_subcommand("run", "Run a scenario and write trajectory, G2 and manifest files");
  CLI::App* scan = app.add_subcommand("scan", "Run a phase scan or benchmark sweep");
  CLI::App* spectrum = app.add_subcommand("spectrum", "Liouvillian spectrum and exceptional-point report");
  CLI::App* bench = app.add_subcommand("bench", "Collision map vs master equation deviation table");
  for (CLI::App* sub : {run, scan, spectrum, bench}) add_common(sub);
  for (CLI::App* sub : {scan, bench}) {
    sub->add_option("--workers", opts.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--resume", opts.resume, "Keep completed rows of an earlier run");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cbt::exit_config;
  }
  if (!engine.empty()) opts.engine = cbt::parse_enum<cbt::EngineKind>("engine", engine);

  return cbt::guarded([&] {
    if (run->parsed()) return cbt::run_scenario(opts);
    if (scan->parsed()) return cbt::cmd_scan(opts);
    if (spectrum->parsed()) return cbt::cmd_spectrum(opts);
    return cbt::cmd_bench(opts);
  });
}
