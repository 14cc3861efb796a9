// cvqkd-lo: command-line front end for the LO calibration attack simulator.
//
//   cvqkd-lo run --config scenario.cfg [--seed N] [--out DIR] [--csv]
//   cvqkd-lo sweep [--config sweep.cfg] [--out DIR]
//   cvqkd-lo pulse-demo [--out DIR] [--shift-ns 10]
//   cvqkd-lo calibrate [--seed N] [--out DIR] [--csv] [--delay-ns 10]
//
// Exit codes for run: 0 secure, 2 abort, 3 breached, 1 error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cvqkd/config.h"
#include "cvqkd/error.h"
#include "cvqkd/scenario.h"
#include "cvqkd/waveform_csv.h"

namespace fs = std::filesystem;
using namespace cvqkd;

namespace {

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw InvalidInput("cannot write " + (dir / name).string());
  return os;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::string out_dir,
            bool csv) {
  ScenarioConfig cfg = parse_config(read_text_file(config_path));
  if (seed) cfg.seed = *seed;
  if (out_dir.empty()) out_dir = cfg.out_dir;

  RunOptions opts;
  opts.keep_records = csv && !out_dir.empty();
  const ScenarioReport rep = run_scenario(cfg, opts);

  write_report(std::cout, rep);
  if (csv && out_dir.empty()) std::cout << report_csv_header() << '\n' << report_csv_row(rep) << '\n';
  if (!out_dir.empty()) {
    auto os = open_out(out_dir, "report.txt");
    write_report(os, rep);
    if (csv) {
      auto row = open_out(out_dir, "report.csv");
      row << report_csv_header() << '\n' << report_csv_row(rep) << '\n';
      auto samples = open_out(out_dir, "samples.csv");
      write_pulse_csv(samples, rep.records);
    }
  }
  return exit_code(rep.key_rate.verdict);
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  const SweepConfig cfg =
      config_path.empty() ? SweepConfig::defaults() : parse_sweep_config(read_text_file(config_path));
  const SweepResult r = sweep_keyrate(cfg);
  const auto fmt = [](const std::optional<double>& d) { return d ? std::to_string(*d) : std::string("none"); };
  std::cout << "max_distance_km_baseline=" << fmt(r.max_distance_baseline) << '\n'
            << "max_distance_km_countermeasure=" << fmt(r.max_distance_countermeasure) << '\n'
            << "rows_per_curve=" << r.baseline.size() << '\n';
  if (!out_dir.empty()) {
    auto a = open_out(out_dir, "keyrate_baseline.csv");
    write_sweep_csv(a, r.baseline);
    auto b = open_out(out_dir, "keyrate_countermeasure.csv");
    write_sweep_csv(b, r.countermeasure);
  } else {
    std::cout << "# baseline\n";
    write_sweep_csv(std::cout, r.baseline);
    std::cout << "# countermeasure\n";
    write_sweep_csv(std::cout, r.countermeasure);
  }
  return 0;
}

int cmd_pulse_demo(const std::string& out_dir, double shift_ns) {
  const Waveform ref = reference_lo_pulse();
  TriggerConfig trig;
  PowerMeterConfig pm{ref.duration(), 1.01};
  const PulseDemo d = make_pulse_demo(shift_ns, trig, pm);
  std::cout.precision(17);
  std::cout << "power_base=" << d.power_base << '\n'
            << "power_shaped=" << d.power_shaped << '\n'
            << "power_rel_diff=" << std::abs(d.power_shaped - d.power_base) / d.power_base << '\n'
            << "trigger_base_ns=" << d.trigger_base << '\n'
            << "trigger_shaped_ns=" << d.trigger_shaped << '\n'
            << "trigger_shift_ns=" << d.trigger_shaped - d.trigger_base << '\n';
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_waveform_csv((fs::path(out_dir) / "pulse_base.csv").string(), d.base);
    write_waveform_csv((fs::path(out_dir) / "pulse_shaped.csv").string(), d.shaped);
  }
  return 0;
}

int cmd_calibrate(std::uint64_t seed, const std::string& out_dir, bool csv, double delay_ns) {
  const DetectorModel det;
  const CalibrationDemo d = make_calibration_demo(det, 1000, 10000, delay_ns, seed);
  std::cout.precision(17);
  std::cout << "slope=" << d.nominal_line.slope << '\n'
            << "intercept=" << d.nominal_line.intercept << '\n'
            << "slope_stderr=" << d.nominal_line.slope_stderr << '\n'
            << "delayed_slope=" << d.delayed_line.slope << '\n'
            << "delayed_intercept=" << d.delayed_line.intercept << '\n'
            << "slope_ratio=" << d.slope_ratio << '\n';
  if (csv && !out_dir.empty()) {
    auto os = open_out(out_dir, "calibration.csv");
    os.precision(17);
    os << "power,variance_nominal,variance_delayed\n";
    for (std::size_t i = 0; i < d.nominal.size(); ++i)
      os << d.nominal[i].power << ',' << d.nominal[i].variance << ',' << d.delayed[i].variance << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local-oscillator calibration attack simulator for CV-QKD"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool csv = false;
  double shift_ns = 10.0;
  double delay_ns = 10.0;

  auto* run = app.add_subcommand("run", "simulate one attack scenario");
  run->add_option("--config", config_path, "scenario config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--csv", csv, "emit CSV report row (and samples.csv with --out)");

  auto* sweep = app.add_subcommand("sweep", "key rate versus distance, with and without countermeasure");
  sweep->add_option("--config", config_path, "sweep config file")->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_flag("--csv", csv, "accepted for symmetry; sweep output is always CSV");

  auto* demo = app.add_subcommand("pulse-demo", "equal-power LO pulses with different trigger times");
  demo->add_option("--out", out_dir, "output directory");
  demo->add_option("--shift-ns", shift_ns, "requested trigger delay")->check(CLI::NonNegativeNumber);

  auto* cal = app.add_subcommand("calibrate", "fit shot-noise calibration lines from synthetic data");
  cal->add_option("--seed", seed, "random seed");
  cal->add_option("--out", out_dir, "output directory");
  cal->add_flag("--csv", csv, "write calibration.csv");
  cal->add_option("--delay-ns", delay_ns, "trigger delay for the second line")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config_path, seed, out_dir, csv);
    if (*sweep) return cmd_sweep(config_path, out_dir);
    if (*demo) return cmd_pulse_demo(out_dir, shift_ns);
    if (*cal) return cmd_calibrate(seed.value_or(1), out_dir, csv, delay_ns);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
