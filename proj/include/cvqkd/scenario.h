#pragma once

// End-to-end experiment: calibrate, attack, estimate, monitor, key rate.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvqkd/countermeasure.h"
#include "cvqkd/keyrate.h"
#include "cvqkd/paramest.h"
#include "cvqkd/pulsephys.h"
#include "cvqkd/qkdsim.h"

namespace cvqkd {

struct CountermeasureConfig {
  double fraction = 0.1;
  SwitchModel switch_model{};
  double z_threshold = 5.0;

  bool operator==(const CountermeasureConfig&) const = default;
};

// When edge_ns > 0 the trigger delay is derived from attack.alpha by shaping
// the reference LO pulse instead of being taken from attack.delay_ns.
struct LoShapingConfig {
  double edge_ns = 0.0;
  TriggerConfig trigger{};
  PowerMeterConfig power_meter{};

  bool operator==(const LoShapingConfig& o) const {
    return edge_ns == o.edge_ns && trigger.kind == o.trigger.kind &&
           trigger.threshold == o.trigger.threshold && trigger.delay_ns == o.trigger.delay_ns &&
           trigger.pulse_duration_ns == o.trigger.pulse_duration_ns &&
           power_meter.window_ns == o.power_meter.window_ns &&
           power_meter.decay_base == o.power_meter.decay_base;
  }
};

struct ScenarioConfig {
  ChannelParams channel{};
  AttackParams attack{};
  DetectorModel detector{};
  LoShapingConfig shaping{};
  std::optional<CountermeasureConfig> countermeasure{};
  std::size_t pulses = 2'000'000;
  double key_fraction = 0.5;  // n/N among non-monitoring pulses
  double beta = 0.948;
  double epsilon = 1e-10;
  double lo_power = 1.0;  // measured LO power, calibration-line units
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out_dir{};

  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;
};

enum class Verdict { kSecure, kAbort, kBreached };

const char* to_string(Verdict v) noexcept;
int exit_code(Verdict v) noexcept;

struct ShotNoiseSection {
  double n0_line = 0.0;  // calibration-line prediction, N0'
  double n0_true = 0.0;  // ground truth E[g]*N0 seen by estimation pulses
  std::optional<ShotNoiseEstimate> realtime{};
  std::optional<AttackDecision> decision{};
};

struct KeyRateSection {
  KeyRateBreakdown estimated;
  KeyRateBreakdown ground_truth;
  double k_estimated = 0.0;  // after the monitoring penalty
  double k_true = 0.0;
  Verdict verdict = Verdict::kAbort;
};

struct ScenarioReport {
  EstimationReport estimation;
  // xi_hat re-expressed in N0' units with the true run shot noise:
  // xi_hat * n0_true / n0_assumed.
  double xi_hat_n0p = 0.0;
  double attack_delay_ns = 0.0;
  double eta_run = 0.0;
  std::size_t key_pulses = 0;
  ShotNoiseSection shot_noise;
  KeyRateSection key_rate;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<PulseRecord> records;  // filled only when requested
};

struct RunOptions {
  bool keep_records = false;
};

// Any stage failure is rethrown as StageError naming the stage.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

ScenarioReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

void write_report(std::ostream& os, const ScenarioReport& r);
std::string report_csv_header();
std::string report_csv_row(const ScenarioReport& r);

// Reference LO pulse: 1 ns sampling, 20 ns padding, 10 ns rise, 80 ns flat
// top, 10 ns fall (a 100 ns pulse).
Waveform reference_lo_pulse();

struct PulseDemo {
  Waveform base;
  Waveform shaped;
  double power_base = 0.0;
  double power_shaped = 0.0;
  double trigger_base = 0.0;
  double trigger_shaped = 0.0;
};

PulseDemo make_pulse_demo(double shift_ns, const TriggerConfig& trig, const PowerMeterConfig& pm);

struct CalibrationDemo {
  std::vector<CalibrationPoint> nominal;
  std::vector<CalibrationPoint> delayed;
  CalibrationLine nominal_line;
  CalibrationLine delayed_line;
  double slope_ratio = 0.0;
};

// Calibration lines for the nominal trigger and for one delayed by delay_ns.
CalibrationDemo make_calibration_demo(const DetectorModel& det, std::size_t points,
                                      std::size_t samples_per_point, double delay_ns,
                                      std::uint64_t seed);

struct SweepConfig {
  SweepSettings baseline{};
  SweepSettings countermeasure{};
  double d_max_km = 120.0;
  double step_km = 1.0;

  static SweepConfig defaults();
};

struct SweepResult {
  std::vector<KeyRatePoint> baseline;
  std::vector<KeyRatePoint> countermeasure;
  std::optional<double> max_distance_baseline;
  std::optional<double> max_distance_countermeasure;
};

SweepResult sweep_keyrate(const SweepConfig& cfg);

}  // namespace cvqkd
