#pragma once

// Local-oscillator pulse physics: sampled intensity traces, clock-trigger
// generation, LO power measurement, homodyne gain versus trigger timing and
// the shot-noise/power calibration line.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cvqkd {

/// Sampled LO intensity trace. Sample i sits at t0 + i*dt and covers dt.
class Waveform {
 public:
  Waveform(std::vector<double> samples, double dt_ns, double t0_ns = 0.0);

  const std::vector<double>& samples() const noexcept { return samples_; }
  double dt() const noexcept { return dt_; }
  double t0() const noexcept { return t0_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double duration() const noexcept { return static_cast<double>(samples_.size()) * dt_; }
  double time_at(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }

  Waveform scaled(double factor) const;

  bool operator==(const Waveform&) const = default;

 private:
  std::vector<double> samples_;
  double dt_;
  double t0_;
};

enum class TriggerKind { kThreshold, kDifferential };

// kThreshold (U1): fires when s(t - r) > threshold.
// kDifferential (U2): fires when s(t - r) - s(t - r - pulse_duration) > 0.
struct TriggerConfig {
  TriggerKind kind = TriggerKind::kThreshold;
  double threshold = 0.5;
  double delay_ns = 0.0;
  double pulse_duration_ns = 100.0;

  void validate() const;
};

// Exponentially weighted trailing-window integrator. decay_base = 1 gives a
// plain integral over the window.
struct PowerMeterConfig {
  double window_ns = 100.0;
  double decay_base = 1.0;

  void validate() const;
};

// Discharge constant for which a trigger `delay_ns` past the end of the
// integration window reduces the variance gain by 1/ratio.
double discharge_tau_for_ratio(double delay_ns, double ratio);

struct DetectorModel {
  double window_ns = 100.0;
  double tau_ns = discharge_tau_for_ratio(10.0, 1.5);
  double slope_cal = 1.0;
  double v_el = 0.0;

  void validate() const;
  bool operator==(const DetectorModel&) const = default;
};

struct CalibrationLine {
  double slope = 1.0;
  double intercept = 0.0;
  // Standard errors from the least-squares fit; zero for lines built by hand.
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;

  double predict(double power) const noexcept { return slope * power + intercept; }
  // Variance attributable to shot noise alone (electronic floor removed).
  double shot_noise(double power) const noexcept { return slope * power; }
};

struct CalibrationPoint {
  double power;
  double variance;
};

double measure_power(const Waveform& w, const PowerMeterConfig& cfg);

// Time (ns) of the first sample satisfying the trigger predicate, plus the
// configured delay. Samples before t0 are treated as zero intensity.
std::optional<double> trigger_time(const Waveform& w, const TriggerConfig& cfg);

// Variance gain of the homodyne integrator sampled at t_m ns after the pulse
// start: quadratic ramp up to the window end, exponential discharge after.
double detector_gain(double t_m_ns, const DetectorModel& det);

CalibrationLine fit_calibration_line(std::span<const CalibrationPoint> points);

// Synthetic lab calibration: at each LO power, `samples_per_point` vacuum
// homodyne outputs are drawn with variance g*(slope_cal*P + v_el), where g is
// the gain for a trigger `trigger_delay_ns` after the window end.
std::vector<CalibrationPoint> simulate_calibration(const DetectorModel& det,
                                                   std::span<const double> powers,
                                                   std::size_t samples_per_point,
                                                   double trigger_delay_ns,
                                                   std::uint64_t seed);

// Scales samples in [t0, t0 + edge_ns) by alpha. With preserve_power the
// remaining samples are rescaled so measure_power is unchanged.
Waveform attenuate_leading_edge(const Waveform& w, double alpha, double edge_ns,
                                bool preserve_power, const PowerMeterConfig& pm);

// Grid search over (alpha, edge length) for a power-preserving reshaping
// that delays the trigger by at least shift_ns.
Waveform craft_equal_power_pulse(const Waveform& base, double shift_ns,
                                 const TriggerConfig& trig, const PowerMeterConfig& pm);

// Trapezoidal LO pulse used by the demos: zero padding, linear rise, flat top,
// linear fall, zero padding.
Waveform make_trapezoid_pulse(double dt_ns, double pad_ns, double rise_ns, double flat_ns,
                              double fall_ns, double amplitude = 1.0);

}  // namespace cvqkd
