#pragma once

// Real-time shot-noise measurement: a switch on Bob's signal path blocks a
// random subset of pulses, or a second homodyne detector watches the LO.
// Either way two variances give shot noise and signal noise separately.

#include <cstdint>
#include <span>
#include <vector>

namespace cvqkd {

struct MonitorPlan {
  std::vector<std::uint8_t> mask;  // 1 = monitoring pulse (signal path closed)
  double fraction = 0.0;

  std::size_t count() const noexcept;
};

struct SwitchModel {
  double loss_db = 2.7;
  double extinction = 0.0;  // residual signal-variance transmission when closed

  void validate() const;
  bool operator==(const SwitchModel&) const = default;
};

struct ShotNoiseEstimate {
  double n0_rt = 0.0;
  double s_rt = 0.0;
  std::size_t m_open = 0;
  std::size_t m_closed = 0;
};

struct SecondDetectorEstimate {
  double n0 = 0.0;
  bool below_electronic_floor = false;
};

struct AttackDecision {
  bool alarm = false;
  double statistic = 0.0;
};

MonitorPlan plan_monitor(std::size_t n, double fraction, std::uint64_t seed);

// Solves var_open = S + N0 + v_el, var_closed = extinction*S + N0 + v_el.
ShotNoiseEstimate realtime_shot_noise(double var_open, double var_closed, double extinction,
                                      double v_el);

// Same, from raw centred samples; variances are mean squares.
ShotNoiseEstimate realtime_shot_noise(std::span<const double> y_open,
                                      std::span<const double> y_closed, double extinction,
                                      double v_el);

// N0 on the main detector's scale from the dedicated LO-path detector.
SecondDetectorEstimate second_hd_shot_noise(double var_hd2, double kappa, double v_el2);

double effective_eta(double eta, double loss_db);

// One-sided test of the calibration-line shot noise against the real-time
// measurement; se = n0_rt*sqrt(2/m_monitor).
AttackDecision detect_attack(double n0_rt, double n0_line, std::size_t m_monitor,
                             double z_threshold);

}  // namespace cvqkd
