#pragma once

// Per-pulse Monte Carlo of Gaussian-modulated coherent states measured by a
// homodyne detector, under partial intercept-resend plus LO trigger shaping.
// All variances are in shot-noise units of the unattacked detector (N0 = 1).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cvqkd/pulsephys.h"

namespace cvqkd {

struct ChannelParams {
  double va = 4.0;            // modulation variance
  double transmittance = 0.5;
  double efficiency = 0.5;    // homodyne efficiency eta
  double xi = 0.1;            // excess noise referred to channel input
  double v_el = 0.0;
  double n0 = 1.0;            // true shot noise during the run

  void validate() const;
  // eta*T
  double gain() const noexcept { return efficiency * transmittance; }
  // Variance of the additive noise z: N0 + eta*T*xi + v_el.
  double noise_variance() const noexcept { return n0 + gain() * xi + v_el; }
  bool operator==(const ChannelParams&) const = default;
};

struct AttackParams {
  double mu = 0.0;        // intercept-resend fraction
  double nu = 0.0;        // LO-attacked fraction
  double alpha = 1.0;     // LO leading-edge attenuation
  double delay_ns = 0.0;  // trigger delay induced on attacked pulses

  void validate() const;
  bool operator==(const AttackParams&) const = default;
};

struct PulseRecord {
  double x = 0.0;
  double y = 0.0;
  bool intercepted = false;
  bool lo_attacked = false;
  bool monitored = false;
};

// Monitoring pulses see Bob's signal path closed: the channel contribution
// (signal, Eve's noise and excess noise) is scaled by `extinction`.
struct MonitorSpec {
  std::span<const std::uint8_t> mask;
  double extinction = 0.0;
};

struct SimOptions {
  MonitorSpec monitor{};
  unsigned threads = 1;
};

std::vector<double> generate_alice(std::size_t n, double va, std::uint64_t seed,
                                   unsigned threads = 1);

// Detector variance gain on LO-attacked pulses, g(window + delay).
double attacked_gain(const AttackParams& atk, const DetectorModel& det);

std::vector<PulseRecord> simulate_bob(std::span<const double> x, const ChannelParams& ch,
                                      const AttackParams& atk, const DetectorModel& det,
                                      std::uint64_t seed, const SimOptions& opts = {});

// Trigger delay produced by attenuating the first edge_ns of the LO pulse by
// atk.alpha with power preserved. Returns atk with delay_ns filled in.
AttackParams with_pulse_delay(AttackParams atk, const Waveform& lo_pulse, double edge_ns,
                              const TriggerConfig& trig, const PowerMeterConfig& pm);

// Population moments of the simulated model, used as closed-form references.
struct PopulationMoments {
  double var_y;
  double cov_xy;
  double mean_gain;       // E[g]
  double mean_sqrt_gain;  // E[sqrt g]
};
PopulationMoments population_moments(const ChannelParams& ch, const AttackParams& atk,
                                     const DetectorModel& det);

// CSV columns: index,x,y,intercepted,lo_attacked
void write_pulse_csv(std::ostream& os, std::span<const PulseRecord> records);

}  // namespace cvqkd
