#pragma once

// Asymptotic collective-attack key rate for Gaussian-modulated coherent
// states with homodyne detection and reverse reconciliation, in the
// trusted-detector model (eta and v_el calibrated, not attributed to Eve).

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cvqkd/countermeasure.h"

namespace cvqkd {

struct KeyRateParams {
  double va = 1.0;
  double transmittance = 1.0;
  double efficiency = 1.0;
  double xi = 0.0;  // channel-input referred
  double v_el = 0.0;
  double beta = 1.0;

  void validate() const;
};

struct LinkModel {
  double loss_db_per_km = 0.2;

  double transmittance(double distance_km) const;
};

struct HolevoResult {
  double chi_be = 0.0;
  std::array<double, 4> eigenvalues{1.0, 1.0, 1.0, 1.0};
};

struct KeyRateBreakdown {
  double i_ab = 0.0;
  double chi_be = 0.0;
  double k = 0.0;
  std::array<double, 4> eigenvalues{1.0, 1.0, 1.0, 1.0};
};

// Von Neumann entropy contribution of a thermal mode with mean photon number x.
double thermal_entropy(double x);

double mutual_information(const KeyRateParams& p);
HolevoResult holevo_bound(const KeyRateParams& p);
KeyRateBreakdown secret_key_rate(const KeyRateParams& p);

// Modulation variance giving snr = eta*T*V_A / (1 + v_el + eta*T*xi).
double va_for_snr(double snr, double transmittance, double eta, double xi, double v_el);

// Distance-sweep setup: V_A follows the SNR target at every distance and the
// excess noise is fixed on Bob's side (eta*T*xi = xi_bob).
struct SweepSettings {
  double beta = 0.948;
  double snr_target = 0.075;
  double xi_bob = 0.001;
  double v_el = 0.01;
  double eta = 0.6;
  LinkModel link{};
  double monitor_fraction = 0.0;
  std::optional<SwitchModel> switch_model{};

  void validate() const;
};

struct KeyRatePoint {
  double distance_km = 0.0;
  double transmittance = 0.0;
  double va = 0.0;
  KeyRateBreakdown rate;
  // Rate after the monitoring-pulse penalty, bits per sent pulse.
  double k_effective = 0.0;
};

KeyRatePoint key_rate_at(const SweepSettings& s, double distance_km);

// Largest distance with positive key rate, by bisection on [0, 500] km to
// 0.1 km. nullopt when no key is possible even at zero distance.
std::optional<double> max_secure_distance(const SweepSettings& s);

std::vector<KeyRatePoint> sweep_distance(const SweepSettings& s, double d_max_km, double step_km);

// Columns: d_km,T,V_A,i_ab,chi_be,K
void write_sweep_csv(std::ostream& os, const std::vector<KeyRatePoint>& rows);

}  // namespace cvqkd
