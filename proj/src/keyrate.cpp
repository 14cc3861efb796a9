#include "cvqkd/keyrate.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <utility>

#include "cvqkd/error.h"

namespace cvqkd {

namespace {

constexpr double kDiscriminantTol = 1e-9;
constexpr double kBisectLowKm = 0.0;
constexpr double kBisectHighKm = 500.0;
constexpr double kBisectResolutionKm = 0.1;

// Roots of lambda^4 - a*lambda^2 + b = 0, returned as (lambda_1, lambda_2).
std::pair<double, double> symplectic_pair(double a, double b) {
  double disc = a * a - 4.0 * b;
  if (disc < 0.0) {
    if (disc < -kDiscriminantTol * std::max(1.0, a * a))
      throw NumericalDomain("holevo_bound: negative discriminant in symplectic spectrum");
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  const double hi = 0.5 * (a + root);
  // Second root via b/hi avoids cancellation when a^2 >> 4b.
  const double lo = hi > 0.0 ? b / hi : 0.0;
  return {std::sqrt(hi), std::sqrt(std::max(0.0, lo))};
}

double g_of_eigenvalue(double lambda) { return thermal_entropy((lambda - 1.0) / 2.0); }

}  // namespace

void KeyRateParams::validate() const {
  if (!(va >= 0.0)) throw InvalidInput("key rate: V_A must be >= 0");
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) throw InvalidInput("key rate: T must be in [0,1]");
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidInput("key rate: eta must be in (0,1]");
  if (!std::isfinite(xi)) throw InvalidInput("key rate: xi must be finite");
  if (!(v_el >= 0.0)) throw InvalidInput("key rate: v_el must be >= 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidInput("key rate: beta must be in [0,1]");
}

double LinkModel::transmittance(double distance_km) const {
  if (!(loss_db_per_km > 0.0)) throw InvalidInput("link: loss coefficient must be > 0");
  if (!(distance_km >= 0.0)) throw InvalidInput("link: distance must be >= 0");
  return std::pow(10.0, -loss_db_per_km * distance_km / 10.0);
}

double thermal_entropy(double x) {
  if (x <= 0.0) return 0.0;
  return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

double mutual_information(const KeyRateParams& p) {
  p.validate();
  const double T = p.transmittance;
  if (T == 0.0) return 0.0;
  const double V = p.va + 1.0;
  const double chi_line = 1.0 / T - 1.0 + p.xi;
  const double chi_hom = (1.0 + p.v_el) / p.efficiency - 1.0;
  const double chi_tot = chi_line + chi_hom / T;
  // log2((V + chi_tot)/(1 + chi_tot)), kept accurate when chi_tot is large.
  return 0.5 * std::log1p((V - 1.0) / (1.0 + chi_tot)) / std::numbers::ln2;
}

HolevoResult holevo_bound(const KeyRateParams& p) {
  p.validate();
  const double T = p.transmittance;
  if (!(T > 0.0)) throw InvalidInput("holevo_bound: T must be > 0");
  const double V = p.va + 1.0;
  const double chi_line = 1.0 / T - 1.0 + p.xi;
  const double chi_hom = (1.0 + p.v_el) / p.efficiency - 1.0;
  const double chi_tot = chi_line + chi_hom / T;

  const double a = V * V * (1.0 - 2.0 * T) + 2.0 * T + T * T * (V + chi_line) * (V + chi_line);
  const double b = T * T * (V * chi_line + 1.0) * (V * chi_line + 1.0);
  const double sqrt_b = std::sqrt(b);
  const double denom = T * (V + chi_tot);
  const double c = (a * chi_hom + V * sqrt_b + T * (V + chi_line)) / denom;
  const double d = sqrt_b * (V + sqrt_b * chi_hom) / denom;

  const auto [l1, l2] = symplectic_pair(a, b);
  const auto [l3, l4] = symplectic_pair(c, d);
  HolevoResult r;
  r.eigenvalues = {l1, l2, l3, l4};
  r.chi_be = g_of_eigenvalue(l1) + g_of_eigenvalue(l2) - g_of_eigenvalue(l3) - g_of_eigenvalue(l4);
  return r;
}

KeyRateBreakdown secret_key_rate(const KeyRateParams& p) {
  p.validate();
  KeyRateBreakdown out;
  if (p.transmittance == 0.0) return out;
  out.i_ab = mutual_information(p);
  const auto h = holevo_bound(p);
  out.chi_be = h.chi_be;
  out.eigenvalues = h.eigenvalues;
  out.k = p.beta * out.i_ab - out.chi_be;
  return out;
}

double va_for_snr(double snr, double transmittance, double eta, double xi, double v_el) {
  if (!(snr >= 0.0)) throw InvalidInput("va_for_snr: snr must be >= 0");
  const double gain = eta * transmittance;
  if (!(gain > 0.0)) throw Infeasible("va_for_snr: eta*T = 0, no modulation reaches the target");
  return snr * (1.0 + v_el + gain * xi) / gain;
}

void SweepSettings::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidInput("sweep: beta must be in [0,1]");
  if (!(snr_target > 0.0)) throw InvalidInput("sweep: SNR target must be > 0");
  if (!(xi_bob >= 0.0)) throw InvalidInput("sweep: xi_bob must be >= 0");
  if (!(v_el >= 0.0)) throw InvalidInput("sweep: v_el must be >= 0");
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidInput("sweep: eta must be in (0,1]");
  if (!(link.loss_db_per_km > 0.0)) throw InvalidInput("sweep: loss coefficient must be > 0");
  if (!(monitor_fraction >= 0.0 && monitor_fraction < 1.0))
    throw InvalidInput("sweep: monitor fraction must be in [0,1)");
  if (switch_model) switch_model->validate();
}

KeyRatePoint key_rate_at(const SweepSettings& s, double distance_km) {
  s.validate();
  KeyRatePoint pt;
  pt.distance_km = distance_km;
  pt.transmittance = s.link.transmittance(distance_km);
  const double eta = s.switch_model ? effective_eta(s.eta, s.switch_model->loss_db) : s.eta;
  const double xi = s.xi_bob / (eta * pt.transmittance);
  pt.va = va_for_snr(s.snr_target, pt.transmittance, eta, xi, s.v_el);
  pt.rate = secret_key_rate({pt.va, pt.transmittance, eta, xi, s.v_el, s.beta});
  pt.k_effective = pt.rate.k * (1.0 - s.monitor_fraction);
  return pt;
}

std::optional<double> max_secure_distance(const SweepSettings& s) {
  if (key_rate_at(s, kBisectLowKm).k_effective <= 0.0) return std::nullopt;
  if (key_rate_at(s, kBisectHighKm).k_effective > 0.0) return kBisectHighKm;
  double lo = kBisectLowKm;
  double hi = kBisectHighKm;
  while (hi - lo > kBisectResolutionKm) {
    const double mid = 0.5 * (lo + hi);
    if (key_rate_at(s, mid).k_effective > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::vector<KeyRatePoint> sweep_distance(const SweepSettings& s, double d_max_km, double step_km) {
  if (!(step_km > 0.0) || !(d_max_km >= 0.0)) throw InvalidInput("sweep: need step > 0 and d_max >= 0");
  const auto steps = static_cast<std::size_t>(std::floor(d_max_km / step_km + 1e-9));
  std::vector<KeyRatePoint> rows;
  rows.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) rows.push_back(key_rate_at(s, static_cast<double>(i) * step_km));
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<KeyRatePoint>& rows) {
  os << "d_km,T,V_A,i_ab,chi_be,K\n";
  const auto prec = os.precision(17);
  for (const auto& r : rows) {
    os << r.distance_km << ',' << r.transmittance << ',' << r.va << ',' << r.rate.i_ab << ','
       << r.rate.chi_be << ',' << r.k_effective << '\n';
  }
  os.precision(prec);
}

}  // namespace cvqkd
