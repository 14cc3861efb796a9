#pragma once

// Parameter estimation for the normal linear model y = t*x + z on Alice/Bob
// sample pairs, and the closed-form excess-noise bias under the LO
// calibration and intercept-resend attacks.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>

namespace cvqkd {

struct MlEstimates {
  double t_hat = 0.0;
  double sigma2_hat = 0.0;
  double va_hat = 0.0;
  std::size_t m = 0;
  double sum_x2 = 0.0;
  // Set when a sample mean sits more than 5 standard errors from zero; the
  // estimators assume centred variables and do not remove the mean.
  bool x_off_center = false;
  bool y_off_center = false;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double width() const noexcept { return high - low; }
  bool contains(double v) const noexcept { return low <= v && v <= high; }
};

struct ConfidenceBounds {
  Interval t;
  Interval sigma2;
  Interval va;
};

struct ChannelInference {
  double T_hat = 0.0;
  double xi_hat = 0.0;
};

struct EstimationReport {
  MlEstimates estimates;
  double T_hat = 0.0;
  double xi_hat = 0.0;
  double xi_stderr = 0.0;
  ConfidenceBounds intervals;
  double epsilon = 0.0;
  double n0_assumed = 1.0;
};

// Above this sample count the chi-square quantiles use the normal
// approximation (m-1) +/- z*sqrt(2(m-1)).
inline constexpr std::size_t kChi2NormalApproxAbove = 10000;

MlEstimates ml_estimate(std::span<const double> x, std::span<const double> y);

ConfidenceBounds confidence_bounds(const MlEstimates& est, double epsilon);

ChannelInference infer_channel(const MlEstimates& est, double n0_assumed, double eta, double v_el);

// Delta-method standard error of xi_hat = (sigma2 - n0 - v_el)/t^2 using the
// sampling distributions of t_hat and sigma2_hat.
double xi_standard_error(const MlEstimates& est, double n0_assumed, double v_el);

EstimationReport estimate(std::span<const double> x, std::span<const double> y, double n0_assumed,
                          double eta, double v_el, double epsilon);

// Excess noise Alice and Bob report, in N0' units, when the calibration line
// predicts N0' while the true shot noise is N0 = N0'/n0_ratio:
//   (1/r) * [xi + (1 - r)/t2],  r = N0'/N0.
double xi_under_calibration(double xi_true_snu, double n0_ratio, double t2);

// Excess noise after intercept-resend on a fraction mu of pulses (SNU).
double xi_pir(double xi_snu, double mu);

// key=value block, one entry per line.
void write_key_values(std::ostream& os, const EstimationReport& r, const std::string& prefix = "");
std::string estimation_csv_header();
std::string estimation_csv_row(const EstimationReport& r);

}  // namespace cvqkd
